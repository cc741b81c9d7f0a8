# Kodaira-Thurston nilmanifold: complex, symplectic, but never Kahler

import numpy as np

from gengeo.frame import betti_numbers, kodaira_thurston_frame
from gengeo.hodge import BISpace, ddj_check, laplacian, lefschetz_check
from gengeo.structures import check_integrability, from_complex, from_symplectic

kt = kodaira_thurston_frame(g=np.eye(4, dtype=int))  # [e1, e2] = e3
print("Betti", betti_numbers(kt))                   # b1 = 3 is odd
print("harmonic", laplacian(BISpace(kt)).degree_dims)

omega = np.array([[0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, -1, 0, 0]])  # e13 + e24, closed
J = np.array([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]])

for S in (from_symplectic(omega, "omega"), from_complex(J, "J")):
    print(S.name, "integrable:", bool(check_integrability(S, kt)))
    print(ddj_check(S, kt))

# omega ^ . : H^1 -> H^3 drops rank, so hard Lefschetz fails
print(lefschetz_check(omega, kt))
