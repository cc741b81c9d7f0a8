# twisting by a closed 3-form, and B-field gauge freedom

import random

import numpy as np

from gengeo.frame import abelian_frame, ce_differential, kodaira_thurston_frame, twisted_betti
from gengeo.hodge import BISpace, laplacian
from gengeo.multilinear import FormSpinor, two_form
from gengeo.structures import check_integrability, from_complex, gen_metric

flat = abelian_frame(6, H=[(1, 2, 3, 1)])  # H = e123
print("twisted Betti (even, odd):", twisted_betti(flat))

# which complex structures survive the twist depends on the (0,3) part of H
for pairs in ([(0, 1), (2, 3), (4, 5)], [(0, 3), (1, 4), (2, 5)]):
    J = np.zeros((6, 6), dtype=int)
    for a, b in pairs:
        J[b, a], J[a, b] = 1, -1
    print(pairs, "integrable:", bool(check_integrability(from_complex(J), flat)))

# (g, b, H) -> (g, b + b', H - db') leaves the harmonic dimensions alone
kt = kodaira_thurston_frame(H=[(1, 3, 4, 1)])
met = gen_metric(np.eye(4, dtype=int))
print("harmonic:", laplacian(BISpace(kt, met)).parity_dims)
rng = random.Random(0)
d = ce_differential(kt)
for _ in range(3):
    bp = np.zeros((4, 4), dtype=object)
    bp[2, 3] = rng.randint(1, 5)
    bp[3, 2] = -bp[2, 3]
    dbp = FormSpinor(4, d.apply(two_form(bp).coeffs))
    moved = kt.with_H(kt.H - dbp)
    print("  b' =", bp[2, 3], "e34 ->", laplacian(BISpace(moved, met.transform(bp))).parity_dims)
