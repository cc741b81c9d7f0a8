# deformation complex of generalized complex structures

import numpy as np

from gengeo.deformation import build_complex, cohomology_dims, decompose_h2_complex_case, deformation_report
from gengeo.frame import FrameSpec, abelian_frame
from gengeo.structures import from_complex, from_symplectic

J = np.array([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]])

# complex torus: d_E = 0, every cochain is a class
torus = abelian_frame(4)
cx = build_complex(from_complex(J), torus)
print("H^k(E):", cohomology_dims(cx))
print("H^2 = H0(wedge2 T) + H1(T) + H2(O):", decompose_h2_complex_case(from_complex(J), torus))

# symplectic type sees de Rham cohomology instead
print("symplectic:", cohomology_dims(build_complex(from_symplectic(J), torus)))

# a hyperelliptic frame: [e4, e1] = e2, [e4, e2] = -e1
hyp = FrameSpec.from_brackets(4, [(4, 1, 2, 1), (4, 2, 1, -1)])
print(deformation_report(from_complex(J), hyp))
