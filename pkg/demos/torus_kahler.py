# flat 4-torus with its standard Kahler pair: Hodge diamond and Kahler identities

import numpy as np

from gengeo.frame import abelian_frame, betti_numbers
from gengeo.hodge import BISpace, hodge_diamond, kahler_identities_check, pq_grading, split_dh
from gengeo.structures import gk_validate, kahler_pair

J = np.zeros((4, 4), dtype=int)
J[0, 2] = J[1, 3] = 1   # e1 -> -e3, e2 -> -e4
J[2, 0] = J[3, 1] = -1

frame = abelian_frame(4)
pair = kahler_pair(J, J)  # complex J and symplectic omega = J, so g = J^T omega = I
print(gk_validate(pair, frame))

space = BISpace(frame, pair.metric())
grading = pq_grading(pair)
print("dims of U^{p,q}:", dict(sorted(grading.dims().items())))

split = split_dh(grading, space.dH())
for name, r in kahler_identities_check(space, split).items():
    print(f"{name:32s} {r:.2e}")

rep = hodge_diamond(pair, space, grading)
for q in range(2, -3, -1):
    print(f"q={q:+d}", " ".join(f"{rep.dims.get((p, q), 0) if abs(p) + abs(q) <= 2 and (p + q) % 2 == 0 else ' '}"
                            for p in range(-2, 3)))
print("total", rep.total, "conjugation symmetric", rep.conjugation_symmetric())
print(rep.flags)
print("Betti numbers", betti_numbers(frame), "sum", sum(betti_numbers(frame)))
