import itertools
import random
from math import comb

import numpy as np
import pytest

from helpers import rand_antisym, rotation_J, torus_J
from gengeo.frame import FrameSpec, abelian_frame, apply_d, kodaira_thurston_frame
from gengeo.linalg import exact_array, eye, is_positive_definite
from gengeo.multilinear import split_pairing, two_form
from gengeo.scalars import I, mpq
from gengeo.structures import (
    GCStructure,
    GKPair,
    b_transform,
    check_integrability,
    eigenbundle,
    from_complex,
    from_symplectic,
    gen_metric,
    gk_validate,
    is_isotropic,
    kahler_pair,
    metric_from_involution,
    type_of,
)

HYPERELLIPTIC = [(4, 1, 2, 1), (4, 2, 1, -1)]


def _all_rotations(m):
    """Orthogonal complex structures permuting the basis up to sign."""
    out = []
    idx = list(range(1, m + 1))
    seen = set()
    for perm in itertools.permutations(idx):
        pairs = tuple((perm[2 * k], perm[2 * k + 1]) for k in range(m // 2))
        key = frozenset(pairs)
        if key in seen:
            continue
        seen.add(key)
        out.append(pairs)
    return out


def test_validation_errors():
    with pytest.raises(ValueError, match="square to -1"):
        GCStructure(eye(8))
    with pytest.raises(ValueError, match="degenerate"):
        from_symplectic(np.zeros((4, 4), dtype=int))
    with pytest.raises(ValueError):
        from_complex(np.eye(4, dtype=int))


@pytest.mark.parametrize("builder,expected_type", [(from_complex, 2), (from_symplectic, 0)])
def test_spin_spectrum(builder, expected_type):
    J = builder(torus_J())
    assert type_of(J) == expected_type
    S = J.spin().to_array()
    eig = np.round(np.linalg.eigvals(S).imag).astype(int)
    assert np.allclose(np.linalg.eigvals(S).real, 0)
    n = 2
    for k in range(-n, n + 1):
        assert np.sum(eig == k) == comb(2 * n, n + k)


def test_eigenbundle_is_maximal_isotropic():
    for J in (from_complex(torus_J()), from_symplectic(torus_J())):
        E = eigenbundle(J)
        assert len(E) == 4 and is_isotropic(E)
        for v in E:
            assert J.apply(v) == v * I


def _nijenhuis_zero(frame: FrameSpec, J: np.ndarray) -> bool:
    c = np.array(frame.structure_constants.tolist(), dtype=float)
    m = frame.dim
    Jf = J.astype(float)

    def br(x, y):
        return np.einsum("i,j,ijk->k", x, y, c)

    for a in range(m):
        for b in range(m):
            X, Y = np.eye(m)[a], np.eye(m)[b]
            N = br(Jf @ X, Jf @ Y) - Jf @ br(Jf @ X, Y) - Jf @ br(X, Jf @ Y) - br(X, Y)
            if np.linalg.norm(N) > 1e-12:
                return False
    return True


@pytest.mark.parametrize("brackets", [[(1, 2, 3, 1)], HYPERELLIPTIC], ids=["kt", "hyperelliptic"])
def test_complex_integrability_matches_nijenhuis(brackets):
    frame = FrameSpec.from_brackets(4, brackets)
    results = set()
    for pairs in _all_rotations(4):
        for signs in itertools.product((1, -1), repeat=2):
            pp = [(a, b) if s > 0 else (b, a) for (a, b), s in zip(pairs, signs)]
            J = rotation_J(4, pp)
            expect = _nijenhuis_zero(frame, J)
            assert check_integrability(from_complex(J), frame).integrable == expect
            results.add(expect)
    assert results == {True, False}


def test_symplectic_integrability_is_closedness():
    kt = kodaira_thurston_frame()
    rng = random.Random(7)
    seen = set()
    for _ in range(30):
        w = rand_antisym(rng, 4)
        if rng.random() < 0.5:
            w[0, 1] = w[1, 0] = w[0, 3] = w[3, 0] = w[1, 3] = w[3, 1] = mpq(0)
            w[2, 3], w[3, 2] = mpq(0), mpq(0)
        try:
            J = from_symplectic(w)
        except ValueError:
            continue
        closed = apply_d(kt, two_form(w)).is_zero()
        assert check_integrability(J, kt).integrable == closed
        seen.add(closed)
    assert seen == {True, False}


def _h03_zero(J: np.ndarray, H: dict, m: int) -> bool:
    """Vanishing of H on three vectors of T_{0,1} (eigenvalue -i of J)."""
    w, V = np.linalg.eig(J.astype(float))
    T01 = V[:, np.isclose(w, -1j)]
    Hm = np.zeros((m, m, m))
    for (i, j, k), x in H.items():
        for p in itertools.permutations(range(3)):
            idx = [(i, j, k)[t] for t in p]
            sign = 1 if list(p) in ([0, 1, 2], [1, 2, 0], [2, 0, 1]) else -1
            Hm[idx[0], idx[1], idx[2]] = sign * x
    vals = np.einsum("ijk,ia,jb,kc->abc", Hm, T01, T01, T01)
    return np.linalg.norm(vals) < 1e-12


def test_twisted_complex_integrability_matches_h03():
    frame = abelian_frame(6, H=[(1, 2, 3, 1)])
    seen = set()
    for pairs in ([(1, 2), (3, 4), (5, 6)], [(1, 4), (2, 5), (3, 6)], [(1, 2), (3, 5), (4, 6)], [(1, 3), (2, 4), (5, 6)]):
        J = rotation_J(6, pairs)
        expect = _h03_zero(J, {(0, 1, 2): 1.0}, 6)
        assert check_integrability(from_complex(J), frame).integrable == expect
        seen.add(expect)
    assert seen == {True, False}


def test_generalized_metric():
    rng = random.Random(3)
    g = exact_array([[2, 1, 0, 0], [1, 2, 0, 0], [0, 0, 1, 0], [0, 0, 0, 3]])
    b = rand_antisym(rng, 4)
    met = gen_metric(g, b)
    G = met.G
    assert np.all(G.dot(G) == eye(8))
    assert np.all(G == met.three_factor())
    assert is_positive_definite(met.metric_form() * 2)
    for v in met.c_plus():
        assert split_pairing(v, v) > 0
    for v in met.c_minus():
        assert split_pairing(v, v) < 0
    back = metric_from_involution(G)
    assert np.all(back.g == g) and np.all(back.b == b)
    # <G X, X> restricted to T is the induced metric
    assert np.all(met.metric_form()[:4, :4] * 2 == met.induced_metric())
    assert is_positive_definite(met.induced_metric())
    with pytest.raises(ValueError):
        gen_metric(exact_array([[1, 2], [2, 1]]))


def test_torus_kahler_pair():
    pair = kahler_pair(torus_J(), torus_J())
    rep = gk_validate(pair, abelian_frame(4))
    assert rep.ok, rep.lines()
    assert pair.types() == (2, 0)
    met = pair.metric()
    assert np.all(met.g == eye(4)) and not np.any(met.b != 0)


def test_pair_on_kodaira_thurston_fails():
    rep = gk_validate(kahler_pair(torus_J(), torus_J()), kodaira_thurston_frame())
    assert not rep["J1 integrable"].passed
    assert rep["J1 J2 = J2 J1"].passed


def test_hyperelliptic_kahler_pair():
    frame = FrameSpec.from_brackets(4, HYPERELLIPTIC)
    J = rotation_J(4, [(1, 2), (3, 4)])
    assert gk_validate(kahler_pair(J, J), frame).ok


def test_b_transform():
    rng = random.Random(9)
    bp = rand_antisym(rng, 4)
    pair = b_transform(kahler_pair(torus_J(), torus_J()), bp)
    rep = gk_validate(pair, abelian_frame(4))
    assert rep.ok
    met = pair.metric()
    assert np.all(met.g == eye(4)) and np.all(met.b == bp)
    assert pair.types() == (2, 0)


def test_non_commuting_pair_rejected():
    J1 = from_complex(torus_J())
    J2 = from_complex(rotation_J(4, [(1, 2), (3, 4)]))
    rep = gk_validate(GKPair(J1, J2), abelian_frame(4))
    assert not rep["J1 J2 = J2 J1"].passed or not rep["-J1 J2 is a generalized metric"].passed
