import random

import numpy as np
import pytest

import oracles
from helpers import from_tuples, rand_form, to_tuples
from gengeo.frame import (
    FrameSpec,
    InvalidFrameError,
    abelian_frame,
    apply_d,
    betti_numbers,
    bracket_symmetry_check,
    ce_differential,
    courant_bracket,
    derived_bracket,
    dorfman_bracket,
    frame_automorphism_check,
    kodaira_thurston_frame,
    twisted_betti,
    twisted_d,
    validate_frame,
)
from gengeo.multilinear import FormSpinor, GeneralizedVector, two_form
from gengeo.scalars import mpq

KT = [(1, 2, 3, 1)]
HYPERELLIPTIC = [(4, 1, 2, 1), (4, 2, 1, -1)]
IWASAWA = [(1, 3, 5, -1), (2, 4, 5, 1), (1, 4, 6, -1), (2, 3, 6, -1)]


@pytest.mark.parametrize("m,brackets", [(4, KT), (4, HYPERELLIPTIC), (6, IWASAWA)])
def test_ce_differential_matches_oracle(m, brackets):
    frame = FrameSpec.from_brackets(m, brackets)
    c = oracles.structure_constants(m, brackets)
    rng = random.Random(m)
    for _ in range(10):
        a = rand_form(rng, m)
        assert to_tuples(apply_d(frame, a)) == oracles.ce_d(c, to_tuples(a))


def test_kodaira_thurston_differential():
    kt = kodaira_thurston_frame()
    assert apply_d(kt, FormSpinor.basis(4, 3)) == -FormSpinor.basis(4, 1, 2)
    assert (ce_differential(kt) @ ce_differential(kt)).is_zero()


@pytest.mark.parametrize("m,brackets,expect", [
    (4, [], [1, 4, 6, 4, 1]),
    (4, KT, [1, 3, 4, 3, 1]),
    (4, HYPERELLIPTIC, [1, 2, 2, 2, 1]),
    (6, IWASAWA, None),
])
def test_betti_numbers_match_oracle(m, brackets, expect):
    frame = FrameSpec.from_brackets(m, brackets)
    oracle = oracles.betti(oracles.structure_constants(m, brackets), m)
    assert betti_numbers(frame) == oracle
    if expect is not None:
        assert oracle == expect


def test_twisted_betti_matches_oracle():
    frame = abelian_frame(4, H=[(1, 2, 3, 1)])
    H = {(0, 1, 2): oracles.Fraction(1)}
    assert twisted_betti(frame) == oracles.twisted_betti(oracles.structure_constants(4, []), H, 4) == (6, 6)
    kt = kodaira_thurston_frame(H=[(1, 3, 4, 1)])
    c = oracles.structure_constants(4, KT)
    assert twisted_betti(kt) == oracles.twisted_betti(c, {(0, 2, 3): oracles.Fraction(1)}, 4)


def _frames():
    return [
        abelian_frame(4),
        abelian_frame(6, H=[(1, 2, 3, 1)]),
        kodaira_thurston_frame(),
    ]


@pytest.mark.parametrize("frame", _frames(), ids=lambda f: f.name)
def test_dorfman_equals_derived_bracket(frame):
    basis = GeneralizedVector.basis(frame.dim)
    for u in basis:
        for v in basis:
            assert dorfman_bracket(u, v, frame) == derived_bracket(u, v, frame)


def test_flux_term_sign():
    frame = abelian_frame(6, H=[(1, 2, 3, 1)])
    d1, d2 = GeneralizedVector.vector(6, 1), GeneralizedVector.vector(6, 2)
    w = dorfman_bracket(d1, d2, frame)
    assert w == GeneralizedVector.covector(6, 3, -1)


def test_dorfman_on_constants():
    rng = random.Random(2)
    kt = kodaira_thurston_frame(H=[(1, 3, 4, 1)])
    for _ in range(10):
        u = GeneralizedVector(*(tuple(mpq(rng.randint(-2, 2)) for _ in range(4)) for _ in range(2)))
        v = GeneralizedVector(*(tuple(mpq(rng.randint(-2, 2)) for _ in range(4)) for _ in range(2)))
        assert dorfman_bracket(u, v, kt) == -dorfman_bracket(v, u, kt)
        assert courant_bracket(u, v, kt) == dorfman_bracket(u, v, kt)
        assert dorfman_bracket(u, u, kt).is_zero()


def test_closed_B_is_symmetry():
    kt = kodaira_thurston_frame()
    B = np.zeros((4, 4), dtype=int)
    B[0, 1], B[1, 0] = 1, -1  # e12 is closed
    res = bracket_symmetry_check(kt, B)
    assert res.closed and res.intertwines and res.automorphism


def test_nonclosed_B_shifts_twist():
    kt = kodaira_thurston_frame()
    B = np.zeros((4, 4), dtype=int)
    B[2, 3], B[3, 2] = 1, -1
    res = bracket_symmetry_check(kt, B)
    assert res.dB == FormSpinor.basis(4, 1, 2, 4, coeff=-1)
    assert res.dB == apply_d(kt, two_form(B))
    assert res.intertwines and not res.closed and not res.automorphism


def test_frame_automorphism():
    kt = kodaira_thurston_frame()
    phi = np.diag([2, 1, 2, 1])  # e1 -> 2e1, e3 -> 2e3 respects [e1, e2] = e3
    rep = frame_automorphism_check(kt, phi)
    assert rep.ok, rep.lines()
    bad = frame_automorphism_check(kt, np.diag([2, 1, 1, 1]))
    assert not bad["Lie algebra automorphism"].passed


def test_validate_reports_witnesses():
    bad = FrameSpec.from_brackets(4, [(1, 2, 3, 1), (3, 1, 1, 1)])
    rep = validate_frame(bad)
    assert not rep["jacobi"].passed and "e1" in rep["jacobi"].detail
    with pytest.raises(InvalidFrameError, match="Jacobi"):
        ce_differential(bad)
    nonuni = FrameSpec.from_brackets(2, [(1, 2, 2, 1)])
    rep = validate_frame(nonuni)
    assert not rep["unimodular"].passed and "tr ad(e1)" in rep["unimodular"].detail
    assert validate_frame(kodaira_thurston_frame()).ok


def test_twisted_d_requires_closed_H():
    frame = FrameSpec.from_brackets(6, [(1, 2, 3, 1)], H=[(3, 4, 5, 1)])
    assert not validate_frame(frame)["dH = 0"].passed
    with pytest.raises(InvalidFrameError):
        twisted_d(frame)
    ok = abelian_frame(4, H=[(1, 2, 3, 1)])
    D = twisted_d(ok)
    assert (D @ D).is_zero()


def test_frame_construction_errors():
    with pytest.raises(InvalidFrameError):
        FrameSpec.from_brackets(3, [])
    with pytest.raises(InvalidFrameError):
        FrameSpec.from_brackets(4, [(1, 5, 2, 1)])
    with pytest.raises(InvalidFrameError):
        FrameSpec(4, np.zeros((4, 4, 4), dtype=int), FormSpinor.basis(4, 1, 2))
