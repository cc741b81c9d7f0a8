"""Acceptance criteria, one PASS/FAIL line each.

Run under pytest (the lines appear in the terminal summary) or directly:
``python tests/test_acceptance.py``.
"""

import contextlib
import io
import json
import random
import sys
from fractions import Fraction
from math import comb
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))

import oracles  # noqa: E402
from helpers import rand_antisym, rand_form, rand_q, rand_square, rand_vector, to_tuples, torus_J  # noqa: E402
from gengeo import cli  # noqa: E402
from gengeo.deformation import build_complex, change_basis, cohomology_dims, decompose_h2_complex_case  # noqa: E402
from gengeo.frame import (  # noqa: E402
    abelian_frame,
    apply_d,
    bracket_symmetry_check,
    ce_differential,
    derived_bracket,
    dorfman_bracket,
    kodaira_thurston_frame,
)
from gengeo.hodge import (  # noqa: E402
    BISpace,
    bi_volume,
    ddj_check,
    dh_adjoint,
    hodge_diamond,
    kahler_identities_check,
    laplacian,
    lefschetz_check,
    parity_corollary,
    pq_grading,
    split_dh,
)
from gengeo.linalg import exact_array, rank  # noqa: E402
from gengeo.multilinear import (  # noqa: E402
    FormSpinor,
    GeneralizedVector,
    SoElement,
    clifford_act,
    group_exp,
    mukai_pairing,
    spin_rep,
    split_pairing,
    two_form,
)
from gengeo.scalars import GaussianRational  # noqa: E402
from gengeo.structures import from_complex, from_symplectic, gen_metric, gk_validate, kahler_pair  # noqa: E402

TOL = 1e-9
CASES = 200
RESULTS: list[str] = []


def record(number: int, title: str, ok: bool, detail: str = "") -> bool:
    line = f"{'PASS' if ok else 'FAIL'}  criterion {number}: {title}"
    if detail:
        line += f"  [{detail}]"
    RESULTS.append(line)
    print(line)
    return ok


def frac(x):
    return Fraction(int(x.numerator), int(x.denominator))


# 1 -------------------------------------------------------------------------


def criterion_1() -> bool:
    rng = random.Random(2024)
    bad = {"clifford": 0, "spin": 0, "mukai": 0, "e^B": 0}
    for n in range(CASES):
        m = 2 + n % 4
        v, rho = rand_vector(rng, m), rand_form(rng, m)
        if clifford_act(v, clifford_act(v, rho)) != rho * split_pairing(v, v):
            bad["clifford"] += 1
        # the oracle action must agree as well
        X, xi = [frac(x) for x in v.X], [frac(x) for x in v.xi]
        if to_tuples(clifford_act(v, rho)) != oracles.clifford(X, xi, to_tuples(rho)):
            bad["clifford"] += 1

        k = 2 + n % 2
        Q1 = SoElement(rand_square(rng, k), rand_antisym(rng, k), rand_antisym(rng, k))
        Q2 = SoElement(rand_square(rng, k), rand_antisym(rng, k), rand_antisym(rng, k))
        M = Q1.to_matrix().dot(Q2.to_matrix()) - Q2.to_matrix().dot(Q1.to_matrix())
        if spin_rep(SoElement.from_matrix(M)) != spin_rep(Q1).commutator(spin_rep(Q2)):
            bad["spin"] += 1

        a, b = rand_form(rng, m), rand_form(rng, m)
        sign = (-1) ** (m * (m - 1) // 2)
        val = mukai_pairing(a, b)
        if mukai_pairing(b, a) != sign * val or val != oracles.mukai(to_tuples(a), to_tuples(b), m):
            bad["mukai"] += 1

        B = rand_antisym(rng, m)
        E = group_exp(SoElement.from_B(B))
        ea, eb = FormSpinor(m, E.apply(a.coeffs)), FormSpinor(m, E.apply(b.coeffs))
        Bq = [[frac(x) for x in row] for row in B]
        if to_tuples(ea) != oracles.wedge(oracles.exp_form(Bq), to_tuples(a)) or mukai_pairing(ea, eb) != val:
            bad["e^B"] += 1
    return record(1, f"Clifford/spin/Mukai/e^B exactness, {CASES} cases each", not any(bad.values()),
                  ", ".join(f"{k} failures {v}" for k, v in bad.items()))


# 2 -------------------------------------------------------------------------


def criterion_2() -> bool:
    frames = [abelian_frame(4), abelian_frame(6, H=[(1, 2, 3, 1)]), kodaira_thurston_frame()]
    pairs = bad = 0
    for frame in frames:
        basis = GeneralizedVector.basis(frame.dim)
        for u in basis:
            for v in basis:
                pairs += 1
                bad += dorfman_bracket(u, v, frame) != derived_bracket(u, v, frame)
    return record(2, "Dorfman bracket equals derived bracket", bad == 0, f"{pairs} basis pairs, {bad} mismatches")


# 3 -------------------------------------------------------------------------


def criterion_3() -> bool:
    kt = kodaira_thurston_frame()
    closed = np.zeros((4, 4), dtype=int)
    closed[0, 1], closed[1, 0] = 1, -1
    r1 = bracket_symmetry_check(kt, closed)
    B = np.zeros((4, 4), dtype=int)
    B[2, 3], B[3, 2] = 1, -1
    r2 = bracket_symmetry_check(kt, B)
    c = oracles.structure_constants(4, [(1, 2, 3, 1)])
    dB_oracle = oracles.ce_d(c, {(2, 3): Fraction(1)})
    ok = (
        r1.closed and r1.automorphism and r1.intertwines
        and r2.intertwines and not r2.closed
        and to_tuples(r2.dB) == dB_oracle
        and r2.dB == apply_d(kt, two_form(B))
    )
    return record(3, "closed B preserves the bracket; B = e34 on KT shifts the twist by dB", ok,
                  f"dB = {dict(sorted(dB_oracle.items()))}")


# 4 -------------------------------------------------------------------------


def criterion_4() -> bool:
    torus = abelian_frame(4, g=np.eye(4, dtype=int))
    kt = kodaira_thurston_frame(g=np.eye(4, dtype=int))
    space = BISpace(torus)
    adj_err = float(np.linalg.norm(dh_adjoint(space) - dh_adjoint(space, method="gram")))
    kspace = BISpace(kt)
    adj_err = max(adj_err, float(np.linalg.norm(dh_adjoint(kspace) - dh_adjoint(kspace, method="gram"))))
    skew = BISpace(kt, gen_metric([[2, 1, 0, 0], [1, 2, 0, 0], [0, 0, 3, 1], [0, 0, 1, 1]],
                                  [[0, 1, 0, 2], [-1, 0, 1, 0], [0, -1, 0, 1], [-2, 0, -1, 0]]))
    adj_err = max(adj_err, float(np.linalg.norm(dh_adjoint(skew) - dh_adjoint(skew, method="gram"))))
    k_torus = laplacian(space).degree_dims
    k_kt = laplacian(kspace).degree_dims
    oracle_torus = tuple(oracles.betti(oracles.structure_constants(4, []), 4))
    oracle_kt = tuple(oracles.betti(oracles.structure_constants(4, [(1, 2, 3, 1)]), 4))

    rng = random.Random(7)
    vol_err = star_err = 0.0
    for n in range(50):
        m = 4 if n % 2 else 2
        A = np.array([[rng.randint(-2, 2) for _ in range(m)] for _ in range(m)], dtype=object)
        g = exact_array(A.T.dot(A) + np.eye(m, dtype=int) * m)
        met = gen_metric(g, rand_antisym(rng, m))
        s = BISpace(abelian_frame(m), met)
        ref = oracles.born_infeld_volume(np.array(met.g, dtype=float), np.array(met.b, dtype=float))
        vol_err = max(vol_err, abs(s.volume - ref) / max(1.0, abs(ref)), abs(bi_volume(met) - ref) / max(1.0, abs(ref)))
        sign = (-1) ** (m * (m - 1) // 2)
        star_err = max(star_err, float(np.linalg.norm(s.star @ s.star - sign * np.eye(1 << m))))
    ok = (
        adj_err <= TOL
        and k_torus == oracle_torus == (1, 4, 6, 4, 1)
        and k_kt == oracle_kt == (1, 3, 4, 3, 1)
        and vol_err <= TOL
        and star_err <= TOL
    )
    return record(4, "Born-Infeld Hodge theory on torus and KT", ok,
                  f"adjoint {adj_err:.1e}, kernels {k_torus} {k_kt}, volume {vol_err:.1e}, star^2 {star_err:.1e}")


# 5 -------------------------------------------------------------------------


def criterion_5() -> bool:
    rng = random.Random(5)
    base = kodaira_thurston_frame(H=[(1, 3, 4, 1)])
    A = np.array([[rng.randint(-1, 1) for _ in range(4)] for _ in range(4)], dtype=object)
    met = gen_metric(exact_array(A.T.dot(A) + np.eye(4, dtype=int) * 4), rand_antisym(rng, 4))
    ref = laplacian(BISpace(base, met)).parity_dims
    d = ce_differential(base)
    c = oracles.structure_constants(4, [(1, 2, 3, 1)])
    seen = []
    ok = True
    for _ in range(4):
        bp = rand_antisym(rng, 4)
        # only the e34 component has nonzero d on KT
        if not bp[2, 3]:
            bp[2, 3], bp[3, 2] = bp[2, 3] + 1, bp[3, 2] - 1
        dbp = FormSpinor(4, d.apply(two_form(bp).coeffs))
        moved = base.with_H(base.H - dbp)
        got = laplacian(BISpace(moved, met.transform(bp))).parity_dims
        oracle = oracles.twisted_betti(c, to_tuples(moved.H), 4)
        seen.append(got)
        ok &= got == ref == oracle and not dbp.is_zero()
    return record(5, "harmonic dimensions gauge invariant on KT", ok, f"reference {ref}, moved {seen}")


# 6 -------------------------------------------------------------------------


def criterion_6() -> bool:
    frame = abelian_frame(4)
    pair = kahler_pair(torus_J(), torus_J())
    rep = gk_validate(pair, frame)
    space = BISpace(frame, pair.metric())
    grading = pq_grading(pair)
    split = split_dh(grading, space.dH())
    res = kahler_identities_check(space, split)
    diamond = hodge_diamond(pair, space, grading)
    betti = oracles.betti(oracles.structure_constants(4, []), 4)
    b_odd = sum(betti[1::2])
    ok = (
        rep.ok
        and pair.types() == (2, 0)
        and res["splitting residual"] <= TOL
        and res["dbar_plus^* + delta_plus"] <= TOL
        and res["dbar_minus^* - delta_minus"] <= TOL
        and res["Lap(d_H) - 2 Lap(dbar_1)"] <= TOL
        and res["Lap(d_H) - 4 Lap(dbar_plus)"] <= TOL
        and max(res.values()) <= TOL
        and diamond.total == sum(betti) == 16
        and diamond.conjugation_symmetric()
        and diamond.betti_odd == b_odd == 8
        and parity_corollary(4, pair.types(), diamond.betti_even, diamond.betti_odd)[0]
    )
    return record(6, "generalized Kähler suite on the torus", ok,
                  f"types {pair.types()}, max residual {max(res.values()):.1e}, total {diamond.total}, b_od {diamond.betti_odd}")


# 7 -------------------------------------------------------------------------


def criterion_7() -> bool:
    torus, kt = abelian_frame(4), kodaira_thurston_frame()
    t1 = ddj_check(from_complex(torus_J()), torus).ok
    t2 = ddj_check(from_symplectic(torus_J()), torus).ok
    kt_ddj = ddj_check(from_symplectic(torus_J()), kt)
    kt_lef = lefschetz_check(torus_J(), kt)
    c = oracles.structure_constants(4, [(1, 2, 3, 1)])
    pi = [[0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, -1, 0, 0]]
    inter, im_ddj = oracles.ddj_defect_symplectic(c, pi, 4)
    lrank, b1 = oracles.lefschetz_rank(c, {(0, 2): Fraction(1), (1, 3): Fraction(1)}, 1, 4)
    ok = (
        t1 and t2
        and not kt_ddj.ok and inter != im_ddj
        and not kt_lef["k=1: H^1 -> H^3"].passed and lrank < b1
    )
    return record(7, "dd^J on the torus for J1 and J2; KT symplectic fails dd^J and Lefschetz at k=1", ok,
                  f"KT: ker d & im d^J = {inter} vs im dd^J = {im_ddj}; Lefschetz k=1 rank {lrank} of {b1}")


# 8 -------------------------------------------------------------------------


def criterion_8() -> bool:
    J = from_complex(torus_J())
    frame = abelian_frame(4)
    cx = build_complex(J, frame)
    dims = cohomology_dims(cx)
    pieces = decompose_h2_complex_case(J, frame)
    # d_E = 0 on the torus, so H^k is all of wedge^k E*; the split counts T^{0,1} and T*^{1,0} degrees
    oracle_pieces = tuple(comb(2, p) * comb(2, 2 - p) for p in (2, 1, 0))
    rng = random.Random(8)
    invariant = True
    for name, (S, fr) in {
        "torus": (J, frame),
        "kt": (from_complex([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]]), kodaira_thurston_frame()),
    }.items():
        base = build_complex(S, fr)
        while True:
            P = np.empty((4, 4), dtype=object)
            for idx in np.ndindex(P.shape):
                P[idx] = GaussianRational(rand_q(rng), rand_q(rng))
            if rank(P) == 4:
                break
        moved = change_basis(base, P)
        invariant &= cohomology_dims(moved) == cohomology_dims(base) and moved.square_is_zero()
        invariant &= base.square_is_zero() and base.jacobi_failures() == []
    ok = dims[2] == 6 == comb(4, 2) and pieces == oracle_pieces == (1, 4, 1) and dims[3] == 4 and invariant
    return record(8, "deformation complex of the complex 2-torus", ok,
                  f"H^2 = {dims[2]} as {pieces}, H^3 = {dims[3]}, basis change invariant {invariant}")


# 9 -------------------------------------------------------------------------


def _run_cli(argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = cli.main(argv)
    return code, out.getvalue(), err.getvalue()


def criterion_9(tmp_dir: Path) -> bool:
    data = Path(cli.__file__).parent / "data"
    golden = Path(__file__).parent / "golden"
    files = sorted(golden.glob("*.txt"))
    mismatched = []
    docs = set()
    for f in files:
        doc, command, *rest = f.name[:-4].split(".")
        docs.add(doc)
        flags = {
            "": [], "which2": ["--which", "2"], "modefloat": ["--mode", "float"], "twisted": ["--twisted"],
            "formatjson": ["--format", "json"],
        }[rest[0] if rest else ""]
        argv = [command, str(data / f"{doc}.json"), *flags]
        code, out, _ = _run_cli(argv)
        again = _run_cli(argv)
        if f.read_text(encoding="utf-8") != f"exit {code}\n{out}" or again[:2] != (code, out):
            mismatched.append(f.name)
    bad_rational = tmp_dir / "bad.json"
    bad_rational.write_text('{\n  "dim": 4,\n  "g": [["1", "0", "0", "0"], ["0", "x/2", "0", "0"],\n'
                            '        ["0", "0", "1", "0"], ["0", "0", "0", "1"]]\n}\n')
    jacobi = tmp_dir / "jacobi.json"
    jacobi.write_text(json.dumps({"dim": 4, "brackets": [{"i": 1, "j": 2, "k": 3, "coeff": "1"},
                                                         {"i": 3, "j": 1, "k": 1, "coeff": "1"}]}))
    c2, _, err2 = _run_cli(["validate", str(bad_rational)])
    c1, out1, _ = _run_cli(["validate", str(jacobi)])
    c0, _, _ = _run_cli(["validate", str(data / "torus-kahler.json")])
    codes_ok = c0 == 0 and c1 == 1 and "jacobi" in out1 and c2 == 2 and "line 3" in err2
    ok = len(files) >= 21 and docs == {"torus-kahler", "kodaira-thurston", "abelian-twisted"} and not mismatched and codes_ok
    return record(9, "CLI golden files, exit codes, deterministic bytes", ok,
                  f"{len(files)} golden files, mismatches {mismatched or 'none'}, exit codes {c0}/{c1}/{c2}")


# -- pytest entry points --------------------------------------------------------


def test_criterion_1():
    assert criterion_1()


def test_criterion_2():
    assert criterion_2()


def test_criterion_3():
    assert criterion_3()


def test_criterion_4():
    assert criterion_4()


def test_criterion_5():
    assert criterion_5()


def test_criterion_6():
    assert criterion_6()


def test_criterion_7():
    assert criterion_7()


def test_criterion_8():
    assert criterion_8()


def test_criterion_9(tmp_path):
    assert criterion_9(tmp_path)


if __name__ == "__main__":
    import tempfile

    with tempfile.TemporaryDirectory() as tmp:
        results = [f() for f in (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
                                 criterion_6, criterion_7, criterion_8)]
        results.append(criterion_9(Path(tmp)))
    sys.exit(0 if all(results) else 1)
