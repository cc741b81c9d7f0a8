"""Lie algebroid complex of an integrable generalized complex structure.

The ``+i`` eigenbundle ``E`` of an integrable structure is closed under the
Courant bracket, which is a Lie bracket there. On invariant sections of a frame
this makes ``E`` a complex Lie algebra, and its cochain complex
``(wedge E*, d_E)`` is the Chevalley-Eilenberg complex of that algebra.

Cochains are :class:`FormSpinor` objects on ``dim E`` generators: bit ``a`` of a
mask is the dual covector ``eps^a`` of the ``a``-th basis element of ``E``.
``E*`` is identified with the conjugate bundle through ``2 <., .>`` so that the
Gerstenhaber bracket is the Schouten bracket of the conjugate algebra.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from math import comb

import numpy as np

from .frame import FrameSpec, chevalley_eilenberg, dorfman_bracket
from .linalg import OperatorMatrix, inverse, rank, rref_rows, solve
from .multilinear import FormSpinor, GeneralizedVector, popcount, split_pairing
from .reports import Report
from .scalars import I, mpq
from .structures import GCStructure, check_integrability, eigenbundle, type_of

__all__ = [
    "AlgebroidComplex",
    "NotIntegrableError",
    "NotBigradedError",
    "build_complex",
    "algebroid_cohomology",
    "cohomology_dims",
    "complex_adapted_basis",
    "decompose_h2_complex_case",
    "gerstenhaber_bracket",
    "change_basis",
    "deformation_report",
]


class NotIntegrableError(ValueError):
    pass


class NotBigradedError(ArithmeticError):
    """``d_E`` does not preserve the multivector degree (twisted complex case)."""


def _coordinates(basis: list[GeneralizedVector], w: GeneralizedVector) -> list:
    M = np.array([v.to_array() for v in basis], dtype=object).T
    x = solve(M, list(w.to_array()))
    if x is None:
        raise ArithmeticError("vector does not lie in the span of the basis")
    return x


@dataclass(frozen=True, eq=False)
class AlgebroidComplex:
    """``E`` with its bracket constants and the differential ``d_E``.

    ``bracket_constants[a, b, c]`` is the coefficient of ``E_c`` in
    ``[E_a, E_b]``; ``dE`` acts on the full cochain space ``wedge E*``.
    """

    E_basis: tuple
    bracket_constants: np.ndarray
    dE: OperatorMatrix
    structure: GCStructure | None = None
    frame: FrameSpec | None = None

    @property
    def rank(self) -> int:
        return len(self.E_basis)

    def masks(self, k: int) -> list[int]:
        return [m for m in range(1 << self.rank) if popcount(m) == k]

    def block(self, k: int) -> list[dict]:
        """Rows of ``d_E`` restricted to ``wedge^k -> wedge^(k+1)`` (columns indexed by position)."""
        dom = self.masks(k)
        cod = self.masks(k + 1)
        return self.dE.restrict(dom, cod)

    def d(self, cochain: FormSpinor) -> FormSpinor:
        return FormSpinor(self.rank, self.dE.apply(cochain.coeffs))

    def square_is_zero(self) -> bool:
        return (self.dE @ self.dE).is_zero()

    def jacobi_failures(self) -> list[tuple]:
        """Triples where ``[a,[b,c]] + cyclic`` is nonzero, computed from the constants."""
        c = self.bracket_constants
        r = self.rank
        bad = []
        for a, b, e in combinations(range(r), 3):
            for out in range(r):
                s = 0
                for x, y, z in ((a, b, e), (b, e, a), (e, a, b)):
                    for t in range(r):
                        s = s + c[y, z, t] * c[x, t, out]
                if s:
                    bad.append((a, b, e))
                    break
        return bad

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * algebroid_cohomology(self, k) for k in range(self.rank + 1))


def _check_basis(J: GCStructure, basis) -> list[GeneralizedVector]:
    basis = list(basis)
    N = J.J.shape[0]
    if len(basis) != N // 2:
        raise ValueError(f"basis of E needs {N // 2} vectors, got {len(basis)}")
    for v in basis:
        r = GeneralizedVector.from_array(J.J.dot(v.to_array())) - v * I
        if not r.is_zero():
            raise ValueError("basis vector is not in the +i eigenbundle")
    if rank(np.array([v.to_array() for v in basis], dtype=object)) != N // 2:
        raise ValueError("basis vectors are linearly dependent")
    return basis


def build_complex(J: GCStructure, frame: FrameSpec, basis=None) -> AlgebroidComplex:
    """Bracket constants of ``E`` and the differential ``d_E``.

    Raises :class:`NotIntegrableError` if ``E`` is not bracket-closed.
    """
    E = eigenbundle(J) if basis is None else _check_basis(J, basis)
    res = check_integrability(J, frame, E)
    if not res:
        a, b, _ = res.witness
        raise NotIntegrableError(f"structure is not integrable: [E_{a}, E_{b}] leaves E")
    r = len(E)
    c = np.full((r, r, r), mpq(0), dtype=object)
    for a in range(r):
        for b in range(a + 1, r):
            # on the isotropic E the Dorfman and Courant brackets agree
            x = _coordinates(E, dorfman_bracket(E[a], E[b], frame))
            for k in range(r):
                c[a, b, k] = x[k]
                c[b, a, k] = -x[k]
    d = chevalley_eilenberg(c)
    cx = AlgebroidComplex(tuple(E), c, d, J, frame)
    if not cx.square_is_zero():
        raise ArithmeticError("d_E does not square to zero")
    return cx


def algebroid_cohomology(cx: AlgebroidComplex, k: int) -> int:
    """``dim H^k`` computed from exact ranks over the Gaussian rationals."""
    if not 0 <= k <= cx.rank:
        raise ValueError(f"degree {k} outside 0..{cx.rank}")
    n_k = comb(cx.rank, k)
    out_rank = rank(cx.block(k)) if k < cx.rank else 0
    in_rank = rank(cx.block(k - 1)) if k > 0 else 0
    return n_k - out_rank - in_rank


def cohomology_dims(cx: AlgebroidComplex) -> list[int]:
    return [algebroid_cohomology(cx, k) for k in range(cx.rank + 1)]


def change_basis(cx: AlgebroidComplex, P) -> AlgebroidComplex:
    """Rebuild the complex on the basis ``E'_j = sum_i P[i, j] E_i``."""
    if cx.structure is None or cx.frame is None:
        raise ValueError("complex does not remember its structure and frame")
    P = np.asarray(P, dtype=object)
    r = cx.rank
    new = []
    for j in range(r):
        v = GeneralizedVector.zero(cx.E_basis[0].dim)
        for i in range(r):
            if P[i, j]:
                v = v + cx.E_basis[i] * P[i, j]
        new.append(v)
    return build_complex(cx.structure, cx.frame, new)


# -- complex case -------------------------------------------------------------


def _is_complex_type(J: GCStructure) -> bool:
    so = J.so
    return not np.any(so.beta != 0) and not np.any(so.B != 0)


def complex_adapted_basis(J: GCStructure) -> tuple[list[GeneralizedVector], int]:
    """Basis ``[T_{0,1} vectors..., T*_{1,0} covectors...]`` of ``E`` and the split index."""
    if not _is_complex_type(J):
        raise ValueError("structure is not of complex type (needs B = 0 and beta = 0 blocks)")
    E = eigenbundle(J)
    m = J.dim
    vec_rows = []
    cov_rows = []
    rows = [{k: x for k, x in enumerate(v.to_array()) if x} for v in E]
    # covector slots first, so reduced rows are pure vectors or pure covectors
    perm = list(range(m, 2 * m)) + list(range(m))
    back = {p: k for k, p in enumerate(perm)}
    red, _ = rref_rows([{back[c]: x for c, x in r.items()} for r in rows])
    for r in red:
        arr = [mpq(0)] * (2 * m)
        for c, x in r.items():
            arr[perm[c]] = x
        v = GeneralizedVector.from_array(arr)
        if any(v.X):
            if any(v.xi):
                raise ArithmeticError("eigenbundle does not split into pure pieces")
            vec_rows.append(v)
        else:
            cov_rows.append(v)
    if len(vec_rows) != len(cov_rows):
        raise ArithmeticError("unbalanced complex-type eigenbundle")
    return vec_rows + cov_rows, len(vec_rows)


def _bidegree(mask: int, split: int) -> tuple[int, int]:
    """(multivector degree, form degree) of a cochain monomial."""
    low = mask & ((1 << split) - 1)
    return popcount(mask >> split), popcount(low)


def decompose_h2_complex_case(J: GCStructure, frame: FrameSpec) -> tuple[int, int, int]:
    """Dimensions of the ``H^0(wedge^2 T)``, ``H^1(T)`` and ``H^2(O)`` pieces of ``H^2``.

    Raises ``ValueError`` for structures not of complex type, and
    :class:`NotBigradedError` if ``d_E`` mixes the bidegrees (which happens when the
    twisting form has a component that the complex case does not allow).
    """
    basis, split = complex_adapted_basis(J)
    cx = build_complex(J, frame, basis)
    for mask in range(1 << cx.rank):
        p, q = _bidegree(mask, split)
        for t in cx.dE.cols[mask]:
            if _bidegree(t, split) != (p, q + 1):
                raise NotBigradedError("d_E does not preserve the multivector degree")
    dims = []
    for p in (2, 1, 0):
        q = 2 - p
        dims.append(_piece_cohomology(cx, split, p, q))
    return tuple(dims)


def _piece_cohomology(cx: AlgebroidComplex, split: int, p: int, q: int) -> int:
    here = [m for m in cx.masks(p + q) if _bidegree(m, split) == (p, q)]
    up = [m for m in cx.masks(p + q + 1) if _bidegree(m, split) == (p, q + 1)]
    down = [m for m in cx.masks(p + q - 1) if _bidegree(m, split) == (p, q - 1)] if q > 0 else []
    out_rank = rank(cx.dE.restrict(here, up)) if up else 0
    in_rank = rank(cx.dE.restrict(down, here)) if down else 0
    return len(here) - out_rank - in_rank


# -- Gerstenhaber bracket -----------------------------------------------------


def _pairing_matrix(cx: AlgebroidComplex) -> np.ndarray:
    """``P[a, b] = 2 <conj E_a, E_b>``; nondegenerate since ``E + conj E`` is everything."""
    r = cx.rank
    P = np.empty((r, r), dtype=object)
    for a in range(r):
        ea = cx.E_basis[a].conjugate()
        for b in range(r):
            P[a, b] = 2 * split_pairing(ea, cx.E_basis[b])
    return P


def _exterior_map(form: FormSpinor, L: np.ndarray) -> FormSpinor:
    """Apply the algebra map with ``gen_b -> sum_a L[a, b] gen_a`` on generators."""
    r = form.dim
    images = [FormSpinor(r, {1 << a: L[a, b] for a in range(r) if L[a, b]}) for b in range(r)]
    out = FormSpinor(r)
    for mask, x in form.coeffs.items():
        term = FormSpinor.one(r)
        for b in range(r):
            if mask >> b & 1:
                term = term.wedge(images[b])
        out = out + term * x
    return out


def _schouten_monomials(A: int, B: int, c: np.ndarray, r: int) -> FormSpinor:
    xs = [i for i in range(r) if A >> i & 1]
    ys = [j for j in range(r) if B >> j & 1]
    out = FormSpinor(r)
    for (i, x), (j, y) in product(enumerate(xs), enumerate(ys)):
        br = FormSpinor(r, {1 << t: c[x, y, t] for t in range(r) if c[x, y, t]})
        if br.is_zero():
            continue
        rest_x = A & ~(1 << x)
        rest_y = B & ~(1 << y)
        if rest_x & rest_y:
            continue
        # (-1)^(i+j) with 1-based positions equals (-1)^(i+j) with 0-based ones
        tail = FormSpinor(r, {rest_x: mpq(1)}).wedge(FormSpinor(r, {rest_y: mpq(1)}))
        out = out + br.wedge(tail) * (-1 if (i + j) & 1 else 1)
    return out


def gerstenhaber_bracket(a: FormSpinor, b: FormSpinor, cx: AlgebroidComplex) -> FormSpinor:
    """Schouten bracket of the conjugate algebra, transported to cochains on ``E``.

    With ``f_a = conj(E_a)`` and ``f_a = sum_b P[a, b] eps^b``, cochains are
    rewritten as multivectors in the ``f`` basis, bracketed there and mapped
    back. Constants act trivially since sections are invariant.
    """
    r = cx.rank
    if a.dim != r or b.dim != r:
        raise ValueError("cochains do not belong to this complex")
    P = _pairing_matrix(cx)
    Pinv = inverse(P)
    cbar = np.vectorize(lambda z: z.conjugate() if hasattr(z, "conjugate") else z, otypes=[object])(
        cx.bracket_constants
    )
    # eps^b = sum_a Pinv[b, a] f_a, so the generator map has matrix Pinv^T
    fa = _exterior_map(a, Pinv.T)
    fb = _exterior_map(b, Pinv.T)
    out = FormSpinor(r)
    for A, x in fa.coeffs.items():
        if not A:
            continue
        for B, y in fb.coeffs.items():
            if B:
                out = out + _schouten_monomials(A, B, cbar, r) * (x * y)
    return _exterior_map(out, P.T)


# -- report -------------------------------------------------------------------


def deformation_report(J: GCStructure, frame: FrameSpec) -> Report:
    """Symmetries, deformations and obstructions of an integrable structure."""
    rep = Report("deformation complex")
    try:
        cx = build_complex(J, frame)
    except NotIntegrableError as exc:
        rep.add("structure integrable", False, str(exc))
        return rep
    rep.add("structure integrable", True)
    rep.add("d_E squares to zero", cx.square_is_zero())
    bad = cx.jacobi_failures()
    rep.add("Jacobi identity on E", not bad, f"fails at {bad[0]}" if bad else "")
    dims = cohomology_dims(cx)
    labels = {1: "symmetries", 2: "deformations", 3: "obstructions"}
    for k in (1, 2, 3):
        if k <= cx.rank:
            rep.add(f"H^{k} ({labels[k]})", True, f"dim {dims[k]}", dims[k])
    chi = sum((-1) ** k * d for k, d in enumerate(dims))
    rep.add("Euler characteristic", chi == 0, f"{chi}", chi)
    h3 = dims[3] if cx.rank >= 3 else 0
    rep.add("obstruction space", True, "no obstruction space" if h3 == 0 else f"dim {h3}", h3)
    if type_of(J) == J.n and _is_complex_type(J):
        try:
            pieces = decompose_h2_complex_case(J, frame)
        except NotBigradedError as exc:
            rep.add("H^2 bidegree split", True, f"not applicable: {exc}")
        else:
            rep.add(
                "H^2 bidegree split",
                sum(pieces) == dims[2],
                "H0(wedge2 T) + H1(T) + H2(O) = {} + {} + {}".format(*pieces),
                pieces,
            )
    rep.add("cohomology", True, " ".join(map(str, dims)), dims)
    return rep
