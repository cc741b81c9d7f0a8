"""Frames: rational Lie algebras standing in for compact homogeneous manifolds.

Invariant forms on the frame are the exterior algebra of the dual, the
exterior derivative is the Chevalley-Eilenberg differential, and the
Courant/Dorfman bracket on constant sections of ``T + T*`` is the derived
bracket of ``d_H = d + H^``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Mapping

import numpy as np

from .linalg import OperatorMatrix, exact_array, inverse, is_positive_definite, rank
from .multilinear import (
    FormSpinor,
    GeneralizedVector,
    clifford_act,
    clifford_operator,
    popcount,
    shear,
    two_form,
    wedge_operator,
)
from .reports import Report
from .scalars import mpq, to_exact, to_rational

__all__ = [
    "FrameSpec",
    "InvalidFrameError",
    "abelian_frame",
    "kodaira_thurston_frame",
    "chevalley_eilenberg",
    "ce_differential",
    "twisted_d",
    "apply_d",
    "lie_bracket",
    "dorfman_bracket",
    "derived_bracket",
    "courant_bracket",
    "BracketSymmetry",
    "bracket_symmetry_check",
    "frame_automorphism_check",
    "validate_frame",
    "betti_numbers",
    "twisted_betti",
    "pullback",
]


class InvalidFrameError(ValueError):
    """Raised when an operation needs a property the frame lacks."""


@dataclass(frozen=True, eq=False)
class FrameSpec:
    """A real Lie algebra with basis ``e_1..e_m`` plus invariant tensors.

    ``structure_constants[i, j, k]`` is the coefficient of ``e_{k+1}`` in
    ``[e_{i+1}, e_{j+1}]``. ``H`` is an invariant 3-form. ``g`` and ``b``
    are optional ``m x m`` rational matrices; ``structures`` holds named
    extra data (complex structures, symplectic forms, explicit 4n x 4n
    matrices) as ``(name, kind, matrix)`` tuples.
    """

    dim: int
    structure_constants: np.ndarray
    H: FormSpinor
    g: np.ndarray | None = None
    b: np.ndarray | None = None
    structures: tuple = ()
    name: str = ""

    def __post_init__(self):
        m = self.dim
        if m <= 0 or m % 2:
            raise InvalidFrameError(f"frame dimension must be even and positive, got {m}")
        c = np.asarray(self.structure_constants, dtype=object)
        if c.shape != (m, m, m):
            raise InvalidFrameError(f"structure constants must have shape {(m, m, m)}")
        out = np.full((m, m, m), mpq(0), dtype=object)
        for idx in np.ndindex(c.shape):
            out[idx] = to_rational(c[idx])
        object.__setattr__(self, "structure_constants", out)
        if self.H.dim != m:
            raise InvalidFrameError("H has the wrong dimension")
        if self.H.degrees() - {3}:
            raise InvalidFrameError("H must be a pure 3-form")
        for attr in ("g", "b"):
            v = getattr(self, attr)
            if v is not None:
                v = exact_array(v)
                if v.shape != (m, m):
                    raise InvalidFrameError(f"{attr} must be {m} x {m}")
                object.__setattr__(self, attr, v)

    @classmethod
    def from_brackets(
        cls,
        dim: int,
        brackets: Iterable = (),
        H=None,
        g=None,
        b=None,
        structures: tuple = (),
        name: str = "",
    ) -> "FrameSpec":
        """Build from ``(i, j, k, coeff)`` entries meaning ``[e_i, e_j] contains coeff e_k``.

        Indices are 1-based. The ``(j, i)`` entry is filled by antisymmetry
        unless it is listed explicitly.
        """
        c = np.full((dim, dim, dim), mpq(0), dtype=object)
        given = set()
        entries = []
        for i, j, k, coeff in _entries(brackets):
            for x in (i, j, k):
                if not 1 <= x <= dim:
                    raise InvalidFrameError(f"bracket index {x} out of range 1..{dim}")
            entries.append((i - 1, j - 1, k - 1, to_rational(coeff)))
            given.add((i - 1, j - 1, k - 1))
        for i, j, k, coeff in entries:
            c[i, j, k] += coeff
            if (j, i, k) not in given:
                c[j, i, k] -= coeff
        return cls(dim, c, _three_form(dim, H), g=g, b=b, structures=tuple(structures), name=name)

    def with_H(self, H) -> "FrameSpec":
        return replace(self, H=H if isinstance(H, FormSpinor) else _three_form(self.dim, H))

    def with_metric(self, g=None, b=None) -> "FrameSpec":
        return replace(self, g=g, b=b)

    @property
    def n(self) -> int:
        return self.dim // 2

    def is_unimodular(self) -> bool:
        return all(not self.adjoint_trace(i) for i in range(self.dim))

    def adjoint_trace(self, i: int):
        c = self.structure_constants
        return sum((c[i, k, k] for k in range(self.dim)), mpq(0))

    def structure(self, name: str):
        for s in self.structures:
            if s[0] == name:
                return s
        raise KeyError(name)


def _entries(items) -> list:
    if isinstance(items, Mapping):
        out = []
        for key, val in items.items():
            i, j = key
            if isinstance(val, Mapping):
                out.extend((i, j, k, c) for k, c in val.items())
            else:
                raise TypeError("bracket mapping values must be {k: coeff} dicts")
        return out
    return [tuple(e) for e in items]


def _three_form(dim: int, H) -> FormSpinor:
    if H is None:
        return FormSpinor(dim)
    if isinstance(H, FormSpinor):
        return H
    total = FormSpinor(dim)
    for i, j, k, coeff in _entries(H):
        total = total + FormSpinor.basis(dim, i, j, k, coeff=to_rational(coeff))
    return total


def abelian_frame(dim: int, H=None, g=None, b=None, name: str = "") -> FrameSpec:
    """The torus frame: all brackets zero. ``g`` defaults to the identity."""
    if g is None:
        g = np.eye(dim, dtype=int)
    return FrameSpec.from_brackets(dim, (), H=H, g=g, b=b, name=name or f"abelian-{dim}")


def kodaira_thurston_frame(H=None, g=None, b=None) -> FrameSpec:
    """``[e1, e2] = e3`` in dimension 4 (Heisenberg times R)."""
    if g is None:
        g = np.eye(4, dtype=int)
    return FrameSpec.from_brackets(4, [(1, 2, 3, 1)], H=H, g=g, b=b, name="kodaira-thurston")


# -- differentials ------------------------------------------------------------

def chevalley_eilenberg(c: np.ndarray) -> OperatorMatrix:
    """CE differential on the exterior algebra of the dual of a Lie algebra.

    ``d eps^k = -sum_{i<j} c[i, j, k] eps^i ^ eps^j``, extended as an odd
    derivation. Works for any exact scalars (the algebroid complex uses
    Gaussian rationals).
    """
    m = c.shape[0]
    d1 = []
    for k in range(m):
        coeffs = {}
        for i, j in combinations(range(m), 2):
            x = c[i, j, k]
            if x:
                coeffs[(1 << i) | (1 << j)] = -x
        d1.append(FormSpinor(m, coeffs))

    def image(mask: int) -> dict:
        out = FormSpinor(m)
        idx = [i for i in range(m) if mask >> i & 1]
        for pos, k in enumerate(idx):
            if d1[k].is_zero():
                continue
            left = sum((1 << i) for i in idx[:pos])
            right = sum((1 << i) for i in idx[pos + 1:])
            term = FormSpinor(m, {left: mpq(1)}).wedge(d1[k]).wedge(FormSpinor(m, {right: mpq(1)}))
            out = out + (term * (-1 if pos & 1 else 1))
        return out.coeffs

    return OperatorMatrix.from_function(1 << m, image)


@lru_cache(maxsize=256)
def ce_differential(frame: FrameSpec) -> OperatorMatrix:
    """Exterior derivative on invariant forms. Raises if Jacobi fails."""
    d = chevalley_eilenberg(frame.structure_constants)
    if not (d @ d).is_zero():
        w = _jacobi_witness(frame)
        raise InvalidFrameError(f"structure constants violate the Jacobi identity at {w}")
    return d


@lru_cache(maxsize=256)
def twisted_d(frame: FrameSpec) -> OperatorMatrix:
    """``d_H = d + H ^``. Raises if ``dH != 0`` (then ``d_H^2 = dH ^`` is nonzero)."""
    d = ce_differential(frame)
    if frame.H.is_zero():
        return d
    dH = FormSpinor(frame.dim, d.apply(frame.H.coeffs))
    if not dH.is_zero():
        raise InvalidFrameError(f"H is not closed, so d_H^2 = dH^ != 0; dH = {dH}")
    return d + wedge_operator(frame.H)


def apply_d(frame: FrameSpec, form: FormSpinor, twisted: bool = False) -> FormSpinor:
    op = twisted_d(frame) if twisted else ce_differential(frame)
    return FormSpinor(frame.dim, op.apply(form.coeffs))


# -- brackets -----------------------------------------------------------------

def lie_bracket(X, Y, frame: FrameSpec) -> tuple:
    c = frame.structure_constants
    m = frame.dim
    out = [mpq(0)] * m
    for i in range(m):
        if not X[i]:
            continue
        for j in range(m):
            if not Y[j]:
                continue
            xy = X[i] * Y[j]
            for k in range(m):
                if c[i, j, k]:
                    out[k] = out[k] + c[i, j, k] * xy
    return tuple(out)


def _one_form(xi) -> FormSpinor:
    return FormSpinor(len(xi), {1 << i: x for i, x in enumerate(xi) if x})


def _contract(X, form: FormSpinor) -> FormSpinor:
    zero = tuple([mpq(0)] * len(X))
    return clifford_act(GeneralizedVector(tuple(X), zero), form)


def _covector(form: FormSpinor) -> tuple:
    return tuple(form.coeffs.get(1 << i, mpq(0)) for i in range(form.dim))


def dorfman_bracket(u: GeneralizedVector, v: GeneralizedVector, frame: FrameSpec) -> GeneralizedVector:
    """Dorfman bracket of constant sections, in closed form.

    ``[X+xi, Y+eta] = [X,Y] + i_X d eta - i_Y d xi - i_Y i_X H``. The sign
    of the flux term is the one produced by the derived bracket of
    ``d + H^`` (see :func:`derived_bracket`).
    """
    if u.dim != frame.dim or v.dim != frame.dim:
        raise ValueError("generalized vectors do not match the frame dimension")
    d = ce_differential(frame)
    X, xi, Y, eta = u.X, u.xi, v.X, v.xi
    vec = lie_bracket(X, Y, frame)
    form = _contract(X, FormSpinor(frame.dim, d.apply(_one_form(eta).coeffs)))
    form = form - _contract(Y, FormSpinor(frame.dim, d.apply(_one_form(xi).coeffs)))
    if not frame.H.is_zero():
        form = form - _contract(Y, _contract(X, frame.H))
    return GeneralizedVector(vec, _covector(form))


def derived_bracket(u: GeneralizedVector, v: GeneralizedVector, frame: FrameSpec) -> GeneralizedVector:
    """The generalized vector ``w`` with ``w. = [[d_H, u.], v.]`` (graded commutators).

    Computed on the whole spinor space and checked to be a Clifford action.
    """
    D = twisted_d(frame)
    U = clifford_operator(u)
    V = clifford_operator(v)
    K = D @ U + U @ D
    R = K @ V - V @ K
    m = frame.dim
    xi = tuple(R.cols[0].get(1 << k, mpq(0)) for k in range(m))
    X = tuple(R.cols[1 << k].get(0, mpq(0)) for k in range(m))
    w = GeneralizedVector(X, xi)
    if R != clifford_operator(w):
        raise ArithmeticError("derived bracket is not the Clifford action of a generalized vector")
    return w


def courant_bracket(u: GeneralizedVector, v: GeneralizedVector, frame: FrameSpec) -> GeneralizedVector:
    """Antisymmetrization of the Dorfman bracket."""
    a = dorfman_bracket(u, v, frame)
    b = dorfman_bracket(v, u, frame)
    return (a - b) * mpq(1, 2)


@dataclass
class BracketSymmetry:
    """Outcome of testing a shear ``exp(B)`` against the bracket."""

    closed: bool
    intertwines: bool
    dB: FormSpinor
    failures: list = field(default_factory=list)

    @property
    def automorphism(self) -> bool:
        """``exp(B)`` preserves ``[,]_H`` itself (needs ``dB = 0``)."""
        return self.closed and self.intertwines


def bracket_symmetry_check(frame: FrameSpec, B) -> BracketSymmetry:
    """Test ``exp(B)[u, v]_H == [exp(B)u, exp(B)v]_{H - dB}`` on all basis pairs."""
    B = exact_array(B)
    if not np.all(B == -B.T):
        raise ValueError("B must be antisymmetric")
    d = ce_differential(frame)
    bform = two_form(B)
    dB = FormSpinor(frame.dim, d.apply(bform.coeffs))
    target = frame.with_H(frame.H - dB)
    S = shear(B)
    act = lambda w: GeneralizedVector.from_array(S.dot(w.to_array()))
    failures = []
    basis = GeneralizedVector.basis(frame.dim)
    for a in range(len(basis)):
        for c in range(len(basis)):
            u, v = basis[a], basis[c]
            lhs = act(dorfman_bracket(u, v, frame))
            rhs = dorfman_bracket(act(u), act(v), target)
            if lhs != rhs:
                failures.append((a, c, lhs - rhs))
    return BracketSymmetry(dB.is_zero(), not failures, dB, failures)


def pullback(form: FormSpinor, phi) -> FormSpinor:
    """``phi^* form`` for a linear map ``phi`` of the frame (``e_j -> sum_i phi[i, j] e_i``)."""
    phi = exact_array(phi)
    m = form.dim
    images = [FormSpinor(m, {1 << j: phi[k, j] for j in range(m) if phi[k, j]}) for k in range(m)]
    out = FormSpinor(m)
    for mask, c in form.coeffs.items():
        term = FormSpinor(m, {0: c})
        for k in range(m):
            if mask >> k & 1:
                term = term.wedge(images[k])
        out = out + term
    return out


def frame_automorphism_check(frame: FrameSpec, phi) -> Report:
    """Check that a frame automorphism preserving ``H`` preserves the bracket.

    ``phi`` acts on ``T + T*`` as ``(phi, phi^{-T})``. This is the invariant
    stand-in for the diffeomorphism factor of the bracket symmetries.
    """
    phi = exact_array(phi)
    m = frame.dim
    rep = Report("frame automorphism")
    try:
        inv = inverse(phi)
    except ValueError:
        rep.add("invertible", False, "phi is singular")
        return rep
    rep.add("invertible", True)
    c = frame.structure_constants
    hom = True
    for i in range(m):
        for j in range(m):
            lhs = phi.dot(np.array([c[i, j, k] for k in range(m)], dtype=object))
            rhs = lie_bracket(tuple(phi[:, i]), tuple(phi[:, j]), frame)
            if any(a != b for a, b in zip(lhs, rhs)):
                hom = False
    rep.add("Lie algebra automorphism", hom)
    rep.add("preserves H", pullback(frame.H, phi) == frame.H)
    big = np.block([[phi, np.full((m, m), mpq(0), dtype=object)],
                    [np.full((m, m), mpq(0), dtype=object), inv.T]])
    act = lambda w: GeneralizedVector.from_array(big.dot(w.to_array()))
    basis = GeneralizedVector.basis(m)
    ok = all(
        act(dorfman_bracket(u, v, frame)) == dorfman_bracket(act(u), act(v), frame)
        for u in basis
        for v in basis
    )
    rep.add("preserves Dorfman bracket", ok)
    return rep


# -- validation and cohomology --------------------------------------------------

def _jacobi_witness(frame: FrameSpec):
    c = frame.structure_constants
    m = frame.dim
    for i, j, k in combinations(range(m), 3):
        for p in range(m):
            s = mpq(0)
            for l in range(m):
                s += c[i, j, l] * c[l, k, p] + c[j, k, l] * c[l, i, p] + c[k, i, l] * c[l, j, p]
            if s:
                return (i + 1, j + 1, k + 1)
    return None


def validate_frame(frame: FrameSpec) -> Report:
    """Antisymmetry, Jacobi, closed H, unimodularity and metric checks."""
    rep = Report(f"frame {frame.name or ''}".strip())
    c = frame.structure_constants
    m = frame.dim
    bad = next(
        ((i + 1, j + 1, k + 1) for i in range(m) for j in range(m) for k in range(m)
         if c[i, j, k] != -c[j, i, k]),
        None,
    )
    rep.add("antisymmetry", bad is None, f"c[{bad}] != -c[swapped]" if bad else "")
    w = _jacobi_witness(frame) if bad is None else None
    rep.add("jacobi", bad is None and w is None,
            f"cyclic sum nonzero for (e{w[0]}, e{w[1]}, e{w[2]})" if w else "")
    if bad is None and w is None:
        d = chevalley_eilenberg(c)
        dH = FormSpinor(m, d.apply(frame.H.coeffs))
        rep.add("dH = 0", dH.is_zero(), "" if dH.is_zero() else f"dH = {dH}")
    else:
        rep.add("dH = 0", False, "skipped: invalid Lie algebra")
    tr = [(i + 1, frame.adjoint_trace(i)) for i in range(m)]
    off = [(i, t) for i, t in tr if t]
    rep.add("unimodular", not off, f"tr ad(e{off[0][0]}) = {off[0][1]}" if off else "")
    if frame.g is not None:
        rep.add("g positive-definite", is_positive_definite(frame.g))
    if frame.b is not None:
        rep.add("b antisymmetric", bool(np.all(frame.b == -frame.b.T)))
    return rep


def _degree_masks(m: int) -> list[list[int]]:
    out: list[list[int]] = [[] for _ in range(m + 1)]
    for mask in range(1 << m):
        out[popcount(mask)].append(mask)
    return out


def betti_numbers(frame: FrameSpec) -> list[int]:
    """Exact per-degree Betti numbers of the (untwisted) CE complex."""
    d = ce_differential(frame)
    m = frame.dim
    deg = _degree_masks(m)
    ranks = [rank(d.restrict(deg[k], deg[k + 1])) if k < m else 0 for k in range(m + 1)]
    return [len(deg[k]) - ranks[k] - (ranks[k - 1] if k else 0) for k in range(m + 1)]


def twisted_betti(frame: FrameSpec) -> tuple[int, int]:
    """Exact ``(b_even, b_odd)`` of the ``d_H`` complex."""
    dH = twisted_d(frame)
    m = frame.dim
    even = [x for x in range(1 << m) if not popcount(x) & 1]
    odd = [x for x in range(1 << m) if popcount(x) & 1]
    r_eo = rank(dH.restrict(even, odd))
    r_oe = rank(dH.restrict(odd, even))
    return len(even) - r_eo - r_oe, len(odd) - r_oe - r_eo
