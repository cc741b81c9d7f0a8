"""Born-Infeld Hodge theory and the generalized Kähler (p, q) decomposition.

Anything that needs an orthonormal basis (the Clifford volume element, the
Born-Infeld Gram matrix, Laplacians and their kernels) is computed in
complex double precision. Cohomology, the dd^J property and Lefschetz maps
are rank computations and stay exact.

Conventions: ``*`` is the Clifford product ``a_1 ... a_m`` of a
g-orthonormal oriented basis ``a_k = X_k + (b + g) X_k`` of ``C+``, acting
as ``a_1 . (a_2 . (... a_m . rho))``. ``sigma(*)`` is the reversed product,
so ``sigma(*) = *^{-1}``. The Born-Infeld form is
``h(alpha, beta) = <alpha, sigma(*) conj(beta)>`` (top-degree coefficient,
volume of the quotient normalized to one).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

import numpy as np

from .frame import FrameSpec, InvalidFrameError, betti_numbers, ce_differential, twisted_betti, twisted_d
from .linalg import OperatorMatrix, det, exact_array, float_kernel, float_rank, inverse, nullspace, rank
from .multilinear import (
    FormSpinor,
    GeneralizedVector,
    bivector_contraction,
    clifford_operator,
    mukai_matrix,
    popcount,
    sigma_reverse,
    wedge_operator,
    two_form,
)
from .reports import Report
from .scalars import mpq
from .structures import GCStructure, GenMetric, GKPair, check_integrability, gen_metric

__all__ = [
    "DEFAULT_TOL",
    "BISpace",
    "volume_element",
    "hodge_star",
    "bi_volume",
    "bi_inner_product",
    "dh_adjoint",
    "Laplacian",
    "laplacian",
    "PQGrading",
    "pq_grading",
    "DhSplitting",
    "split_dh",
    "kahler_identities_check",
    "HodgeReport",
    "hodge_diamond",
    "dj_operator",
    "ddj_check",
    "dolbeault_split",
    "koszul_operator",
    "lefschetz_check",
]

DEFAULT_TOL = 1e-9


@lru_cache(maxsize=None)
def _clifford_basis(dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Float matrices of ``i_{e_k}`` and ``e^k ^`` for every k."""
    basis = GeneralizedVector.basis(dim)
    ops = np.array([clifford_operator(v).to_array(float) for v in basis])
    return ops[:dim], ops[dim:]


def _clifford_float(X: np.ndarray, xi: np.ndarray) -> np.ndarray:
    contr, wedge = _clifford_basis(len(X))
    return np.tensordot(X, contr, axes=1) + np.tensordot(xi, wedge, axes=1)


def _gram_schmidt(g: np.ndarray, order) -> np.ndarray:
    """g-orthonormal vectors (columns) from the standard basis taken in ``order``."""
    m = g.shape[0]
    cols = []
    for i in order:
        v = np.zeros(m)
        v[i] = 1.0
        for u in cols:
            v = v - (u @ g @ v) * u
        v = v / np.sqrt(v @ g @ v)
        cols.append(v)
    X = np.array(cols).T
    if np.linalg.det(X) < 0:
        X[:, -1] = -X[:, -1]
    return X


def volume_element(metric: GenMetric, order=None) -> np.ndarray:
    """Spin action of ``* = a_1 ... a_m`` for an oriented orthonormal basis of ``C+``.

    ``order`` permutes the frame basis before Gram-Schmidt; the result does
    not depend on it (the last vector is flipped to fix orientation).
    """
    m = metric.dim
    g = np.array(metric.g, dtype=float)
    b = np.array(metric.b, dtype=float)
    X = _gram_schmidt(g, list(range(m)) if order is None else list(order))
    star = np.eye(1 << m, dtype=complex)
    for k in range(m):
        x = X[:, k]
        star = star @ _clifford_float(x, (b + g) @ x)
    return star


def _sigma_sign(m: int) -> int:
    return -1 if (m * (m - 1) // 2) & 1 else 1


class BISpace:
    """Form space of a frame with its Born-Infeld structure.

    ``gram[I, J] = h(e^I, e^J)`` so that ``h(a, b) = a^T gram conj(b)``.
    """

    def __init__(self, frame: FrameSpec, metric: GenMetric | None = None, tol: float = DEFAULT_TOL,
                 order=None):
        if metric is None:
            if frame.g is None:
                raise InvalidFrameError("frame has no metric g")
            metric = gen_metric(frame.g, frame.b)
        if metric.dim != frame.dim:
            raise ValueError("metric and frame dimensions differ")
        self.frame = frame
        self.metric = metric
        self.tol = tol
        self.star = volume_element(metric, order)
        self.sigma_star = _sigma_sign(frame.dim) * self.star
        self.mukai = mukai_matrix(frame.dim).to_array(float)
        self.gram = self.mukai @ self.sigma_star

    @property
    def dim(self) -> int:
        return self.frame.dim

    @property
    def size(self) -> int:
        return 1 << self.frame.dim

    @property
    def volume(self) -> float:
        """``h(1, 1) = <1, sigma(*) 1>``, the Born-Infeld volume."""
        return float(self.gram[0, 0].real)

    def inner(self, a, b, normalized: bool = False) -> complex:
        a = _vec(a)
        b = _vec(b)
        val = a @ self.gram @ np.conj(b)
        return val / self.volume if normalized else val

    def adjoint(self, A: np.ndarray) -> np.ndarray:
        """Adjoint with respect to ``h``."""
        Mc = np.conj(self.gram)
        return np.linalg.solve(Mc, A.conj().T @ Mc)

    def dH(self) -> np.ndarray:
        return twisted_d(self.frame).to_array()

    def require_unimodular(self):
        if not self.frame.is_unimodular():
            raise InvalidFrameError(
                "frame is not unimodular: integration by parts fails, so d_H has no "
                "Born-Infeld adjoint of the form * d_H *^-1"
            )


def _vec(x) -> np.ndarray:
    if isinstance(x, FormSpinor):
        return x.to_vector(complex)
    return np.asarray(x, dtype=complex)


def hodge_star(rho: FormSpinor, space: BISpace) -> FormSpinor:
    """``sigma(sigma(*) . rho)``; only meaningful when ``b = 0``."""
    if np.any(space.metric.b != 0):
        raise ValueError("the Clifford formula for the Hodge star needs b = 0")
    v = space.sigma_star @ _vec(rho)
    out = FormSpinor(rho.dim, {k: complex(x) for k, x in enumerate(v) if abs(x) > 1e-14})
    return sigma_reverse(out)


def bi_volume(metric: GenMetric) -> float:
    """``det(g + b) / sqrt(det g)``."""
    return float(det(metric.g + metric.b)) / float(np.sqrt(float(det(metric.g))))


def bi_inner_product(alpha, beta, space: BISpace, normalized: bool = False) -> complex:
    return space.inner(alpha, beta, normalized)


def dh_adjoint(space: BISpace, dH: np.ndarray | None = None, method: str = "formula") -> np.ndarray:
    """Born-Infeld adjoint of ``d_H``.

    ``method="formula"`` gives ``* d_H sigma(*)``; ``method="gram"`` solves
    ``h(d_H a, b) = h(a, d_H^* b)`` through the Gram matrix.
    """
    space.require_unimodular()
    D = space.dH() if dH is None else np.asarray(dH, dtype=complex)
    if method == "formula":
        return space.star @ D @ space.sigma_star
    if method == "gram":
        return space.adjoint(D)
    raise ValueError(f"unknown method {method!r}")


@dataclass
class Laplacian:
    matrix: np.ndarray
    kernel: np.ndarray  # columns span the harmonic forms
    parity_dims: tuple[int, int]  # (even, odd)
    degree_dims: tuple | None  # per degree when the Laplacian preserves degree

    @property
    def total(self) -> int:
        return self.kernel.shape[1]


def _masks_by(predicate, m):
    return [x for x in range(1 << m) if predicate(x)]


def _block_kernel_dim(A: np.ndarray, idx: list[int], tol: float) -> int:
    if not idx:
        return 0
    sub = A[np.ix_(idx, idx)]
    return len(idx) - float_rank(sub, tol)


def laplacian(space: BISpace, dH: np.ndarray | None = None, tol: float | None = None) -> Laplacian:
    """``d_H d_H^* + d_H^* d_H`` with its harmonic space."""
    tol = space.tol if tol is None else tol
    D = space.dH() if dH is None else np.asarray(dH, dtype=complex)
    Ds = dh_adjoint(space, D)
    L = D @ Ds + Ds @ D
    m = space.dim
    scale = max(np.linalg.norm(L, 2), 1.0)
    even = _masks_by(lambda x: not popcount(x) & 1, m)
    odd = _masks_by(lambda x: popcount(x) & 1, m)
    parity = (_block_kernel_dim(L, even, tol), _block_kernel_dim(L, odd, tol))
    degrees = [_masks_by(lambda x, k=k: popcount(x) == k, m) for k in range(m + 1)]
    preserves = all(
        np.linalg.norm(L[np.ix_(degrees[j], degrees[k])]) <= tol * scale
        for j in range(m + 1) for k in range(m + 1) if j != k
    )
    per_degree = tuple(_block_kernel_dim(L, degrees[k], tol) for k in range(m + 1)) if preserves else None
    return Laplacian(L, float_kernel(L, tol), parity, per_degree)


# -- generalized Kähler (p, q) decomposition ------------------------------------

def _eigen_projectors(S: np.ndarray, n: int) -> dict[int, np.ndarray]:
    """Projectors onto the ``ik`` eigenspaces, ``|k| <= n``, by Lagrange interpolation."""
    N = S.shape[0]
    Id = np.eye(N, dtype=complex)
    out = {}
    for k in range(-n, n + 1):
        P = Id.copy()
        for j in range(-n, n + 1):
            if j != k:
                P = P @ (S - 1j * j * Id) / (1j * (k - j))
        out[k] = P
    return out


@dataclass
class PQGrading:
    projectors: dict  # (p, q) -> projector onto U_{p,q}
    first: dict  # k -> projector onto U_k (J1)
    second: dict  # k -> projector onto the ik-eigenspace of J2
    n: int

    @property
    def support(self) -> list[tuple[int, int]]:
        return sorted(self.projectors)

    def dims(self) -> dict[tuple[int, int], int]:
        return {pq: int(round(np.trace(P).real)) for pq, P in sorted(self.projectors.items())}

    def in_diamond(self) -> bool:
        n = self.n
        return all(abs(p) + abs(q) <= n and (p + q - n) % 2 == 0 for p, q in self.projectors)

    def orthogonality_residual(self, space: BISpace) -> float:
        """Largest ``|h(U_a, U_b)|`` block norm over distinct bidegrees."""
        worst = 0.0
        M = space.gram
        for a, Pa in self.projectors.items():
            for b, Pb in self.projectors.items():
                if a != b:
                    worst = max(worst, np.linalg.norm(Pa.T @ M @ np.conj(Pb), 2))
        return worst


def pq_grading(pair: GKPair, tol: float = DEFAULT_TOL) -> PQGrading:
    """Joint eigenprojectors of the spin actions of ``J1`` and ``J2``."""
    S1 = pair.J1.spin()
    S2 = pair.J2.spin()
    if not (S1 @ S2 - S2 @ S1).is_zero():
        raise ValueError("spin actions of J1 and J2 do not commute; not a generalized Kähler pair")
    n = pair.n
    P1 = _eigen_projectors(S1.to_array(), n)
    P2 = _eigen_projectors(S2.to_array(), n)
    joint = {}
    for p, q in product(range(-n, n + 1), repeat=2):
        P = P1[p] @ P2[q]
        if np.linalg.norm(P) > 0.5:
            joint[(p, q)] = P
    return PQGrading(joint, P1, P2, n)


STEPS = {
    "delta_plus": (-1, -1),
    "delta_minus": (-1, 1),
    "delta_bar_plus": (1, 1),
    "delta_bar_minus": (1, -1),
}


@dataclass
class DhSplitting:
    """``d_H = delta_plus + delta_minus + delta_bar_plus + delta_bar_minus``."""

    delta_plus: np.ndarray
    delta_minus: np.ndarray
    delta_bar_plus: np.ndarray
    delta_bar_minus: np.ndarray
    residual: float  # norm of the part of d_H outside the four diagonal steps

    @property
    def dbar1(self):
        return self.delta_bar_plus + self.delta_bar_minus

    @property
    def del1(self):
        return self.delta_plus + self.delta_minus

    @property
    def dbar2(self):
        return self.delta_bar_plus + self.delta_minus

    @property
    def del2(self):
        return self.delta_plus + self.delta_bar_minus

    def operators(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in STEPS}


def split_dh(grading: PQGrading, dH: np.ndarray) -> DhSplitting:
    D = np.asarray(dH, dtype=complex)
    parts = {name: np.zeros_like(D) for name in STEPS}
    proj = grading.projectors
    for (p, q), P in proj.items():
        for name, (dp, dq) in STEPS.items():
            tgt = proj.get((p + dp, q + dq))
            if tgt is not None:
                parts[name] += tgt @ D @ P
    residual = np.linalg.norm(D - sum(parts.values()), 2)
    return DhSplitting(residual=residual, **parts)


def _lap(space: BISpace, A: np.ndarray) -> np.ndarray:
    As = space.adjoint(A)
    return A @ As + As @ A


def kahler_identities_check(space: BISpace, split: DhSplitting, dH: np.ndarray | None = None) -> dict[str, float]:
    """Operator-norm residuals of the generalized Kähler identities and the Laplacian chain."""
    D = space.dH() if dH is None else np.asarray(dH, dtype=complex)
    out = {
        "dbar_plus^* + delta_plus": np.linalg.norm(space.adjoint(split.delta_bar_plus) + split.delta_plus, 2),
        "dbar_minus^* - delta_minus": np.linalg.norm(space.adjoint(split.delta_bar_minus) - split.delta_minus, 2),
        "splitting residual": float(split.residual),
    }
    L = _lap(space, D)
    for name, A, factor in (
        ("dbar_1", split.dbar1, 2),
        ("del_1", split.del1, 2),
        ("dbar_2", split.dbar2, 2),
        ("del_2", split.del2, 2),
        ("delta_plus", split.delta_plus, 4),
        ("delta_minus", split.delta_minus, 4),
        ("dbar_plus", split.delta_bar_plus, 4),
        ("dbar_minus", split.delta_bar_minus, 4),
    ):
        out[f"Lap(d_H) - {factor} Lap({name})"] = np.linalg.norm(L - factor * _lap(space, A), 2)
    return out


@dataclass
class HodgeReport:
    dims: dict  # (p, q) -> dim of harmonic forms in U_{p,q}
    betti_even: int
    betti_odd: int
    betti_degrees: list | None
    harmonic_total: int
    residuals: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    types: tuple = ()

    @property
    def total(self) -> int:
        return sum(self.dims.values())

    def conjugation_symmetric(self) -> bool:
        return all(self.dims.get((-p, -q), 0) == d for (p, q), d in self.dims.items())


def _range_basis(P: np.ndarray, tol: float) -> np.ndarray:
    u, s, _ = np.linalg.svd(P)
    r = int(np.sum(s > tol * max(s[0], 1.0)))
    return u[:, :r]


def parity_corollary(dim: int, types: tuple[int, int], betti_even: int, betti_odd: int) -> tuple[bool, str]:
    """Evenness constraint on twisted Betti numbers of a compact GK manifold."""
    if dim % 4 == 2:
        return betti_even % 2 == 0 and betti_odd % 2 == 0, "dim = 4k+2: b_ev and b_od even"
    t1, t2 = types
    if t1 % 2 and t2 % 2:
        return betti_even % 2 == 0, "dim = 4k, types (od, od): b_ev even"
    if not t1 % 2 and not t2 % 2:
        return betti_odd % 2 == 0, "dim = 4k, types (ev, ev): b_od even"
    return False, "dim = 4k with mixed type parities violates the type constraint"


def hodge_diamond(pair: GKPair, space: BISpace, grading: PQGrading | None = None) -> HodgeReport:
    """Harmonic dimensions in each ``U_{p,q}`` and the derived consistency flags."""
    tol = space.tol
    grading = pq_grading(pair, tol) if grading is None else grading
    D = space.dH()
    Ds = dh_adjoint(space, D)
    lap = laplacian(space, D)
    L = lap.matrix
    dims = {}
    closed_coclosed = True
    commute = 0.0
    for pq, P in grading.projectors.items():
        commute = max(commute, np.linalg.norm(L @ P - P @ L, 2))
        B = _range_basis(P, tol)
        k = B.shape[1]
        kh = k - float_rank(L @ B, tol)
        kc = k - float_rank(D @ B, tol)
        kcc = k - float_rank(Ds @ B, tol)
        dims[pq] = kh
        if not (kc == kh == kcc):
            closed_coclosed = False
    b_ev, b_od = twisted_betti(space.frame)
    per_degree = betti_numbers(space.frame) if space.frame.H.is_zero() else None
    types = pair.types()
    parity_ok, parity_rule = parity_corollary(space.dim, types, b_ev, b_od)
    rep = HodgeReport(
        dims=dict(sorted(dims.items())),
        betti_even=b_ev,
        betti_odd=b_od,
        betti_degrees=per_degree,
        harmonic_total=lap.total,
        residuals={"[Lap, P_pq]": commute},
        types=types,
    )
    rep.flags = {
        "total equals twisted Betti sum": rep.total == b_ev + b_od == lap.total,
        "parity dims match exact Betti": lap.parity_dims == (b_ev, b_od),
        "conjugation symmetry": rep.conjugation_symmetric(),
        "pure closed forms are co-closed": closed_coclosed,
        "parity corollary": parity_ok,
    }
    rep.residuals["parity rule"] = parity_rule
    return rep


# -- dd^J and Lefschetz ----------------------------------------------------------

def dj_operator(J: GCStructure, frame: FrameSpec) -> OperatorMatrix:
    """``d^J_H = [d_H, spin(J)]``, exact."""
    D = twisted_d(frame)
    S = J.spin()
    return D @ S - S @ D


def ddj_check(J: GCStructure, frame: FrameSpec) -> Report:
    """Exact test of the ``d_H d^J_H`` property.

    With ``C = im(d d^J)``, always ``C`` is inside both ``ker d ∩ im d^J``
    and ``ker d^J ∩ im d``; the property holds when all three dimensions
    agree.
    """
    rep = Report("dd^J property")
    integ = check_integrability(J, frame)
    rep.add("structure integrable", integ.integrable)
    D = twisted_d(frame)
    DJ = dj_operator(J, frame)
    r_d, r_dj = D.rank(), DJ.rank()
    r_ddj = (D @ DJ).rank()
    r_djd = (DJ @ D).rank()
    a = r_dj - r_ddj  # ker d ∩ im d^J
    b = r_d - r_djd  # ker d^J ∩ im d
    c = r_ddj
    rep.add("ker d ∩ im d^J = im d d^J", a == c, f"{a} vs {c}", (a, c))
    rep.add("ker d^J ∩ im d = im d d^J", b == c, f"{b} vs {c}", (b, c))
    return rep


def dolbeault_split(J: GCStructure, frame: FrameSpec) -> tuple[np.ndarray, np.ndarray]:
    """Classical ``(del, delbar)`` for a complex-type ``J``, from bidegree projectors.

    Bidegree ``(p, q)`` = degree ``p + q`` and ``J``-eigenvalue ``i(p - q)``.
    """
    m = frame.dim
    n = m // 2
    U = _eigen_projectors(J.spin().to_array(), n)
    deg = np.array([popcount(x) for x in range(1 << m)])
    D = twisted_d(frame).to_array()
    proj = {}
    for p in range(n + 1):
        for q in range(n + 1):
            Pd = np.diag((deg == p + q).astype(complex))
            proj[(p, q)] = Pd @ U[p - q]
    dl = np.zeros_like(D)
    db = np.zeros_like(D)
    for (p, q), P in proj.items():
        if (p + 1, q) in proj:
            dl += proj[(p + 1, q)] @ D @ P
        if (p, q + 1) in proj:
            db += proj[(p, q + 1)] @ D @ P
    return dl, db


def koszul_operator(omega, frame: FrameSpec) -> OperatorMatrix:
    """``[iota_pi, d]`` with ``pi = omega^-1`` (Brylinski/Koszul codifferential)."""
    pi = inverse(exact_array(omega))
    C = bivector_contraction(pi)
    d = ce_differential(frame)
    return C @ d - d @ C


def lefschetz_check(omega, frame: FrameSpec) -> Report:
    """Does ``omega^k ^`` map ``H^{n-k}`` isomorphically onto ``H^{n+k}``?"""
    omega = exact_array(omega)
    if not np.all(omega == -omega.T):
        raise ValueError("omega must be antisymmetric")
    try:
        inverse(omega)
    except ValueError:
        raise ValueError("omega is degenerate") from None
    if not frame.H.is_zero():
        raise ValueError("the Lefschetz check needs H = 0")
    d = ce_differential(frame)
    w = two_form(omega)
    if not FormSpinor(frame.dim, d.apply(w.coeffs)).is_zero():
        raise ValueError("omega is not closed")
    m = frame.dim
    n = m // 2
    betti = betti_numbers(frame)
    deg = [[x for x in range(1 << m) if popcount(x) == k] for k in range(m + 1)]
    rep = Report("strong Lefschetz")
    power = FormSpinor.one(m)
    for k in range(n + 1):
        src, tgt = n - k, n + k
        L = wedge_operator(power)
        cocycles = nullspace(d.restrict(deg[src], deg[src + 1]) if src < m else [], len(deg[src]))
        images = []
        for z in cocycles:
            vec = {deg[src][i]: x for i, x in z.items()}
            images.append(L.apply(vec))
        bounds = []
        if tgt > 0:
            for x in deg[tgt - 1]:
                bounds.append(d.apply({x: mpq(1)}))
        r_b = rank([v for v in bounds if v])
        r_all = rank([v for v in bounds + images if v])
        induced = r_all - r_b
        iso = induced == betti[src] == betti[tgt]
        rep.add(f"k={k}: H^{src} -> H^{tgt}", iso, f"rank {induced}, b_{src} = {betti[src]}, b_{tgt} = {betti[tgt]}",
                induced)
        power = power.wedge(w)
    return rep
