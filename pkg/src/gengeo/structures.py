"""Generalized complex structures, generalized metrics and generalized Kähler pairs.

All matrices are exact ``4n x 4n`` (or ``2n x 2n``) object arrays in the
block convention of :mod:`gengeo.multilinear`.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement

import numpy as np

from .frame import FrameSpec, dorfman_bracket
from .linalg import exact_array, eye, inverse, is_positive_definite, nullspace, rank
from .multilinear import GeneralizedVector, SoElement, shear, split_form_matrix, split_pairing, spin_rep
from .reports import Report
from .scalars import GaussianRational, I, mpq

__all__ = [
    "GCStructure",
    "GenMetric",
    "GKPair",
    "from_complex",
    "from_symplectic",
    "from_matrix",
    "eigenbundle",
    "Integrability",
    "check_integrability",
    "type_of",
    "gen_metric",
    "gk_validate",
    "b_transform",
    "kahler_pair",
]


def _zeros(n):
    return np.full((n, n), mpq(0), dtype=object)


class GCStructure:
    """An orthogonal complex structure ``J`` on ``T + T*``.

    Construction checks ``J^2 = -1`` and split-antisymmetry exactly; it does
    not check integrability, which depends on the frame.
    """

    def __init__(self, J, name: str = ""):
        J = exact_array(J)
        if J.shape[0] != J.shape[1] or J.shape[0] % 4:
            raise ValueError("J must be a square matrix of size 4n")
        if not np.all(J.dot(J) == -eye(J.shape[0])):
            raise ValueError("J does not square to -1")
        self.so = SoElement.from_matrix(J)
        self.J = J
        self.name = name

    @property
    def dim(self) -> int:
        """Frame dimension ``2n``."""
        return self.J.shape[0] // 2

    @property
    def n(self) -> int:
        return self.J.shape[0] // 4

    def spin(self):
        """Spinor action of ``J`` on forms (eigenvalues ``ik``, ``|k| <= n``)."""
        return spin_rep(self.so)

    def apply(self, v: GeneralizedVector) -> GeneralizedVector:
        return GeneralizedVector.from_array(self.J.dot(v.to_array()))

    def __eq__(self, other):
        if not isinstance(other, GCStructure):
            return NotImplemented
        return self.J.shape == other.J.shape and bool(np.all(self.J == other.J))

    __hash__ = None

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return f"GCStructure{label}(dim={self.dim}, type={type_of(self)})"


def from_matrix(J, name: str = "") -> GCStructure:
    return GCStructure(J, name)


def from_complex(J_T, name: str = "") -> GCStructure:
    """``[[-J, 0], [0, J^T]]`` for a complex structure ``J`` on the frame."""
    J_T = exact_array(J_T)
    m = J_T.shape[0]
    if not np.all(J_T.dot(J_T) == -eye(m)):
        raise ValueError("J_T does not square to -1")
    return GCStructure(np.block([[-J_T, _zeros(m)], [_zeros(m), J_T.T]]), name)


def from_symplectic(omega, name: str = "") -> GCStructure:
    """``[[0, omega^-1], [-omega, 0]]`` for a nondegenerate 2-form ``omega``."""
    omega = exact_array(omega)
    if not np.all(omega == -omega.T):
        raise ValueError("omega must be antisymmetric")
    try:
        inv = inverse(omega)
    except ValueError:
        raise ValueError("omega is degenerate") from None
    m = omega.shape[0]
    return GCStructure(np.block([[_zeros(m), inv], [-omega, _zeros(m)]]), name)


def eigenbundle(J: GCStructure) -> list[GeneralizedVector]:
    """Exact basis of the ``+i`` eigenspace ``E`` over the Gaussian rationals."""
    N = J.J.shape[0]
    M = np.empty((N, N), dtype=object)
    for a in range(N):
        for c in range(N):
            M[a, c] = J.J[a, c] - (I if a == c else 0)
    vecs = nullspace(M, N)
    out = []
    for v in vecs:
        arr = [v.get(k, mpq(0)) for k in range(N)]
        out.append(GeneralizedVector.from_array(arr))
    if len(out) != N // 2:
        raise ArithmeticError(f"eigenbundle has dimension {len(out)}, expected {N // 2}")
    return out


@dataclass
class Integrability:
    integrable: bool
    witness: tuple | None = None  # (index_a, index_b, residual (J - i) [e_a, e_b])

    def __bool__(self):
        return self.integrable


def _in_E(J: GCStructure, w: GeneralizedVector):
    """Residual ``(J - i) w``; zero exactly when ``w`` lies in ``E``."""
    return GeneralizedVector.from_array(J.J.dot(w.to_array())) - w * I


def check_integrability(J: GCStructure, frame: FrameSpec, basis=None) -> Integrability:
    """Is ``E`` closed under the Dorfman bracket of ``frame``?"""
    if J.dim != frame.dim:
        raise ValueError("structure and frame dimensions differ")
    E = eigenbundle(J) if basis is None else basis
    for a, b in combinations_with_replacement(range(len(E)), 2):
        r = _in_E(J, dorfman_bracket(E[a], E[b], frame))
        if not r.is_zero():
            return Integrability(False, (a, b, r))
    return Integrability(True)


def type_of(J: GCStructure) -> int:
    """``n - rank(beta)/2`` where ``beta`` is the bivector block."""
    return J.n - rank(J.so.beta) // 2


@dataclass(frozen=True, eq=False)
class GenMetric:
    """Generalized metric from ``(g, b)``: ``C+ = graph(b + g)``, ``C- = graph(b - g)``."""

    g: np.ndarray
    b: np.ndarray

    @property
    def dim(self) -> int:
        return self.g.shape[0]

    @property
    def G(self) -> np.ndarray:
        """``[[-g^-1 b, g^-1], [g - b g^-1 b, b g^-1]]``."""
        gi = inverse(self.g)
        b = self.b
        return np.block([[-gi.dot(b), gi], [self.g - b.dot(gi).dot(b), b.dot(gi)]])

    def three_factor(self) -> np.ndarray:
        """``exp(b) [[0, g^-1], [g, 0]] exp(-b)``."""
        m = self.dim
        mid = np.block([[_zeros(m), inverse(self.g)], [self.g, _zeros(m)]])
        return shear(self.b).dot(mid).dot(shear(-self.b))

    def induced_metric(self) -> np.ndarray:
        """Restriction to ``T``: ``g - b g^-1 b``."""
        return self.g - self.b.dot(inverse(self.g)).dot(self.b)

    def _graph(self, sign: int) -> list[GeneralizedVector]:
        m = self.dim
        mat = self.b + self.g * sign
        out = []
        for i in range(m):
            X = [mpq(1) if k == i else mpq(0) for k in range(m)]
            out.append(GeneralizedVector(tuple(X), tuple(mat[:, i])))
        return out

    def c_plus(self) -> list[GeneralizedVector]:
        return self._graph(1)

    def c_minus(self) -> list[GeneralizedVector]:
        return self._graph(-1)

    def metric_form(self) -> np.ndarray:
        """Matrix of the positive-definite form ``<G u, v>`` on ``T + T*``."""
        return split_form_matrix(self.dim).dot(self.G)

    def transform(self, b_prime) -> "GenMetric":
        return GenMetric(self.g, self.b + exact_array(b_prime))


def gen_metric(g, b=None) -> GenMetric:
    g = exact_array(g)
    m = g.shape[0]
    b = _zeros(m) if b is None else exact_array(b)
    if not is_positive_definite(g):
        raise ValueError("g is not symmetric positive-definite")
    if not np.all(b == -b.T):
        raise ValueError("b must be antisymmetric")
    return GenMetric(g, b)


def metric_from_involution(G) -> GenMetric:
    """Recover ``(g, b)`` from ``G``; raises if ``G`` is not of metric form."""
    G = exact_array(G)
    m = G.shape[0] // 2
    if not np.all(G.dot(G) == eye(2 * m)):
        raise ValueError("G is not an involution")
    try:
        g = inverse(G[:m, m:])
    except ValueError:
        raise ValueError("upper-right block of G is singular") from None
    b = G[m:, m:].dot(g)
    met = gen_metric(g, b)
    if not np.all(met.G == G):
        raise ValueError("G is not of the form determined by (g, b)")
    return met


class GKPair:
    """Two commuting generalized complex structures with ``G = -J1 J2``."""

    def __init__(self, J1: GCStructure, J2: GCStructure):
        if J1.dim != J2.dim:
            raise ValueError("structures have different dimensions")
        self.J1 = J1
        self.J2 = J2

    @property
    def dim(self) -> int:
        return self.J1.dim

    @property
    def n(self) -> int:
        return self.J1.n

    @property
    def G(self) -> np.ndarray:
        return -self.J1.J.dot(self.J2.J)

    def commute(self) -> bool:
        return bool(np.all(self.J1.J.dot(self.J2.J) == self.J2.J.dot(self.J1.J)))

    def metric(self) -> GenMetric:
        return metric_from_involution(self.G)

    def types(self) -> tuple[int, int]:
        return type_of(self.J1), type_of(self.J2)

    def __repr__(self):
        return f"GKPair(dim={self.dim}, types={self.types()})"


def kahler_pair(J_T, omega) -> GKPair:
    """The pair (complex, symplectic) attached to a Kähler triple; ``g = J^T omega``."""
    return GKPair(from_complex(J_T, "J1"), from_symplectic(omega, "J2"))


def gk_validate(pair: GKPair, frame: FrameSpec) -> Report:
    """Commutation, metric positivity, integrability and type constraints."""
    rep = Report("generalized Kähler pair")
    n = pair.n
    rep.add("J1 J2 = J2 J1", pair.commute())
    G = pair.G
    metric_ok = False
    detail = ""
    try:
        met = pair.metric()
        metric_ok = is_positive_definite(met.metric_form() * 2)
    except ValueError as exc:
        detail = str(exc)
    rep.add("-J1 J2 is a generalized metric", metric_ok, detail)
    for label, J in (("J1", pair.J1), ("J2", pair.J2)):
        res = check_integrability(J, frame)
        w = ""
        if not res:
            a, b, _ = res.witness
            w = f"[E_{a}, E_{b}] leaves E"
        rep.add(f"{label} integrable", res.integrable, w)
    t1, t2 = pair.types()
    rep.add("type sum parity", (t1 + t2) % 2 == n % 2, f"types ({t1}, {t2}), n = {n}", (t1, t2))
    rep.add("type sum bound", t1 + t2 <= n, f"{t1} + {t2} <= {n}")
    return rep


def b_transform(obj, b_prime):
    """Conjugate by the shear ``exp(b')``; a metric ``(g, b)`` goes to ``(g, b + b')``."""
    b_prime = exact_array(b_prime)
    if not np.all(b_prime == -b_prime.T):
        raise ValueError("b' must be antisymmetric")
    if isinstance(obj, GenMetric):
        return obj.transform(b_prime)
    if isinstance(obj, GCStructure):
        S = shear(b_prime)
        return GCStructure(S.dot(obj.J).dot(shear(-b_prime)), obj.name)
    if isinstance(obj, GKPair):
        return GKPair(b_transform(obj.J1, b_prime), b_transform(obj.J2, b_prime))
    raise TypeError(f"cannot B-transform {type(obj).__name__}")


def is_isotropic(vectors) -> bool:
    return all(not split_pairing(u, v) for u in vectors for v in vectors)
