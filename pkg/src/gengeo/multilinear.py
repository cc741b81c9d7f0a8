"""Exterior and Clifford algebra of ``T + T*`` over a frame of dimension ``m``.

Basis forms ``e^{i1} ^ ... ^ e^{ik}`` (``i1 < ... < ik``) are stored as
bitmasks: bit ``i`` (0-based) stands for ``e^{i+1}``. Every sign comes from
counting transpositions between bitmasks, so all identities here hold in
exact arithmetic.

Generalized vectors act on forms by ``(X + xi).rho = i_X rho + xi ^ rho``
and ``T + T*`` carries the split pairing ``<X+xi, Y+eta> = (xi(Y) + eta(X))/2``.
Matrices on ``T + T*`` use the block convention ``[[A, beta], [B, -A^T]]``
acting on column vectors ``(X, xi)``; a 2-form with matrix ``B`` means
``sum_{i<j} B_ij e^i ^ e^j``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np

from .linalg import OperatorMatrix, exact_array, eye
from .scalars import GaussianRational, conj, mpq, to_exact

__all__ = [
    "popcount",
    "wedge_sign",
    "FormSpinor",
    "GeneralizedVector",
    "SoElement",
    "split_pairing",
    "split_form_matrix",
    "clifford_act",
    "clifford_operator",
    "sigma_reverse",
    "sigma_operator",
    "mukai_pairing",
    "mukai_matrix",
    "wedge_operator",
    "spin_rep",
    "group_exp",
    "two_form",
    "bivector_contraction",
    "degree_operator",
    "shear",
]


def popcount(x: int) -> int:
    return bin(x).count("1")


def wedge_sign(a: int, b: int) -> int:
    """Sign of ``e^a ^ e^b`` relative to the sorted basis form ``e^(a|b)``.

    Zero when the masks overlap.
    """
    if a & b:
        return 0
    # count pairs (i in a, j in b) with i > j
    inv = 0
    bb = b
    while bb:
        low = bb & -bb
        inv += popcount(a & ~((low << 1) - 1))
        bb ^= low
    return -1 if inv & 1 else 1


def _below(mask: int, i: int) -> int:
    return popcount(mask & ((1 << i) - 1))


def _label(mask: int) -> str:
    if mask == 0:
        return "1"
    idx = [str(i + 1) for i in range(mask.bit_length()) if mask >> i & 1]
    sep = "," if any(len(s) > 1 for s in idx) else ""
    return "e^" + sep.join(idx)


class FormSpinor:
    """A mixed-degree form, stored sparsely as ``{bitmask: coefficient}``.

    Coefficients may be exact (``mpq``/``GaussianRational``) or complex
    floats; the two should not be mixed in one computation.
    """

    __slots__ = ("dim", "coeffs")

    def __init__(self, dim: int, coeffs: Mapping[int, object] | None = None):
        self.dim = int(dim)
        full = (1 << self.dim) - 1
        c = {}
        for k, v in (coeffs or {}).items():
            if k & ~full or k < 0:
                raise ValueError(f"basis index {k} out of range for dimension {dim}")
            if v:
                c[int(k)] = v
        self.coeffs = c

    @classmethod
    def one(cls, dim: int) -> "FormSpinor":
        return cls(dim, {0: mpq(1)})

    @classmethod
    def basis(cls, dim: int, *indices: int, coeff=1) -> "FormSpinor":
        """``coeff * e^{i1} ^ e^{i2} ^ ...`` with 1-based, any-order indices."""
        form = cls(dim, {0: to_exact(coeff)})
        for i in indices:
            if not 1 <= i <= dim:
                raise ValueError(f"index {i} out of range 1..{dim}")
            form = form.wedge(cls(dim, {1 << (i - 1): mpq(1)}))
        return form

    @classmethod
    def from_two_form(cls, matrix) -> "FormSpinor":
        return two_form(matrix)

    @classmethod
    def from_vector(cls, dim: int, vec: Sequence) -> "FormSpinor":
        return cls(dim, {k: vec[k] for k in range(len(vec)) if vec[k]})

    def to_vector(self, dtype=object) -> np.ndarray:
        n = 1 << self.dim
        if dtype is object:
            out = np.full(n, mpq(0), dtype=object)
        else:
            out = np.zeros(n, dtype=dtype)
        for k, v in self.coeffs.items():
            out[k] = v if dtype is object else complex(v)
        return out

    def _check(self, other: "FormSpinor"):
        if not isinstance(other, FormSpinor):
            raise TypeError(f"expected FormSpinor, got {type(other).__name__}")
        if other.dim != self.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other):
        self._check(other)
        c = dict(self.coeffs)
        for k, v in other.coeffs.items():
            c[k] = c.get(k, 0) + v
        return FormSpinor(self.dim, c)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return FormSpinor(self.dim, {k: -v for k, v in self.coeffs.items()})

    def __mul__(self, scalar):
        if isinstance(scalar, FormSpinor):
            return NotImplemented
        return FormSpinor(self.dim, {k: scalar * v for k, v in self.coeffs.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, FormSpinor):
            return NotImplemented
        return self.dim == other.dim and (self - other).is_zero()

    __hash__ = None

    def is_zero(self) -> bool:
        return not self.coeffs

    def wedge(self, other: "FormSpinor") -> "FormSpinor":
        self._check(other)
        out: dict = {}
        for a, x in self.coeffs.items():
            for b, y in other.coeffs.items():
                s = wedge_sign(a, b)
                if s:
                    out[a | b] = out.get(a | b, 0) + (x * y if s > 0 else -(x * y))
        return FormSpinor(self.dim, out)

    __xor__ = wedge

    def degree_part(self, k: int) -> "FormSpinor":
        return FormSpinor(self.dim, {m: v for m, v in self.coeffs.items() if popcount(m) == k})

    def even(self) -> "FormSpinor":
        return FormSpinor(self.dim, {m: v for m, v in self.coeffs.items() if not popcount(m) & 1})

    def odd(self) -> "FormSpinor":
        return FormSpinor(self.dim, {m: v for m, v in self.coeffs.items() if popcount(m) & 1})

    def degrees(self) -> set[int]:
        return {popcount(m) for m in self.coeffs}

    def top(self):
        """Coefficient of ``e^1 ^ ... ^ e^m``."""
        return self.coeffs.get((1 << self.dim) - 1, mpq(0))

    def conjugate(self) -> "FormSpinor":
        return FormSpinor(self.dim, {k: conj(v) for k, v in self.coeffs.items()})

    def __getitem__(self, mask: int):
        return self.coeffs.get(mask, mpq(0))

    def __repr__(self):
        if not self.coeffs:
            return f"FormSpinor(dim={self.dim}, 0)"
        terms = " + ".join(
            f"({v})*{_label(k)}"
            for k, v in sorted(self.coeffs.items(), key=lambda kv: (popcount(kv[0]), kv[0]))
        )
        return f"FormSpinor(dim={self.dim}, {terms})"


def _check_index(i: int, dim: int):
    if not 1 <= i <= dim:
        raise ValueError(f"index {i} out of range 1..{dim}")


@dataclass(frozen=True)
class GeneralizedVector:
    """``X + xi`` with ``X`` in the frame and ``xi`` in its dual (complexified)."""

    X: tuple
    xi: tuple

    def __post_init__(self):
        if len(self.X) != len(self.xi):
            raise ValueError("vector and covector parts must have equal length")
        object.__setattr__(self, "X", tuple(self.X))
        object.__setattr__(self, "xi", tuple(self.xi))

    @property
    def dim(self) -> int:
        return len(self.X)

    @classmethod
    def vector(cls, dim: int, i: int, coeff=1):
        """``coeff * e_i`` (1-based)."""
        _check_index(i, dim)
        X = [mpq(0)] * dim
        X[i - 1] = to_exact(coeff)
        return cls(tuple(X), tuple([mpq(0)] * dim))

    @classmethod
    def covector(cls, dim: int, i: int, coeff=1):
        """``coeff * e^i`` (1-based)."""
        _check_index(i, dim)
        xi = [mpq(0)] * dim
        xi[i - 1] = to_exact(coeff)
        return cls(tuple([mpq(0)] * dim), tuple(xi))

    @classmethod
    def zero(cls, dim: int):
        z = tuple([mpq(0)] * dim)
        return cls(z, z)

    @classmethod
    def from_array(cls, v) -> "GeneralizedVector":
        v = list(v)
        if len(v) % 2:
            raise ValueError("generalized vector needs even length 2m")
        m = len(v) // 2
        return cls(tuple(v[:m]), tuple(v[m:]))

    @classmethod
    def basis(cls, dim: int) -> list["GeneralizedVector"]:
        """``e_1..e_m`` followed by ``e^1..e^m``."""
        return [cls.vector(dim, i) for i in range(1, dim + 1)] + [
            cls.covector(dim, i) for i in range(1, dim + 1)
        ]

    def to_array(self) -> np.ndarray:
        return np.array(list(self.X) + list(self.xi), dtype=object)

    def __add__(self, other: "GeneralizedVector"):
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        return GeneralizedVector(
            tuple(a + b for a, b in zip(self.X, other.X)),
            tuple(a + b for a, b in zip(self.xi, other.xi)),
        )

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return GeneralizedVector(tuple(-a for a in self.X), tuple(-a for a in self.xi))

    def __mul__(self, s):
        return GeneralizedVector(tuple(s * a for a in self.X), tuple(s * a for a in self.xi))

    __rmul__ = __mul__

    def conjugate(self):
        return GeneralizedVector(tuple(conj(a) for a in self.X), tuple(conj(a) for a in self.xi))

    def is_zero(self) -> bool:
        return not any(self.X) and not any(self.xi)

    def __eq__(self, other):
        if not isinstance(other, GeneralizedVector):
            return NotImplemented
        return self.dim == other.dim and (self - other).is_zero()

    def __hash__(self):
        return hash((self.X, self.xi))


def split_pairing(u: GeneralizedVector, v: GeneralizedVector):
    """``<X+xi, Y+eta> = (xi(Y) + eta(X)) / 2``."""
    if u.dim != v.dim:
        raise ValueError(f"dimension mismatch: {u.dim} vs {v.dim}")
    s = 0
    for a, b in zip(u.xi, v.X):
        s = s + a * b
    for a, b in zip(v.xi, u.X):
        s = s + a * b
    return s / 2


def split_form_matrix(dim: int) -> np.ndarray:
    """Gram matrix of the split pairing in the basis ``(e_i, e^i)``."""
    half = mpq(1, 2)
    out = np.full((2 * dim, 2 * dim), mpq(0), dtype=object)
    for i in range(dim):
        out[i, dim + i] = half
        out[dim + i, i] = half
    return out


def _contract_basis(i: int, mask: int):
    """``i_{e_{i+1}} e^mask`` as (sign, mask) or ``None``."""
    if not mask >> i & 1:
        return None
    return (-1 if _below(mask, i) & 1 else 1), mask ^ (1 << i)


def _wedge1_basis(i: int, mask: int):
    """``e^{i+1} ^ e^mask`` as (sign, mask) or ``None``."""
    if mask >> i & 1:
        return None
    return (-1 if _below(mask, i) & 1 else 1), mask | (1 << i)


def clifford_act(v: GeneralizedVector, rho: FormSpinor) -> FormSpinor:
    """``(X + xi) . rho = i_X rho + xi ^ rho``."""
    if v.dim != rho.dim:
        raise ValueError(f"dimension mismatch: vector {v.dim}, form {rho.dim}")
    out: dict = {}
    for mask, c in rho.coeffs.items():
        for i in range(v.dim):
            x = v.X[i]
            if x:
                r = _contract_basis(i, mask)
                if r:
                    s, m2 = r
                    out[m2] = out.get(m2, 0) + (s * x) * c
            y = v.xi[i]
            if y:
                r = _wedge1_basis(i, mask)
                if r:
                    s, m2 = r
                    out[m2] = out.get(m2, 0) + (s * y) * c
    return FormSpinor(rho.dim, out)


def clifford_operator(v: GeneralizedVector) -> OperatorMatrix:
    """Clifford action of ``v`` as an operator on the ``2^m`` form space."""
    m = v.dim
    return OperatorMatrix.from_function(
        1 << m, lambda j: clifford_act(v, FormSpinor(m, {j: mpq(1)})).coeffs
    )


def sigma_reverse(rho: FormSpinor) -> FormSpinor:
    """Reversal anti-automorphism: degree ``k`` picks up ``(-1)^(k(k-1)/2)``."""
    return FormSpinor(
        rho.dim,
        {m: (-v if (popcount(m) * (popcount(m) - 1) // 2) & 1 else v) for m, v in rho.coeffs.items()},
    )


@lru_cache(maxsize=None)
def sigma_operator(dim: int) -> OperatorMatrix:
    return OperatorMatrix(
        1 << dim,
        [{j: mpq(-1 if (popcount(j) * (popcount(j) - 1) // 2) & 1 else 1)} for j in range(1 << dim)],
    )


def mukai_pairing(alpha: FormSpinor, beta: FormSpinor):
    """Top-degree coefficient of ``alpha ^ sigma(beta)``."""
    if alpha.dim != beta.dim:
        raise ValueError(f"dimension mismatch: {alpha.dim} vs {beta.dim}")
    top = (1 << alpha.dim) - 1
    s = mpq(0)
    for a, x in alpha.coeffs.items():
        b = top ^ a
        y = beta.coeffs.get(b)
        if y:
            k = popcount(b)
            sign = wedge_sign(a, b) * (-1 if (k * (k - 1) // 2) & 1 else 1)
            s = s + (x * y if sign > 0 else -(x * y))
    return s


@lru_cache(maxsize=None)
def mukai_matrix(dim: int) -> OperatorMatrix:
    """``P[I, J] = <e^I, e^J>``; stored as an operator so that ``P.cols[J][I]`` is the entry."""
    top = (1 << dim) - 1
    cols = []
    for j in range(1 << dim):
        i = top ^ j
        k = popcount(j)
        s = wedge_sign(i, j) * (-1 if (k * (k - 1) // 2) & 1 else 1)
        cols.append({i: mpq(s)})
    return OperatorMatrix(1 << dim, cols)


def wedge_operator(form: FormSpinor) -> OperatorMatrix:
    """Left multiplication ``rho -> form ^ rho``."""
    m = form.dim
    return OperatorMatrix.from_function(
        1 << m, lambda j: form.wedge(FormSpinor(m, {j: mpq(1)})).coeffs
    )


def two_form(matrix) -> FormSpinor:
    """``sum_{i<j} B_ij e^i ^ e^j`` for an antisymmetric matrix ``B``."""
    b = np.asarray(matrix, dtype=object)
    m = b.shape[0]
    out = {}
    for i, j in combinations(range(m), 2):
        if b[i, j]:
            out[(1 << i) | (1 << j)] = b[i, j]
    return FormSpinor(m, out)


def bivector_contraction(beta) -> OperatorMatrix:
    """``iota_beta = sum_{i<j} beta^{ij} i_{e_i} i_{e_j}``."""
    b = np.asarray(beta, dtype=object)
    m = b.shape[0]

    def image(mask):
        out: dict = {}
        for i, j in combinations(range(m), 2):
            c = b[i, j]
            if not c:
                continue
            r = _contract_basis(j, mask)
            if not r:
                continue
            s1, m1 = r
            r = _contract_basis(i, m1)
            if not r:
                continue
            s2, m2 = r
            out[m2] = out.get(m2, 0) + (s1 * s2) * c
        return out

    return OperatorMatrix.from_function(1 << m, image)


def _gl_derivation(a) -> OperatorMatrix:
    """Derivation extending ``xi -> xi o A`` on 1-forms to all forms."""
    a = np.asarray(a, dtype=object)
    m = a.shape[0]

    def image(mask):
        out: dict = {}
        # e^k o A = sum_j A[k, j] e^j ; replace e^k by it in place
        for k in range(m):
            if not mask >> k & 1:
                continue
            rest = mask ^ (1 << k)
            pos_sign = -1 if _below(mask, k) & 1 else 1  # move e^k to the front
            for j in range(m):
                c = a[k, j]
                if not c:
                    continue
                r = _wedge1_basis(j, rest)
                if not r:
                    continue
                s, m2 = r
                out[m2] = out.get(m2, 0) + (pos_sign * s) * c
        return out

    return OperatorMatrix.from_function(1 << m, image)


@lru_cache(maxsize=None)
def degree_operator(dim: int) -> OperatorMatrix:
    return OperatorMatrix(1 << dim, [{j: mpq(popcount(j))} if j else {} for j in range(1 << dim)])


@dataclass(frozen=True, eq=False)
class SoElement:
    """Element of so(T + T*) = End(T) + wedge^2 T + wedge^2 T*.

    As a matrix on ``(X, xi)`` it is ``[[A, beta], [B, -A^T]]``.
    """

    A: np.ndarray
    beta: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = exact_array(self.A) if np.asarray(self.A).dtype == object else np.asarray(self.A)
        beta = exact_array(self.beta) if np.asarray(self.beta).dtype == object else np.asarray(self.beta)
        B = exact_array(self.B) if np.asarray(self.B).dtype == object else np.asarray(self.B)
        m = A.shape[0]
        if A.shape != (m, m) or beta.shape != (m, m) or B.shape != (m, m):
            raise ValueError("blocks must be square of equal size")
        if not (np.all(beta == -beta.T) and np.all(B == -B.T)):
            raise ValueError("beta and B blocks must be antisymmetric")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "B", B)

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    @classmethod
    def zero(cls, dim: int):
        z = np.full((dim, dim), mpq(0), dtype=object)
        return cls(z, z.copy(), z.copy())

    @classmethod
    def from_B(cls, B):
        B = exact_array(B)
        z = np.full(B.shape, mpq(0), dtype=object)
        return cls(z, z.copy(), B)

    @classmethod
    def from_beta(cls, beta):
        beta = exact_array(beta)
        z = np.full(beta.shape, mpq(0), dtype=object)
        return cls(z, beta, z.copy())

    @classmethod
    def from_A(cls, A):
        A = exact_array(A)
        z = np.full(A.shape, mpq(0), dtype=object)
        return cls(A, z, z.copy())

    @classmethod
    def from_matrix(cls, Q) -> "SoElement":
        """Split a ``2m x 2m`` matrix; raises if it is not split-antisymmetric."""
        Q = np.asarray(Q, dtype=object)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1] or Q.shape[0] % 2:
            raise ValueError("expected a square matrix of even size")
        m = Q.shape[0] // 2
        Q = exact_array(Q)
        A, beta, B, D = Q[:m, :m], Q[:m, m:], Q[m:, :m], Q[m:, m:]
        if not np.all(D == -A.T):
            raise ValueError("matrix is not antisymmetric for the split pairing (D != -A^T)")
        if not (np.all(beta == -beta.T) and np.all(B == -B.T)):
            raise ValueError("matrix is not antisymmetric for the split pairing (off-diagonal blocks)")
        return cls(A, beta, B)

    def to_matrix(self) -> np.ndarray:
        return np.block([[self.A, self.beta], [self.B, -self.A.T]])

    def apply(self, v: GeneralizedVector) -> GeneralizedVector:
        return GeneralizedVector.from_array(self.to_matrix().dot(v.to_array()))

    def __neg__(self):
        return SoElement(-self.A, -self.beta, -self.B)

    def __mul__(self, s):
        s = to_exact(s)
        return SoElement(self.A * s, self.beta * s, self.B * s)

    __rmul__ = __mul__

    def __add__(self, other: "SoElement"):
        return SoElement(self.A + other.A, self.beta + other.beta, self.B + other.B)


def spin_rep(Q) -> OperatorMatrix:
    """Spinor action of ``Q`` in so(T + T*) on forms.

    ``rho -> B ^ rho + iota_beta rho - A^dagger rho + tr(A)/2 rho`` where
    ``A^dagger`` is the derivation ``xi -> xi o A``. Characterized by
    ``[spin_rep(Q), v.] = (Qv).`` for every generalized vector ``v``.
    """
    if not isinstance(Q, SoElement):
        Q = SoElement.from_matrix(Q)
    m = Q.dim
    op = wedge_operator(two_form(Q.B)) + bivector_contraction(Q.beta) - _gl_derivation(Q.A)
    tr = sum(Q.A[i, i] for i in range(m))
    if tr:
        op = op + OperatorMatrix.identity(1 << m, tr / 2)
    return op


def group_exp(Q, terms: int | None = None) -> OperatorMatrix:
    """``exp(spin_rep(Q))`` as an exact operator.

    Summed until the powers vanish, which happens after at most ``m/2 + 1``
    terms for pure B-field or bivector elements. Anything else needs an
    explicit ``terms`` bound (the series is then truncated).
    """
    S = Q if isinstance(Q, OperatorMatrix) else spin_rep(Q)
    limit = (S.size.bit_length() - 1) + 2 if terms is None else terms
    total = OperatorMatrix.identity(S.size)
    power = OperatorMatrix.identity(S.size)
    for k in range(1, limit + 1):
        power = (S @ power) * mpq(1, k)
        if power.is_zero():
            return total
        total = total + power
    if terms is None:
        raise ValueError(
            "spinor action is not nilpotent; pass terms=N for a truncated exponential"
        )
    return total


def shear(B) -> np.ndarray:
    """``exp(B)`` on ``T + T*``: ``X + xi -> X + xi + B X``."""
    B = exact_array(B)
    m = B.shape[0]
    z = np.full((m, m), mpq(0), dtype=object)
    return np.block([[eye(m), z], [B, eye(m)]])
