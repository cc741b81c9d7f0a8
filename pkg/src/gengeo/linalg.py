"""Exact and floating linear algebra used throughout the package.

Exact matrices are handled in two shapes:

* :class:`OperatorMatrix` -- a sparse square operator stored column by
  column (``cols[j]`` is the image of basis vector ``j`` as a ``{row: value}``
  dict). This is what d, d_H, Clifford actions and spin actions are.
* small dense matrices (4n x 4n structures, metrics) as numpy ``object``
  arrays of ``mpq`` / :class:`~gengeo.scalars.GaussianRational` entries.

Ranks and kernels are computed by fraction-exact Gaussian elimination on
sparse rows; entries can be any field elements supporting ``+ - * /``.
"""

from __future__ import annotations

from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .scalars import GaussianRational, conj, mpq, to_exact

__all__ = [
    "OperatorMatrix",
    "exact_array",
    "eye",
    "rref_rows",
    "rank",
    "nullspace",
    "solve",
    "inverse",
    "det",
    "is_positive_definite",
    "float_rank",
    "float_kernel",
    "to_complex",
]


def _clean(d: dict) -> dict:
    return {k: v for k, v in d.items() if v}


class OperatorMatrix:
    """Sparse exact square matrix acting on coefficient vectors.

    Vectors are ``{index: value}`` dicts. ``A @ B`` composes, ``A @ v``
    applies to a sparse vector.
    """

    __slots__ = ("size", "cols")

    def __init__(self, size: int, cols: Sequence[Mapping[int, object]]):
        if len(cols) != size:
            raise ValueError(f"expected {size} columns, got {len(cols)}")
        self.size = size
        self.cols = tuple(_clean(dict(c)) for c in cols)

    @classmethod
    def from_function(cls, size: int, image: Callable[[int], Mapping[int, object]]):
        return cls(size, [image(j) for j in range(size)])

    @classmethod
    def identity(cls, size: int, scale=1):
        s = to_exact(scale)
        return cls(size, [{j: s} for j in range(size)])

    @classmethod
    def zero(cls, size: int):
        return cls(size, [{} for _ in range(size)])

    @classmethod
    def from_dense(cls, a) -> "OperatorMatrix":
        a = np.asarray(a, dtype=object)
        n = a.shape[0]
        return cls(n, [{i: to_exact(a[i, j]) for i in range(n) if a[i, j]} for j in range(n)])

    def apply(self, v: Mapping[int, object]) -> dict:
        out: dict = {}
        for j, x in v.items():
            if not x:
                continue
            for i, a in self.cols[j].items():
                out[i] = out.get(i, 0) + a * x
        return _clean(out)

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            self._check(other)
            return OperatorMatrix(self.size, [self.apply(c) for c in other.cols])
        if isinstance(other, Mapping):
            return self.apply(other)
        return NotImplemented

    def __add__(self, other: "OperatorMatrix"):
        self._check(other)
        cols = []
        for a, b in zip(self.cols, other.cols):
            c = dict(a)
            for i, x in b.items():
                c[i] = c.get(i, 0) + x
            cols.append(c)
        return OperatorMatrix(self.size, cols)

    def __sub__(self, other: "OperatorMatrix"):
        return self + (-other)

    def __neg__(self):
        return OperatorMatrix(self.size, [{i: -x for i, x in c.items()} for c in self.cols])

    def __mul__(self, scalar):
        s = to_exact(scalar) if not isinstance(scalar, GaussianRational) else scalar
        return OperatorMatrix(self.size, [{i: s * x for i, x in c.items()} for c in self.cols])

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, OperatorMatrix):
            return NotImplemented
        return self.size == other.size and all(
            a == b for a, b in zip(self.cols, other.cols)
        )

    __hash__ = None

    def _check(self, other):
        if self.size != other.size:
            raise ValueError(f"operator size mismatch: {self.size} vs {other.size}")

    def commutator(self, other: "OperatorMatrix", graded_sign: int = 1):
        """``self @ other - graded_sign * other @ self``; pass -1 for an anticommutator."""
        return self @ other - (other @ self) * graded_sign

    def is_zero(self) -> bool:
        return not any(self.cols)

    def nnz(self) -> int:
        return sum(len(c) for c in self.cols)

    @property
    def T(self) -> "OperatorMatrix":
        cols: list[dict] = [{} for _ in range(self.size)]
        for j, c in enumerate(self.cols):
            for i, x in c.items():
                cols[i][j] = x
        return OperatorMatrix(self.size, cols)

    def conjugate(self) -> "OperatorMatrix":
        return OperatorMatrix(self.size, [{i: conj(x) for i, x in c.items()} for c in self.cols])

    def is_real(self) -> bool:
        return not any(
            isinstance(x, GaussianRational) and x.im for c in self.cols for x in c.values()
        )

    def rows(self) -> list[dict]:
        rows: list[dict] = [{} for _ in range(self.size)]
        for j, c in enumerate(self.cols):
            for i, x in c.items():
                rows[i][j] = x
        return rows

    def restrict(self, domain: Sequence[int], codomain: Sequence[int]) -> list[dict]:
        """Rows of the block mapping span(domain) -> span(codomain), as sparse dicts."""
        cpos = {r: k for k, r in enumerate(codomain)}
        rows: list[dict] = [{} for _ in codomain]
        for k, j in enumerate(domain):
            for i, x in self.cols[j].items():
                if i in cpos:
                    rows[cpos[i]][k] = x
        return rows

    def rank(self) -> int:
        return rank(self.rows())

    def to_array(self, dtype=complex) -> np.ndarray:
        out = np.zeros((self.size, self.size), dtype=dtype)
        for j, c in enumerate(self.cols):
            for i, x in c.items():
                out[i, j] = complex(x) if dtype is complex else x
        return out

    def to_dense(self) -> np.ndarray:
        out = np.full((self.size, self.size), mpq(0), dtype=object)
        for j, c in enumerate(self.cols):
            for i, x in c.items():
                out[i, j] = x
        return out

    def __repr__(self):
        return f"OperatorMatrix(size={self.size}, nnz={self.nnz()})"


def exact_array(rows) -> np.ndarray:
    """Dense object array with every entry converted to an exact scalar."""
    a = np.asarray(rows, dtype=object)
    if a.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    out = np.empty(a.shape, dtype=object)
    for idx in np.ndindex(a.shape):
        out[idx] = to_exact(a[idx])
    return out


def eye(n: int) -> np.ndarray:
    out = np.full((n, n), mpq(0), dtype=object)
    for i in range(n):
        out[i, i] = mpq(1)
    return out


def _as_rows(m) -> list[dict]:
    if isinstance(m, OperatorMatrix):
        return m.rows()
    if isinstance(m, np.ndarray):
        return [{j: x for j, x in enumerate(r) if x} for r in m]
    rows = list(m)
    if rows and isinstance(rows[0], Mapping):
        return [dict(r) for r in rows]
    return [{j: x for j, x in enumerate(r) if x} for r in rows]


def rref_rows(rows: Iterable[Mapping[int, object]]) -> tuple[list[dict], list[int]]:
    """Reduced row echelon form of sparse rows; returns (nonzero rows, pivot columns)."""
    work = [dict(r) for r in rows if r]
    pivots: list[int] = []
    done: list[dict] = []
    while work:
        # pick the row with the smallest leading column, shortest first
        best = min(range(len(work)), key=lambda k: (min(work[k]), len(work[k])))
        prow = work.pop(best)
        pc = min(prow)
        inv = 1 / prow[pc]
        prow = {c: x * inv for c, x in prow.items()}
        nxt = []
        for r in work:
            f = r.get(pc)
            if f:
                for c, x in prow.items():
                    v = r.get(c, 0) - f * x
                    if v:
                        r[c] = v
                    else:
                        r.pop(c, None)
            if r:
                nxt.append(r)
        work = nxt
        for r in done:
            f = r.get(pc)
            if f:
                for c, x in prow.items():
                    v = r.get(c, 0) - f * x
                    if v:
                        r[c] = v
                    else:
                        r.pop(c, None)
        done.append(prow)
        pivots.append(pc)
    order = sorted(range(len(done)), key=lambda k: pivots[k])
    return [done[k] for k in order], [pivots[k] for k in order]


def rank(m) -> int:
    """Exact rank of a matrix given as sparse rows, dense rows or an OperatorMatrix."""
    return len(rref_rows(_as_rows(m))[1])


def nullspace(m, ncols: int | None = None) -> list[dict]:
    """Exact basis of the right kernel, as sparse vectors."""
    rows = _as_rows(m)
    if ncols is None:
        if isinstance(m, (OperatorMatrix,)):
            ncols = m.size
        elif isinstance(m, np.ndarray):
            ncols = m.shape[1]
        else:
            ncols = 1 + max((max(r) for r in rows if r), default=-1)
    red, piv = rref_rows(rows)
    pset = set(piv)
    basis = []
    for f in range(ncols):
        if f in pset:
            continue
        v = {f: mpq(1)}
        for r, pc in zip(red, piv):
            x = r.get(f)
            if x:
                v[pc] = -x
        basis.append(v)
    return basis


def solve(a, b) -> list | None:
    """Solve ``a x = b`` exactly for dense ``a`` (object array) and list ``b``.

    Returns one solution (free variables zero) or ``None`` if inconsistent.
    """
    a = np.asarray(a, dtype=object)
    nrow, ncol = a.shape
    rows = []
    for i in range(nrow):
        r = {j: a[i, j] for j in range(ncol) if a[i, j]}
        if b[i]:
            r[ncol] = b[i]
        rows.append(r)
    red, piv = rref_rows(rows)
    if ncol in piv:
        return None
    x = [mpq(0)] * ncol
    for r, pc in zip(red, piv):
        x[pc] = r.get(ncol, mpq(0))
    return x


def inverse(a) -> np.ndarray:
    """Exact inverse of a square object array; raises ``ValueError`` if singular."""
    a = np.asarray(a, dtype=object)
    n = a.shape[0]
    rows = [{**{j: a[i, j] for j in range(n) if a[i, j]}, n + i: mpq(1)} for i in range(n)]
    red, piv = rref_rows(rows)
    if len(piv) < n or piv[n - 1] >= n:
        raise ValueError("matrix is singular")
    out = np.full((n, n), mpq(0), dtype=object)
    for i, r in enumerate(red):
        for c, x in r.items():
            if c >= n:
                out[i, c - n] = x
    return out


def det(a):
    """Exact determinant by fraction elimination."""
    m = [list(r) for r in np.asarray(a, dtype=object)]
    n = len(m)
    sign = 1
    d = mpq(1)
    for c in range(n):
        p = next((r for r in range(c, n) if m[r][c]), None)
        if p is None:
            return mpq(0)
        if p != c:
            m[c], m[p] = m[p], m[c]
            sign = -sign
        d = d * m[c][c]
        for r in range(c + 1, n):
            f = m[r][c] / m[c][c]
            if f:
                for k in range(c, n):
                    m[r][k] = m[r][k] - f * m[c][k]
    return d * sign


def is_positive_definite(a) -> bool:
    """Exact Sylvester-style test for a symmetric rational matrix."""
    m = [list(r) for r in np.asarray(a, dtype=object)]
    n = len(m)
    for i in range(n):
        for j in range(n):
            if m[i][j] != m[j][i]:
                return False
    for c in range(n):
        if not m[c][c] > 0:
            return False
        for r in range(c + 1, n):
            f = m[r][c] / m[c][c]
            if f:
                for k in range(c, n):
                    m[r][k] = m[r][k] - f * m[c][k]
    return True


# -- floating point -----------------------------------------------------------

def to_complex(a) -> np.ndarray:
    if isinstance(a, OperatorMatrix):
        return a.to_array(complex)
    a = np.asarray(a)
    if a.dtype == object:
        return np.vectorize(complex, otypes=[complex])(a)
    return a.astype(complex)


def _threshold(s: np.ndarray, tol: float) -> float:
    return tol * (s[0] if s.size and s[0] > 0 else 1.0)


def float_rank(a: np.ndarray, tol: float = 1e-9) -> int:
    """Rank counting singular values above ``tol`` times the largest one."""
    a = np.asarray(a)
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > _threshold(s, tol)))


def float_kernel(a: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Orthonormal basis (columns) of the numerical kernel, relative threshold."""
    a = np.asarray(a)
    n = a.shape[1]
    if a.shape[0] == 0:
        return np.eye(n, dtype=a.dtype)
    _, s, vh = np.linalg.svd(a)
    if s.size == 0 or s[0] == 0:
        return np.eye(n, dtype=complex)
    r = int(np.sum(s > _threshold(s, tol)))
    return vh[r:].conj().T
