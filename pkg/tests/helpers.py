"""Conversions between package objects and the oracle representation, plus random generators."""

from fractions import Fraction
import random

import numpy as np

from gengeo.multilinear import FormSpinor, GeneralizedVector
from gengeo.scalars import mpq


def to_tuples(form: FormSpinor) -> dict:
    out = {}
    for mask, x in form.coeffs.items():
        key = tuple(i for i in range(form.dim) if mask >> i & 1)
        out[key] = Fraction(int(x.numerator), int(x.denominator))
    return out


def from_tuples(m: int, f: dict) -> FormSpinor:
    return FormSpinor(m, {sum(1 << i for i in key): mpq(v.numerator, v.denominator) for key, v in f.items()})


def rand_q(rng: random.Random, span: int = 4, den: int = 3):
    return mpq(rng.randint(-span, span), rng.randint(1, den))


def rand_form(rng: random.Random, m: int, density: float = 0.5) -> FormSpinor:
    return FormSpinor(m, {k: rand_q(rng) for k in range(1 << m) if rng.random() < density})


def rand_vector(rng: random.Random, m: int) -> GeneralizedVector:
    return GeneralizedVector(tuple(rand_q(rng) for _ in range(m)), tuple(rand_q(rng) for _ in range(m)))


def rand_antisym(rng: random.Random, m: int) -> np.ndarray:
    B = np.full((m, m), mpq(0), dtype=object)
    for i in range(m):
        for j in range(i + 1, m):
            B[i, j] = rand_q(rng)
            B[j, i] = -B[i, j]
    return B


def rand_square(rng: random.Random, m: int) -> np.ndarray:
    A = np.empty((m, m), dtype=object)
    for idx in np.ndindex(A.shape):
        A[idx] = rand_q(rng)
    return A


def torus_J() -> np.ndarray:
    """The standard pair matrix: e1 -> -e3, e2 -> -e4 (so g = J^T J = I)."""
    J = np.zeros((4, 4), dtype=int)
    J[0, 2] = J[1, 3] = 1
    J[2, 0] = J[3, 1] = -1
    return J


def rotation_J(m: int, pairs) -> np.ndarray:
    """Complex structure with J e_a = e_b for each 1-based (a, b) in pairs."""
    J = np.zeros((m, m), dtype=int)
    for a, b in pairs:
        J[b - 1, a - 1] = 1
        J[a - 1, b - 1] = -1
    return J
