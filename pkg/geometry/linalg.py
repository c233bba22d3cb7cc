"""Rank and determinant kernels for both backends.

Exact work goes through sympy matrices over QQ (Bareiss determinants, so
every minor stays fraction-free); numeric work goes through scipy's SVD and
LU factorisations.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np
import scipy.linalg
import sympy

from geometry.backends import COMPLEX, RATIONAL, ScalarBackend


@dataclass(frozen=True)
class RankResult:
    """Rank of a vector family with its evidence"""

    rank: int
    backend: str
    minor: Optional[Fraction] = None
    pivot_rows: List[int] = field(default_factory=list)
    pivot_cols: List[int] = field(default_factory=list)
    singular_values: Optional[List[float]] = None


def to_sympy_matrix(rows: Sequence[Sequence[Fraction]]) -> sympy.Matrix:
    return sympy.Matrix([[sympy.Rational(v.numerator, v.denominator) for v in row] for row in rows])


def from_sympy(value) -> Fraction:
    value = sympy.Rational(value)
    return Fraction(int(value.p), int(value.q))


def exact_determinant(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    """Determinant by fraction-free (Bareiss) elimination"""
    if len(rows) == 0:
        return Fraction(1)
    return from_sympy(to_sympy_matrix(rows).det(method="bareiss"))


def exact_rank(rows: Sequence[Sequence[Fraction]]) -> RankResult:
    """Exact rank plus a nonzero maximal minor as evidence"""
    matrix = to_sympy_matrix(rows)
    _, pivot_cols = matrix.rref()
    _, pivot_rows = matrix.T.rref()
    rank = len(pivot_cols)
    if rank == 0:
        return RankResult(rank=0, backend=RATIONAL.name, minor=Fraction(0))
    minor = matrix.extract(list(pivot_rows), list(pivot_cols)).det(method="bareiss")
    return RankResult(
        rank=rank,
        backend=RATIONAL.name,
        minor=from_sympy(minor),
        pivot_rows=[int(r) for r in pivot_rows],
        pivot_cols=[int(c) for c in pivot_cols],
    )


def numeric_rank(rows: Sequence[Sequence[complex]], tol: float) -> RankResult:
    """Number of singular values above ``tol`` times the largest one"""
    matrix = np.asarray(rows, dtype=np.complex128)
    if matrix.size == 0:
        return RankResult(rank=0, backend=COMPLEX.name, singular_values=[])
    sigma = scipy.linalg.svd(matrix, compute_uv=False)
    if sigma[0] == 0:
        return RankResult(rank=0, backend=COMPLEX.name, singular_values=[float(s) for s in sigma])
    rank = int(np.sum(sigma > tol * sigma[0]))
    return RankResult(rank=rank, backend=COMPLEX.name, singular_values=[float(s) for s in sigma])


def rank_of(rows: Sequence[np.ndarray], backend: ScalarBackend, tol: float) -> RankResult:
    if backend.exact:
        return exact_rank([list(r) for r in rows])
    return numeric_rank([list(r) for r in rows], tol)


def numeric_determinant(matrix: np.ndarray) -> complex:
    """Determinant through LU with partial pivoting"""
    return complex(scipy.linalg.det(np.asarray(matrix, dtype=np.complex128)))
