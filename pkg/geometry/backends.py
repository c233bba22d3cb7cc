"""Scalar backends: exact rationals and complex doubles behind one interface.

A backend owns the dtype of coordinate vectors, the zero test, the canonical
representative of a projective point and the JSON codec of a scalar. Vectors
of the rational backend are numpy object arrays of ``fractions.Fraction``;
vectors of the complex backend are ``complex128`` arrays.
"""
from __future__ import annotations

import math
from abc import ABC, abstractmethod
from fractions import Fraction
from numbers import Rational
from typing import Any, Sequence

import numpy as np

from geometry.errors import DimensionMismatchError, SpecFormatError


def derive_seed(seed: int, *keys: int) -> int:
    """Deterministic 64-bit child seed of ``seed`` for the given integer keys"""
    sequence = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, *[int(k) for k in keys]])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    """Seeded generator; there is no module-level randomness anywhere"""
    return np.random.default_rng(derive_seed(seed, *keys))


class ScalarBackend(ABC):
    """Abstract field interface shared by both backends"""

    name: str = ""
    exact: bool = False

    @abstractmethod
    def coerce(self, value: Any):
        """Convert a Python number into a scalar of this backend"""

    @abstractmethod
    def vector(self, values: Sequence[Any]) -> np.ndarray:
        """Coordinate vector with this backend's dtype"""

    @abstractmethod
    def is_zero(self, value, scale: float = 1.0, tol: float = 0.0) -> bool:
        """Zero test; ``tol`` and ``scale`` are ignored by the exact backend"""

    @abstractmethod
    def canonical(self, coords: np.ndarray) -> np.ndarray:
        """Canonical representative of the projective class of ``coords``"""

    @abstractmethod
    def random_vector(self, rng: np.random.Generator, size: int, bound: int = 20) -> np.ndarray:
        """Random coordinate vector"""

    @abstractmethod
    def encode(self, value) -> Any:
        """JSON form of a scalar"""

    @abstractmethod
    def decode(self, raw: Any):
        """Scalar from its JSON form"""

    def zeros(self, size: int) -> np.ndarray:
        return self.vector([0] * size)

    def unit(self, size: int, index: int) -> np.ndarray:
        values = [0] * size
        values[index] = 1
        return self.vector(values)

    def norm(self, v: np.ndarray) -> float:
        """Max-modulus norm used as the scale of every tolerance test"""
        if len(v) == 0:
            return 0.0
        return float(max(abs(complex(c)) for c in v))

    def check_length(self, v: np.ndarray, size: int) -> None:
        if len(v) != size:
            raise DimensionMismatchError(f"expected {size} coordinates, got {len(v)}")

    def is_zero_vector(self, v: np.ndarray, scale: float = 1.0, tol: float = 0.0) -> bool:
        return all(self.is_zero(c, scale, tol) for c in v)

    def proportional(self, a: np.ndarray, b: np.ndarray, tol: float = 0.0) -> bool:
        """True iff every 2x2 minor of the matrix with rows a, b vanishes"""
        self.check_length(b, len(a))
        scale = self.norm(a) * self.norm(b)
        for i in range(len(a)):
            for j in range(i + 1, len(a)):
                if not self.is_zero(a[i] * b[j] - a[j] * b[i], scale, tol):
                    return False
        return True


class RationalBackend(ScalarBackend):
    """Exact arithmetic over Q with Fractions in lowest terms"""

    name = "rational"
    exact = True

    def coerce(self, value):
        if isinstance(value, Fraction):
            return value
        if isinstance(value, (int, np.integer, Rational)):
            return Fraction(int(value)) if isinstance(value, (int, np.integer)) else Fraction(value)
        if isinstance(value, str):
            try:
                return Fraction(value.strip())
            except (ValueError, ZeroDivisionError) as exc:
                raise SpecFormatError(f"not a rational number: {value!r}") from exc
        if isinstance(value, (float, np.floating)):
            if not math.isfinite(value):
                raise SpecFormatError(f"non-finite value {value!r}")
            return Fraction(repr(float(value)))
        if isinstance(value, (complex, np.complexfloating)):
            if complex(value).imag != 0:
                raise SpecFormatError(f"complex value {value!r} in the rational backend")
            return self.coerce(complex(value).real)
        raise SpecFormatError(f"cannot read {value!r} as a rational number")

    def vector(self, values):
        out = np.empty(len(values), dtype=object)
        for i, v in enumerate(values):
            out[i] = self.coerce(v)
        return out

    def is_zero(self, value, scale=1.0, tol=0.0):
        return value == 0

    def canonical(self, coords):
        for c in coords:
            if c != 0:
                return self.vector([v / c for v in coords])
        raise ValueError("zero vector has no projective class")

    def random_vector(self, rng, size, bound=20):
        return self.vector([int(v) for v in rng.integers(-bound, bound + 1, size=size)])

    def encode(self, value):
        return f"{value.numerator}/{value.denominator}"

    def decode(self, raw):
        if isinstance(raw, list):
            if len(raw) != 2 or raw[1] != 0:
                raise SpecFormatError(f"complex value {raw!r} in the rational backend")
            return self.coerce(raw[0])
        return self.coerce(raw)


class ComplexBackend(ScalarBackend):
    """Complex doubles; every decision uses a tolerance"""

    name = "complex"
    exact = False

    def coerce(self, value):
        if isinstance(value, str):
            try:
                value = complex(Fraction(value.strip())) if "j" not in value else complex(value.strip())
            except (ValueError, ZeroDivisionError) as exc:
                raise SpecFormatError(f"not a number: {value!r}") from exc
        elif isinstance(value, (list, tuple)):
            if len(value) != 2:
                raise SpecFormatError(f"complex value must be [re, im], got {value!r}")
            value = complex(float(value[0]), float(value[1]))
        result = complex(value)
        if not (math.isfinite(result.real) and math.isfinite(result.imag)):
            raise SpecFormatError(f"non-finite value {value!r}")
        return result

    def vector(self, values):
        return np.array([self.coerce(v) for v in values], dtype=np.complex128)

    def is_zero(self, value, scale=1.0, tol=0.0):
        return abs(value) <= tol * scale

    def canonical(self, coords):
        coords = np.asarray(coords, dtype=np.complex128)
        index = int(np.argmax(np.abs(coords)))
        if coords[index] == 0:
            raise ValueError("zero vector has no projective class")
        return coords / coords[index]

    def random_vector(self, rng, size, bound=20):
        v = rng.standard_normal(size) + 1j * rng.standard_normal(size)
        return (v / np.linalg.norm(v)).astype(np.complex128)

    def norm(self, v):
        if len(v) == 0:
            return 0.0
        return float(np.max(np.abs(np.asarray(v, dtype=np.complex128))))

    def encode(self, value):
        value = complex(value)
        return [value.real, value.imag]

    def decode(self, raw):
        return self.coerce(raw)


RATIONAL = RationalBackend()
COMPLEX = ComplexBackend()

BACKENDS = {RATIONAL.name: RATIONAL, COMPLEX.name: COMPLEX}


def get_backend(name: str) -> ScalarBackend:
    """Backend by CLI name"""
    try:
        return BACKENDS[name]
    except KeyError as exc:
        raise SpecFormatError(f"unknown backend {name!r}; choose from {sorted(BACKENDS)}") from exc


def to_backend(values: np.ndarray, source: ScalarBackend, target: ScalarBackend) -> np.ndarray:
    """Convert a vector or tensor between backends (rational -> complex only)"""
    if source is target:
        return values
    if target is COMPLEX:
        return np.vectorize(complex, otypes=[np.complex128])(values) if values.size else values.astype(np.complex128)
    raise SpecFormatError("complex data cannot be converted to the rational backend")
