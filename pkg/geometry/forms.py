"""Homogeneous cubic forms, their polarization and their restriction to lines."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations_with_replacement, permutations
from math import factorial
from typing import Any, Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from geometry.backends import COMPLEX, RATIONAL, ScalarBackend, to_backend
from geometry.errors import DegenerateLineError, SpecFormatError

logger = logging.getLogger(__name__)

Monomial = Tuple[int, int, int]


def multinomial_count(monomial: Monomial) -> int:
    """Number of distinct orderings of the index multiset {i, j, k}"""
    count = factorial(3)
    for index in set(monomial):
        count //= factorial(monomial.count(index))
    return count


def contract(tensor: np.ndarray, *vectors: np.ndarray) -> Any:
    """Contract the trailing axes of a symmetric tensor with the given vectors"""
    result = tensor
    for v in reversed(vectors):
        result = np.dot(result, v)
    return result


@dataclass(frozen=True, eq=False)
class LineRestriction:
    """Coefficients of F(x + t v) = c0 + c1 t + c2 t^2 + c3 t^3"""

    c0: Any
    c1: Any
    c2: Any
    c3: Any
    backend: ScalarBackend = RATIONAL

    @property
    def coefficients(self):
        return (self.c0, self.c1, self.c2, self.c3)

    def __call__(self, t):
        return self.c0 + t * (self.c1 + t * (self.c2 + t * self.c3))

    def is_identically_zero(self, scale: float = 1.0, tol: float = 0.0) -> bool:
        """True when X contains the whole line"""
        return all(self.backend.is_zero(c, scale, tol) for c in self.coefficients)


@dataclass(frozen=True, eq=False)
class TrilinearForm:
    """Symmetric trilinear form P with P(a, a, a) = F(a), stored as a dense tensor"""

    num_vars: int
    tensor: np.ndarray
    backend: ScalarBackend = RATIONAL

    def __call__(self, a, b, c):
        return contract(self.tensor, a, b, c)

    def covector(self, a, b) -> np.ndarray:
        """The linear form P(a, b, .)"""
        return contract(self.tensor, a, b)

    def matrix(self, a) -> np.ndarray:
        """The quadratic form P(a, ., .) as a symmetric matrix"""
        return contract(self.tensor, a)

    def restrict(self, basis: np.ndarray) -> "TrilinearForm":
        """Pull back along v' -> sum_r v'_r basis[r] (rows of ``basis`` span the subspace)"""
        basis = np.asarray(basis, dtype=self.tensor.dtype)
        tensor = self.tensor
        for _ in range(3):
            tensor = np.tensordot(tensor, basis, axes=([0], [1]))
        return TrilinearForm(num_vars=basis.shape[0], tensor=tensor, backend=self.backend)

    def to_cubic(self) -> "HomogeneousCubic":
        return HomogeneousCubic.from_trilinear(self)


@dataclass(frozen=True, eq=False)
class HomogeneousCubic:
    """Homogeneous cubic form F in num_vars variables, keyed by sorted index multisets"""

    num_vars: int
    coefficients: Mapping[Monomial, Any] = field(default_factory=dict)
    backend: ScalarBackend = RATIONAL

    def __post_init__(self):
        if self.num_vars < 1:
            raise SpecFormatError("a cubic needs at least one variable")
        for mono in self.coefficients:
            if len(mono) != 3 or tuple(sorted(mono)) != tuple(mono):
                raise SpecFormatError(f"monomial key {mono!r} is not a sorted index triple")
            if not all(0 <= i < self.num_vars for i in mono):
                raise SpecFormatError(f"monomial {mono!r} out of range for {self.num_vars} variables")
        if all(self.backend.is_zero(c) for c in self.coefficients.values()):
            raise SpecFormatError("zero form")

    @classmethod
    def from_terms(cls, num_vars: int, terms: Mapping[Sequence[int], Any], backend: ScalarBackend = RATIONAL):
        """Build from possibly unsorted, possibly repeated monomial keys"""
        coefficients: Dict[Monomial, Any] = {}
        for mono, value in terms.items():
            mono = tuple(int(i) for i in mono)
            if len(mono) != 3:
                raise SpecFormatError(f"non-cubic monomial {list(mono)}")
            key = tuple(sorted(mono))
            coefficients[key] = coefficients.get(key, backend.coerce(0)) + backend.coerce(value)
        coefficients = {k: v for k, v in coefficients.items() if not backend.is_zero(v)}
        return cls(num_vars=num_vars, coefficients=coefficients, backend=backend)

    @classmethod
    def from_trilinear(cls, form: TrilinearForm) -> "HomogeneousCubic":
        """Recover F from its polarization: coefficient = multinomial count * P_ijk"""
        terms = {}
        for mono in combinations_with_replacement(range(form.num_vars), 3):
            value = form.tensor[mono] * multinomial_count(mono)
            if not form.backend.is_zero(value):
                terms[mono] = value
        return cls(num_vars=form.num_vars, coefficients=terms, backend=form.backend)

    @property
    def dimension(self) -> int:
        """n for X in P^{n+1}"""
        return self.num_vars - 2

    def to_backend(self, backend: ScalarBackend) -> "HomogeneousCubic":
        if backend is self.backend:
            return self
        keys = list(self.coefficients)
        values = to_backend(np.array([self.coefficients[k] for k in keys], dtype=object), self.backend, backend)
        return HomogeneousCubic(self.num_vars, dict(zip(keys, values)), backend)

    def _vector(self, p) -> np.ndarray:
        p = p if isinstance(p, np.ndarray) and p.dtype == self._dtype else self.backend.vector(list(p))
        self.backend.check_length(p, self.num_vars)
        return p

    @property
    def _dtype(self):
        return np.dtype(object) if self.backend.exact else np.dtype(np.complex128)

    def evaluate(self, p) -> Any:
        """Value of F at p by direct summation over monomials"""
        p = self._vector(p)
        total = self.backend.coerce(0)
        for (i, j, k), c in self.coefficients.items():
            total += c * p[i] * p[j] * p[k]
        return total

    def gradient(self, p) -> np.ndarray:
        """Covector of partial derivatives, computed as 3 P(p, p, .)"""
        p = self._vector(p)
        return 3 * self.polarize().covector(p, p)

    @cached_property
    def _polarization(self) -> TrilinearForm:
        m = self.num_vars
        if self.backend.exact:
            tensor = np.empty((m, m, m), dtype=object)
            tensor.fill(self.backend.coerce(0))
        else:
            tensor = np.zeros((m, m, m), dtype=np.complex128)
        for mono, c in self.coefficients.items():
            # divide eagerly so that P(a, a, a) = F(a) holds exactly
            value = c / multinomial_count(mono)
            for perm in set(permutations(mono)):
                tensor[perm] = value
        return TrilinearForm(num_vars=m, tensor=tensor, backend=self.backend)

    def polarize(self) -> TrilinearForm:
        """The unique symmetric trilinear P with P(a, a, a) = F(a)"""
        return self._polarization

    def restrict_to_line(self, x, v, tol: float = 1e-10) -> LineRestriction:
        """Coefficients of F(x + t v) in t"""
        x, v = self._vector(x), self._vector(v)
        if self.backend.proportional(x, v, tol) or self.backend.is_zero_vector(v):
            raise DegenerateLineError("direction is proportional to the base point")
        polar = self.polarize()
        return LineRestriction(
            c0=self.evaluate(x),
            c1=3 * polar(x, x, v),
            c2=3 * polar(x, v, v),
            c3=self.evaluate(v),
            backend=self.backend,
        )

    def to_spec(self) -> dict:
        """Document in the cubic JSON schema"""
        coeffs = [
            {"mono": list(mono), "val": self.backend.encode(self.coefficients[mono])}
            for mono in sorted(self.coefficients)
        ]
        return {"dim": self.dimension, "coeffs": coeffs}


def _read_value(raw: Any):
    """Returns (backend, value) for one "val" entry"""
    if isinstance(raw, list):
        return COMPLEX, COMPLEX.coerce(raw)
    if isinstance(raw, bool) or not isinstance(raw, (str, int, float)):
        raise SpecFormatError(f"unreadable coefficient value {raw!r}")
    return RATIONAL, RATIONAL.coerce(raw)


def parse_cubic(spec: Any, backend: Optional[ScalarBackend] = None) -> HomogeneousCubic:
    """Parse the cubic JSON document ``{"dim": n, "coeffs": [{"mono", "val"}, ...]}``"""
    if isinstance(spec, (str, bytes)):
        try:
            spec = json.loads(spec)
        except json.JSONDecodeError as exc:
            raise SpecFormatError(f"malformed document: {exc}") from exc
    if not isinstance(spec, dict) or "dim" not in spec or "coeffs" not in spec:
        raise SpecFormatError("malformed document: expected keys 'dim' and 'coeffs'")
    dim = spec["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool):
        raise SpecFormatError("malformed document: 'dim' must be an integer")
    if dim < 2:
        raise SpecFormatError(f"dimension {dim} < 2")
    if not isinstance(spec["coeffs"], list):
        raise SpecFormatError("malformed document: 'coeffs' must be a list")

    entries = []
    complex_seen = False
    for entry in spec["coeffs"]:
        if not isinstance(entry, dict) or "mono" not in entry or "val" not in entry:
            raise SpecFormatError(f"malformed coefficient entry {entry!r}")
        mono = entry["mono"]
        if not isinstance(mono, list) or not all(isinstance(i, int) and not isinstance(i, bool) for i in mono):
            raise SpecFormatError(f"malformed monomial {mono!r}")
        if len(mono) != 3:
            raise SpecFormatError(f"non-cubic monomial {mono}")
        if not all(0 <= i <= dim + 1 for i in mono):
            raise SpecFormatError(f"monomial {mono} uses a variable outside x0..x{dim + 1}")
        value_backend, value = _read_value(entry["val"])
        complex_seen = complex_seen or value_backend is COMPLEX
        entries.append((mono, value))

    target = backend or (COMPLEX if complex_seen else RATIONAL)
    if complex_seen and target is RATIONAL:
        raise SpecFormatError("complex coefficients cannot be read with the rational backend")
    terms: Dict[Tuple[int, ...], Any] = {}
    for mono, value in entries:
        key = tuple(sorted(mono))
        terms[key] = terms.get(key, 0) + target.coerce(value)
    if all(target.is_zero(v) for v in terms.values()):
        raise SpecFormatError("zero form")
    logger.debug("parsed cubic with %d monomials in %d variables", len(terms), dim + 2)
    return HomogeneousCubic.from_terms(dim + 2, terms, target)
