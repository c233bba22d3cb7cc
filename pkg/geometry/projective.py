"""Projective points, lines, tangent frames and seeded sampling in P^{n+1}."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from geometry.backends import COMPLEX, RATIONAL, ScalarBackend, make_rng, to_backend
from geometry.errors import (
    CoincidentPointsError,
    CubicError,
    DimensionMismatchError,
    ResampleLimitError,
    SingularPointError,
)
from geometry.forms import HomogeneousCubic
from geometry.linalg import RankResult, rank_of

logger = logging.getLogger(__name__)

DEFAULT_MEMBERSHIP_TOL = 1e-10
DEFAULT_RANK_TOL = 1e-8
RATIONAL_LINE_BOUND = 20


@dataclass(frozen=True, eq=False)
class ProjectivePoint:
    """Point of projective space stored by its canonical representative"""

    coords: np.ndarray
    backend: ScalarBackend = RATIONAL

    @classmethod
    def of(cls, coords, backend: Optional[ScalarBackend] = None) -> "ProjectivePoint":
        if backend is None:
            backend = COMPLEX if isinstance(coords, np.ndarray) and coords.dtype == np.complex128 else RATIONAL
        vector = backend.vector(list(coords))
        if backend.is_zero_vector(vector):
            raise CubicError("the zero vector is not a projective point")
        return cls(coords=backend.canonical(vector), backend=backend)

    @property
    def num_vars(self) -> int:
        return len(self.coords)

    def to_backend(self, backend: ScalarBackend) -> "ProjectivePoint":
        if backend is self.backend:
            return self
        return ProjectivePoint(backend.canonical(to_backend(self.coords, self.backend, backend)), backend)

    def __repr__(self):
        return "(" + ":".join(str(c) for c in self.coords) + ")"


@dataclass(frozen=True, eq=False)
class ProjectiveLine:
    """Line {a base + b dir}; ``dir`` is a second independent representative"""

    base: ProjectivePoint
    dir: np.ndarray

    @property
    def backend(self) -> ScalarBackend:
        return self.base.backend

    @property
    def second_point(self) -> ProjectivePoint:
        return ProjectivePoint.of(self.dir, self.backend)

    def point_at(self, alpha, beta=1) -> np.ndarray:
        return alpha * self.base.coords + beta * self.dir

    def contains(self, point: ProjectivePoint, tol: float = DEFAULT_RANK_TOL) -> bool:
        coords = point.to_backend(self.backend).coords
        return span_rank([self.base.coords, self.dir, coords], self.backend, tol).rank <= 2

    def to_backend(self, backend: ScalarBackend) -> "ProjectiveLine":
        return ProjectiveLine(self.base.to_backend(backend), to_backend(self.dir, self.backend, backend))


@dataclass(frozen=True, eq=False)
class TangentFrame:
    """Basis of T_point X: n vectors in the tangent hyperplane, independent modulo the point.

    ``chart`` is an index with point[chart] = 1 and ``pivot`` an index with
    covector[pivot] != 0; the basis is e_i - (g_i / g_pivot) e_pivot for every
    other index i, so frame coordinates of a reduced vector are just its entries
    outside {chart, pivot}.
    """

    point: ProjectivePoint
    covector: np.ndarray
    basis: List[np.ndarray]
    chart: int
    pivot: int

    @classmethod
    def from_covector(cls, point: ProjectivePoint, covector: np.ndarray, tol: float = DEFAULT_MEMBERSHIP_TOL):
        backend = point.backend
        coords = point.coords
        if backend.exact:
            chart = next(i for i, c in enumerate(coords) if c != 0)
            candidates = [j for j in range(len(coords)) if j != chart and covector[j] != 0]
        else:
            chart = int(np.argmax(np.abs(coords)))
            order = np.argsort(-np.abs(covector), kind="stable")
            candidates = [int(j) for j in order if j != chart and abs(covector[j]) > tol * backend.norm(covector)]
        if not candidates:
            raise SingularPointError("covector vanishes outside the chart coordinate")
        pivot = candidates[0]
        basis = []
        for i in range(len(coords)):
            if i in (chart, pivot):
                continue
            w = backend.zeros(len(coords))
            w[i] = backend.coerce(1)
            w[pivot] = -covector[i] / covector[pivot]
            basis.append(w)
        return cls(point=point, covector=covector, basis=basis, chart=chart, pivot=pivot)

    @property
    def indices(self) -> List[int]:
        return [i for i in range(self.point.num_vars) if i not in (self.chart, self.pivot)]

    def reduce(self, v: np.ndarray) -> np.ndarray:
        """Representative of v modulo the point with a zero chart entry"""
        return v - (v[self.chart] / self.point.coords[self.chart]) * self.point.coords

    def coordinates(self, v: np.ndarray) -> np.ndarray:
        """Coordinates of a tangent vector in the frame basis"""
        reduced = self.reduce(v)
        return np.array([reduced[i] for i in self.indices], dtype=reduced.dtype)


def proj_equal(p: ProjectivePoint, q: ProjectivePoint, tol: float = DEFAULT_MEMBERSHIP_TOL) -> bool:
    """Projective equality by vanishing 2x2 minors"""
    if p.num_vars != q.num_vars:
        raise DimensionMismatchError(f"points live in different spaces ({p.num_vars} vs {q.num_vars} coordinates)")
    backend = COMPLEX if COMPLEX in (p.backend, q.backend) else RATIONAL
    return backend.proportional(p.to_backend(backend).coords, q.to_backend(backend).coords, tol)


def span_rank(vectors: Sequence[np.ndarray], backend: ScalarBackend, tol: float = DEFAULT_RANK_TOL) -> RankResult:
    """Rank of a vector family: exact with a nonzero minor, or by singular values"""
    if len(vectors) == 0:
        raise CubicError("span_rank needs at least one vector")
    length = len(vectors[0])
    for v in vectors:
        if len(v) != length:
            raise DimensionMismatchError("vectors of unequal length")
    return rank_of([backend.vector(list(v)) for v in vectors], backend, tol)


def line_through(p: ProjectivePoint, q: ProjectivePoint, tol: float = DEFAULT_MEMBERSHIP_TOL) -> ProjectiveLine:
    """The line <p, q>"""
    if proj_equal(p, q, tol):
        raise CoincidentPointsError("coincident points do not span a line")
    backend = COMPLEX if COMPLEX in (p.backend, q.backend) else RATIONAL
    return ProjectiveLine(base=p.to_backend(backend), dir=q.to_backend(backend).coords)


def _complex_point_on_cubic(form: HomogeneousCubic, rng: np.random.Generator, attempts: int, tol: float):
    from geometry.solve import cubic_roots

    for attempt in range(attempts):
        a = COMPLEX.random_vector(rng, form.num_vars)
        b = COMPLEX.random_vector(rng, form.num_vars)
        restriction = form.restrict_to_line(a, b)
        roots = [r for r in cubic_roots(restriction.coefficients, COMPLEX).roots if not r.at_infinity]
        if not roots:
            continue
        root = roots[int(rng.integers(len(roots)))]
        candidate = a + root.value * b
        point = ProjectivePoint.of(candidate, COMPLEX)
        if abs(form.evaluate(point.coords)) <= tol * COMPLEX.norm(point.coords) ** 3:
            return point
        logger.debug("complex sample %d missed the cubic, resampling", attempt)
    raise ResampleLimitError(f"no point on the cubic after {attempts} complex samples")


def tangent_hop(form: HomogeneousCubic, base: np.ndarray, rng: np.random.Generator,
                bound: int = RATIONAL_LINE_BOUND) -> Optional[np.ndarray]:
    """Residual point of a random rational line tangent to X at ``base``.

    F(base + t w) = t^2 (c2 + c3 t) when w lies in the tangent hyperplane, so the
    third intersection t = -c2 / c3 is rational. The result always lies in S_base.
    Returns None when the drawn line is unusable.
    """
    backend = form.backend
    g = form.gradient(base)
    nonzero = [i for i, c in enumerate(g) if c != 0]
    if not nonzero:
        raise SingularPointError("cannot hop from a singular point")
    k = nonzero[int(rng.integers(len(nonzero)))]
    w = backend.random_vector(rng, form.num_vars, bound)
    w = w - (np.dot(g, w) / g[k]) * backend.unit(form.num_vars, k)
    if backend.is_zero_vector(w) or backend.proportional(w, base):
        return None
    polar = form.polarize()
    c2 = 3 * polar(base, w, w)
    c3 = form.evaluate(w)
    if c2 == 0:
        # base is a flex of this line, or the line lies in X
        return None
    if c3 == 0:
        return w
    return base - (c2 / c3) * w


def random_point_on_cubic(form: HomogeneousCubic, seed: int, base_point: Optional[ProjectivePoint] = None,
                          hops: int = 2, attempts: int = 64,
                          tol: float = DEFAULT_MEMBERSHIP_TOL) -> ProjectivePoint:
    """Seeded point of X.

    Complex backend: a root of F on a random line. Rational backend: ``hops``
    tangent-line hops starting at a supplied rational point of X.
    """
    rng = make_rng(seed)
    if not form.backend.exact:
        return _complex_point_on_cubic(form, rng, attempts, tol)
    if base_point is None:
        raise CubicError("the rational backend needs a rational base point on X")
    current = base_point.to_backend(RATIONAL).coords
    if form.evaluate(current) != 0:
        raise CubicError("base point is not on X")
    for hop in range(hops):
        for attempt in range(attempts):
            candidate = tangent_hop(form, current, rng)
            if candidate is not None:
                current = RATIONAL.canonical(candidate)
                break
            logger.debug("hop %d attempt %d drew an unusable tangent line", hop, attempt)
        else:
            raise ResampleLimitError(f"rational sampling exceeded {attempts} resamples")
    return ProjectivePoint(current, RATIONAL)


def random_subspace_through(x: ProjectivePoint, dim: int, seed: int, tol: float = DEFAULT_RANK_TOL,
                            attempts: int = 16) -> List[np.ndarray]:
    """x together with ``dim`` random vectors spanning a P^dim through x"""
    ambient = x.num_vars - 1
    if not 1 <= dim <= ambient:
        raise CubicError(f"subspace dimension {dim} outside 1..{ambient}")
    backend = x.backend
    rng = make_rng(seed)
    for _ in range(attempts):
        spanning = [x.coords] + [backend.random_vector(rng, x.num_vars) for _ in range(dim)]
        if span_rank(spanning, backend, tol).rank == dim + 1:
            return spanning
    raise ResampleLimitError(f"no independent spanning set after {attempts} draws")
