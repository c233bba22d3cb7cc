"""Geometry of a smooth cubic hypersurface X in P^{n+1}.

Every incidence predicate reduces to the vanishing of a value of the
polarization P:

* p in S_u       iff P(p, u, u) = 0   (p on the tangent hyperplane at u)
* p in S*_u      iff P(p, p, u) = 0   (u on the tangent hyperplane at p)
* p in C_u       iff the line <u, p> lies in X

and the third point of X on <u, x> is P(x, u, u) x - P(x, x, u) u.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import List, Optional, Tuple

import numpy as np

from geometry.backends import COMPLEX, ScalarBackend, derive_seed, to_backend
from geometry.config import DEFAULT_RETRIES, DEFAULT_TOLERANCES, RetryPolicy, Tolerances
from geometry.errors import (
    CoincidentPointsError,
    DimensionMismatchError,
    EckardtCenterError,
    GeometryInvariantError,
    IdenticallyZeroError,
    IndeterminateError,
    NotOnCubicError,
    ResampleLimitError,
    SingularPointError,
    SolverDegeneracyError,
    SpecFormatError,
    UseSpanningLinesError,
)
from geometry.forms import HomogeneousCubic, TrilinearForm
from geometry.linalg import RankResult
from geometry.projective import (
    ProjectiveLine,
    ProjectivePoint,
    TangentFrame,
    proj_equal,
    random_subspace_through,
    span_rank,
)
from geometry.solve import PlaneConic, conic_cubic_intersect, cubic_roots
from utils.serialization import encode_point, encode_rank, encode_vector

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DivisorOnLine:
    """X cut with a line: points with multiplicities summing to 3, or the contained-line flag"""

    line: ProjectiveLine
    points: List[Tuple[ProjectivePoint, int]] = field(default_factory=list)
    contained: bool = False

    @property
    def total_multiplicity(self) -> int:
        return sum(m for _, m in self.points)

    def to_json(self) -> dict:
        if self.contained:
            return {"contained": True}
        return {
            "contained": False,
            "points": [{"point": encode_point(p), "multiplicity": m} for p, m in self.points],
        }


@dataclass(frozen=True, eq=False)
class LineSet:
    """Lines of X through ``center``; ``finite`` is False for an Eckardt point"""

    center: ProjectivePoint
    finite: bool
    lines: List[Tuple[ProjectiveLine, int]] = field(default_factory=list)
    witness: Optional[str] = None

    @property
    def total_multiplicity(self) -> int:
        return sum(m for _, m in self.lines)

    def to_json(self) -> dict:
        doc = {"center": encode_point(self.center), "finite": self.finite, "eckardt": not self.finite}
        if self.finite:
            doc["lines"] = [
                {"direction": encode_vector(line.dir, line.backend), "multiplicity": m} for line, m in self.lines
            ]
            doc["total_multiplicity"] = self.total_multiplicity
        else:
            doc["witness"] = self.witness
        return doc


@dataclass(frozen=True, eq=False)
class SpanningLines:
    """n lines through a point whose directions span its tangent space"""

    center: ProjectivePoint
    lines: List[ProjectiveLine]
    rank: RankResult
    slices_used: int = 0

    def to_json(self) -> dict:
        return {
            "center": encode_point(self.center),
            "directions": [encode_vector(line.dir, line.backend) for line in self.lines],
            "rank": encode_rank(self.rank),
            "slices_used": self.slices_used,
        }


class CubicHypersurface:
    """A cubic hypersurface X = {F = 0} with its tolerances and retry limits"""

    def __init__(self, form: HomogeneousCubic, tolerances: Tolerances = DEFAULT_TOLERANCES,
                 retries: RetryPolicy = DEFAULT_RETRIES):
        if form.num_vars < 4:
            raise SpecFormatError(f"dimension {form.dimension} < 2")
        self.form = form
        self.tolerances = tolerances
        self.retries = retries

    @property
    def backend(self) -> ScalarBackend:
        return self.form.backend

    @property
    def n(self) -> int:
        return self.form.dimension

    @property
    def num_vars(self) -> int:
        return self.form.num_vars

    @cached_property
    def polar(self) -> TrilinearForm:
        return self.form.polarize()

    @cached_property
    def _complex(self) -> "CubicHypersurface":
        return CubicHypersurface(self.form.to_backend(COMPLEX), self.tolerances, self.retries)

    def as_complex(self) -> "CubicHypersurface":
        return self if self.backend is COMPLEX else self._complex

    def point(self, coords) -> ProjectivePoint:
        point = ProjectivePoint.of(coords, self.backend)
        self._check_point(point)
        return point

    def _check_point(self, p: ProjectivePoint) -> None:
        if p.num_vars != self.num_vars:
            raise DimensionMismatchError(f"point has {p.num_vars} coordinates, X lives in {self.num_vars} variables")

    def aligned(self, *points: ProjectivePoint):
        """The hypersurface and coordinate vectors on one common backend"""
        for p in points:
            self._check_point(p)
        target = self if all(p.backend is self.backend for p in points) else self.as_complex()
        return target, [p.to_backend(target.backend).coords for p in points]

    def _zero(self, value, scale: float) -> bool:
        return self.backend.is_zero(value, scale, self.tolerances.membership)

    # membership and tangency

    def contains(self, p: ProjectivePoint) -> bool:
        """F(p) = 0, exactly or relative to ||p||^3"""
        X, (coords,) = self.aligned(p)
        return X._zero(X.form.evaluate(coords), X.backend.norm(coords) ** 3)

    def _require_on(self, *points: ProjectivePoint) -> None:
        for p in points:
            if not self.contains(p):
                raise NotOnCubicError(f"point {p!r} is not on X")

    def check_smooth_at(self, p: ProjectivePoint) -> bool:
        """True iff the gradient of F does not vanish at p"""
        self._require_on(p)
        X, (coords,) = self.aligned(p)
        gradient = X.form.gradient(coords)
        return not X.backend.is_zero_vector(gradient, X.backend.norm(coords) ** 2, X.tolerances.membership)

    def tangent_hyperplane(self, x: ProjectivePoint) -> TangentFrame:
        """Covector of T_x X and a frame of n vectors spanning it modulo x"""
        if not self.check_smooth_at(x):
            raise SingularPointError(f"X is singular at {x!r}")
        X, (coords,) = self.aligned(x)
        gradient = X.form.gradient(coords)
        return TangentFrame.from_covector(x.to_backend(X.backend), gradient, X.tolerances.membership)

    def in_S(self, u: ProjectivePoint, p: ProjectivePoint) -> bool:
        """p lies on the tangent hyperplane at u"""
        X, (u_c, p_c) = self.aligned(u, p)
        scale = X.backend.norm(p_c) * X.backend.norm(u_c) ** 2
        return X._zero(X.polar(p_c, u_c, u_c), scale)

    def in_S_star(self, u: ProjectivePoint, p: ProjectivePoint) -> bool:
        """u lies on the tangent hyperplane at p"""
        X, (u_c, p_c) = self.aligned(u, p)
        scale = X.backend.norm(p_c) ** 2 * X.backend.norm(u_c)
        return X._zero(X.polar(p_c, p_c, u_c), scale)

    def in_C(self, u: ProjectivePoint, p: ProjectivePoint) -> bool:
        """The line <u, p> lies in X; u itself counts as a member"""
        if proj_equal(u, p, self.tolerances.membership):
            return True
        X, (u_c, p_c) = self.aligned(u, p)
        restriction = X.form.restrict_to_line(u_c, p_c, X.tolerances.membership)
        scale = max(X.backend.norm(u_c), X.backend.norm(p_c)) ** 3
        contained = restriction.is_identically_zero(scale, X.tolerances.membership)
        if X.contains(u) and X.contains(p):
            by_tangency = X.in_S(u, p) and X.in_S_star(u, p)
            if by_tangency != contained:
                raise GeometryInvariantError(
                    f"S_u and S*_u meet outside C_u at {p!r}: tangency says {by_tangency}, restriction {contained}"
                )
        return contained

    # the involution and divisors on lines

    def third_point(self, u: ProjectivePoint, x: ProjectivePoint) -> ProjectivePoint:
        """tau_u(x): the residual point of X on <u, x>"""
        self._require_on(u, x)
        X, (u_c, x_c) = self.aligned(u, x)
        a = X.polar(x_c, u_c, u_c)
        b = X.polar(x_c, x_c, u_c)
        scale = X.backend.norm(u_c) ** 2 * X.backend.norm(x_c)
        if X._zero(a, scale) and X._zero(b, scale):
            raise IndeterminateError(f"third point undefined: the line through {u!r} and {x!r} lies in X")
        return ProjectivePoint.of(a * x_c - b * u_c, X.backend)

    def bezout_divisor(self, a: ProjectivePoint, b: ProjectivePoint) -> DivisorOnLine:
        """X cut with <a, b>, from the roots of F(a + t b); t = infinity is b"""
        if proj_equal(a, b, self.tolerances.membership):
            raise CoincidentPointsError("bezout_divisor needs two distinct points")
        X, (a_c, b_c) = self.aligned(a, b)
        line = ProjectiveLine(ProjectivePoint(X.backend.canonical(a_c), X.backend), b_c)
        restriction = X.form.restrict_to_line(a_c, b_c, X.tolerances.membership)
        scale = max(X.backend.norm(a_c), X.backend.norm(b_c)) ** 3
        if restriction.is_identically_zero(scale, X.tolerances.membership):
            return DivisorOnLine(line=line, contained=True)
        try:
            roots = cubic_roots(restriction.coefficients, X.backend, X.tolerances.cluster_radius)
        except IdenticallyZeroError:
            return DivisorOnLine(line=line, contained=True)
        points = []
        for root in roots:
            if root.at_infinity:
                points.append((ProjectivePoint(X.backend.canonical(b_c), X.backend), root.multiplicity))
            elif root.exact or X.backend is COMPLEX:
                points.append((ProjectivePoint.of(a_c + root.value * b_c, X.backend), root.multiplicity))
            else:
                a_z = to_backend(a_c, X.backend, COMPLEX)
                b_z = to_backend(b_c, X.backend, COMPLEX)
                points.append((ProjectivePoint.of(a_z + root.value * b_z, COMPLEX), root.multiplicity))
        return DivisorOnLine(line=line, points=points)

    # lines through a point

    def lines_through(self, x: ProjectivePoint, seed: int = 0) -> LineSet:
        """Lines of X through x for n = 3, from the conic and cubic cut on the tangent plane of directions"""
        if self.n != 3:
            raise UseSpanningLinesError(f"lines through a point are enumerated only for n = 3 (n = {self.n})")
        frame = self.tangent_hyperplane(x)
        X, (x_c,) = self.aligned(x)
        basis = np.array(frame.basis, dtype=x_c.dtype)
        polar = X.polar
        conic = PlaneConic(np.dot(np.dot(basis, polar.matrix(x_c)), basis.T), X.backend)
        plane_cubic = polar.restrict(basis)
        scale = X.backend.norm(basis.ravel())
        tol = X.tolerances.membership
        if X.backend.is_zero_vector(conic.matrix.ravel(), scale ** 2, tol):
            logger.debug("quadric of directions contains the tangent plane at %r", x)
            return LineSet(center=frame.point, finite=False, witness="P(x, v, v) vanishes on the tangent plane")
        if X.backend.is_zero_vector(plane_cubic.tensor.ravel(), scale ** 3, tol):
            return LineSet(center=frame.point, finite=False, witness="F vanishes on the tangent plane")
        intersection = conic_cubic_intersect(conic, plane_cubic, seed, X.tolerances, X.retries)
        center = frame.point.to_backend(COMPLEX)
        if not intersection.finite:
            return LineSet(center=center, finite=False, witness=intersection.witness)
        basis_c = to_backend(basis, X.backend, COMPLEX)
        lines = []
        for plane_point, multiplicity in intersection.points:
            direction = np.dot(plane_point.coords, basis_c)
            lines.append((ProjectiveLine(center, direction), multiplicity))
        if intersection.total_multiplicity != 6:
            logger.warning("line count at %r is %d, not 6", x, intersection.total_multiplicity)
        return LineSet(center=center, finite=True, lines=lines)

    def is_eckardt(self, x: ProjectivePoint) -> bool:
        """Infinitely many lines of X pass through x"""
        return not self.lines_through(x).finite

    def frame_rank(self, frame: TangentFrame, directions: List[np.ndarray]) -> RankResult:
        """Rank of direction vectors reduced into the tangent frame"""
        if not directions:
            return RankResult(rank=0, backend=frame.point.backend.name)
        coordinates = [frame.coordinates(d) for d in directions]
        return span_rank(coordinates, frame.point.backend, self.tolerances.rank)

    def spanning_lines(self, x: ProjectivePoint, seed: int = 0) -> SpanningLines:
        """n lines of X through x with tangent directions of rank n"""
        X = self.as_complex()
        x = x.to_backend(COMPLEX)
        frame = X.tangent_hyperplane(x)
        if X.n == 3:
            line_set = X.lines_through(x, seed)
            if not line_set.finite:
                raise EckardtCenterError(f"{x!r} is an Eckardt point")
            chosen = X._greedy_span(frame, [line for line, _ in line_set.lines], [])
            rank = X.frame_rank(frame, [line.dir for line in chosen])
            if rank.rank < X.n:
                raise SolverDegeneracyError(f"lines through {x!r} span only rank {rank.rank}")
            return SpanningLines(center=x, lines=chosen, rank=rank)

        chosen: List[ProjectiveLine] = []
        for attempt in range(X.retries.slices):
            slice_seed = derive_seed(seed, attempt)
            found = X._lines_in_slice(x, slice_seed)
            chosen = X._greedy_span(frame, found, chosen)
            if len(chosen) == X.n:
                rank = X.frame_rank(frame, [line.dir for line in chosen])
                logger.debug("spanning lines at %r found with %d slices", x, attempt + 1)
                return SpanningLines(center=x, lines=chosen, rank=rank, slices_used=attempt + 1)
        raise ResampleLimitError(f"directions of rank {X.n} not reached after {X.retries.slices} slices")

    def _greedy_span(self, frame: TangentFrame, candidates: List[ProjectiveLine],
                     chosen: List[ProjectiveLine]) -> List[ProjectiveLine]:
        chosen = list(chosen)
        current = self.frame_rank(frame, [line.dir for line in chosen]).rank
        for line in candidates:
            if len(chosen) == self.n:
                break
            rank = self.frame_rank(frame, [l.dir for l in chosen] + [line.dir]).rank
            if rank > current:
                chosen.append(line)
                current = rank
        return chosen

    def _lines_in_slice(self, x: ProjectivePoint, seed: int) -> List[ProjectiveLine]:
        """Lines through x of the threefold X cut with a random P^4 through x"""
        spanning = np.array(random_subspace_through(x, 4, seed, self.tolerances.rank), dtype=np.complex128)
        try:
            section = CubicHypersurface(self.polar.restrict(spanning).to_cubic(), self.tolerances, self.retries)
            origin = ProjectivePoint.of(COMPLEX.unit(5, 0), COMPLEX)
            line_set = section.lines_through(origin, seed)
        except (SpecFormatError, SingularPointError, SolverDegeneracyError, NotOnCubicError) as exc:
            logger.debug("slice with seed %d skipped: %s", seed, exc)
            return []
        if not line_set.finite:
            logger.debug("slice with seed %d has an Eckardt point at x", seed)
            return []
        return [ProjectiveLine(x, np.dot(line.dir, spanning)) for line, _ in line_set.lines]
