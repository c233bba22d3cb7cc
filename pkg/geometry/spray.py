"""Rank-1 sprays from the third-point involution and domination certificates.

For a target y on X pick a line through y meeting X in three distinct points
y, x, u. Every line l of X through x gives the orbit t -> tau_u(x + t z),
z = l cut with T_u X, passing through y at t = 0. The certificate collects n
such orbits and checks that their tangents at y span T_y X.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence

import numpy as np
import scipy.linalg

from geometry.backends import COMPLEX, RATIONAL, derive_seed, get_backend, make_rng, to_backend
from geometry.cubic_geom import CubicHypersurface, DivisorOnLine
from geometry.errors import (
    CubicError,
    IndeterminateError,
    InsufficientSamplesError,
    NotOnCubicError,
    RankDeficiencyError,
    ResampleLimitError,
    SingularPointError,
    SolverDegeneracyError,
)
from geometry.forms import HomogeneousCubic, parse_cubic
from geometry.linalg import RankResult, exact_determinant
from geometry.projective import (
    ProjectiveLine,
    ProjectivePoint,
    TangentFrame,
    proj_equal,
    random_point_on_cubic,
    span_rank,
)
from utils.serialization import decode_point, decode_vector, encode_point, encode_vector

logger = logging.getLogger(__name__)

GENERICITY_FLAGS = (
    "x_not_in_S_u",
    "x_not_in_S_star_u",
    "y_not_in_S_u",
    "y_not_in_S_star_u",
    "u_not_in_S_x",
    "u_not_in_S_star_x",
    "y_not_in_S_x",
    "y_not_in_S_star_x",
)
MIN_CONIC_SAMPLES = 7
FINITE_DIFFERENCE_STEP = 1e-5


@dataclass(frozen=True, eq=False)
class SpraySetup:
    """Collinear y, x, u on X cut out as a reduced divisor, with the genericity flags"""

    y: ProjectivePoint
    x: ProjectivePoint
    u: ProjectivePoint
    divisor: DivisorOnLine
    flags: Dict[str, bool] = field(default_factory=dict)

    @property
    def valid(self) -> bool:
        return len(self.flags) == len(GENERICITY_FLAGS) and all(self.flags.values())

    @property
    def backend(self):
        return COMPLEX if COMPLEX in (self.y.backend, self.x.backend, self.u.backend) else RATIONAL


@dataclass(frozen=True, eq=False)
class OrbitDatum:
    line: ProjectiveLine
    z: np.ndarray
    tangent: np.ndarray
    ambient_tangent: np.ndarray
    differential_ok: bool = True


@dataclass(frozen=True)
class VerificationResult:
    ok: bool
    reasons: List[str] = field(default_factory=list)


@dataclass(frozen=True, eq=False)
class SprayCertificate:
    """Setup, n orbits and the rank evidence of their tangents at y"""

    cubic: HomogeneousCubic
    setup: SpraySetup
    orbits: List[OrbitDatum]
    tangent_matrix: List[np.ndarray]
    rank: RankResult
    backend: str
    seed: int
    determinant: Optional[object] = None
    verified: bool = False

    @property
    def n(self) -> int:
        return self.cubic.dimension

    def to_json(self) -> dict:
        backend = get_backend(self.backend)
        return {
            "cubic": self.cubic.to_spec(),
            "backend": self.backend,
            "seed": int(self.seed),
            "y": encode_point(self.setup.y),
            "x": encode_point(self.setup.x),
            "u": encode_point(self.setup.u),
            "divisor": [
                {"point": encode_point(p), "multiplicity": m} for p, m in self.setup.divisor.points
            ],
            "flags": dict(self.setup.flags),
            "orbits": [
                {
                    "line": {"base": encode_point(o.line.base), "direction": encode_vector(o.line.dir, backend)},
                    "z": encode_vector(o.z, backend),
                    "tangent": encode_vector(o.tangent, backend),
                    "differential_ok": o.differential_ok,
                }
                for o in self.orbits
            ],
            "tangent_matrix": [encode_vector(row, backend) for row in self.tangent_matrix],
            "rank": self.rank.rank,
            "determinant": RATIONAL.encode(self.determinant) if self.determinant is not None else None,
            "singular_values": self.rank.singular_values,
            "verified": self.verified,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "SprayCertificate":
        """Rebuild a certificate; nothing is trusted until verify_certificate runs"""
        try:
            backend = get_backend(doc["backend"])
            cubic = parse_cubic(doc["cubic"])
            y, x, u = (decode_point(doc[k], backend) for k in ("y", "x", "u"))
            divisor_points = [(decode_point(e["point"], backend), int(e["multiplicity"])) for e in doc["divisor"]]
            orbits = []
            for entry in doc["orbits"]:
                base = decode_point(entry["line"]["base"], backend)
                line = ProjectiveLine(base, decode_vector(entry["line"]["direction"], backend))
                orbits.append(OrbitDatum(
                    line=line,
                    z=decode_vector(entry["z"], backend),
                    tangent=decode_vector(entry["tangent"], backend),
                    ambient_tangent=backend.zeros(len(base.coords)),
                    differential_ok=bool(entry.get("differential_ok", True)),
                ))
            matrix = [decode_vector(row, backend) for row in doc["tangent_matrix"]]
            determinant = RATIONAL.decode(doc["determinant"]) if doc.get("determinant") is not None else None
            rank = RankResult(rank=int(doc["rank"]), backend=backend.name, minor=determinant,
                              singular_values=doc.get("singular_values"))
        except (KeyError, TypeError) as exc:
            raise CubicError(f"malformed certificate: {exc}") from exc
        divisor = DivisorOnLine(line=ProjectiveLine(y, x.coords), points=divisor_points)
        setup = SpraySetup(y=y, x=x, u=u, divisor=divisor, flags=dict(doc.get("flags", {})))
        return cls(cubic=cubic, setup=setup, orbits=orbits, tangent_matrix=matrix, rank=rank,
                   backend=backend.name, seed=int(doc.get("seed", 0)), determinant=determinant,
                   verified=bool(doc.get("verified", False)))


@dataclass(frozen=True, eq=False)
class ConicReport:
    """Sampled orbit of the spray through a general y' and the conic it spans"""

    u_prime: ProjectivePoint
    line: ProjectiveLine
    y_prime: ProjectivePoint
    samples: List[ProjectivePoint]
    on_cubic: bool
    plane_rank: int
    moment_rank: int
    fit_residual: float
    conic_smooth: bool
    passes_u_prime: bool
    passes_y_prime: bool

    @property
    def verdict(self) -> str:
        if self.on_cubic and self.plane_rank == 3 and self.moment_rank == 5:
            return "conic"
        return "degenerate"

    def to_json(self) -> dict:
        return {
            "u_prime": encode_point(self.u_prime),
            "y_prime": encode_point(self.y_prime),
            "samples": len(self.samples),
            "on_cubic": self.on_cubic,
            "plane_rank": self.plane_rank,
            "moment_rank": self.moment_rank,
            "fit_residual": self.fit_residual,
            "conic_smooth": self.conic_smooth,
            "passes_u_prime": self.passes_u_prime,
            "passes_y_prime": self.passes_y_prime,
            "verdict": self.verdict,
        }


class SprayBuilder:
    """Builds and checks spray data on one cubic hypersurface"""

    def __init__(self, X: CubicHypersurface):
        self.X = X
        self.tolerances = X.tolerances
        self.retries = X.retries

    def _common(self, setup: SpraySetup, lines: Sequence[ProjectiveLine] = (), force_complex: bool = False):
        """A builder, setup and lines sharing one backend (complex as soon as any input is)"""
        complex_needed = (force_complex or self.X.backend is COMPLEX or setup.backend is COMPLEX
                          or any(line.backend is COMPLEX for line in lines))
        if not complex_needed:
            return self, setup, list(lines)
        builder = self if self.X.backend is COMPLEX else SprayBuilder(self.X.as_complex())
        setup = replace(setup, y=setup.y.to_backend(COMPLEX), x=setup.x.to_backend(COMPLEX),
                        u=setup.u.to_backend(COMPLEX))
        return builder, setup, [line.to_backend(COMPLEX) for line in lines]

    # setups

    def _flags(self, y: ProjectivePoint, x: ProjectivePoint, u: ProjectivePoint) -> Dict[str, bool]:
        X = self.X
        return {
            "x_not_in_S_u": not X.in_S(u, x),
            "x_not_in_S_star_u": not X.in_S_star(u, x),
            "y_not_in_S_u": not X.in_S(u, y),
            "y_not_in_S_star_u": not X.in_S_star(u, y),
            "u_not_in_S_x": not X.in_S(x, u),
            "u_not_in_S_star_x": not X.in_S_star(x, u),
            "y_not_in_S_x": not X.in_S(x, y),
            "y_not_in_S_star_x": not X.in_S_star(x, y),
        }

    @staticmethod
    def _reduced(divisor: DivisorOnLine) -> bool:
        return not divisor.contained and len(divisor.points) == 3 and all(m == 1 for _, m in divisor.points)

    def pick_setup(self, y: ProjectivePoint, seed: int) -> SpraySetup:
        """First seeded line through y cutting X in a reduced divisor {y, x, u} with generic flags"""
        if not self.X.check_smooth_at(y):
            raise SingularPointError(f"X is singular at {y!r}")
        X = self.X.as_complex()
        y = y.to_backend(COMPLEX)
        for attempt in range(self.retries.setups):
            rng = make_rng(seed, attempt)
            other = ProjectivePoint.of(COMPLEX.random_vector(rng, X.num_vars), COMPLEX)
            if proj_equal(y, other, self.tolerances.membership):
                continue
            divisor = X.bezout_divisor(y, other)
            if not self._reduced(divisor):
                logger.debug("setup attempt %d: divisor not reduced", attempt)
                continue
            rest = [p for p, _ in divisor.points if not proj_equal(p, y, self.tolerances.rank)]
            if len(rest) != 2:
                continue
            x, u = (rest[i] for i in rng.permutation(2))
            flags = self._flags(y, x, u)
            if all(flags.values()):
                logger.debug("setup accepted after %d attempts", attempt + 1)
                return SpraySetup(y=y, x=x, u=u, divisor=divisor, flags=flags)
            logger.debug("setup attempt %d failed genericity: %s", attempt, [k for k, v in flags.items() if not v])
        raise ResampleLimitError(f"no generic setup through {y!r} after {self.retries.setups} lines")

    def setup_from_points(self, y: ProjectivePoint, x: ProjectivePoint, u: ProjectivePoint) -> SpraySetup:
        """Setup from given points; check ``valid`` before using it"""
        X = self.X
        for name, p in (("y", y), ("x", x), ("u", u)):
            if not X.contains(p):
                raise NotOnCubicError(f"{name} not on X")
        divisor = X.bezout_divisor(x, y)
        if not self._reduced(divisor) or not any(proj_equal(p, u, self.tolerances.rank) for p, _ in divisor.points):
            raise CubicError("the line through x and y does not cut X in the reduced divisor {x, u, y}")
        return SpraySetup(y=y, x=x, u=u, divisor=divisor, flags=self._flags(y, x, u))

    # orbits

    @staticmethod
    def _complex_vector(v: Optional[np.ndarray]) -> Optional[np.ndarray]:
        if v is None or v.dtype == np.complex128:
            return v
        return to_backend(v, RATIONAL, COMPLEX)

    def tangent_point(self, setup: SpraySetup, line: ProjectiveLine, u: Optional[ProjectivePoint] = None) -> np.ndarray:
        """z = l cut with T_u X, as P(d, u, u) x - P(x, u, u) d"""
        builder, setup, (line,) = self._common(setup, [line], u is not None and u.backend is COMPLEX)
        if builder is not self:
            return builder.tangent_point(setup, line, u)
        X, (x, u) = self.X.aligned(setup.x, u or setup.u)
        d = line.dir
        return X.polar(d, u, u) * x - X.polar(x, u, u) * d

    def orbit_representative(self, setup: SpraySetup, line: ProjectiveLine, t, z: Optional[np.ndarray] = None):
        """Y(t) = P(f, u, u) f - P(f, f, u) u with f = x + t z, before normalisation"""
        force = isinstance(t, complex) or (z is not None and z.dtype == np.complex128)
        builder, setup, (line,) = self._common(setup, [line], force)
        if builder is not self:
            return builder.orbit_representative(setup, line, t, self._complex_vector(z))
        z = self.tangent_point(setup, line) if z is None else z
        X, (x, u) = self.X.aligned(setup.x, setup.u)
        f = x + t * z
        return X.polar(f, u, u) * f - X.polar(f, f, u) * u

    def orbit_point(self, setup: SpraySetup, line: ProjectiveLine, t, u: Optional[ProjectivePoint] = None,
                    z: Optional[np.ndarray] = None) -> ProjectivePoint:
        """tau_u(x + t z); t = 0 gives tau_u(x)"""
        force = (isinstance(t, complex) or (u is not None and u.backend is COMPLEX)
                 or (z is not None and z.dtype == np.complex128))
        builder, setup, (line,) = self._common(setup, [line], force)
        if builder is not self:
            return builder.orbit_point(setup, line, t, u, self._complex_vector(z))
        u = u or setup.u
        z = self.tangent_point(setup, line, u) if z is None else z
        f = ProjectivePoint.of(setup.x.coords + t * z, self.X.backend)
        return self.X.third_point(u, f)

    def coincident_parameters(self, setup: SpraySetup, line: ProjectiveLine, parameters: Sequence,
                              u: Optional[ProjectivePoint] = None, z: Optional[np.ndarray] = None) -> List[tuple]:
        """Pairs of distinct parameters whose orbit points agree.

        tau_u is injective off S_u, so a pair means two points of the orbit line
        lie on T_u X and both are contracted to u.
        """
        images = [self.orbit_point(setup, line, t, u=u, z=z) for t in parameters]
        pairs = []
        for i in range(len(parameters)):
            for j in range(i + 1, len(parameters)):
                if parameters[i] != parameters[j] and proj_equal(images[i], images[j], self.tolerances.rank):
                    pairs.append((parameters[i], parameters[j]))
        if pairs:
            logger.warning("orbit is not injective: %d coincident parameter pairs, the line lies in T_u X", len(pairs))
        return pairs

    def orbit_tangent(self, setup: SpraySetup, line: ProjectiveLine, frame: Optional[TangentFrame] = None,
                      z: Optional[np.ndarray] = None):
        """Derivative of the orbit at t = 0 in the frame at y, with its ambient representative"""
        force = z is not None and z.dtype == np.complex128
        builder, setup, (line,) = self._common(setup, [line], force)
        if builder is not self:
            if frame is not None and frame.point.backend is not builder.X.backend:
                frame = None
            return builder.orbit_tangent(setup, line, frame, self._complex_vector(z))
        frame = frame or self.X.tangent_hyperplane(setup.y)
        z = self.tangent_point(setup, line) if z is None else z
        X, (x, u) = self.X.aligned(setup.x, setup.u)
        ambient = X.polar(z, u, u) * x + X.polar(x, u, u) * z - 2 * X.polar(x, z, u) * u
        coordinates = frame.coordinates(ambient)
        scale = X.backend.norm(x) * X.backend.norm(u) ** 2 * X.backend.norm(z)
        if X.backend.is_zero_vector(coordinates, scale, self.tolerances.rank):
            raise SolverDegeneracyError("orbit tangent vanishes at y; the setup is degenerate")
        return coordinates, ambient

    def differential_image(self, setup: SpraySetup, direction: np.ndarray) -> np.ndarray:
        """d tau_u at x applied to a direction, on representatives"""
        builder, setup, _ = self._common(setup, [], direction.dtype == np.complex128)
        if builder is not self:
            return builder.differential_image(setup, self._complex_vector(direction))
        X, (x, u) = self.X.aligned(setup.x, setup.u)
        return X.polar(direction, u, u) * x + X.polar(x, u, u) * direction - 2 * X.polar(x, direction, u) * u

    def finite_difference_error(self, setup: SpraySetup, line: ProjectiveLine,
                                step: float = FINITE_DIFFERENCE_STEP) -> float:
        """Relative gap between the tangent formula and a central difference of Y(t)"""
        builder, setup, (line,) = self._common(setup, [line], force_complex=True)
        z = builder.tangent_point(setup, line)
        _, ambient = builder.orbit_tangent(setup, line, z=z)
        forward = builder.orbit_representative(setup, line, step, z)
        backward = builder.orbit_representative(setup, line, -step, z)
        difference = (forward - backward) / (2 * step)
        return float(np.max(np.abs(difference - ambient)) / np.max(np.abs(ambient)))

    def spray_map(self, setup: SpraySetup, line: ProjectiveLine, y_prime: ProjectivePoint, t) -> ProjectivePoint:
        """s(y', t) = tau_{u'}(x + t z(u')) with u' = tau_x(y'); s(y', 0) = y'"""
        force = y_prime.backend is COMPLEX or isinstance(t, complex)
        builder, setup, (line,) = self._common(setup, [line], force)
        u_prime = builder.X.third_point(setup.x, y_prime)
        return builder.orbit_point(setup, line, t, u=u_prime)

    # certificates

    def assemble_certificate(self, setup: SpraySetup, lines: Sequence[ProjectiveLine], seed: int = 0
                             ) -> SprayCertificate:
        """Certificate from a setup and n lines of X through x"""
        if not setup.valid:
            raise SolverDegeneracyError("setup fails the genericity checks")
        if len(lines) != self.X.n:
            raise CubicError(f"need {self.X.n} lines through x, got {len(lines)}")
        builder, setup, lines = self._common(setup, lines)
        X = builder.X
        for line in lines:
            if not proj_equal(line.base, setup.x, self.tolerances.membership):
                raise CubicError("line does not pass through x")
            if not X.in_C(setup.x, ProjectivePoint.of(line.dir, line.backend)):
                raise CubicError("line is not contained in X")
        frame = X.tangent_hyperplane(setup.y)
        orbits = []
        for line in lines:
            z = builder.tangent_point(setup, line)
            coordinates, ambient = builder.orbit_tangent(setup, line, frame, z)
            image = frame.coordinates(builder.differential_image(setup, line.dir))
            differential_ok = X.backend.proportional(coordinates, image, self.tolerances.rank)
            if not differential_ok:
                logger.warning("orbit tangent is not the image of the line direction under d tau_u")
            orbits.append(OrbitDatum(line=line, z=z, tangent=coordinates, ambient_tangent=ambient,
                                     differential_ok=differential_ok))
        matrix = [o.tangent for o in orbits]
        rank = span_rank(matrix, X.backend, self.tolerances.rank)
        determinant = exact_determinant([list(r) for r in matrix]) if X.backend.exact else None
        certificate = SprayCertificate(cubic=self.X.form, setup=setup, orbits=orbits, tangent_matrix=matrix,
                                       rank=rank, backend=X.backend.name, seed=seed, determinant=determinant)
        return replace(certificate, verified=self.verify_certificate(certificate).ok)

    def build_certificate(self, y: ProjectivePoint, seed: int) -> SprayCertificate:
        """Setup at y, spanning lines at x, orbit tangents and their rank"""
        candidate = None
        for attempt in range(self.retries.rank):
            try:
                setup = self.pick_setup(y, derive_seed(seed, attempt))
                spanning = self.X.spanning_lines(setup.x, derive_seed(seed, attempt, 1))
                certificate = self.assemble_certificate(setup, spanning.lines, seed)
            except (ResampleLimitError, SolverDegeneracyError) as exc:
                logger.debug("certificate attempt %d resampled: %s", attempt, exc)
                continue
            if certificate.rank.rank < self.X.n:
                candidate = certificate
                logger.warning("counterexample candidate at %r: tangent rank %d < %d",
                               y, certificate.rank.rank, self.X.n)
                continue
            if certificate.verified:
                return certificate
            logger.warning("certificate attempt %d did not verify: %s", attempt,
                           self.verify_certificate(certificate).reasons)
        if candidate is not None:
            raise RankDeficiencyError(f"orbit tangents at {y!r} stay rank deficient after {self.retries.rank} tries",
                                      report=candidate.to_json())
        raise ResampleLimitError(f"no certificate data at {y!r} after {self.retries.rank} attempts")

    def verify_certificate(self, certificate: SprayCertificate) -> VerificationResult:
        """Recheck a certificate from scratch; never raises"""
        reasons: List[str] = []
        try:
            self._verify(certificate, reasons)
        except CubicError as exc:
            reasons.append(f"verification error: {exc}")
        return VerificationResult(ok=not reasons, reasons=reasons)

    def _same_cubic(self, other: HomogeneousCubic) -> bool:
        if other.backend is self.X.backend:
            return other.to_spec() == self.X.form.to_spec()
        mine, theirs = self.X.form.to_backend(COMPLEX), other.to_backend(COMPLEX)
        keys = set(mine.coefficients) | set(theirs.coefficients)
        return all(np.isclose(mine.coefficients.get(k, 0), theirs.coefficients.get(k, 0)) for k in keys)

    def _verify(self, certificate: SprayCertificate, reasons: List[str]) -> None:
        if not self._same_cubic(certificate.cubic):
            reasons.append("certificate is for another cubic")
        for name in ("y", "x", "u"):
            if not self.X.contains(getattr(certificate.setup, name)):
                reasons.append(f"{name} not on X")
        if reasons:
            return
        builder, setup, lines = self._common(certificate.setup, [o.line for o in certificate.orbits])
        X = builder.X
        try:
            divisor = X.bezout_divisor(setup.x, setup.y)
            reduced = self._reduced(divisor) and any(
                proj_equal(p, setup.u, self.tolerances.rank) for p, _ in divisor.points)
        except CubicError:
            reduced = False
        if not reduced:
            reasons.append("divisor is not the reduced {x, u, y}")
        if not all(builder._flags(setup.y, setup.x, setup.u).values()):
            reasons.append("genericity")
        if len(lines) != X.n:
            reasons.append(f"expected {X.n} orbits, found {len(lines)}")
        if reasons:
            return

        frame = X.tangent_hyperplane(setup.y)
        tol = 0.0 if X.backend.exact else self.tolerances.rank
        for index, (line, orbit) in enumerate(zip(lines, certificate.orbits)):
            if not proj_equal(line.base, setup.x, self.tolerances.membership):
                reasons.append(f"line incidence: orbit {index} does not start at x")
                continue
            try:
                contained = X.in_C(setup.x, ProjectivePoint.of(line.dir, line.backend))
            except CubicError:
                contained = False
            if not contained:
                reasons.append(f"line incidence: orbit {index} line is not on X")
                continue
            z = builder.tangent_point(setup, line)
            stored_z = to_backend(orbit.z, get_backend(certificate.backend), X.backend)
            if not X.backend.proportional(z, stored_z, tol) or not X.in_S(setup.u, ProjectivePoint.of(z, X.backend)):
                reasons.append(f"z incidence: orbit {index}")
                continue
            try:
                coordinates, _ = builder.orbit_tangent(setup, line, frame, z)
            except SolverDegeneracyError:
                reasons.append(f"tangent formula: orbit {index} tangent vanishes")
                continue
            stored = to_backend(orbit.tangent, get_backend(certificate.backend), X.backend)
            if len(stored) != len(coordinates) or not X.backend.proportional(coordinates, stored, tol):
                reasons.append(f"tangent formula: orbit {index}")
        if reasons:
            return
        source = get_backend(certificate.backend)
        rows = [to_backend(np.asarray(row, dtype=o.tangent.dtype), source, X.backend)
                for row, o in zip(certificate.tangent_matrix, certificate.orbits)]
        if len(certificate.tangent_matrix) != len(certificate.orbits) or any(
                not X.backend.proportional(row, to_backend(o.tangent, source, X.backend), tol)
                for row, o in zip(rows, certificate.orbits)):
            reasons.append("tangent matrix does not match the orbit tangents")
            return
        rank = span_rank(rows, X.backend, self.tolerances.rank)
        if rank.rank != X.n:
            reasons.append(f"rank deficient: {rank.rank} < {X.n}")
        if certificate.rank.rank != rank.rank:
            reasons.append(f"rank evidence: stored rank {certificate.rank.rank}, recomputed {rank.rank}")
        self._check_evidence(certificate, rows, rank, reasons)

    def _check_evidence(self, certificate: SprayCertificate, rows: List[np.ndarray], rank: RankResult,
                        reasons: List[str]) -> None:
        """Stored determinant or singular values must match the recomputed ones"""
        if self.X.backend.exact and certificate.backend == RATIONAL.name:
            determinant = exact_determinant([list(r) for r in rows])
            if certificate.determinant is None or certificate.determinant != determinant:
                reasons.append(f"determinant evidence: stored {certificate.determinant}, recomputed {determinant}")
            return
        if certificate.backend == RATIONAL.name:
            return
        stored = certificate.rank.singular_values
        recomputed = rank.singular_values or []
        if stored is None or len(stored) != len(recomputed):
            reasons.append("singular value evidence missing")
            return
        atol = self.tolerances.rank * (recomputed[0] if recomputed else 1.0)
        if not np.allclose(stored, recomputed, rtol=1e-6, atol=atol):
            reasons.append("singular value evidence does not match the tangent matrix")

    # conic orbits

    def _general_setup_point(self, setup: SpraySetup, seed: int):
        """A random y' on X whose u' = tau_x(y') keeps x and y' generic"""
        X = self.X
        for attempt in range(self.retries.setups):
            y_prime = random_point_on_cubic(X.form, derive_seed(seed, attempt), tol=self.tolerances.membership)
            try:
                u_prime = X.third_point(setup.x, y_prime)
            except IndeterminateError:
                continue
            flags = self._flags(y_prime, setup.x, u_prime)
            if all(flags.values()) and not proj_equal(u_prime, y_prime, self.tolerances.rank):
                return y_prime, u_prime
            logger.debug("y' sample %d not generic", attempt)
        raise ResampleLimitError(f"no general y' after {self.retries.setups} samples")

    def conic_orbit_check(self, setup: SpraySetup, line: ProjectiveLine, seed: int,
                          samples: int = 9) -> ConicReport:
        """Sample the orbit through a general y' and test that it spans a plane conic"""
        if samples < MIN_CONIC_SAMPLES:
            raise InsufficientSamplesError(f"insufficient samples: {samples} < {MIN_CONIC_SAMPLES}")
        builder = SprayBuilder(self.X.as_complex())
        builder, setup, (line,) = builder._common(setup, [line])
        X = builder.X
        y_prime, u_prime = builder._general_setup_point(setup, seed)
        z_prime = builder.tangent_point(setup, line, u_prime)
        rng = make_rng(seed, 1)
        images = []
        for _ in range(samples):
            t = complex(rng.standard_normal(), rng.standard_normal())
            images.append(builder.orbit_point(setup, line, t, u=u_prime, z=z_prime))
        on_cubic = all(X.contains(p) for p in images)

        plane = np.array([setup.x.coords, z_prime, y_prime.coords], dtype=np.complex128)
        plane_rank = span_rank(list(plane) + [p.coords for p in images], COMPLEX, self.tolerances.rank).rank

        def plane_coordinates(p):
            solution, *_ = scipy.linalg.lstsq(plane.T, p.coords)
            return solution

        coords = np.array([plane_coordinates(p) for p in images])
        a, b, c = coords[:, 0], coords[:, 1], coords[:, 2]
        veronese = np.column_stack([a * a, b * b, c * c, a * b, a * c, b * c])
        _, sigma, vh = scipy.linalg.svd(veronese)
        moment_rank = int(np.sum(sigma > self.tolerances.conic_fit * sigma[0]))
        residual = float(sigma[5] / sigma[4]) if sigma[4] > 0 else float("inf")

        q = np.conj(vh[-1])
        conic = np.array([
            [q[0], q[3] / 2, q[4] / 2],
            [q[3] / 2, q[1], q[5] / 2],
            [q[4] / 2, q[5] / 2, q[2]],
        ])
        conic_scale = np.max(np.abs(conic))
        conic_smooth = abs(scipy.linalg.det(conic)) > self.tolerances.rank * conic_scale ** 3

        def on_conic(p):
            w = plane_coordinates(p)
            return abs(w @ conic @ w) <= self.tolerances.rank * conic_scale * np.max(np.abs(w)) ** 2

        return ConicReport(
            u_prime=u_prime, line=line, y_prime=y_prime, samples=images, on_cubic=on_cubic,
            plane_rank=plane_rank, moment_rank=moment_rank, fit_residual=residual,
            conic_smooth=bool(conic_smooth), passes_u_prime=bool(on_conic(u_prime)),
            passes_y_prime=bool(on_conic(y_prime)),
        )
