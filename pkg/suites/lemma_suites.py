"""Randomized, seeded checks of the incidence geometry and the spray construction.

Each suite runs ``trials`` independent trials; trial ``t`` draws everything
from seeds derived from (seed, suite index, t) so any record can be replayed
on its own.
"""
import logging
import time
from itertools import permutations
from typing import Callable, Dict, Optional, Sequence

from geometry.backends import COMPLEX, RATIONAL, derive_seed, make_rng
from geometry.config import DEFAULT_RETRIES, DEFAULT_TOLERANCES, RetryPolicy, Tolerances
from geometry.cubic_geom import CubicHypersurface
from geometry.errors import CubicError
from geometry.forms import HomogeneousCubic
from geometry.projective import ProjectivePoint, proj_equal, random_point_on_cubic, tangent_hop
from geometry.spray import SprayBuilder
from suites.report import CheckRecord, SuiteReport
from utils.corpus import CorpusEntry, CorpusGenerator
from utils.serialization import encode_point, encode_vector

logger = logging.getLogger(__name__)

SUITES = ("involution", "fixed-points", "bitangency", "lines", "eckardt", "spray", "conic", "divisor", "numerics")
SAMPLE_ATTEMPTS = 16
LINE_POINTS = 3
INCIDENCE_RESIDUAL = 1e-9
RESTRICTION_SAMPLES = 5


def known_rational_point(form: HomogeneousCubic) -> Optional[ProjectivePoint]:
    """A smooth rational point found without search: a coordinate vertex, or the Fermat point"""
    if not form.backend.exact:
        return None
    X = CubicHypersurface(form)
    for i in range(form.num_vars):
        vertex = ProjectivePoint.of(RATIONAL.unit(form.num_vars, i), RATIONAL)
        if X.contains(vertex) and X.check_smooth_at(vertex):
            return vertex
    if form.to_spec() == CorpusGenerator.fermat(form.dimension).to_spec():
        return CorpusGenerator.fermat_base_point(form.dimension)
    return None


def entry_for(form: HomogeneousCubic, base_point: Optional[ProjectivePoint] = None) -> CorpusEntry:
    return CorpusEntry(index=0, form=form, base_point=base_point or known_rational_point(form), seed=0)


class LemmaSuiteRunner:
    """Runs the suites over one cubic or a corpus of cubics"""

    def __init__(self, entries: Sequence[CorpusEntry], seed: int = 0, trials: int = 10,
                 tolerances: Tolerances = DEFAULT_TOLERANCES, retries: RetryPolicy = DEFAULT_RETRIES,
                 backend=None, timing: bool = False):
        if not entries:
            raise CubicError("a suite needs at least one cubic")
        self.entries = list(entries)
        self.seed = seed
        self.trials = trials
        self.tolerances = tolerances
        self.retries = retries
        self.backend = backend or self.entries[0].form.backend
        self.timing = timing
        self.generator = CorpusGenerator(seed)
        self._suites: Dict[str, Callable[[int, CorpusEntry, SuiteReport], None]] = {
            "involution": self._involution,
            "fixed-points": self._fixed_points,
            "bitangency": self._bitangency,
            "lines": self._lines,
            "eckardt": self._eckardt,
            "spray": self._spray,
            "conic": self._conic,
            "divisor": self._divisor,
            "numerics": self._numerics,
        }

    def run(self, suite: str) -> SuiteReport:
        if suite != "all" and suite not in self._suites:
            raise CubicError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)} or all")
        names = list(SUITES) if suite == "all" else [suite]
        report = SuiteReport(suite=suite, backend=self.backend.name, seed=self.seed, trials=self.trials)
        started = time.perf_counter()
        for name in names:
            runner = self._suites[name]
            if name == "eckardt" and self.trials > 0:
                self._eckardt_census(report)
            for trial in range(self.trials):
                entry = self.entries[trial % len(self.entries)]
                try:
                    runner(trial, entry, report)
                except CubicError as exc:
                    logger.warning("%s trial %d failed with %s: %s", name, trial, type(exc).__name__, exc)
                    report.add(CheckRecord(name, "error", trial, self._seed(name, trial), False,
                                           inputs={"cubic": entry.form.to_spec()}, detail=f"{type(exc).__name__}: {exc}"))
        elapsed = time.perf_counter() - started
        logger.info("suite %s: %d passed, %d failed in %.2fs", suite, report.passed, report.failed, elapsed)
        if self.timing:
            report.wall_clock = elapsed
        return report

    # helpers

    def _seed(self, suite: str, trial: int, *keys: int) -> int:
        return derive_seed(self.seed, SUITES.index(suite), trial, *keys)

    def _hypersurface(self, entry: CorpusEntry) -> CubicHypersurface:
        form = entry.form if self.backend is entry.form.backend else entry.form.to_backend(self.backend)
        return CubicHypersurface(form, self.tolerances, self.retries)

    def _point(self, X: CubicHypersurface, entry: CorpusEntry, seed: int,
               base: Optional[ProjectivePoint] = None, hops: int = 2) -> ProjectivePoint:
        """Exact sample by tangent hops when possible, else a complex point of X"""
        start = base or entry.base_point
        if X.backend.exact and start is not None and start.backend.exact:
            return random_point_on_cubic(X.form, seed, base_point=start, hops=hops,
                                         attempts=self.retries.rational_resamples)
        Xc = X.as_complex()
        if base is None:
            return random_point_on_cubic(Xc.form, seed, tol=self.tolerances.membership)
        # one complex tangent hop: the result lies in S_base
        rng = make_rng(seed)
        coords = base.to_backend(COMPLEX).coords
        for _ in range(self.retries.rational_resamples):
            hop = tangent_hop(Xc.form, coords, rng)
            if hop is not None and not COMPLEX.is_zero_vector(hop):
                return ProjectivePoint.of(hop, COMPLEX)
        raise CubicError(f"no tangent hop from {base!r}")

    def _pair(self, X: CubicHypersurface, entry: CorpusEntry, suite: str, trial: int, accept):
        for attempt in range(SAMPLE_ATTEMPTS):
            u = self._point(X, entry, self._seed(suite, trial, attempt, 0))
            x = self._point(X, entry, self._seed(suite, trial, attempt, 1))
            if not proj_equal(u, x, self.tolerances.membership) and accept(u, x):
                return u, x
        raise CubicError(f"no admissible sample pair after {SAMPLE_ATTEMPTS} attempts")

    @staticmethod
    def _inputs(entry: CorpusEntry, **points) -> dict:
        doc = {"cubic": entry.form.to_spec()}
        doc.update({k: encode_point(p) for k, p in points.items()})
        return doc

    def _record(self, report, suite, check, trial, passed, entry, residuals=None, detail=None, **points):
        report.add(CheckRecord(suite, check, trial, self._seed(suite, trial), bool(passed),
                               inputs=self._inputs(entry, **points), residuals=residuals or {}, detail=detail))

    # suites

    def _involution(self, trial: int, entry: CorpusEntry, report: SuiteReport) -> None:
        X = self._hypersurface(entry)
        u, x = self._pair(X, entry, "involution", trial,
                          lambda u, x: not X.in_S(u, x) and not X.in_C(u, x))
        y = X.third_point(u, x)
        back = X.third_point(u, y)
        passed = X.contains(y) and proj_equal(back, x, self.tolerances.rank)
        self._record(report, "involution", "tau_u twice is the identity", trial, passed, entry, u=u, x=x)

    def _hop_pair(self, X: CubicHypersurface, entry: CorpusEntry, trial: int, key: int, accept):
        """(start, hop) with the hop tangent at start, resampled until ``accept`` holds"""
        for attempt in range(SAMPLE_ATTEMPTS):
            start = self._point(X, entry, self._seed("fixed-points", trial, key, attempt, 0))
            hop = self._point(X, entry, self._seed("fixed-points", trial, key, attempt, 1), base=start, hops=1)
            if accept(start, hop):
                return start, hop
        raise CubicError(f"no tangent hop off C_u after {SAMPLE_ATTEMPTS} attempts")

    def _fixed_points(self, trial: int, entry: CorpusEntry, report: SuiteReport) -> None:
        X = self._hypersurface(entry)
        suite = "fixed-points"
        # x in S*_u: u is a tangent hop from x, so u lies in S_x
        x, u = self._hop_pair(X, entry, trial, 0, lambda x, u: X.in_S_star(u, x) and not X.in_C(u, x))
        self._record(report, suite, "S*_u is fixed", trial, proj_equal(X.third_point(u, x), x), entry, u=u, x=x)
        # x in S_u: x is a tangent hop from u
        u, x = self._hop_pair(X, entry, trial, 1, lambda u, x: X.in_S(u, x) and not X.in_C(u, x))
        self._record(report, suite, "S_u maps to u", trial, proj_equal(X.third_point(u, x), u), entry, u=u, x=x)
        u, x = self._pair(X, entry, suite, trial, lambda u, x: not X.in_S(u, x) and not X.in_S_star(u, x))
        y = X.third_point(u, x)
        passed = not proj_equal(y, x, self.tolerances.rank) and not proj_equal(y, u, self.tolerances.rank)
        self._record(report, suite, "generic points move", trial, passed, entry, u=u, x=x)

    def _lines_at(self, X: CubicHypersurface, u: ProjectivePoint, seed: int):
        if X.n == 3:
            line_set = X.lines_through(u, seed)
            return line_set, [line for line, _ in line_set.lines]
        spanning = X.spanning_lines(u, seed)
        return None, spanning.lines

    def _bitangency(self, trial: int, entry: CorpusEntry, report: SuiteReport) -> None:
        X = self._hypersurface(entry).as_complex()
        suite = "bitangency"
        for attempt in range(SAMPLE_ATTEMPTS):
            u = random_point_on_cubic(X.form, self._seed(suite, trial, attempt), tol=self.tolerances.membership)
            line_set, lines = self._lines_at(X, u, self._seed(suite, trial, attempt, 1))
            if line_set is None or line_set.finite:
                break
        rng = make_rng(self._seed(suite, trial, 2))
        on_lines = True
        for line in lines:
            for _ in range(LINE_POINTS):
                t = complex(rng.standard_normal(), rng.standard_normal())
                p = ProjectivePoint.of(line.point_at(1, t), COMPLEX)
                on_lines = on_lines and X.in_S(u, p) and X.in_S_star(u, p) and X.in_C(u, p)
        self._record(report, suite, "points of C_u lie in S_u and S*_u", trial, on_lines and bool(lines), entry, u=u)

    def _lines(self, trial: int, entry: CorpusEntry, report: SuiteReport) -> None:
        X = self._hypersurface(entry)
        if X.n != 3:
            return
        suite = "lines"
        if trial == 0 and entry.base_point is not None:
            x = entry.base_point if X.backend.exact else entry.base_point.to_backend(COMPLEX)
        else:
            x = random_point_on_cubic(X.as_complex().form, self._seed(suite, trial), tol=self.tolerances.membership)
        line_set = X.lines_through(x, self._seed(suite, trial, 1))
        Xc = X.as_complex()
        residual = 0.0
        for line, _ in line_set.lines:
            restriction = Xc.form.restrict_to_line(line.base.coords, line.dir)
            scale = max(Xc.backend.norm(line.base.coords), Xc.backend.norm(line.dir)) ** 3
            residual = max(residual, max(abs(c) for c in restriction.coefficients) / scale)
        passed = line_set.finite and line_set.total_multiplicity == 6 and residual < INCIDENCE_RESIDUAL
        self._record(report, suite, "six lines with incidences", trial, passed, entry,
                     residuals={"incidence": residual}, x=x)

    def _eckardt_census(self, report: SuiteReport) -> None:
        entry = self.entries[0]
        X = self._hypersurface(entry)
        if X.n != 3:
            return
        for index, point in enumerate(self.generator.eckardt_candidates(entry.form)):
            flagged = X.is_eckardt(point)
            self._record(report, "eckardt", "candidate is Eckardt", index, flagged, entry, x=point)

    def _eckardt(self, trial: int, entry: CorpusEntry, report: SuiteReport) -> None:
        X = self._hypersurface(entry).as_complex()
        if X.n != 3:
            return
        x = random_point_on_cubic(X.form, self._seed("eckardt", trial), tol=self.tolerances.membership)
        self._record(report, "eckardt", "random point is not Eckardt", trial, not X.is_eckardt(x), entry, x=x)

    def _spray(self, trial: int, entry: CorpusEntry, report: SuiteReport) -> None:
        X = self._hypersurface(entry)
        builder = SprayBuilder(X)
        y = random_point_on_cubic(X.as_complex().form, self._seed("spray", trial), tol=self.tolerances.membership)
        certificate = builder.build_certificate(y, self._seed("spray", trial, 1))
        fd_error = max(builder.finite_difference_error(certificate.setup, o.line) for o in certificate.orbits)
        self._record(report, "spray", "certificate verifies with rank n", trial,
                     certificate.verified and certificate.rank.rank == X.n, entry, y=y)
        self._record(report, "spray", "tangent matches finite differences", trial,
                     fd_error < self.tolerances.finite_difference, entry, residuals={"relative": fd_error}, y=y)
        self._record(report, "spray", "differential identity", trial,
                     all(o.differential_ok for o in certificate.orbits), entry, y=y)

    def _conic(self, trial: int, entry: CorpusEntry, report: SuiteReport) -> None:
        X = self._hypersurface(entry)
        builder = SprayBuilder(X)
        suite = "conic"
        y = random_point_on_cubic(X.as_complex().form, self._seed(suite, trial), tol=self.tolerances.membership)
        setup = builder.pick_setup(y, self._seed(suite, trial, 1))
        spanning = X.spanning_lines(setup.x, self._seed(suite, trial, 2))
        conic = builder.conic_orbit_check(setup, spanning.lines[0], self._seed(suite, trial, 3))
        passed = conic.verdict == "conic" and conic.fit_residual < self.tolerances.conic_fit
        self._record(report, suite, "orbit closure is a plane conic", trial, passed, entry,
                     residuals={"fit": conic.fit_residual}, y=y)

    def _divisor(self, trial: int, entry: CorpusEntry, report: SuiteReport) -> None:
        X = self._hypersurface(entry)
        rng = make_rng(self._seed("divisor", trial))
        a = ProjectivePoint.of(X.backend.random_vector(rng, X.num_vars, 5), X.backend)
        b = ProjectivePoint.of(X.backend.random_vector(rng, X.num_vars, 5), X.backend)
        if proj_equal(a, b):
            return
        divisor = X.bezout_divisor(a, b)
        passed = divisor.contained or divisor.total_multiplicity == 3
        self._record(report, "divisor", "multiplicities sum to 3", trial, passed, entry, a=a, b=b)

    def _numerics(self, trial: int, entry: CorpusEntry, report: SuiteReport) -> None:
        X = self._hypersurface(entry)
        backend = X.backend
        rng = make_rng(self._seed("numerics", trial))
        a, b, c = (backend.random_vector(rng, X.num_vars, 5) for _ in range(3))
        polar = X.polar
        scale = max(backend.norm(v) for v in (a, b, c)) ** 3
        tol = self.tolerances.membership
        values = [polar(*args) for args in permutations((a, b, c))]
        symmetric = all(backend.is_zero(v - values[0], scale, tol) for v in values)
        diagonal = backend.is_zero(polar(a, a, a) - X.form.evaluate(a), scale, tol)
        if backend.proportional(a, b):
            restriction_ok = True
        else:
            restriction = X.form.restrict_to_line(a, b)
            restriction_ok = True
            for _ in range(RESTRICTION_SAMPLES):
                t = backend.coerce(int(rng.integers(-9, 10))) if backend.exact else complex(rng.standard_normal())
                restriction_ok = restriction_ok and backend.is_zero(
                    X.form.evaluate(a + t * b) - restriction(t), scale * (1 + abs(t)) ** 3, 1e-12)
        inputs = {"a": encode_vector(a, backend), "b": encode_vector(b, backend), "c": encode_vector(c, backend)}
        report.add(CheckRecord("numerics", "polarization identities", trial, self._seed("numerics", trial),
                               symmetric and diagonal and restriction_ok,
                               inputs={"cubic": entry.form.to_spec(), **inputs}))
