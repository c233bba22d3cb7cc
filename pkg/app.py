"""Command-line front end: third points, lines, spray certificates and lemma suites.

JSON goes to standard output (or --out); logging goes to standard error.
The process exit code follows the error taxonomy of geometry.errors.
"""
import argparse
import logging
import sys
from dataclasses import replace
from typing import List, Optional

from geometry.backends import get_backend
from geometry.config import DEFAULT_RETRIES, DEFAULT_TOLERANCES
from geometry.cubic_geom import CubicHypersurface
from geometry.errors import CubicError, NotOnCubicError, RankDeficiencyError, SingularPointError
from geometry.forms import parse_cubic
from geometry.spray import SprayBuilder, SprayCertificate
from suites.lemma_suites import SUITES, LemmaSuiteRunner, entry_for
from utils.corpus import CorpusGenerator
from utils.serialization import coerce_point, encode_point, load_json, parse_point_text, write_json

logger = logging.getLogger("cubic_sprays")


def _add_common_flags(parser: argparse.ArgumentParser, defaults: bool) -> None:
    """Flags accepted before and after the subcommand; subcommand copies only override when given"""

    def default(value):
        return value if defaults else argparse.SUPPRESS

    parser.add_argument("--backend", choices=["rational", "complex"], default=default(None),
                        help="Scalar backend (default: rational for rational cubics)")
    parser.add_argument("--tol-membership", type=float, default=default(DEFAULT_TOLERANCES.membership))
    parser.add_argument("--tol-rank", type=float, default=default(DEFAULT_TOLERANCES.rank))
    parser.add_argument("--cluster-radius", type=float, default=default(DEFAULT_TOLERANCES.cluster_radius))
    parser.add_argument("--retries", type=int, default=default(DEFAULT_RETRIES.setups),
                        help="Attempt limit of the setup search")
    parser.add_argument("--seed", type=int, default=default(0))
    parser.add_argument("--out", type=str, default=default(None), help="Write JSON here instead of standard output")
    parser.add_argument("--verbose", "-v", action="store_true", default=default(False))
    parser.add_argument("--timing", action="store_true", default=default(False),
                        help="Include wall-clock time in suite reports")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cubic-sprays",
                                     description="Involutions, lines and spray certificates on cubic hypersurfaces")
    _add_common_flags(parser, defaults=True)
    common = argparse.ArgumentParser(add_help=False)
    _add_common_flags(common, defaults=False)

    commands = parser.add_subparsers(dest="command", required=True)

    tau = commands.add_parser("tau", parents=[common], help="Third point of X on the line <u, x>")
    tau.add_argument("cubic")
    tau.add_argument("u")
    tau.add_argument("x")

    lines = commands.add_parser("lines", parents=[common], help="Lines of X through a point")
    lines.add_argument("cubic")
    lines.add_argument("x")
    lines.add_argument("--spanning", action="store_true", help="n lines with spanning tangent directions")

    certify = commands.add_parser("certify", parents=[common], help="Build and verify a spray certificate at y")
    certify.add_argument("cubic")
    certify.add_argument("y")

    verify = commands.add_parser("verify", parents=[common], help="Re-check a certificate file from scratch")
    verify.add_argument("certificate")

    suite = commands.add_parser("suite", parents=[common], help="Run randomized lemma suites")
    suite.add_argument("cubic", nargs="?", default=None)
    suite.add_argument("--corpus", type=str, default=None, help="Corpus spec JSON file")
    suite.add_argument("--suite", choices=list(SUITES) + ["all"], default="all")
    suite.add_argument("--trials", type=int, default=10)
    return parser


class CommandRunner:
    """Maps parsed arguments onto the engines"""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.tolerances = replace(DEFAULT_TOLERANCES, membership=args.tol_membership, rank=args.tol_rank,
                                  cluster_radius=args.cluster_radius)
        self.retries = replace(DEFAULT_RETRIES, setups=args.retries)
        self.backend = get_backend(args.backend) if args.backend else None

    def hypersurface(self, path: str) -> CubicHypersurface:
        form = parse_cubic(load_json(path), self.backend)
        return CubicHypersurface(form, self.tolerances, self.retries)

    def point(self, X: CubicHypersurface, text: str, smooth: bool = False):
        p = coerce_point(parse_point_text(text), X.backend)
        if not X.contains(p):
            raise NotOnCubicError(f"point {text} is not on X")
        if smooth and not X.check_smooth_at(p):
            raise SingularPointError(f"X is singular at {text}")
        return p

    def emit(self, doc: dict) -> None:
        text = write_json(doc, self.args.out)
        if self.args.out is None:
            sys.stdout.write(text)

    def cmd_tau(self) -> int:
        X = self.hypersurface(self.args.cubic)
        u, x = self.point(X, self.args.u), self.point(X, self.args.x)
        y = X.third_point(u, x)
        self.emit({"u": encode_point(u), "x": encode_point(x), "y": encode_point(y), "backend": y.backend.name})
        return 0

    def cmd_lines(self) -> int:
        X = self.hypersurface(self.args.cubic)
        x = self.point(X, self.args.x, smooth=True)
        if self.args.spanning:
            self.emit(X.spanning_lines(x, self.args.seed).to_json())
            return 0
        line_set = X.lines_through(x, self.args.seed)
        logger.info("%s lines through %r", "infinitely many" if not line_set.finite else line_set.total_multiplicity, x)
        self.emit(line_set.to_json())
        return 0

    def cmd_certify(self) -> int:
        X = self.hypersurface(self.args.cubic)
        y = self.point(X, self.args.y, smooth=True)
        try:
            certificate = SprayBuilder(X).build_certificate(y, self.args.seed)
        except RankDeficiencyError as exc:
            logger.warning("counterexample candidate at %r: %s", y, exc)
            self.emit({"counterexample_candidate": exc.report, "message": str(exc)})
            raise
        logger.info("certificate at %r: rank %d, verified %s", y, certificate.rank.rank, certificate.verified)
        self.emit(certificate.to_json())
        return 0 if certificate.verified else 1

    def cmd_verify(self) -> int:
        certificate = SprayCertificate.from_json(load_json(self.args.certificate))
        X = CubicHypersurface(certificate.cubic, self.tolerances, self.retries)
        result = SprayBuilder(X).verify_certificate(certificate)
        for reason in result.reasons:
            logger.warning("certificate rejected: %s", reason)
        self.emit({"ok": result.ok, "reasons": list(result.reasons)})
        return 0 if result.ok else 1

    def cmd_suite(self) -> int:
        if self.args.corpus:
            entries = CorpusGenerator(self.args.seed).from_spec(load_json(self.args.corpus))
        elif self.args.cubic:
            entries = [entry_for(parse_cubic(load_json(self.args.cubic)))]
        else:
            raise CubicError("suite needs a cubic file or --corpus")
        runner = LemmaSuiteRunner(entries, seed=self.args.seed, trials=self.args.trials,
                                  tolerances=self.tolerances, retries=self.retries,
                                  backend=self.backend, timing=self.args.timing)
        report = runner.run(self.args.suite)
        self.emit(report.to_json())
        print(f"{report.suite}: {report.passed} passed, {report.failed} failed", file=sys.stderr)
        return report.exit_code

    def run(self) -> int:
        return getattr(self, f"cmd_{self.args.command}")()


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return CommandRunner(args).run()
    except CubicError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
