"""Seeded test corpora: Fermat cubics, random smooth integer cubics and their rational points."""
import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, combinations_with_replacement
from typing import Dict, List, Optional

import numpy as np

from geometry.backends import COMPLEX, RATIONAL, derive_seed, make_rng
from geometry.cubic_geom import CubicHypersurface
from geometry.errors import CubicError, SpecFormatError
from geometry.forms import HomogeneousCubic
from geometry.projective import ProjectivePoint, random_point_on_cubic

logger = logging.getLogger(__name__)

SMOOTHNESS_SAMPLES = 50
LINE_COUNT_SAMPLES = 5


@dataclass(frozen=True, eq=False)
class CorpusEntry:
    """A cubic of the corpus with a known rational point"""

    index: int
    form: HomogeneousCubic
    base_point: Optional[ProjectivePoint]
    seed: int

    @property
    def name(self) -> str:
        return f"cubic-{self.index:03d}"


def parse_corpus_spec(doc) -> Dict[str, int]:
    """Validate ``{"count": k, "dim": n, "coeff_bound": 5, "seed": s}``"""
    if not isinstance(doc, dict):
        raise SpecFormatError("corpus spec must be a JSON object")
    spec = {"count": 5, "dim": 3, "coeff_bound": 5, "seed": 0}
    for key in spec:
        if key in doc:
            value = doc[key]
            if not isinstance(value, int) or isinstance(value, bool):
                raise SpecFormatError(f"corpus field {key!r} must be an integer")
            spec[key] = value
    if spec["dim"] < 2:
        raise SpecFormatError(f"dimension {spec['dim']} < 2")
    if spec["count"] < 0 or spec["coeff_bound"] < 1:
        raise SpecFormatError("corpus count must be >= 0 and coeff_bound >= 1")
    return spec


class CorpusGenerator:
    """Builds cubics and sample points for the lemma suites"""

    def __init__(self, seed: int = 0):
        self.seed = seed

    @staticmethod
    def fermat(n: int) -> HomogeneousCubic:
        """x_0^3 + ... + x_{n+1}^3"""
        return HomogeneousCubic.from_terms(n + 2, {(i, i, i): 1 for i in range(n + 2)})

    @staticmethod
    def fermat_base_point(n: int) -> ProjectivePoint:
        """(3:4:5:-6:0:...), using 27 + 64 + 125 = 216"""
        coords = [3, 4, 5, -6] + [0] * (n - 2)
        return ProjectivePoint.of(coords, RATIONAL)

    @staticmethod
    def diagonal_weights(form: HomogeneousCubic) -> Optional[List[Fraction]]:
        """The a_i of F = sum a_i x_i^3, or None when F is not diagonal"""
        if any(len(set(mono)) != 1 for mono in form.coefficients):
            return None
        return [form.coefficients.get((i, i, i), form.backend.coerce(0)) for i in range(form.num_vars)]

    def eckardt_candidates(self, form: HomogeneousCubic) -> List[ProjectivePoint]:
        """Points e_i + b e_j with a_i + a_j b^3 = 0 on a diagonal cubic (30 on the Fermat threefold)"""
        weights = self.diagonal_weights(form)
        if weights is None or any(w == 0 for w in weights):
            return []
        points = []
        for i, j in combinations(range(form.num_vars), 2):
            ratio = complex(-weights[i] / weights[j])
            base = ratio ** (1 / 3) if ratio.imag or ratio.real >= 0 else -((-ratio.real) ** (1 / 3))
            for k in range(3):
                b = complex(base) * np.exp(2j * np.pi * k / 3)
                coords = np.zeros(form.num_vars, dtype=np.complex128)
                coords[i], coords[j] = 1, b
                points.append(ProjectivePoint.of(coords, COMPLEX))
        return points

    def random_cubic(self, n: int, coeff_bound: int, seed: int) -> HomogeneousCubic:
        """Integer coefficients in [-bound, bound]; x_0^3 is dropped so that e_0 lies on X"""
        rng = make_rng(seed)
        terms = {}
        for mono in combinations_with_replacement(range(n + 2), 3):
            if mono == (0, 0, 0):
                continue
            value = int(rng.integers(-coeff_bound, coeff_bound + 1))
            if value:
                terms[mono] = value
        return HomogeneousCubic.from_terms(n + 2, terms, RATIONAL)

    def accept(self, form: HomogeneousCubic, seed: int) -> bool:
        """Point-local smoothness at sampled points, plus finitely many lines for n = 3"""
        X = CubicHypersurface(form)
        base = ProjectivePoint.of(RATIONAL.unit(form.num_vars, 0), RATIONAL)
        if not X.check_smooth_at(base):
            return False
        Xc = X.as_complex()
        try:
            points = [random_point_on_cubic(Xc.form, derive_seed(seed, k)) for k in range(SMOOTHNESS_SAMPLES)]
            if not all(Xc.check_smooth_at(p) for p in points):
                return False
            if X.n == 3:
                return all(Xc.lines_through(p, derive_seed(seed, k)).finite
                           for k, p in enumerate(points[:LINE_COUNT_SAMPLES]))
        except CubicError as exc:
            logger.debug("cubic rejected: %s", exc)
            return False
        return True

    def generate_corpus(self, count: int, dim: int, coeff_bound: int = 5, attempts: int = 64) -> List[CorpusEntry]:
        """``count`` accepted random cubics; deterministic in the generator seed"""
        entries = []
        for index in range(count):
            for attempt in range(attempts):
                seed = derive_seed(self.seed, index, attempt)
                form = self.random_cubic(dim, coeff_bound, seed)
                if self.accept(form, seed):
                    base = ProjectivePoint.of(RATIONAL.unit(form.num_vars, 0), RATIONAL)
                    entries.append(CorpusEntry(index=index, form=form, base_point=base, seed=seed))
                    break
                logger.debug("corpus cubic %d attempt %d rejected", index, attempt)
            else:
                raise CubicError(f"no acceptable cubic for corpus slot {index} after {attempts} draws")
        return entries

    def from_spec(self, doc) -> List[CorpusEntry]:
        spec = parse_corpus_spec(doc)
        return CorpusGenerator(spec["seed"]).generate_corpus(spec["count"], spec["dim"], spec["coeff_bound"])

    @staticmethod
    def rational_point(entry: CorpusEntry, seed: int, hops: int = 2) -> ProjectivePoint:
        return random_point_on_cubic(entry.form, seed, base_point=entry.base_point, hops=hops)
