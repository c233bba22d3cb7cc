"""Univariate root finding with multiplicities and conic/cubic plane intersection.

The complex path evaluates 5x5 Sylvester determinants at the eighth roots of
unity and recovers the degree-6 resultant by an FFT; the exact path hands the
same elimination to sympy and reads multiplicities off a square-free
factorisation.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial
from typing import Any, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
import sympy
from scipy.stats import unitary_group
from sklearn.cluster import AgglomerativeClustering

from geometry.backends import COMPLEX, RATIONAL, ScalarBackend, make_rng, to_backend
from geometry.config import DEFAULT_RETRIES, DEFAULT_TOLERANCES, RetryPolicy, Tolerances
from geometry.errors import CubicError, IdenticallyZeroError, SolverDegeneracyError
from geometry.forms import HomogeneousCubic, TrilinearForm
from geometry.linalg import exact_determinant
from geometry.projective import ProjectivePoint

logger = logging.getLogger(__name__)

DEGREE_ZERO_TOL = 1e-10
BEZOUT_NUMBER = 6
NEWTON_STEPS = 3
MULTIPLICITY_TOL = 1e-8
ROUNDING = 1e-13
SPREAD_FACTOR = 10.0
FIBRE_TOL = 1e-7
LOOSE_FIBRE_TOL = 1e-5


@dataclass(frozen=True)
class Root:
    """One projective root; ``value`` is None at t = infinity"""

    value: Any
    multiplicity: int
    exact: bool = False

    @property
    def at_infinity(self) -> bool:
        return self.value is None

    def to_json(self) -> dict:
        if self.at_infinity:
            value = "inf"
        elif self.exact:
            value = RATIONAL.encode(self.value)
        else:
            value = COMPLEX.encode(self.value)
        return {"value": value, "multiplicity": self.multiplicity}


@dataclass(frozen=True)
class RootList:
    roots: List[Root] = field(default_factory=list)

    @property
    def degree(self) -> int:
        return sum(r.multiplicity for r in self.roots)

    @property
    def finite(self) -> List[Root]:
        return [r for r in self.roots if not r.at_infinity]

    def __iter__(self):
        return iter(self.roots)

    def __len__(self):
        return len(self.roots)

    def to_json(self) -> list:
        return [r.to_json() for r in self.roots]


def cluster_roots(raw: Sequence[complex], radius: float) -> RootList:
    """Single-linkage clustering of approximate roots; multiplicity = cluster size"""
    if radius <= 0:
        raise CubicError(f"cluster radius must be positive, got {radius}")
    values = np.asarray(list(raw), dtype=np.complex128)
    if len(values) == 0:
        return RootList([])
    if len(values) == 1:
        return RootList([Root(complex(values[0]), 1)])
    features = np.column_stack([values.real, values.imag])
    # gaps exactly equal to the radius still merge
    model = AgglomerativeClustering(n_clusters=None, distance_threshold=radius * (1 + 1e-9), linkage="single")
    labels = model.fit_predict(features)
    roots = []
    for label in np.unique(labels):
        members = values[labels == label]
        roots.append(Root(complex(members.mean()), int(len(members))))
    roots.sort(key=lambda r: (r.value.real, r.value.imag))
    return RootList(roots)


def _effective_degree(coefficients: Sequence[Any], backend: ScalarBackend) -> int:
    scale = backend.norm(backend.vector(list(coefficients)))
    degree = -1
    for i, c in enumerate(coefficients):
        if not backend.is_zero(c, scale, DEGREE_ZERO_TOL):
            degree = i
    return degree


def _newton_polish(coefficients: np.ndarray, root: complex, steps: int = NEWTON_STEPS) -> complex:
    poly = np.polynomial.Polynomial(coefficients)
    derivative = poly.deriv()
    for _ in range(steps):
        slope = derivative(root)
        if slope == 0:
            break
        root = root - poly(root) / slope
    return complex(root)


def _taylor_bounds(coefficients: np.ndarray, centre: complex, order: int) -> Tuple[np.ndarray, np.ndarray]:
    """|p^(k)(c) / k!| and the matching coefficient bound sum_i |a_i| C(i, k) |c|^(i-k), k < order"""
    poly = np.polynomial.Polynomial(coefficients)
    magnitudes = np.abs(coefficients)
    r = abs(centre)
    values, bounds = np.empty(order), np.empty(order)
    for k in range(order):
        values[k] = abs(poly.deriv(k)(centre)) / factorial(k)
        bounds[k] = sum(magnitudes[i] * comb(i, k) * r ** (i - k) for i in range(k, len(coefficients)))
    return values, bounds


def _is_multiple_root(coefficients: np.ndarray, centre: complex, multiplicity: int) -> bool:
    """The first ``multiplicity`` Taylor coefficients at centre vanish to working precision"""
    values, bounds = _taylor_bounds(coefficients, centre, multiplicity)
    return bool(np.all(values <= MULTIPLICITY_TOL * bounds))


def _spread_limit(multiplicity: int, centre: complex, radius: float) -> float:
    """Expected scatter of the eigenvalues of an m-fold root"""
    return max(radius, SPREAD_FACTOR * ROUNDING ** (1.0 / multiplicity) * max(1.0, abs(centre)))


def _refine_multiple(coefficients: np.ndarray, centre: complex, multiplicity: int, limit: float) -> complex:
    """Newton on the (m-1)-th derivative, where an m-fold root is simple"""
    derivative = np.polynomial.Polynomial(coefficients).deriv(multiplicity - 1)
    refined = _newton_polish(derivative.coef, centre)
    return refined if np.isfinite(refined) and abs(refined - centre) <= limit else centre


def _merge_clusters(coefficients: np.ndarray, clusters: List[Root], radius: float) -> List[Root]:
    """Greedily merge nearby clusters whose centre passes the multiplicity test"""
    remaining = list(clusters)
    merged = []
    while remaining:
        anchor = remaining[0]
        order = sorted(range(len(remaining)), key=lambda i: abs(remaining[i].value - anchor.value))
        chosen, centre = 1, anchor.value
        for size in range(len(order), 1, -1):
            members = [remaining[i] for i in order[:size]]
            multiplicity = sum(m.multiplicity for m in members)
            candidate = sum(m.value * m.multiplicity for m in members) / multiplicity
            spread = max(abs(m.value - candidate) for m in members)
            if spread <= _spread_limit(multiplicity, candidate, radius) and _is_multiple_root(
                    coefficients, candidate, multiplicity):
                chosen, centre = size, candidate
                break
        members = [remaining[i] for i in order[:chosen]]
        merged.append(Root(complex(centre), sum(m.multiplicity for m in members)))
        remaining = [remaining[i] for i in order[chosen:]]
    return merged


def _complex_roots(coefficients: np.ndarray, radius: float) -> RootList:
    """Companion-matrix eigenvalues grouped into multiple roots, every root refined by Newton"""
    if len(coefficients) < 2:
        return RootList([])
    coefficients = _normalise(coefficients)
    companion = np.polynomial.polynomial.polycompanion(coefficients)
    eigenvalues = scipy.linalg.eigvals(companion)
    clusters = _merge_clusters(coefficients, list(cluster_roots(eigenvalues, radius)), radius)
    roots = []
    for root in clusters:
        if root.multiplicity == 1:
            value = _newton_polish(coefficients, root.value)
        else:
            value = _refine_multiple(coefficients, root.value, root.multiplicity,
                                     _spread_limit(root.multiplicity, root.value, radius))
        roots.append(Root(value, root.multiplicity))
    roots.sort(key=lambda r: (r.value.real, r.value.imag))
    return RootList(roots)


def _exact_roots(coefficients: Sequence[Fraction]) -> RootList:
    """Rational roots by exact deflation, the irrational remainder numerically"""
    t = sympy.Symbol("t")
    poly = sympy.Poly([sympy.Rational(c.numerator, c.denominator) for c in reversed(coefficients)], t, domain="QQ")
    roots = []
    remainder = poly
    for value, multiplicity in sorted(poly.ground_roots().items(), key=lambda item: item[0]):
        roots.append(Root(Fraction(int(value.p), int(value.q)), int(multiplicity), exact=True))
        remainder = sympy.div(remainder, sympy.Poly((t - value) ** multiplicity, t, domain="QQ"))[0]
    if remainder.degree() > 0:
        # an irreducible remainder of degree <= 3 has simple roots
        for value in remainder.nroots(n=15):
            roots.append(Root(complex(value), 1))
    return RootList(roots)


def polynomial_roots(coefficients: Sequence[Any], backend: ScalarBackend, radius: float = 1e-7,
                     projective_degree: Optional[int] = None) -> RootList:
    """Projective roots of sum c_i t^i (ascending coefficients); degree drop is a root at infinity"""
    projective_degree = len(coefficients) - 1 if projective_degree is None else projective_degree
    degree = _effective_degree(coefficients, backend)
    if degree < 0:
        raise IdenticallyZeroError("polynomial is identically zero")
    if backend.exact:
        finite = _exact_roots(list(coefficients[: degree + 1]))
    else:
        finite = _complex_roots(np.asarray(coefficients[: degree + 1], dtype=np.complex128), radius)
    roots = list(finite.roots)
    if projective_degree > degree:
        roots.append(Root(None, projective_degree - degree))
    return RootList(roots)


def cubic_roots(coefficients: Sequence[Any], backend: ScalarBackend = COMPLEX, radius: float = 1e-7) -> RootList:
    """Projective roots of c0 + c1 t + c2 t^2 + c3 t^3 with multiplicities"""
    if len(coefficients) != 4:
        raise CubicError(f"a cubic has 4 coefficients, got {len(coefficients)}")
    coefficients = list(backend.vector(list(coefficients)))
    try:
        return polynomial_roots(coefficients, backend, radius, projective_degree=3)
    except IdenticallyZeroError as exc:
        raise IdenticallyZeroError("identically zero on line") from exc


@dataclass(frozen=True, eq=False)
class PlaneConic:
    """Conic v^T A v = 0 in P^2 with a symmetric 3x3 matrix A"""

    matrix: np.ndarray
    backend: ScalarBackend = RATIONAL

    @classmethod
    def from_terms(cls, terms, backend: ScalarBackend = RATIONAL) -> "PlaneConic":
        """From monomial pairs, e.g. {(0, 1): 1, (2, 2): -1} for xy - z^2"""
        matrix = np.empty((3, 3), dtype=object) if backend.exact else np.zeros((3, 3), dtype=np.complex128)
        if backend.exact:
            matrix.fill(Fraction(0))
        for (i, j), value in terms.items():
            value = backend.coerce(value)
            if i == j:
                matrix[i, i] += value
            else:
                matrix[i, j] += value / 2
                matrix[j, i] += value / 2
        return cls(matrix, backend)

    def __call__(self, v):
        return np.dot(v, np.dot(self.matrix, v))

    def is_zero(self, tol: float = 0.0) -> bool:
        flat = list(self.matrix.ravel())
        return self.backend.is_zero_vector(flat, 1.0, tol)

    def to_backend(self, backend: ScalarBackend) -> "PlaneConic":
        return self if backend is self.backend else PlaneConic(to_backend(self.matrix, self.backend, backend), backend)


@dataclass(frozen=True, eq=False)
class PlaneIntersection:
    """Finite points with multiplicities, or the infinite case with a common-component witness"""

    finite: bool
    points: List[Tuple[ProjectivePoint, int]] = field(default_factory=list)
    witness: Optional[str] = None
    exact: bool = False

    @property
    def total_multiplicity(self) -> int:
        return sum(m for _, m in self.points)

    def to_json(self) -> dict:
        if not self.finite:
            return {"finite": False, "witness": self.witness}
        return {
            "finite": True,
            "points": [{"point": [COMPLEX.encode(c) for c in p.coords], "multiplicity": m} for p, m in self.points],
        }


def _random_change(rng: np.random.Generator, backend: ScalarBackend) -> np.ndarray:
    if not backend.exact:
        return np.asarray(unitary_group.rvs(3, random_state=rng), dtype=np.complex128)
    while True:
        entries = rng.integers(-3, 4, size=(3, 3))
        matrix = np.empty((3, 3), dtype=object)
        for i in range(3):
            for j in range(3):
                matrix[i, j] = Fraction(int(entries[i, j]))
        if exact_determinant(matrix.tolist()) != 0:
            return matrix


def _chart_coefficients(conic: np.ndarray, cubic: np.ndarray):
    """Coefficients in z of Q(1, s, z) and C(1, s, z) as polynomials in s (ascending)"""
    A, T = conic, cubic
    q = [
        [A[0, 0], 2 * A[0, 1], A[1, 1]],
        [2 * A[0, 2], 2 * A[1, 2]],
        [A[2, 2]],
    ]
    c = [
        [T[0, 0, 0], 3 * T[0, 0, 1], 3 * T[0, 1, 1], T[1, 1, 1]],
        [3 * T[0, 0, 2], 6 * T[0, 1, 2], 3 * T[1, 1, 2]],
        [3 * T[0, 2, 2], 3 * T[1, 2, 2]],
        [T[2, 2, 2]],
    ]
    return q, c


def _eval(poly: Sequence[Any], s):
    total = 0
    for coefficient in reversed(poly):
        total = total * s + coefficient
    return total


def _sylvester(q: Sequence[Any], c: Sequence[Any]) -> np.ndarray:
    """Sylvester matrix of q2 z^2 + q1 z + q0 and c3 z^3 + ... + c0"""
    q_row = [q[2], q[1], q[0]]
    c_row = [c[3], c[2], c[1], c[0]]
    matrix = np.zeros((5, 5), dtype=np.complex128)
    for shift in range(3):
        matrix[shift, shift:shift + 3] = q_row
    for shift in range(2):
        matrix[3 + shift, shift:shift + 4] = c_row
    return matrix


def _complex_resultant(q, c) -> np.ndarray:
    """Coefficients r_0..r_7 of Res_z(Q, C)(s) by interpolation at the eighth roots of unity"""
    nodes = np.exp(2j * np.pi * np.arange(8) / 8)
    values = np.empty(8, dtype=np.complex128)
    for k, s in enumerate(nodes):
        qs = [_eval(poly, s) for poly in q]
        cs = [_eval(poly, s) for poly in c]
        values[k] = scipy.linalg.det(_sylvester(qs, cs))
    return np.fft.fft(values) / 8


def _normalise(array: np.ndarray) -> np.ndarray:
    scale = np.max(np.abs(array))
    return array / scale if scale else array


def _shared_fibre(s: complex, A: np.ndarray, T: np.ndarray, tol: float = FIBRE_TOL) -> bool:
    """Both conic points above s lie on the cubic, so one resultant root hides two points"""
    q, _ = _chart_coefficients(A, T)
    candidates = np.roots([_eval(q[2], s), _eval(q[1], s), _eval(q[0], s)])
    if len(candidates) < 2 or abs(candidates[0] - candidates[1]) <= tol * max(1.0, *np.abs(candidates)):
        return False
    scale = np.max(np.abs(T))
    for z in candidates:
        w = np.array([1, s, z], dtype=np.complex128)
        if abs(np.dot(w, np.dot(np.dot(T, w), w))) > tol * scale * np.max(np.abs(w)) ** 3:
            return False
    return True


def _lift(s: complex, A: np.ndarray, T: np.ndarray, change: np.ndarray, polish: bool) -> np.ndarray:
    """Point of the intersection above the resultant root s, mapped back to input coordinates"""
    q, c = _chart_coefficients(A, T)
    quadratic = [_eval(q[2], s), _eval(q[1], s), _eval(q[0], s)]
    candidates = np.roots(quadratic)

    def cubic_at(w):
        return np.dot(w, np.dot(np.dot(T, w), w))

    best = min(candidates, key=lambda z: abs(cubic_at(np.array([1, s, z], dtype=np.complex128))))
    w = np.array([1, s, best], dtype=np.complex128)
    if polish:
        for _ in range(NEWTON_STEPS):
            residual = np.array([np.dot(w, A @ w), cubic_at(w)])
            qgrad = 2 * (A @ w)
            cgrad = 3 * np.dot(np.dot(T, w), w)
            jacobian = np.array([[qgrad[1], qgrad[2]], [cgrad[1], cgrad[2]]])
            if abs(np.linalg.det(jacobian)) < 1e-14:
                break
            w[1:] = w[1:] - scipy.linalg.solve(jacobian, residual)
    return change @ w


def _as_tensor(cubic: Union[TrilinearForm, HomogeneousCubic]) -> TrilinearForm:
    form = cubic.polarize() if isinstance(cubic, HomogeneousCubic) else cubic
    if form.num_vars != 3:
        raise CubicError(f"plane cubic needs 3 variables, got {form.num_vars}")
    return form


def _to_sympy(value) -> sympy.Rational:
    return sympy.Rational(value.numerator, value.denominator)


def _exact_witness(conic: PlaneConic, cubic: TrilinearForm) -> str:
    x = sympy.symbols("x y z")
    q = sum(_to_sympy(conic.matrix[i, j]) * x[i] * x[j] for i in range(3) for j in range(3))
    c = sum(
        _to_sympy(cubic.tensor[i, j, k]) * x[i] * x[j] * x[k]
        for i in range(3) for j in range(3) for k in range(3)
    )
    return str(sympy.factor(sympy.gcd(sympy.expand(q), sympy.expand(c))))


def _exact_attempt(A: np.ndarray, T: np.ndarray):
    """Returns None when R vanishes identically, else (degree, [(s-values, multiplicity)])"""
    s, z = sympy.symbols("s z")
    w = [sympy.Integer(1), s, z]
    q = sympy.expand(sum(_to_sympy(A[i, j]) * w[i] * w[j] for i in range(3) for j in range(3)))
    c = sympy.expand(sum(
        _to_sympy(T[i, j, k]) * w[i] * w[j] * w[k] for i in range(3) for j in range(3) for k in range(3)
    ))
    resultant = sympy.expand(sympy.resultant(q, c, z))
    if resultant == 0:
        return None
    poly = sympy.Poly(resultant, s, domain="QQ")
    groups = []
    for factor, multiplicity in poly.sqf_list()[1]:
        groups.append(([complex(v) for v in factor.nroots(n=15)], int(multiplicity)))
    return poly.degree(), groups


def conic_cubic_intersect(conic: PlaneConic, cubic: Union[TrilinearForm, HomogeneousCubic], seed: int = 0,
                          tolerances: Tolerances = DEFAULT_TOLERANCES,
                          retries: RetryPolicy = DEFAULT_RETRIES) -> PlaneIntersection:
    """Conic and cubic in P^2: six points with multiplicity, or the infinite (common component) case"""
    form = _as_tensor(cubic)
    if conic.is_zero(tolerances.resultant_zero if not conic.backend.exact else 0.0):
        raise IdenticallyZeroError("zero conic")
    if form.backend.is_zero_vector(list(form.tensor.ravel())):
        raise IdenticallyZeroError("zero cubic")
    exact = conic.backend.exact and form.backend.exact
    backend = RATIONAL if exact else COMPLEX
    if not exact:
        conic = conic.to_backend(COMPLEX)
        A0 = _normalise(conic.matrix)
        T0 = _normalise(to_backend(form.tensor, form.backend, COMPLEX))
    else:
        A0, T0 = conic.matrix, form.tensor

    zero_resultants = 0
    for attempt in range(retries.setups):
        rng = make_rng(seed, attempt)
        change = _random_change(rng, backend)
        A = change.T @ A0 @ change
        T = TrilinearForm(3, T0, backend).restrict(change.T).tensor
        if backend.is_zero(A[2, 2], 1.0, tolerances.resultant_zero) or backend.is_zero(
                T[2, 2, 2], 1.0, tolerances.resultant_zero):
            logger.debug("coordinate change %d has a vanishing leading coefficient", attempt)
            continue

        if exact:
            outcome = _exact_attempt(A, T)
            if outcome is None:
                witness = _exact_witness(PlaneConic(A0, RATIONAL), TrilinearForm(3, T0, RATIONAL))
                logger.debug("resultant vanishes identically; common component %s", witness)
                return PlaneIntersection(finite=False, witness=witness, exact=True)
            degree, groups = outcome
            if degree < BEZOUT_NUMBER:
                logger.debug("resultant degree %d < 6 after change %d, retrying", degree, attempt)
                continue
            A_c = to_backend(A, RATIONAL, COMPLEX)
            T_c = to_backend(T, RATIONAL, COMPLEX)
            change_c = to_backend(change, RATIONAL, COMPLEX)
            if any(_shared_fibre(s, A_c, T_c) for values, _ in groups for s in values):
                logger.debug("two intersection points share a fibre after change %d, retrying", attempt)
                continue
            points = [
                (ProjectivePoint.of(_lift(s, A_c, T_c, change_c, polish=m == 1), COMPLEX), m)
                for values, m in groups for s in values
            ]
            return PlaneIntersection(finite=True, points=points, exact=True)

        q, c = _chart_coefficients(A, T)
        coefficients = _complex_resultant(q, c)
        scale = np.max(np.abs(coefficients))
        if scale <= tolerances.resultant_zero:
            zero_resultants += 1
            logger.debug("resultant vanishes under change %d (%d so far)", attempt, zero_resultants)
            if zero_resultants >= retries.coordinate_changes:
                return PlaneIntersection(
                    finite=False,
                    witness=f"resultant identically zero under {zero_resultants} coordinate changes",
                )
            continue
        if abs(coefficients[BEZOUT_NUMBER]) <= DEGREE_ZERO_TOL * scale:
            logger.debug("resultant degree dropped under change %d, retrying", attempt)
            continue
        roots = _complex_roots(coefficients[: BEZOUT_NUMBER + 1], tolerances.cluster_radius)
        if any(_shared_fibre(r.value, A, T, LOOSE_FIBRE_TOL) for r in roots):
            logger.debug("two intersection points share a fibre after change %d, retrying", attempt)
            continue
        points = [
            (ProjectivePoint.of(_lift(r.value, A, T, change, polish=r.multiplicity == 1), COMPLEX), r.multiplicity)
            for r in roots
        ]
        return PlaneIntersection(finite=True, points=points)
    raise SolverDegeneracyError(f"plane elimination stayed degenerate after {retries.setups} coordinate changes")
