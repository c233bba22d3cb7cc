from fractions import Fraction

import numpy as np
import pytest

from geometry.backends import COMPLEX, RATIONAL
from geometry.errors import CubicError, IdenticallyZeroError
from geometry.forms import HomogeneousCubic
from geometry.solve import PlaneConic, cluster_roots, conic_cubic_intersect, cubic_roots


def finite_values(roots):
    return sorted((r.value for r in roots if not r.at_infinity), key=lambda v: (complex(v).real, complex(v).imag))


class TestClusterRoots:
    def test_near_duplicates_merge(self):
        roots = cluster_roots([1.0, 1.0 + 1e-9, 5.0], 1e-7)
        assert [r.multiplicity for r in roots] == [2, 1]
        assert abs(roots.roots[0].value - 1.0) < 1e-8

    def test_empty(self):
        assert len(cluster_roots([], 1e-7)) == 0

    def test_single_linkage_chains(self):
        eps = 0.5e-7
        roots = cluster_roots([0, 2 * eps, 4 * eps, 1], 1e-7)
        assert sorted(r.multiplicity for r in roots) == [1, 3]

    def test_radius_must_be_positive(self):
        with pytest.raises(CubicError):
            cluster_roots([1.0], 0)


class TestCubicRoots:
    @pytest.mark.parametrize("backend", [RATIONAL, COMPLEX])
    def test_degree_drop_gives_infinity(self, backend):
        roots = cubic_roots([0, 1, 1, 0], backend)
        assert roots.degree == 3
        assert sum(r.at_infinity for r in roots) == 1
        values = finite_values(roots)
        assert len(values) == 2
        assert abs(complex(values[0]) + 1) < 1e-9 and abs(complex(values[1])) < 1e-9

    def test_double_root_and_infinity(self):
        roots = cubic_roots([0, 0, 1, 0], RATIONAL)
        by_value = {r.value: r.multiplicity for r in roots}
        assert by_value == {0: 2, None: 1}

    def test_fermat_chord(self):
        roots = cubic_roots([0, 3, 3, 0], RATIONAL)
        assert {r.value for r in roots} == {Fraction(0), Fraction(-1), None}
        assert all(r.exact for r in roots if not r.at_infinity)

    def test_irrational_roots_are_numeric(self):
        roots = cubic_roots([-2, 0, 0, 1], RATIONAL)
        assert roots.degree == 3
        for r in roots:
            assert abs(complex(r.value) ** 3 - 2) < 1e-9

    def test_triple_root_complex(self):
        roots = cubic_roots([-8, 12, -6, 1], COMPLEX)
        assert [r.multiplicity for r in roots] == [3]
        assert abs(roots.roots[0].value - 2) < 1e-9

    def test_double_root_beside_a_simple_one(self):
        roots = cubic_roots([-3, 5, -1, -1], COMPLEX)
        assert sorted(r.multiplicity for r in roots) == [1, 2]
        double = next(r for r in roots if r.multiplicity == 2)
        assert abs(double.value - 1) < 1e-9

    def test_identically_zero(self):
        with pytest.raises(IdenticallyZeroError, match="identically zero on line"):
            cubic_roots([0, 0, 0, 0], RATIONAL)

    def test_wrong_length(self):
        with pytest.raises(CubicError):
            cubic_roots([1, 2, 3])


def residuals(conic, cubic, intersection):
    A = conic.to_backend(COMPLEX).matrix
    F = cubic.to_backend(COMPLEX)
    worst = 0.0
    for point, _ in intersection.points:
        p = point.coords
        worst = max(worst, abs(np.dot(p, A @ p)), abs(F.evaluate(p)))
    return worst


class TestConicCubicIntersect:
    def test_six_points_exact(self):
        conic = PlaneConic.from_terms({(0, 1): 1, (2, 2): -1})
        cubic = HomogeneousCubic.from_terms(3, {(0, 0, 0): 1, (1, 1, 1): 1, (2, 2, 2): -2})
        result = conic_cubic_intersect(conic, cubic, seed=3)
        assert result.finite
        assert result.total_multiplicity == 6
        assert residuals(conic, cubic, result) < 1e-8

    def test_six_points_complex(self):
        conic = PlaneConic.from_terms({(0, 1): 1, (2, 2): -1, (0, 2): 2}, COMPLEX)
        cubic = HomogeneousCubic.from_terms(3, {(0, 0, 0): 1, (1, 1, 2): 3, (2, 2, 2): -2, (0, 1, 2): 1}, COMPLEX)
        result = conic_cubic_intersect(conic, cubic, seed=1)
        assert result.finite
        assert result.total_multiplicity == 6
        assert residuals(conic, cubic, result) < 1e-8

    def test_common_component(self):
        conic = PlaneConic.from_terms({(0, 0): 1})
        cubic = HomogeneousCubic.from_terms(3, {(0, 1, 1): 1, (0, 2, 2): 1})
        result = conic_cubic_intersect(conic, cubic, seed=0)
        assert not result.finite
        assert "x" in result.witness

    def test_common_component_complex(self):
        conic = PlaneConic.from_terms({(0, 0): 1}, COMPLEX)
        cubic = HomogeneousCubic.from_terms(3, {(0, 1, 1): 1, (0, 2, 2): 1}, COMPLEX)
        assert not conic_cubic_intersect(conic, cubic, seed=0).finite

    def test_triple_points_exact(self):
        conic = PlaneConic.from_terms({(0, 0): 1, (1, 1): 1})
        cubic = HomogeneousCubic.from_terms(3, {(2, 2, 2): 1})
        result = conic_cubic_intersect(conic, cubic, seed=2)
        assert sorted(m for _, m in result.points) == [3, 3]
        for point, _ in result.points:
            x, y, z = point.coords
            assert abs(z) < 1e-9
            assert abs(y / x - 1j) < 1e-6 or abs(y / x + 1j) < 1e-6

    def test_triple_points_complex(self):
        conic = PlaneConic.from_terms({(0, 0): 1, (1, 1): 1}, COMPLEX)
        cubic = HomogeneousCubic.from_terms(3, {(2, 2, 2): 1}, COMPLEX)
        result = conic_cubic_intersect(conic, cubic, seed=2)
        assert sorted(m for _, m in result.points) == [3, 3]
        assert residuals(conic, cubic, result) < 1e-8
        for point, _ in result.points:
            x, y, z = point.coords
            assert abs(z / x) < 1e-6
            assert abs(y / x - 1j) < 1e-6 or abs(y / x + 1j) < 1e-6

    @pytest.mark.parametrize("backend", [RATIONAL, COMPLEX])
    @pytest.mark.parametrize("seed", range(30))
    def test_double_points_across_seeds(self, backend, seed):
        conic = PlaneConic.from_terms({(0, 1): 1, (2, 2): -1}, backend)
        cubic = HomogeneousCubic.from_terms(3, {(0, 0, 0): 1, (1, 1, 1): 1, (2, 2, 2): -2}, backend)
        result = conic_cubic_intersect(conic, cubic, seed=seed)
        assert sorted(m for _, m in result.points) == [2, 2, 2]
        assert residuals(conic, cubic, result) < 1e-6

    def test_zero_conic(self):
        conic = PlaneConic.from_terms({})
        cubic = HomogeneousCubic.from_terms(3, {(2, 2, 2): 1})
        with pytest.raises(IdenticallyZeroError, match="zero conic"):
            conic_cubic_intersect(conic, cubic)

    def test_deterministic(self):
        conic = PlaneConic.from_terms({(0, 1): 1, (2, 2): -1})
        cubic = HomogeneousCubic.from_terms(3, {(0, 0, 0): 1, (1, 1, 1): 1, (2, 2, 2): -2})
        first = conic_cubic_intersect(conic, cubic, seed=5).to_json()
        second = conic_cubic_intersect(conic, cubic, seed=5).to_json()
        assert first == second
