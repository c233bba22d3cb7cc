import pytest

from conftest import cpt, pt
from geometry.backends import COMPLEX, RATIONAL
from geometry.cubic_geom import CubicHypersurface
from geometry.errors import (
    CoincidentPointsError,
    EckardtCenterError,
    IndeterminateError,
    NotOnCubicError,
    SpecFormatError,
    UseSpanningLinesError,
)
from geometry.forms import HomogeneousCubic
from geometry.projective import ProjectivePoint, proj_equal, random_point_on_cubic

U = (1, -1, 0, 0, 0)


class TestConstruction:
    def test_curves_are_rejected(self):
        with pytest.raises(SpecFormatError):
            CubicHypersurface(HomogeneousCubic.from_terms(3, {(0, 0, 0): 1, (1, 1, 1): 1, (2, 2, 2): 1}))

    def test_complex_view(self, X):
        assert X.as_complex().backend is COMPLEX
        assert X.as_complex() is X.as_complex()


class TestMembership:
    def test_contains(self, X):
        assert X.contains(pt(3, 4, 5, -6, 0))
        assert not X.contains(pt(1, 0, 0, 0, 0))

    def test_contains_is_homogeneous(self, X):
        assert X.contains(pt(6, 8, 10, -12, 0))
        assert X.contains(cpt(3j, 4j, 5j, -6j, 0))

    def test_smooth_everywhere_on_fermat(self, X, base_point):
        assert X.check_smooth_at(base_point)
        assert X.check_smooth_at(pt(*U))

    def test_cone_is_singular_at_its_vertex(self):
        cone = CubicHypersurface(HomogeneousCubic.from_terms(5, {(0, 0, 0): 1, (1, 1, 1): 1, (2, 2, 2): 1}))
        assert not cone.check_smooth_at(pt(0, 0, 0, 1, 0))

    def test_smoothness_needs_a_point_of_x(self, X):
        with pytest.raises(NotOnCubicError):
            X.check_smooth_at(pt(1, 0, 0, 0, 0))

    def test_tangent_hyperplane(self, X, base_point):
        frame = X.tangent_hyperplane(base_point)
        assert RATIONAL.proportional(frame.covector, RATIONAL.vector([9, 16, 25, 36, 0]))
        assert len(frame.basis) == 3
        for w in frame.basis:
            assert sum(g * c for g, c in zip(frame.covector, w)) == 0

    def test_tangent_hyperplane_at_u(self, X):
        frame = X.tangent_hyperplane(pt(*U))
        assert RATIONAL.proportional(frame.covector, RATIONAL.vector([1, 1, 0, 0, 0]))


class TestIncidence:
    def test_tangency_at_the_point_itself(self, X):
        u = pt(*U)
        assert X.in_S(u, u) and X.in_S_star(u, u) and X.in_C(u, u)

    def test_point_on_a_line_through_u(self, X):
        u, p = pt(*U), pt(0, 0, 1, -1, 0)
        assert X.in_S(u, p)
        assert X.in_S_star(u, p)
        assert X.in_C(u, p)

    def test_chord(self, X):
        u, p = pt(*U), pt(1, 0, -1, 0, 0)
        assert not X.in_S(u, p)
        assert not X.in_S_star(u, p)
        assert not X.in_C(u, p)


class TestThirdPoint:
    def test_fermat_chord(self, X):
        y = X.third_point(pt(*U), pt(1, 0, -1, 0, 0))
        assert proj_equal(y, pt(0, 1, -1, 0, 0))
        assert y.backend is RATIONAL

    def test_line_in_x_is_indeterminate(self, X):
        with pytest.raises(IndeterminateError):
            X.third_point(pt(*U), pt(0, 0, 1, -1, 0))

    def test_points_off_x(self, X):
        with pytest.raises(NotOnCubicError):
            X.third_point(pt(*U), pt(1, 0, 0, 0, 0))

    def test_involution(self, X, base_point):
        u = random_point_on_cubic(X.form, 1, base_point=base_point)
        x = random_point_on_cubic(X.form, 2, base_point=base_point)
        y = X.third_point(u, x)
        assert X.contains(y)
        assert proj_equal(X.third_point(u, y), x)

    def test_mirror_is_fixed(self, X, base_point):
        # u is a tangent hop from x, so x lies in S*_u
        x = base_point
        u = random_point_on_cubic(X.form, 3, base_point=x, hops=1)
        assert X.in_S_star(u, x)
        if not X.in_C(u, x):
            assert proj_equal(X.third_point(u, x), x)

    def test_complex_points(self, Xc):
        u = random_point_on_cubic(Xc.form, 4)
        x = random_point_on_cubic(Xc.form, 5)
        y = Xc.third_point(u, x)
        assert Xc.contains(y)
        assert proj_equal(Xc.third_point(u, y), x, 1e-8)


class TestBezoutDivisor:
    def test_reduced_divisor(self, X):
        a, b = pt(1, 0, -1, 0, 0), pt(*U)
        divisor = X.bezout_divisor(a, b)
        assert not divisor.contained
        assert divisor.total_multiplicity == 3
        expected = [a, b, pt(0, 1, -1, 0, 0)]
        for p in expected:
            assert any(proj_equal(p, q) for q, m in divisor.points if m == 1)

    def test_point_off_x_is_not_in_the_divisor(self, X, base_point):
        b = pt(1, 2, 0, 1, 1)
        divisor = X.bezout_divisor(base_point, b)
        assert divisor.total_multiplicity == 3
        assert not any(proj_equal(p, b) for p, _ in divisor.points)

    def test_contained_line(self, X):
        assert X.bezout_divisor(pt(*U), pt(0, 0, 1, -1, 0)).contained

    def test_coincident(self, X):
        with pytest.raises(CoincidentPointsError):
            X.bezout_divisor(pt(*U), pt(2, -2, 0, 0, 0))


class TestLines:
    def test_six_lines_at_the_base_point(self, X, base_point):
        line_set = X.lines_through(base_point)
        assert line_set.finite
        assert line_set.total_multiplicity == 6
        for line, _ in line_set.lines:
            assert X.in_C(base_point, ProjectivePoint.of(line.dir, COMPLEX))

    def test_general_complex_point(self, Xc):
        x = random_point_on_cubic(Xc.form, 21)
        line_set = Xc.lines_through(x, seed=4)
        assert line_set.finite
        assert line_set.total_multiplicity == 6

    @pytest.mark.parametrize("coords", [U, (1, 0, -1, 0, 0)])
    def test_eckardt_points(self, X, coords):
        line_set = X.lines_through(pt(*coords))
        assert not line_set.finite
        assert line_set.to_json()["eckardt"] is True
        assert X.is_eckardt(pt(*coords))

    def test_base_point_is_not_eckardt(self, X, base_point):
        assert not X.is_eckardt(base_point)

    def test_fourfolds_need_spanning_lines(self, X4):
        with pytest.raises(UseSpanningLinesError):
            X4.lines_through(pt(1, -1, 0, 0, 0, 0))


class TestSpanningLines:
    def test_threefold(self, X, base_point):
        spanning = X.spanning_lines(base_point)
        assert len(spanning.lines) == 3
        assert spanning.rank.rank == 3

    def test_eckardt_center(self, X):
        with pytest.raises(EckardtCenterError):
            X.spanning_lines(pt(*U))

    def test_fourfold_slices(self, X4):
        x = random_point_on_cubic(X4.as_complex().form, 8)
        spanning = X4.spanning_lines(x, seed=2)
        assert len(spanning.lines) == 4
        assert spanning.rank.rank == 4
        assert spanning.slices_used >= 1
        for line in spanning.lines:
            assert X4.in_C(x, ProjectivePoint.of(line.dir, COMPLEX))
