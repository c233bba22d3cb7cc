import numpy as np
import pytest

from conftest import cpt, pt
from geometry.backends import COMPLEX, RATIONAL, to_backend
from geometry.errors import CoincidentPointsError, CubicError, DimensionMismatchError
from geometry.projective import (
    ProjectivePoint,
    line_through,
    proj_equal,
    random_point_on_cubic,
    random_subspace_through,
    span_rank,
    tangent_hop,
)


class TestProjectivePoint:
    def test_canonical_representative(self):
        assert list(pt(0, 2, 4).coords) == [0, 1, 2]

    def test_zero_vector_is_not_a_point(self):
        with pytest.raises(CubicError):
            pt(0, 0, 0)

    def test_repr(self):
        assert repr(pt(2, -2, 0)) == "(1:-1:0)"


class TestProjEqual:
    def test_scaled_points(self):
        assert proj_equal(pt(1, 2, 3), pt(2, 4, 6))

    def test_distinct_vertices(self):
        assert not proj_equal(pt(1, 0, 0), pt(0, 1, 0))

    def test_tolerance(self):
        assert proj_equal(cpt(1, 1, 0), cpt(1, 1 + 1e-14, 0), tol=1e-10)

    def test_mixed_backends(self):
        assert proj_equal(pt(1, -1, 0), cpt(2, -2, 0))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            proj_equal(pt(1, 0), pt(1, 0, 0))


class TestSpanRank:
    def test_standard_basis(self):
        basis = [RATIONAL.unit(5, i) for i in range(1, 5)]
        assert span_rank(basis, RATIONAL).rank == 4

    def test_proportional(self):
        v = RATIONAL.vector([1, 2, 3, 4, 5])
        assert span_rank([v, 2 * v, 3 * v], RATIONAL).rank == 1

    def test_pairwise_sums_add_nothing(self):
        rng = np.random.default_rng(4)
        a, b, c = (RATIONAL.random_vector(rng, 5) for _ in range(3))
        family = [a, b, c, a + b, b + c, a + c]
        assert span_rank(family, RATIONAL).rank == 3
        complex_family = [to_backend(v, RATIONAL, COMPLEX) for v in family]
        assert span_rank(complex_family, COMPLEX).rank == 3


class TestLineThrough:
    def test_coordinate_line(self):
        line = line_through(pt(1, 0, 0, 0, 0), pt(0, 1, 0, 0, 0))
        assert line.contains(pt(2, 7, 0, 0, 0))
        assert not line.contains(pt(0, 0, 1, 0, 0))

    def test_coincident(self):
        with pytest.raises(CoincidentPointsError):
            line_through(pt(1, 2, 3), pt(2, 4, 6))

    def test_contains_the_sum(self):
        p, q = pt(1, 3, -2, 5), pt(0, 4, 1, 1)
        assert line_through(p, q).contains(ProjectivePoint.of(p.coords + q.coords))


class TestSampling:
    def test_complex_point(self, Xc):
        p = random_point_on_cubic(Xc.form, seed=3)
        assert abs(Xc.form.evaluate(p.coords)) < 1e-10

    def test_rational_point_by_hops(self, fermat, base_point):
        p = random_point_on_cubic(fermat, seed=7, base_point=base_point)
        assert p.backend is RATIONAL
        assert fermat.evaluate(p.coords) == 0

    def test_deterministic(self, fermat, base_point):
        first = random_point_on_cubic(fermat, seed=11, base_point=base_point)
        second = random_point_on_cubic(fermat, seed=11, base_point=base_point)
        assert list(first.coords) == list(second.coords)

    def test_rational_sampling_needs_a_base_point(self, fermat):
        with pytest.raises(CubicError):
            random_point_on_cubic(fermat, seed=1)

    def test_one_hop_lands_on_the_tangent_section(self, X, base_point):
        rng = np.random.default_rng(2)
        for _ in range(5):
            hop = tangent_hop(X.form, base_point.coords, rng)
            if hop is None:
                continue
            q = ProjectivePoint.of(hop, RATIONAL)
            assert X.contains(q)
            assert X.in_S(base_point, q)


class TestSubspace:
    def test_whole_space(self, base_point):
        spanning = random_subspace_through(base_point, 4, seed=1)
        assert span_rank(spanning, RATIONAL).rank == 5

    def test_random_line_through_x(self, base_point):
        spanning = random_subspace_through(base_point, 1, seed=1)
        assert len(spanning) == 2
        assert proj_equal(ProjectivePoint.of(spanning[0]), base_point)

    def test_reproducible(self, base_point):
        first = random_subspace_through(base_point, 2, seed=5)
        second = random_subspace_through(base_point, 2, seed=5)
        assert all(list(a) == list(b) for a, b in zip(first, second))

    def test_dimension_out_of_range(self, base_point):
        with pytest.raises(CubicError):
            random_subspace_through(base_point, 5, seed=1)
