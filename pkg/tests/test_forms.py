from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geometry.backends import COMPLEX, RATIONAL
from geometry.errors import DegenerateLineError, DimensionMismatchError, SpecFormatError
from geometry.forms import HomogeneousCubic, multinomial_count, parse_cubic

FERMAT_SPEC = {"dim": 3, "coeffs": [{"mono": [i, i, i], "val": "1"} for i in range(5)]}

small_ints = st.integers(min_value=-6, max_value=6)
vectors = st.lists(small_ints, min_size=5, max_size=5)


@st.composite
def cubics(draw):
    terms = draw(st.dictionaries(
        st.tuples(*(st.integers(0, 4) for _ in range(3))).map(lambda m: tuple(sorted(m))),
        st.integers(-5, 5).filter(bool), min_size=1, max_size=8,
    ))
    return HomogeneousCubic.from_terms(5, terms)


def vec(values):
    return RATIONAL.vector(values)


class TestParse:
    def test_fermat_document(self):
        form = parse_cubic(FERMAT_SPEC)
        assert form.num_vars == 5
        assert form.dimension == 3
        assert sorted(form.coefficients) == [(i, i, i) for i in range(5)]
        assert form.backend is RATIONAL

    def test_unsorted_monomials_are_merged(self):
        form = parse_cubic({"dim": 2, "coeffs": [{"mono": [1, 0, 0], "val": 2}, {"mono": [0, 1, 0], "val": "1/2"}]})
        assert form.coefficients == {(0, 0, 1): Fraction(5, 2)}

    def test_non_cubic_monomial(self):
        with pytest.raises(SpecFormatError, match="non-cubic monomial"):
            parse_cubic({"dim": 3, "coeffs": [{"mono": [0, 1], "val": "1"}]})

    def test_zero_form(self):
        with pytest.raises(SpecFormatError, match="zero form"):
            parse_cubic({"dim": 3, "coeffs": [{"mono": [0, 0, 0], "val": "0"}]})

    def test_variable_out_of_range(self):
        with pytest.raises(SpecFormatError):
            parse_cubic({"dim": 2, "coeffs": [{"mono": [0, 0, 4], "val": "1"}]})

    def test_complex_coefficients_select_the_complex_backend(self):
        form = parse_cubic({"dim": 2, "coeffs": [{"mono": [0, 0, 0], "val": [1, 2]}]})
        assert form.backend is COMPLEX
        with pytest.raises(SpecFormatError):
            parse_cubic({"dim": 2, "coeffs": [{"mono": [0, 0, 0], "val": [1, 2]}]}, RATIONAL)

    def test_json_text_and_spec_agree(self, fermat):
        assert parse_cubic(fermat.to_spec()).coefficients == fermat.coefficients


class TestEvaluate:
    def test_fermat_base_point(self, fermat):
        assert fermat.evaluate(vec([3, 4, 5, -6, 0])) == 0

    def test_vertex(self, fermat):
        assert fermat.evaluate(vec([1, 0, 0, 0, 0])) == 1

    def test_zero_vector(self, fermat):
        assert fermat.evaluate(vec([0] * 5)) == 0

    def test_wrong_length(self, fermat):
        with pytest.raises(DimensionMismatchError):
            fermat.evaluate(vec([1, 0, 0]))


class TestGradient:
    def test_power_rule(self, fermat):
        assert list(fermat.gradient(vec([3, 4, 5, -6, 0]))) == [27, 48, 75, 108, 0]
        assert list(fermat.gradient(vec([1, -1, 0, 0, 0]))) == [3, 3, 0, 0, 0]

    @given(cubics(), vectors)
    @settings(max_examples=40, deadline=None)
    def test_euler_identity(self, form, p):
        p = vec(p)
        assert sum(g * c for g, c in zip(form.gradient(p), p)) == 3 * form.evaluate(p)


class TestPolarize:
    def test_multinomial_count(self):
        assert multinomial_count((0, 0, 0)) == 1
        assert multinomial_count((0, 0, 1)) == 3
        assert multinomial_count((0, 1, 2)) == 6

    def test_fermat_is_diagonal(self, fermat):
        P = fermat.polarize()
        a, b, c = vec([1, 2, 3, 4, 5]), vec([2, 0, 1, -1, 3]), vec([1, 1, -2, 0, 1])
        assert P(a, b, c) == sum(x * y * z for x, y, z in zip(a, b, c))

    def test_normalisation_by_orderings(self):
        form = HomogeneousCubic.from_terms(3, {(0, 0, 1): 1})
        P = form.polarize()
        assert P.tensor[0, 0, 1] == Fraction(1, 3)
        assert P.tensor[1, 0, 0] == Fraction(1, 3)
        assert P.tensor[0, 1, 1] == 0
        a = vec([2, 5, 7])
        assert P(a, a, a) == 20

    @given(cubics(), vectors, vectors, vectors)
    @settings(max_examples=40, deadline=None)
    def test_symmetric_and_recovers_the_cubic(self, form, a, b, c):
        P = form.polarize()
        a, b, c = vec(a), vec(b), vec(c)
        assert P(a, a, a) == form.evaluate(a)
        assert P(a, b, c) == P(b, c, a) == P(c, b, a)

    def test_restrict_then_recover(self, fermat):
        basis = [vec([1, -1, 0, 0, 0]), vec([0, 0, 1, -1, 0]), vec([0, 0, 0, 0, 1])]
        section = fermat.polarize().restrict(basis).to_cubic()
        assert section.num_vars == 3
        # the plane (s:-s:t:-t:w) meets the Fermat cubic in w^3 = 0
        assert section.coefficients == {(2, 2, 2): 1}


class TestRestrictToLine:
    def test_fermat_chord(self, fermat):
        restriction = fermat.restrict_to_line(vec([1, 0, -1, 0, 0]), vec([1, -1, 0, 0, 0]))
        assert restriction.coefficients == (0, 3, 3, 0)

    def test_line_in_the_cubic(self, fermat):
        restriction = fermat.restrict_to_line(vec([1, -1, 0, 0, 0]), vec([0, 0, 1, -1, 0]))
        assert restriction.is_identically_zero()

    @given(cubics(), vectors, vectors, st.lists(st.fractions(max_denominator=7), min_size=5, max_size=5))
    @settings(max_examples=30, deadline=None)
    def test_matches_direct_evaluation(self, form, x, v, ts):
        x, v = vec(x), vec(v)
        if RATIONAL.proportional(x, v) or RATIONAL.is_zero_vector(v):
            return
        restriction = form.restrict_to_line(x, v)
        assert restriction(0) == form.evaluate(x)
        for t in ts:
            assert restriction(t) == form.evaluate(x + t * v)

    def test_proportional_generators(self, fermat):
        with pytest.raises(DegenerateLineError):
            fermat.restrict_to_line(vec([1, 2, 0, 0, 0]), vec([2, 4, 0, 0, 0]))
