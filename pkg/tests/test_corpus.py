import pytest

from geometry.backends import RATIONAL
from geometry.cubic_geom import CubicHypersurface
from geometry.errors import SpecFormatError
from utils.corpus import CorpusGenerator, parse_corpus_spec


def test_fermat_base_point_is_on_the_cubic():
    for n in (3, 4):
        form = CorpusGenerator.fermat(n)
        assert form.evaluate(CorpusGenerator.fermat_base_point(n).coords) == 0


def test_thirty_eckardt_candidates(fermat):
    candidates = CorpusGenerator().eckardt_candidates(fermat)
    assert len(candidates) == 30
    Xc = CubicHypersurface(fermat).as_complex()
    assert all(Xc.contains(p) for p in candidates)


def test_non_diagonal_cubic_has_no_candidates():
    form = CorpusGenerator().random_cubic(3, 5, seed=1)
    assert CorpusGenerator.diagonal_weights(form) is None
    assert CorpusGenerator().eckardt_candidates(form) == []


def test_random_cubic_contains_the_first_vertex():
    form = CorpusGenerator().random_cubic(3, 5, seed=4)
    assert (0, 0, 0) not in form.coefficients
    assert form.evaluate(RATIONAL.unit(5, 0)) == 0
    assert all(abs(c) <= 5 for c in form.coefficients.values())


def test_corpus_is_deterministic():
    first = CorpusGenerator(seed=7).generate_corpus(2, 3)
    second = CorpusGenerator(seed=7).generate_corpus(2, 3)
    assert [e.form.to_spec() for e in first] == [e.form.to_spec() for e in second]
    assert [e.name for e in first] == ["cubic-000", "cubic-001"]


def test_rational_points_of_an_entry():
    entry = CorpusGenerator(seed=7).generate_corpus(1, 3)[0]
    p = CorpusGenerator.rational_point(entry, seed=3)
    assert entry.form.evaluate(p.coords) == 0


class TestCorpusSpec:
    def test_defaults(self):
        assert parse_corpus_spec({}) == {"count": 5, "dim": 3, "coeff_bound": 5, "seed": 0}

    @pytest.mark.parametrize("doc", [[], {"dim": 1}, {"count": "5"}, {"coeff_bound": 0}, {"seed": True}])
    def test_invalid(self, doc):
        with pytest.raises(SpecFormatError):
            parse_corpus_spec(doc)
