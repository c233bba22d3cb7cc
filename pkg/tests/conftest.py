import pytest

from geometry.backends import COMPLEX, RATIONAL
from geometry.cubic_geom import CubicHypersurface
from geometry.projective import ProjectivePoint
from utils.corpus import CorpusGenerator


def pt(*coords, backend=RATIONAL):
    return ProjectivePoint.of(list(coords), backend)


def cpt(*coords):
    return ProjectivePoint.of(list(coords), COMPLEX)


@pytest.fixture(scope="session")
def fermat():
    return CorpusGenerator.fermat(3)


@pytest.fixture(scope="session")
def fermat4():
    return CorpusGenerator.fermat(4)


@pytest.fixture(scope="session")
def X(fermat):
    return CubicHypersurface(fermat)


@pytest.fixture(scope="session")
def X4(fermat4):
    return CubicHypersurface(fermat4)


@pytest.fixture(scope="session")
def Xc(X):
    return X.as_complex()


@pytest.fixture
def base_point():
    return pt(3, 4, 5, -6, 0)
