import numpy as np
import pytest

from conformal_dimension.models import HorseshoeModel, MatrixCocycle, SubshiftSpec

ROTATED = [[0.0, -8.0], [2.0, 0.0]]


@pytest.fixture
def full_shift() -> SubshiftSpec:
    return SubshiftSpec.full_shift(2)


@pytest.fixture
def golden_mean() -> SubshiftSpec:
    return SubshiftSpec.golden_mean()


@pytest.fixture
def rotated() -> MatrixCocycle:
    """Rotation by 90 degrees after diag(2, 8): average conformal, never conformal."""
    return MatrixCocycle.from_matrices([ROTATED, ROTATED])


@pytest.fixture
def diagonal() -> MatrixCocycle:
    """diag(3, 4) and diag(4, 3): every product has singular value ratio at least 4/3."""
    return MatrixCocycle.from_matrices([np.diag([3.0, 4.0]), np.diag([4.0, 3.0])])


@pytest.fixture
def horseshoe() -> HorseshoeModel:
    return HorseshoeModel.linear(3.0, 0.2)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)
