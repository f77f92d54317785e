import math

import numpy as np
import pytest

from conformal_dimension import constants, dimension
from conformal_dimension.errors import DomainError
from conformal_dimension.models import (
    CocycleModel,
    HorseshoeModel,
    MatrixCocycle,
    SubshiftSpec,
)

GOLDEN_ROOT = math.log((1 + math.sqrt(5)) / 2) / math.log(2)
HORSESHOE_DIM = math.log(2) / math.log(3) + math.log(2) / math.log(5)


def _stable(a: float) -> MatrixCocycle:
    return MatrixCocycle.scalar(a, orientation=constants.Orientation.STABLE)


def test_bowen_root_of_linear_pressure():
    root = dimension.bowen_root(lambda c: math.log(2) - c * math.log(4))
    assert root.value == pytest.approx(0.5, abs=1e-10)
    assert root.bracket[0] <= root.value <= root.bracket[1]
    assert root.width <= constants.SolverConfig.ROOT_TOL
    assert root.pressure_lo >= 0.0 >= root.pressure_hi


def test_bowen_root_widens_its_bracket():
    root = dimension.bowen_root(lambda c: math.log(2) - 0.01 * c, (0.0, 2.0))
    assert root.value == pytest.approx(100 * math.log(2), abs=1e-8)


def test_bowen_root_needs_coercive_potential():
    with pytest.raises(DomainError, match="not coercive"):
        dimension.bowen_root(lambda c: 1.0 - 1e-6 * c)


def test_bowen_root_needs_decreasing_pressure():
    with pytest.raises(DomainError, match="strictly decreasing"):
        dimension.bowen_root(lambda c: math.cos(3 * c))


def test_bowen_root_rejects_bad_hints():
    with pytest.raises(DomainError):
        dimension.bowen_root(lambda c: -c, (1.0, 0.5))


def test_determinant_roots(full_shift: SubshiftSpec):
    assert dimension.determinant_root(full_shift, MatrixCocycle.scalar(4.0)).value == (
        pytest.approx(0.5, abs=1e-10)
    )
    mixed = MatrixCocycle.from_matrices([[[2.0]], [[4.0]]])
    assert dimension.determinant_root(full_shift, mixed).value == pytest.approx(
        GOLDEN_ROOT, abs=1e-8
    )
    assert GOLDEN_ROOT == pytest.approx(0.6942419, abs=1e-7)


def test_stable_bundle_goes_through_the_inverse(full_shift: SubshiftSpec):
    root = dimension.determinant_root(full_shift, _stable(0.25))
    assert root.value == pytest.approx(0.5, abs=1e-10)

    spec, cocycle = dimension.unstable_view(full_shift, _stable(0.25))
    assert cocycle.orientation is constants.Orientation.UNSTABLE
    assert cocycle.generators[0] == pytest.approx(np.array([[4.0]]))


def test_brackets_of_rotated_cocycle(full_shift: SubshiftSpec, rotated: MatrixCocycle):
    rows = dimension.bracket_sequence(full_shift, rotated, 3)
    assert rows[0].lower == pytest.approx(1 / 3, abs=1e-8)
    assert rows[0].upper == pytest.approx(1.0, abs=1e-8)
    for row in rows[1:]:
        assert row.lower == pytest.approx(0.5, abs=1e-8)
        assert row.upper == pytest.approx(0.5, abs=1e-8)


def test_brackets_of_diagonal_cocycle(full_shift: SubshiftSpec, diagonal: MatrixCocycle):
    rows = dimension.bracket_sequence(full_shift, diagonal, 4)
    assert [row.k for row in rows] == [0, 1, 2, 3, 4]
    assert rows[-1].gap > 0.05
    for previous, current in zip(rows, rows[1:]):
        assert current.lower >= previous.lower - 1e-9
        assert current.upper <= previous.upper + 1e-9

    root = dimension.determinant_root(full_shift, diagonal)
    assert rows[-1].lower <= root.value <= rows[-1].upper


def test_bundle_report_flags_defect(full_shift: SubshiftSpec, diagonal: MatrixCocycle):
    report = dimension.bundle_report(full_shift, diagonal, 2)
    assert report.defect_level == 4
    assert report.defect >= math.log(4 / 3) - 1e-9
    assert not report.average_conformal
    assert report.expansion_certified


def test_horseshoe_dimension(horseshoe: HorseshoeModel):
    report = dimension.dimension_report(horseshoe, k_max=3)
    assert report.dim_total == pytest.approx(HORSESHOE_DIM, abs=1e-8)
    assert HORSESHOE_DIM == pytest.approx(1.061607, abs=1e-6)
    assert report.t_u.value == pytest.approx(math.log(2) / math.log(3), abs=1e-9)
    assert report.t_s.value == pytest.approx(math.log(2) / math.log(5), abs=1e-9)
    assert report.certified
    assert not report.flags
    assert report.k_max == 3


def test_default_k_max_respects_budget():
    assert dimension.default_k_max(2) == min(constants.SolverConfig.K_MAX, 4)
    assert dimension.default_k_max(3) <= 3


def test_non_conformal_model_is_flagged(full_shift: SubshiftSpec, diagonal: MatrixCocycle):
    model = CocycleModel(coding=full_shift, unstable=diagonal, stable=_stable(0.25))
    report = dimension.dimension_report(model, k_max=4)
    assert dimension.NOT_AVERAGE_CONFORMAL in report.flags
    assert dimension.UNCERTIFIED in report.flags
    assert not report.certified
    assert report.unstable.brackets[-1].gap > 0.05


def test_cocycle_model_checks_orientation(full_shift: SubshiftSpec, rotated: MatrixCocycle):
    with pytest.raises(ValueError):
        CocycleModel(coding=full_shift, unstable=rotated, stable=rotated)


def test_reducible_coding_is_rejected(rotated: MatrixCocycle):
    reducible = SubshiftSpec.from_rows([[1, 1], [0, 1]])
    model = CocycleModel(coding=reducible, unstable=rotated, stable=_stable(0.5))
    with pytest.raises(DomainError):
        dimension.dimension_report(model, k_max=1)


def test_dimension_ratio_matches_root(full_shift: SubshiftSpec):
    mixed = MatrixCocycle.from_matrices([[[2.0]], [[4.0]]])
    ratio = dimension.dimension_ratio(full_shift, mixed, tol=1e-9, restarts=2)
    assert ratio == pytest.approx(GOLDEN_ROOT, abs=1e-6)


def test_dimension_ratio_needs_expansion(full_shift: SubshiftSpec):
    with pytest.raises(DomainError):
        dimension.dimension_ratio(full_shift, MatrixCocycle.from_matrices([[[0.5]], [[4.0]]]))


def test_parameter_grid():
    grid = dimension.parameter_grid(3.0, 5.0, 0.05)
    assert len(grid) == 41
    assert grid[0] == 3.0
    assert grid[-1] == 5.0
    assert grid[1] == 3.05
    with pytest.raises(DomainError):
        dimension.parameter_grid(5.0, 3.0, 0.05)


def test_continuity_sweep_records_failures():
    def family(mu: float) -> HorseshoeModel:
        return HorseshoeModel.linear(mu, 0.2)

    result = dimension.continuity_sweep(family, [4.0, 1.5, 3.0, 3.5], k_max=2, threads=2)
    assert [point.parameter for point in result.points] == [1.5, 3.0, 3.5, 4.0]
    assert result.points[0].error is not None
    assert len(result.succeeded) == 3
    assert result.monotone_decreasing
    assert not result.monotone_increasing


@pytest.mark.slow
def test_continuity_along_expansion():
    grid = dimension.parameter_grid(3.0, 5.0, 0.05)
    result = dimension.continuity_sweep(lambda mu: HorseshoeModel.linear(mu, 0.2), grid)
    assert len(result.succeeded) == 41
    assert result.max_jump <= 0.02
    assert result.monotone_decreasing


def test_report_carries_dimension_interval(
    full_shift: SubshiftSpec, diagonal: MatrixCocycle, horseshoe: HorseshoeModel
):
    model = CocycleModel(coding=full_shift, unstable=diagonal, stable=_stable(0.25))
    report = dimension.dimension_report(model, k_max=2)
    lo, hi = report.dim_interval
    assert hi - lo > 0.05
    assert lo - 1e-8 <= report.dim_total <= hi + 1e-8
    assert report.unstable.interval == (
        report.unstable.brackets[-1].lower,
        report.unstable.brackets[-1].upper,
    )
    assert "dim_interval" in report.json()

    sharp = dimension.dimension_report(horseshoe, k_max=2)
    assert sharp.dim_interval == pytest.approx((HORSESHOE_DIM, HORSESHOE_DIM), abs=1e-8)
