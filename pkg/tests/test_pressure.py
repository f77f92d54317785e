import math

import numpy as np
import pytest

from conformal_dimension import constants, pressure, symbolic
from conformal_dimension.errors import DomainError, ResourceError
from conformal_dimension.models import EdgePotential, MatrixCocycle, SingularPotential, SubshiftSpec

NORM = constants.SingularValue.NORM
CONORM = constants.SingularValue.CONORM


@pytest.mark.parametrize("c", [-1.5, 0.0, 0.7])
def test_constant_potential(full_shift: SubshiftSpec, c: float):
    potential = EdgePotential.constant(c, 2)
    exact = pressure.additive_pressure(full_shift, potential)
    assert exact.value == pytest.approx(math.log(2) + c, abs=1e-12)
    assert exact.scheme is constants.Scheme.TRANSFER_MATRIX

    level = pressure.cylinder_pressure_level(full_shift, potential, 6)
    assert level.value == pytest.approx(math.log(2) + c, abs=1e-12)
    assert level.words == 64


def test_cylinder_sums_converge_to_exact_pressure(golden_mean: SubshiftSpec):
    potential = EdgePotential(values=[[0.3, -0.2], [0.5, 0.0]])
    exact = pressure.additive_pressure(golden_mean, potential).value
    errors = [
        abs(pressure.cylinder_pressure_level(golden_mean, potential, n).value - exact)
        for n in (4, 8, 16)
    ]
    assert errors[-1] < errors[0]
    assert errors[-1] < 0.1


def test_potential_shape_must_match(golden_mean: SubshiftSpec):
    with pytest.raises(DomainError):
        pressure.additive_pressure(golden_mean, EdgePotential.constant(0.0, 3))


def test_determinant_pressure_closed_form(full_shift: SubshiftSpec):
    cocycle = MatrixCocycle.from_matrices([[[2.0]], [[4.0]]])
    for coefficient in (0.0, 0.5, 1.3):
        value = pressure.determinant_pressure(full_shift, cocycle, coefficient).value
        assert value == pytest.approx(math.log(2**-coefficient + 4**-coefficient), abs=1e-12)


def test_block_pressure_of_scalar_cocycle(full_shift: SubshiftSpec):
    scalar = MatrixCocycle.scalar(4.0)
    for k in range(3):
        for which in (NORM, CONORM):
            estimate = pressure.block_pressure(full_shift, scalar, 0.5, k, which)
            assert estimate.value == pytest.approx(0.0, abs=1e-12)
            assert estimate.level_n == 2**k


def test_block_pressure_of_rotated_cocycle(full_shift: SubshiftSpec, rotated: MatrixCocycle):
    level_zero = pressure.BlockPressure(full_shift, rotated, 0)
    assert level_zero(1.0 / 3.0, NORM) == pytest.approx(0.0, abs=1e-12)
    assert level_zero(1.0, CONORM) == pytest.approx(0.0, abs=1e-12)

    level_one = pressure.BlockPressure(full_shift, rotated, 1)
    assert level_one.defect == pytest.approx(0.0, abs=1e-12)
    assert level_one(0.5, NORM) == pytest.approx(0.0, abs=1e-12)
    assert level_one(0.5, CONORM) == pytest.approx(0.0, abs=1e-12)


def test_block_pressure_is_ordered_and_decreasing(
    full_shift: SubshiftSpec, diagonal: MatrixCocycle
):
    grid = np.linspace(0.0, 2.0, 50)
    for k in range(4):
        block = pressure.BlockPressure(full_shift, diagonal, k)
        norm = np.array([block(float(c), NORM) for c in grid])
        conorm = np.array([block(float(c), CONORM) for c in grid])
        assert np.all(np.diff(norm) < 0)
        assert np.all(np.diff(conorm) < 0)
        assert np.all(norm <= conorm + 1e-12)


def test_block_levels_tighten(full_shift: SubshiftSpec, diagonal: MatrixCocycle):
    norms = [pressure.BlockPressure(full_shift, diagonal, k)(0.8, NORM) for k in range(4)]
    conorms = [pressure.BlockPressure(full_shift, diagonal, k)(0.8, CONORM) for k in range(4)]
    assert all(b >= a - 1e-12 for a, b in zip(norms, norms[1:]))
    assert all(b <= a + 1e-12 for a, b in zip(conorms, conorms[1:]))


def test_block_pressure_budget(full_shift: SubshiftSpec, diagonal: MatrixCocycle):
    assert pressure.max_block_level(2) == 4
    assert pressure.max_block_level(3) == 3
    with pytest.raises(ResourceError) as info:
        pressure.BlockPressure(full_shift, diagonal, 5)
    assert "largest feasible k is 4" in str(info.value)


def test_block_pressure_rejects_negative_coefficients(full_shift: SubshiftSpec):
    with pytest.raises(DomainError):
        pressure.block_pressure(full_shift, MatrixCocycle.scalar(2.0), -0.1, 0)


def test_block_pressure_needs_matching_alphabet(golden_mean: SubshiftSpec):
    with pytest.raises(DomainError):
        pressure.BlockPressure(golden_mean, MatrixCocycle.scalar(2.0, symbols=3), 0)


def test_pressure_curve_rows(full_shift: SubshiftSpec, rotated: MatrixCocycle):
    rows = pressure.pressure_curve(full_shift, rotated, [0.0, 0.5, 1.0], 1, CONORM)
    assert [row["t"] for row in rows] == [0.0, 0.5, 1.0]
    assert {row["level"] for row in rows} == {2}
    assert rows[0]["scheme"] == "block-2^k:conorm"
    assert rows[0]["value"] == pytest.approx(math.log(2))


def test_conorm_profile_is_subadditive(full_shift: SubshiftSpec, diagonal: MatrixCocycle):
    potential = SingularPotential.conorm(diagonal, 0.7)
    assert potential.is_subadditive
    profile = pressure.fekete_profile(full_shift, potential, 8)
    for m in range(1, 5):
        for n in range(1, 9 - m):
            assert profile[m + n - 1] <= profile[m - 1] + profile[n - 1] + 1e-9


def test_norm_profile_is_superadditive(full_shift: SubshiftSpec, diagonal: MatrixCocycle):
    potential = SingularPotential.norm(diagonal, 0.7)
    assert not potential.is_subadditive
    profile = pressure.fekete_profile(full_shift, potential, 8)
    for m in range(1, 5):
        for n in range(1, 9 - m):
            assert profile[m + n - 1] >= profile[m - 1] + profile[n - 1] - 1e-9


def test_rotated_cylinder_conorm_example(full_shift: SubshiftSpec, rotated: MatrixCocycle):
    estimate = pressure.cylinder_pressure_level(
        full_shift, SingularPotential.conorm(rotated, 1.0), 2
    )
    assert estimate.value == pytest.approx(-math.log(2), abs=1e-12)
    assert estimate.value == pytest.approx(-0.693147, abs=1e-6)


def test_cylinder_error_decays_like_one_over_n(golden_mean: SubshiftSpec):
    potential = EdgePotential(values=[[0.3, -0.2], [0.5, 0.0]])
    exact = pressure.additive_pressure(golden_mean, potential).value
    levels = np.arange(4, 21)
    values = [
        pressure.cylinder_pressure_level(golden_mean, potential, int(n)).value for n in levels
    ]
    errors = np.abs(np.array(values) - exact)
    scaled = errors * levels
    fitted = float(np.median(scaled))
    assert fitted < 5.0
    assert np.all(errors <= 1.5 * fitted / levels + 1e-9)
    # n * error settles on a constant
    assert abs(scaled[-1] - scaled[-2]) < 1e-3


def test_cylinder_and_block_schemes_agree(full_shift: SubshiftSpec, diagonal: MatrixCocycle):
    for which, family in ((CONORM, SingularPotential.conorm), (NORM, SingularPotential.norm)):
        block = pressure.BlockPressure(full_shift, diagonal, 2)(0.8, which)
        cylinder = pressure.cylinder_pressure_level(full_shift, family(diagonal, 0.8), 4).value
        assert block == pytest.approx(cylinder, abs=1e-10)


def test_variational_gap_for_zero_potential(golden_mean: SubshiftSpec):
    result = pressure.variational_gap(golden_mean, EdgePotential.constant(0.0, 2), seed=1)
    entropy = symbolic.topological_entropy(golden_mean)
    assert result.best_value == pytest.approx(entropy, abs=1e-6)
    assert 0.0 <= result.gap + 1e-9 <= 1e-6 + 1e-9


def test_variational_gap_for_bernoulli_equilibrium(full_shift: SubshiftSpec):
    s = (math.sqrt(5) - 1) / 2
    # -t log 2 and -t log 4 at the root t of 2^-t + 4^-t = 1
    row = [math.log(s), 2 * math.log(s)]
    result = pressure.variational_gap(full_shift, EdgePotential(values=[row, row]), seed=1)
    assert result.pressure_ref == pytest.approx(0.0, abs=1e-10)
    assert result.gap <= 1e-6
    for probabilities in result.argmax.stochastic:
        assert probabilities == pytest.approx([s, s**2], abs=1e-3)


def test_variational_principle_for_edge_potentials(
    full_shift: SubshiftSpec, golden_mean: SubshiftSpec
):
    potential = EdgePotential(values=[[0.3, -0.2], [0.5, 0.1]])
    for spec in (full_shift, golden_mean):
        result = pressure.variational_gap(spec, potential, seed=7, restarts=4)
        assert 0.0 <= result.gap + 1e-9
        assert result.gap <= 1e-4
        assert result.gibbs_value == pytest.approx(result.pressure_ref, abs=1e-9)
        assert result.argmax.supported_on(spec)


def test_random_measures_respect_pressure(golden_mean: SubshiftSpec, rng: np.random.Generator):
    potential = EdgePotential(values=[[0.3, -0.2], [0.5, 0.1]])
    reference = pressure.additive_pressure(golden_mean, potential).value
    for _ in range(200):
        measure = symbolic.random_markov_measure(golden_mean, rng)
        assert pressure.measure_value(golden_mean, potential, measure) <= reference + 1e-9


def test_measure_must_live_on_the_coding(full_shift: SubshiftSpec, golden_mean: SubshiftSpec):
    measure = symbolic.parry_measure(full_shift)
    with pytest.raises(DomainError):
        pressure.measure_value(golden_mean, EdgePotential.constant(0.0, 2), measure)


def test_variational_check_for_singular_potentials(
    full_shift: SubshiftSpec, diagonal: MatrixCocycle
):
    potential = SingularPotential.conorm(diagonal, 0.5)
    result = pressure.variational_gap(full_shift, potential, memory=2, depth=3, restarts=2)
    assert result.gap >= -pressure.VARIATIONAL_SLACK
    assert result.gibbs_value is None
    assert result.memory == 2


def test_variational_restarts_are_reproducible(full_shift: SubshiftSpec):
    potential = EdgePotential(values=[[1.0, 0.0], [0.0, 0.5]])
    first = pressure.variational_gap(full_shift, potential, seed=3, restarts=3)
    again = pressure.variational_gap(full_shift, potential, seed=3, restarts=3, workers=3)
    assert first.best_value == again.best_value
