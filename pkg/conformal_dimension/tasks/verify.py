"""The acceptance suite: closed-form oracles and property checks, one row per criterion."""
import logging
import math
import time
import typing as t

import numpy as np

from .. import cocycle as cocycle_ops
from .. import constants, dimension, geometry, pressure, symbolic, utilities
from ..errors import ConformalDimensionError, VerificationError
from ..models import (
    CocycleModel,
    EdgePotential,
    HorseshoeModel,
    IntArray,
    MatrixCocycle,
    SubshiftSpec,
    Word,
)
from ..runner import Runner, TaskOutcome

__all__ = ("setup", "teardown", "plugin", "CRITERIA", "Check")

LOGGER = logging.getLogger(__name__)

plugin = utilities.Plugin.with_metadata(name="verify", category="cli")

MODULE = "verify"
EXPANDING_DRAWS = 100

GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0
ROTATED = np.array([[0.0, -8.0], [2.0, 0.0]])  # rotation by 90 degrees after diag(2, 8)


class Check(t.NamedTuple):
    passed: bool
    measured: t.Any
    expected: t.Any


Criterion = t.Callable[[Runner], Check]


def _rotated_cocycle() -> MatrixCocycle:
    return MatrixCocycle.from_matrices([ROTATED, ROTATED])


def _diagonal_cocycle() -> MatrixCocycle:
    return MatrixCocycle.from_matrices([np.diag([3.0, 4.0]), np.diag([4.0, 3.0])])


def _k_max(runner: Runner, q: int = 2) -> int:
    configured = runner.config.k_max
    return dimension.default_k_max(q) if configured is None else configured


def closed_form_roots(runner: Runner) -> Check:
    full = SubshiftSpec.full_shift(2)
    tol = runner.config.tol
    constant = dimension.bracket_sequence(full, MatrixCocycle.scalar(4.0), 0, tol)[0]
    mixed = dimension.determinant_root(full, MatrixCocycle.from_matrices([[[2.0]], [[4.0]]]), tol)
    expected = math.log(GOLDEN_RATIO) / math.log(2.0)
    errors = (abs(constant.lower - 0.5), abs(constant.upper - 0.5), abs(mixed.value - expected))
    return Check(
        errors[0] <= 1e-9 and errors[1] <= 1e-9 and errors[2] <= 1e-8,
        f"{constant.lower:.12g}, {mixed.value:.12g}",
        f"0.5, {expected:.12g}",
    )


def entropy_oracles(runner: Runner) -> Check:
    full = symbolic.topological_entropy(SubshiftSpec.full_shift(2))
    golden = symbolic.topological_entropy(SubshiftSpec.golden_mean())
    expected = (math.log(2.0), math.log(GOLDEN_RATIO))
    return Check(
        abs(full - expected[0]) <= 1e-10 and abs(golden - expected[1]) <= 1e-10,
        f"{full:.12g}, {golden:.12g}",
        f"{expected[0]:.12g}, {expected[1]:.12g}",
    )


def average_conformal_brackets(runner: Runner) -> Check:
    full = SubshiftSpec.full_shift(2)
    rotated = _rotated_cocycle()
    rows = dimension.bracket_sequence(full, rotated, _k_max(runner), runner.config.tol)
    first_ok = abs(rows[0].lower - 1.0 / 3.0) <= 1e-8 and abs(rows[0].upper - 1.0) <= 1e-8
    later_ok = all(
        abs(row.lower - 0.5) <= 1e-8 and abs(row.upper - 0.5) <= 1e-8 for row in rows[1:]
    )
    defects = [cocycle_ops.conformality_defect(rotated, full, 2 * k) for k in range(1, 7)]
    return Check(
        first_ok and later_ok and max(defects) <= 1e-12,
        "; ".join(f"k={row.k}: [{row.lower:.10g}, {row.upper:.10g}]" for row in rows)
        + f"; max defect {max(defects):.3g}",
        "k=0: [1/3, 1]; k>=1: [0.5, 0.5]; defect 0",
    )


def non_conformal_detector(runner: Runner) -> Check:
    full = SubshiftSpec.full_shift(2)
    diagonal = _diagonal_cocycle()
    threshold = math.log(4.0 / 3.0) - 1e-9
    defects = [cocycle_ops.conformality_defect(diagonal, full, n) for n in range(1, 13)]
    model = CocycleModel(
        coding=full,
        unstable=diagonal,
        stable=MatrixCocycle.scalar(0.25, orientation=constants.Orientation.STABLE),
    )
    report = dimension.dimension_report(model, k_max=4, tol=runner.config.tol)
    gap = report.unstable.brackets[-1].gap
    return Check(
        min(defects) >= threshold
        and gap > 0.05
        and dimension.NOT_AVERAGE_CONFORMAL in report.flags,
        f"min defect {min(defects):.10g}, gap {gap:.6g}, flags {list(report.flags)}",
        f"defect >= {threshold:.10g}, gap > 0.05, flagged",
    )


def dimension_formula(runner: Runner) -> Check:
    assert runner.config.seed is not None
    model = HorseshoeModel.linear(3.0, 0.2)
    expected_u, expected_s = math.log(2.0) / math.log(3.0), math.log(2.0) / math.log(5.0)
    report = dimension.dimension_report(model, _k_max(runner), runner.config.tol)
    cloud = geometry.sample_invariant_set(model, 9, runner.config.seed)
    whole = geometry.box_count(cloud, geometry.dyadic_scales(2, 12), threads=runner.config.threads)

    itineraries = [Word(symbols=symbols) for symbols in ((0, 0), (0, 1), (1, 1))]
    unstable = [
        geometry.box_count(geometry.sample_unstable_slice(model, past, 18)) for past in itineraries
    ]
    stable = [
        geometry.box_count(geometry.sample_stable_slice(model, future, 18))
        for future in itineraries
    ]
    slopes = [result.slope for result in unstable]
    spread = max(slopes) - min(slopes)
    stderr = max(result.stderr for result in unstable)

    passed = (
        abs(report.dim_total - (expected_u + expected_s)) <= 1e-8
        and cloud.size >= 10**5
        and len(whole.counts) >= 6
        and abs(whole.slope - report.dim_total) <= 0.05
        and abs(unstable[0].slope - expected_u) <= 0.03
        and abs(stable[0].slope - expected_s) <= 0.03
        and spread <= 2 * stderr + 1e-12
    )
    return Check(
        passed,
        f"dim {report.dim_total:.12g}, box {whole.slope:.4f}, slices {unstable[0].slope:.4f} / "
        f"{stable[0].slope:.4f}, spread {spread:.3g}",
        f"dim {expected_u + expected_s:.12g}, slices {expected_u:.4f} / {expected_s:.4f}",
    )


def variational_principle(runner: Runner) -> Check:
    rng = np.random.default_rng(runner.config.seed)
    values = rng.normal(size=(2, 2))
    potential = EdgePotential(values=values)
    worst_gap, worst_excess = 0.0, -math.inf
    for spec in (SubshiftSpec.full_shift(2), SubshiftSpec.golden_mean()):
        result = pressure.variational_gap(spec, potential, 1, seed=runner.config.seed or 0)
        worst_gap = max(worst_gap, abs(result.gap))
        reference = pressure.additive_pressure(spec, potential).value
        for _ in range(500):
            measure = symbolic.random_markov_measure(spec, rng)
            excess = pressure.measure_value(spec, potential, measure) - reference
            worst_excess = max(worst_excess, excess)
    return Check(
        worst_gap <= 1e-4 and worst_excess <= 1e-9,
        f"gap {worst_gap:.3g}, max h + Phi - P {worst_excess:.3g}",
        "gap <= 1e-4, h + Phi - P <= 1e-9",
    )


def continuity(runner: Runner) -> Check:
    grid = dimension.parameter_grid(3.0, 5.0, 0.05)
    result = dimension.continuity_sweep(
        lambda mu: HorseshoeModel.linear(mu, 0.2),
        grid,
        _k_max(runner),
        runner.config.tol,
        threads=runner.config.threads,
    )
    return Check(
        result.max_jump <= 0.02
        and result.monotone_decreasing
        and len(result.succeeded) == len(grid),
        f"max jump {result.max_jump:.6g}, {len(result.succeeded)}/{len(grid)} points",
        "max jump <= 0.02, monotone decreasing",
    )


def holder_conjugacy(runner: Runner) -> Check:
    assert runner.config.seed is not None
    seed, size = runner.config.seed, runner.config.sample_size
    base = HorseshoeModel.linear(3.0, 0.2)
    perturbed = geometry.holder_exponent_fit(base, HorseshoeModel.linear(3.3, 0.2), 12, size, seed)
    identical = geometry.holder_exponent_fit(base, base, 12, size, seed)
    expected = math.log(3.0) / math.log(3.3)
    return Check(
        abs(perturbed.r_lower - expected) <= 0.03 and abs(identical.r_lower - 1.0) <= 0.01,
        f"{perturbed.r_lower:.6g}, {identical.r_lower:.6g}",
        f"{expected:.6g}, 1",
    )


def _random_words(rng: np.random.Generator, count: int, length: int) -> IntArray:
    return rng.integers(0, 2, size=(count, length))


def _expanding_cocycle(rng: np.random.Generator, spec: SubshiftSpec) -> MatrixCocycle:
    """A random perturbation of `3 I`, redrawn until every generator expands.

    Block pressures of an expanding cocycle are strictly decreasing in `t`.
    """
    for _ in range(EXPANDING_DRAWS):
        try:
            candidate = MatrixCocycle.from_matrices(rng.normal(size=(2, 2, 2)) + 3.0 * np.eye(2))
        except ValueError:
            continue
        if cocycle_ops.expansion_certificate(candidate, spec):
            return candidate
    raise VerificationError(MODULE, f"no expanding cocycle in {EXPANDING_DRAWS} random draws")


def property_suites(runner: Runner) -> Check:
    rng = np.random.default_rng(runner.config.seed)
    full = SubshiftSpec.full_shift(2)
    cocycles = (
        _rotated_cocycle(),
        _diagonal_cocycle(),
        _expanding_cocycle(rng, full),
    )

    worst_additivity, worst_sandwich = 0.0, 0.0
    pairs = 0
    for cocycle in cocycles:
        for length_u, length_v in ((1, 1), (2, 3), (4, 4), (5, 8)):
            u = _random_words(rng, 10**4 // 12 + 1, length_u)
            v = _random_words(rng, u.shape[0], length_v)
            stats_u = cocycle_ops.batch_product_stats(cocycle, u)
            stats_v = cocycle_ops.batch_product_stats(cocycle, v)
            stats_uv = cocycle_ops.batch_product_stats(cocycle, np.hstack((u, v)))
            sub = stats_u.log_norm + stats_v.log_norm - stats_uv.log_norm
            sup = stats_uv.log_conorm - stats_u.log_conorm - stats_v.log_conorm
            worst_additivity = min(worst_additivity, float(sub.min()), float(sup.min()))
            pairs += u.shape[0]

            for stats in (stats_u, stats_v, stats_uv):
                root = stats.log_abs_det / cocycle.bundle_dim
                worst_sandwich = min(
                    worst_sandwich,
                    float((root - stats.log_conorm).min()),
                    float((stats.log_norm - root).min()),
                )

    grid = np.linspace(0.0, 2.0, 50)
    decreasing, ordered = True, True
    for cocycle in cocycles:
        for k in range(4):
            block = pressure.BlockPressure(full, cocycle, k)
            norm = np.array([block(float(c), constants.SingularValue.NORM) for c in grid])
            conorm = np.array([block(float(c), constants.SingularValue.CONORM) for c in grid])
            decreasing &= bool(np.all(np.diff(norm) < 0) and np.all(np.diff(conorm) < 0))
            ordered &= bool(np.all(norm <= conorm + 1e-12))

    return Check(
        worst_additivity >= -1e-10 and worst_sandwich >= -1e-9 and decreasing and ordered,
        f"{pairs} pairs, additivity slack {worst_additivity:.3g}, sandwich slack "
        f"{worst_sandwich:.3g}, decreasing {decreasing}, norm <= conorm {ordered}",
        "slack >= -1e-10, sandwich >= -1e-9, decreasing, ordered",
    )


CRITERIA: t.Tuple[t.Tuple[str, Criterion], ...] = (
    ("closed-form-roots", closed_form_roots),
    ("entropy-oracles", entropy_oracles),
    ("average-conformal-brackets", average_conformal_brackets),
    ("non-conformal-detector", non_conformal_detector),
    ("dimension-formula", dimension_formula),
    ("variational-principle", variational_principle),
    ("continuity", continuity),
    ("holder-conjugacy", holder_conjugacy),
    ("property-suites", property_suites),
)


@plugin.task("verify")
def verify(runner: Runner) -> TaskOutcome:
    """Run every acceptance criterion and write one row per criterion to `verify.csv`.

    Timings go to the report and the log only, so equal configurations give equal CSVs.
    """
    rows: t.List[t.Tuple[t.Any, ...]] = []
    seconds: t.Dict[str, float] = {}
    for name, criterion in CRITERIA:
        started = time.perf_counter()
        try:
            check = criterion(runner)
        except (ConformalDimensionError, ValueError) as e:
            LOGGER.error(f"Criterion {name} raised: {e}")
            check = Check(False, f"error: {e}", "")
        seconds[name] = round(time.perf_counter() - started, 3)

        log = LOGGER.info if check.passed else LOGGER.error
        verdict = "passed" if check.passed else "FAILED"
        log(f"{name}: {verdict} in {seconds[name]:.2f}s ({check.measured})")
        rows.append((name, check.passed, check.measured, check.expected))

    failed = [row[0] for row in rows if not row[1]]
    header = ("criterion", "passed", "measured", "expected")
    return TaskOutcome(
        result={"passed": len(rows) - len(failed), "failed": failed, "seconds": seconds},
        files=[runner.write_csv("verify.csv", header, rows)],
        status=constants.ExitStatus.VERIFICATION if failed else constants.ExitStatus.OK,
    )


setup, teardown = plugin.create_extension_handlers()
