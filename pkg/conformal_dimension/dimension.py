"""Bowen roots, the norm/co-norm bracket sequences and dimension reports.

The stable bundle is handled by the unstable machinery applied to the inverse map:
its coding is transposed and its cocycle inverted, which turns a contraction into an
expansion along reversed words.
"""
import concurrent.futures
import functools
import logging
import math
import typing as t

import numpy as np

from . import cocycle as cocycle_ops
from . import constants, pressure, symbolic
from .errors import ConformalDimensionError, DomainError, NumericError
from .models import (
    BowenRoot,
    BracketRow,
    BundleReport,
    CocycleModel,
    DimensionReport,
    EdgePotential,
    HorseshoeModel,
    MatrixCocycle,
    SubshiftSpec,
    SweepPoint,
    SweepResult,
    check_monotone,
)
from .models.dimension import MONOTONE_SLACK

__all__ = (
    "bowen_root",
    "unstable_view",
    "bracket_sequence",
    "determinant_root",
    "bundle_report",
    "default_k_max",
    "dimension_report",
    "dimension_ratio",
    "parameter_grid",
    "continuity_sweep",
)

LOGGER = logging.getLogger(__name__)

MODULE = "dimension"

NOT_AVERAGE_CONFORMAL = "not average conformal"
UNCERTIFIED = "uncertified"

PressureFunction = t.Callable[[float], float]
Model = t.Union[HorseshoeModel, CocycleModel]

# Brackets are widened at most this many times before giving up.
MAX_EXPANSION = 2**10


def _check_decreasing(pressure_fn: PressureFunction, lo: float, hi: float) -> t.Tuple[float, float]:
    samples = [pressure_fn(float(point)) for point in np.linspace(lo, hi, 5)]
    if any(later >= earlier for earlier, later in zip(samples, samples[1:])):
        raise DomainError(
            MODULE,
            f"pressure is not strictly decreasing on [{lo:.6g}, {hi:.6g}]: "
            + ", ".join(f"{sample:.6g}" for sample in samples),
        )
    return samples[0], samples[-1]


def bowen_root(
    pressure_fn: PressureFunction,
    bracket_hint: t.Tuple[float, float] = (0.0, 2.0),
    tol: t.Optional[float] = None,
    *,
    level: int = 0,
    scheme: str = "",
) -> BowenRoot:
    """Bisect for the zero of a strictly decreasing pressure function.

    The hint is widened geometrically (up to `2^10` times its width) until it
    straddles zero.
    """
    tol = constants.SolverConfig.ROOT_TOL if tol is None else tol
    lo, hi = map(float, bracket_hint)
    if not 0.0 <= lo < hi:
        raise DomainError(MODULE, f"bracket hint must satisfy 0 <= lo < hi, got ({lo}, {hi})")

    p_lo, p_hi = _check_decreasing(pressure_fn, lo, hi)
    width, growth = hi - lo, 1
    while p_hi > 0.0:
        if growth >= MAX_EXPANSION:
            raise DomainError(
                MODULE, f"potential not coercive: pressure is still {p_hi:.6g} at t = {hi:.6g}"
            )
        growth *= 2
        hi = lo + width * growth
        p_hi = pressure_fn(hi)
    if p_lo < 0.0 and lo > 0.0:
        lo, p_lo = 0.0, pressure_fn(0.0)
    if p_lo < 0.0:
        raise DomainError(MODULE, f"potential not coercive: pressure is {p_lo:.6g} at t = 0")
    if growth > 1:
        _check_decreasing(pressure_fn, lo, hi)

    iterations = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        p_mid = pressure_fn(mid)
        iterations += 1
        if p_mid > 0.0:
            lo, p_lo = mid, p_mid
        elif p_mid < 0.0:
            hi, p_hi = mid, p_mid
        else:
            lo = hi = mid
            p_lo = p_hi = 0.0

    value = 0.5 * (lo + hi)
    LOGGER.debug(f"Bowen root {value:.12g} after {iterations} bisection steps ({scheme})")
    return BowenRoot(
        value=value,
        bracket=(lo, hi),
        residual=abs(pressure_fn(value)),
        pressure_lo=p_lo,
        pressure_hi=p_hi,
        level=level,
        scheme=scheme,
    )


def unstable_view(
    spec: SubshiftSpec, cocycle: MatrixCocycle
) -> t.Tuple[SubshiftSpec, MatrixCocycle]:
    """The coding and cocycle on which pressure decreases in `t`."""
    if cocycle.orientation is constants.Orientation.UNSTABLE:
        return spec, cocycle
    return spec.transposed(), cocycle.inverse()


def _root_hint(cocycle: MatrixCocycle) -> t.Tuple[float, float]:
    return 0.0, 2.0 * cocycle.bundle_dim


def bracket_sequence(
    spec: SubshiftSpec,
    cocycle: MatrixCocycle,
    k_max: int,
    tol: t.Optional[float] = None,
) -> t.Tuple[BracketRow, ...]:
    """Roots of the level-`k` block pressures with norm (lower) and co-norm (upper)
    potentials, for `k = 0 .. k_max`.
    """
    tol = constants.SolverConfig.ROOT_TOL if tol is None else tol
    spec, cocycle = unstable_view(spec, cocycle)
    symbolic.require_irreducible(spec, MODULE)

    rows: t.List[BracketRow] = []
    for k in range(k_max + 1):
        block = pressure.BlockPressure(spec, cocycle, k)
        lower, upper = (
            bowen_root(
                functools.partial(block, which=which),
                _root_hint(cocycle),
                tol,
                level=block.length,
                scheme=f"{constants.Scheme.BLOCK.value}:{which.value}",
            )
            for which in (constants.SingularValue.NORM, constants.SingularValue.CONORM)
        )
        rows.append(BracketRow(k=k, lower=lower.value, upper=upper.value))
        LOGGER.debug(f"k={k}: bracket [{lower.value:.12g}, {upper.value:.12g}]")

    try:
        check_monotone(rows, slack=2 * tol + MONOTONE_SLACK)
    except ValueError as e:
        raise NumericError(MODULE, str(e)) from e
    return tuple(rows)


def determinant_root(
    spec: SubshiftSpec, cocycle: MatrixCocycle, tol: t.Optional[float] = None
) -> BowenRoot:
    """The zero of `t -> P(-t log |det|^(1/d))`."""
    spec, cocycle = unstable_view(spec, cocycle)
    return bowen_root(
        lambda coefficient: pressure.determinant_pressure(spec, cocycle, coefficient).value,
        _root_hint(cocycle),
        tol,
        level=1,
        scheme=constants.Scheme.TRANSFER_MATRIX.value,
    )


def bundle_report(
    spec: SubshiftSpec,
    cocycle: MatrixCocycle,
    k_max: int,
    tol: t.Optional[float] = None,
) -> BundleReport:
    view_spec, view_cocycle = unstable_view(spec, cocycle)
    defect_level = 2**k_max
    defect = cocycle_ops.conformality_defect(view_cocycle, view_spec, defect_level)
    return BundleReport(
        root=determinant_root(spec, cocycle, tol),
        brackets=bracket_sequence(spec, cocycle, k_max, tol),
        defect=defect,
        defect_level=defect_level,
        expansion_certified=cocycle_ops.expansion_certificate(view_cocycle, view_spec),
        average_conformal=defect <= constants.SolverConfig.DEFECT_TOLERANCE,
    )


def _bundles(model: Model) -> t.Tuple[SubshiftSpec, MatrixCocycle, MatrixCocycle]:
    if isinstance(model, HorseshoeModel):
        return model.coding, model.unstable_cocycle(), model.stable_cocycle()
    return model.coding, model.unstable, model.stable


def default_k_max(q: int) -> int:
    return min(constants.SolverConfig.K_MAX, pressure.max_block_level(q))


def dimension_report(
    model: Model,
    k_max: t.Optional[int] = None,
    tol: t.Optional[float] = None,
    *,
    seed: t.Optional[int] = None,
    box_count_ref: t.Optional[float] = None,
) -> DimensionReport:
    """`dim = t_u + t_s` with the bracket tables and defect certificates of both bundles.

    Models whose certificates fail still get a report; it is flagged instead.
    """
    coding, unstable, stable = _bundles(model)
    symbolic.require_irreducible(coding, MODULE)
    k_max = default_k_max(coding.alphabet_size) if k_max is None else k_max
    tol = constants.SolverConfig.ROOT_TOL if tol is None else tol

    unstable_report = bundle_report(coding, unstable, k_max, tol)
    stable_report = bundle_report(coding, stable, k_max, tol)

    flags: t.List[str] = []
    bundles = (("unstable", unstable_report), ("stable", stable_report))
    for name, report in bundles:
        if not report.average_conformal:
            LOGGER.warning(
                f"The {name} bundle has conformality defect {report.defect:.6g} at level "
                f"{report.defect_level}"
            )
        if not report.expansion_certified:
            LOGGER.warning(f"The {name} bundle has no expansion certificate")
    if not all(report.average_conformal for _, report in bundles):
        flags.append(NOT_AVERAGE_CONFORMAL)
    certified = all(
        report.average_conformal and report.expansion_certified for _, report in bundles
    )
    if not certified:
        flags.append(UNCERTIFIED)

    dim_total = unstable_report.root.value + stable_report.root.value
    report = DimensionReport(
        unstable=unstable_report,
        stable=stable_report,
        dim_total=dim_total,
        box_count_ref=box_count_ref,
        certified=certified,
        flags=flags,
        k_max=k_max,
        tol=tol,
        seed=seed,
    )
    lo, hi = report.dim_interval or (dim_total, dim_total)
    LOGGER.info(
        f"dim = {unstable_report.root.value:.12g} + {stable_report.root.value:.12g} "
        f"= {dim_total:.12g} in [{lo:.6g}, {hi:.6g}] "
        f"(k_max={k_max}{', ' + ', '.join(flags) if flags else ''})"
    )
    return report


def dimension_ratio(
    spec: SubshiftSpec,
    cocycle: MatrixCocycle,
    memory: int = 1,
    *,
    tol: float = 1e-10,
    seed: int = 0,
    restarts: int = 4,
    max_rounds: int = 50,
) -> float:
    """`sup h_mu / int log |det|^(1/d) dmu` over memory-`m` Markov measures.

    Each round maximizes `h_mu - s * int log |det|^(1/d) dmu` and moves `s` to the
    ratio attained by the maximizer, which increases `s` towards the supremum.
    """
    spec, cocycle = unstable_view(spec, cocycle)
    log_root_det = cocycle.log_abs_dets / cocycle.bundle_dim
    if np.any(log_root_det <= 0.0):
        raise DomainError(MODULE, "every generator needs |det| > 1 for the entropy ratio")

    _, states = symbolic.higher_block(spec, memory)
    block_integrand = np.repeat(log_root_det[states[:, -1]][:, None], states.shape[0], axis=1)

    ratio = 0.0
    for round_index in range(max_rounds):
        result = pressure.variational_gap(
            spec,
            EdgePotential.from_symbols(-ratio * log_root_det),
            memory,
            seed=seed,
            restarts=restarts,
        )
        entropy = symbolic.markov_entropy(result.argmax)
        exponent = symbolic.integrate_edge_function(result.argmax, block_integrand)
        updated = entropy / exponent
        LOGGER.debug(f"Entropy ratio round {round_index}: {updated:.12g}")
        if abs(updated - ratio) <= tol:
            return updated
        ratio = updated

    LOGGER.warning(f"Entropy ratio still moving after {max_rounds} rounds; returning {ratio:.12g}")
    return ratio


def parameter_grid(start: float, stop: float, step: float) -> t.Tuple[float, ...]:
    """`start, start + step, ...` up to and including `stop`, rounded against drift."""
    if step <= 0.0 or stop < start:
        raise DomainError(MODULE, f"empty parameter grid [{start}, {stop}] with step {step}")
    count = math.floor((stop - start) / step + 1e-9) + 1
    return tuple(round(start + index * step, 12) for index in range(count))


def continuity_sweep(
    family: t.Callable[[float], Model],
    grid: t.Sequence[float],
    k_max: t.Optional[int] = None,
    tol: t.Optional[float] = None,
    *,
    threads: int = 1,
) -> SweepResult:
    """Dimension along a parameter grid; failing points are recorded and skipped."""

    def evaluate(parameter: float) -> SweepPoint:
        try:
            report = dimension_report(family(parameter), k_max, tol)
        except (ConformalDimensionError, ValueError) as e:
            LOGGER.warning(f"Sweep point {parameter:.12g} failed: {e}")
            return SweepPoint(parameter=parameter, error=str(e))
        return SweepPoint(
            parameter=parameter, dim_total=report.dim_total, certified=report.certified
        )

    ordered = sorted(float(parameter) for parameter in grid)
    with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
        points = list(pool.map(evaluate, ordered))

    values = np.array([point.dim_total for point in points if point.dim_total is not None])
    steps = np.diff(values)
    result = SweepResult(
        points=points,
        max_jump=float(np.abs(steps).max()) if steps.size else 0.0,
        monotone_decreasing=bool(np.all(steps <= 0.0)),
        monotone_increasing=bool(np.all(steps >= 0.0)),
    )
    LOGGER.info(
        f"Swept {len(points)} points ({len(points) - len(result.succeeded)} failed), "
        f"max jump {result.max_jump:.6g}"
    )
    return result
