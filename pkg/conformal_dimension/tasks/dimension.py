import logging
import typing as t

from .. import dimension, utilities
from ..models import DimensionReport, HorseshoeModel, SweepResult
from ..runner import Runner, TaskOutcome

__all__ = ("setup", "teardown", "plugin")

LOGGER = logging.getLogger(__name__)

plugin = utilities.Plugin.with_metadata(name="dimension", category="dimension")

BRACKET_HEADER = ("bundle", "k", "level", "lower", "upper", "gap")
SWEEP_HEADER = ("parameter", "dim_total", "certified", "error")


def bracket_rows(report: DimensionReport) -> t.List[t.Tuple[t.Any, ...]]:
    return [
        (name, row.k, 2**row.k, row.lower, row.upper, row.gap)
        for name, bundle in (("unstable", report.unstable), ("stable", report.stable))
        for row in bundle.brackets
    ]


def sweep_rows(sweep: SweepResult) -> t.List[t.Tuple[t.Any, ...]]:
    return [
        (point.parameter, point.dim_total, point.certified, point.error) for point in sweep.points
    ]


@plugin.task("dim")
def dim(runner: Runner) -> TaskOutcome:
    """Dimension of the hyperbolic set with the bracket tables of both bundles."""
    config = runner.config
    report = dimension.dimension_report(runner.model(), config.k_max, config.tol, seed=config.seed)
    return TaskOutcome(
        result={"dimension": report},
        files=[runner.write_csv("brackets.csv", BRACKET_HEADER, bracket_rows(report))],
    )


@plugin.task("sweep")
def sweep(runner: Runner) -> TaskOutcome:
    """Dimension along a grid of one horseshoe parameter, with the largest adjacent jump."""
    config = runner.config
    assert config.sweep_min is not None and config.sweep_max is not None
    assert config.sweep_step is not None

    def family(parameter: float) -> HorseshoeModel:
        return runner.horseshoe(**{config.sweep_parameter: parameter})

    grid = dimension.parameter_grid(config.sweep_min, config.sweep_max, config.sweep_step)
    result = dimension.continuity_sweep(
        family, grid, config.k_max, config.tol, threads=config.threads
    )
    return TaskOutcome(
        result={
            "parameter": config.sweep_parameter,
            "max_jump": result.max_jump,
            "monotone_decreasing": result.monotone_decreasing,
            "monotone_increasing": result.monotone_increasing,
            "failed": len(result.points) - len(result.succeeded),
        },
        files=[runner.write_csv("sweep.csv", SWEEP_HEADER, sweep_rows(result))],
    )


setup, teardown = plugin.create_extension_handlers()
