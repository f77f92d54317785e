import logging
import typing as t

from .. import cocycle as cocycle_ops
from .. import dimension, geometry, serialization, symbolic, utilities
from ..models import BoxCountResult, Word
from ..runner import Runner, TaskOutcome

__all__ = ("setup", "teardown", "plugin")

LOGGER = logging.getLogger(__name__)

plugin = utilities.Plugin.with_metadata(name="geometry", category="geometry")

# Slices are sampled over this many distinct itineraries.
SLICE_ITINERARIES = 3


def count_rows(name: str, result: BoxCountResult) -> t.List[t.Tuple[t.Any, ...]]:
    return [(name, scale, count) for scale, count in zip(result.scales.tolist(), result.counts)]


def _summary(result: BoxCountResult) -> t.Dict[str, float]:
    return {"slope": result.slope, "stderr": result.stderr, "fit_quality": result.fit_quality}


@plugin.task("boxcount")
def boxcount(runner: Runner) -> TaskOutcome:
    """Box-counting slopes of the horseshoe and of slices along both bundles."""
    config = runner.config
    assert config.seed is not None
    model = runner.horseshoe()
    threads = config.threads

    cloud = geometry.sample_invariant_set(model, config.depth, config.seed)
    whole = geometry.box_count(cloud, config.scales, threads=threads)
    rows = count_rows("invariant-set", whole)
    files: t.List[str] = []

    slice_depth = 2 * config.depth
    itineraries = [
        Word(symbols=tuple(int(symbol) for symbol in row))
        for row in symbolic.word_array(model.coding, 2)[:SLICE_ITINERARIES]
    ]
    slices: t.Dict[str, t.List[t.Dict[str, float]]] = {"unstable": [], "stable": []}
    for index, itinerary in enumerate(itineraries):
        for bundle, sampler in (
            ("unstable", geometry.sample_unstable_slice),
            ("stable", geometry.sample_stable_slice),
        ):
            slice_cloud = sampler(model, itinerary, slice_depth)
            result = geometry.box_count(slice_cloud, threads=threads)
            slices[bundle].append({"itinerary": str(itinerary), **_summary(result)})
            rows.extend(count_rows(f"{bundle}-slice-{itinerary}", result))
            if index == 0:
                path = runner.out / f"{bundle}_slice.csv"
                files.append(str(serialization.write_points(path, slice_cloud)))

    report = dimension.dimension_report(
        model, config.k_max, config.tol, seed=config.seed, box_count_ref=whole.slope
    )
    LOGGER.info(f"Box-counting slope {whole.slope:.6g} against dim {report.dim_total:.12g}")
    files.insert(0, runner.write_csv("boxcount.csv", ("set", "delta", "count"), rows))
    return TaskOutcome(
        result={
            "points": cloud.size,
            "depth": config.depth,
            "slice_depth": slice_depth,
            "invariant_set": _summary(whole),
            "slices": slices,
            "dim_total": report.dim_total,
            "certified": report.certified,
        },
        files=files,
    )


@plugin.task("holder")
def holder(runner: Runner) -> TaskOutcome:
    """Exponent of the conjugacy between unstable slices of two linear horseshoes."""
    config = runner.config
    assert config.seed is not None and config.expansion_b is not None
    model_a = runner.horseshoe()
    model_b = runner.horseshoe(expansion=config.expansion_b)

    fit = geometry.holder_exponent_fit(
        model_a, model_b, config.depth, config.sample_size, config.seed
    )
    # Slowest one-step expansion rates
    rate_a, _ = cocycle_ops.lyapunov_bounds(model_a.unstable_cocycle(), model_a.coding, 1)
    rate_b, _ = cocycle_ops.lyapunov_bounds(model_b.unstable_cocycle(), model_b.coding, 1)
    ratio = rate_a / rate_b
    return TaskOutcome(result={"fit": fit, "log_expansion_ratio": min(ratio, 1.0 / ratio)})


setup, teardown = plugin.create_extension_handlers()
