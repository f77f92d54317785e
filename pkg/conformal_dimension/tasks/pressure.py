import logging

import numpy as np

from .. import constants, dimension, pressure, utilities
from ..models import SingularPotential
from ..runner import Runner, TaskOutcome

__all__ = ("setup", "teardown", "plugin")

LOGGER = logging.getLogger(__name__)

plugin = utilities.Plugin.with_metadata(name="pressure", category="pressure")


@plugin.task("pressure")
def pressure_curves(runner: Runner) -> TaskOutcome:
    """Block pressure curves for both singular values and the determinant pressure.

    Each bundle is tabulated on its expanding side (the stable bundle through the
    inverse map), so every curve decreases in `t`.
    """
    config = runner.config
    coding, bundles = runner.bundles()
    k_max = dimension.default_k_max(coding.alphabet_size) if config.k_max is None else config.k_max
    grid = np.linspace(config.t_min, config.t_max, config.t_points)

    rows = []
    for cocycle in bundles:
        view_spec, view_cocycle = dimension.unstable_view(coding, cocycle)
        bundle = cocycle.orientation.value
        for k in range(k_max + 1):
            for which in constants.SingularValue:
                for row in pressure.pressure_curve(view_spec, view_cocycle, grid, k, which):
                    rows.append((bundle, row["t"], row["level"], row["scheme"], row["value"]))
        for coefficient in grid:
            estimate = pressure.determinant_pressure(view_spec, view_cocycle, float(coefficient))
            rows.append((bundle, float(coefficient), 1, estimate.scheme.value, estimate.value))

    unstable_spec, unstable_cocycle = dimension.unstable_view(coding, bundles[0])
    variational = pressure.variational_gap(
        unstable_spec,
        SingularPotential.conorm(unstable_cocycle, config.t_min),
        config.memory,
        max(config.memory, 2),
        seed=config.seed or 0,
    )
    LOGGER.info(f"Tabulated {len(rows)} pressure values up to level k={k_max}")
    return TaskOutcome(
        result={"k_max": k_max, "t_grid": grid, "variational_check": variational},
        files=[
            runner.write_csv("pressure.csv", ("bundle", "t", "level", "scheme", "value"), rows)
        ],
    )


setup, teardown = plugin.create_extension_handlers()
