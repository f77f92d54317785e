from __future__ import annotations

import dataclasses
import importlib
import logging
import pathlib
import time
import types
import typing as t

from . import constants, serialization
from .models import (
    CocycleModel,
    ContentBase,
    HorseshoeModel,
    MatrixCocycle,
    RunConfig,
    SubshiftSpec,
)
from .utilities import plugin

__all__ = ("Runner", "TaskOutcome", "RunReport", "DEFAULT_EXTENSIONS")

LOGGER = logging.getLogger(__name__)

DEFAULT_EXTENSIONS = (
    "conformal_dimension.tasks.symbolic",
    "conformal_dimension.tasks.pressure",
    "conformal_dimension.tasks.dimension",
    "conformal_dimension.tasks.geometry",
    "conformal_dimension.tasks.verify",
)


@dataclasses.dataclass
class TaskOutcome:
    """What a task hands back to the runner: a JSON-ready result and the files it wrote."""

    result: t.Dict[str, t.Any]
    files: t.List[str] = dataclasses.field(default_factory=list)
    status: constants.ExitStatus = constants.ExitStatus.OK


class RunReport(ContentBase):
    task: constants.Task
    status: constants.ExitStatus
    config: RunConfig
    provenance: t.Dict[str, t.Any]
    result: t.Dict[str, t.Any]
    files: t.Tuple[str, ...]


class Runner:
    """Owns the run configuration and output directory, and dispatches to task plugins."""

    def __init__(self, config: RunConfig, *, base: t.Optional[pathlib.Path] = None):
        self.config = config
        self.base = base
        self.out = pathlib.Path(config.out)
        self.tasks: t.Dict[str, plugin.Task] = {}
        self.extensions: t.Dict[str, types.ModuleType] = {}

    # Extensions

    def load_extension(self, name: str) -> None:
        module = importlib.import_module(name)
        setup: t.Optional[plugin.SetupFunc] = getattr(module, "setup", None)
        if setup is None:
            raise TypeError(f"Extension `{name}` has no setup function")
        setup(self)
        self.extensions[name] = module

    def unload_extension(self, name: str) -> None:
        module = self.extensions.pop(name)
        teardown: t.Optional[plugin.SetupFunc] = getattr(module, "teardown", None)
        if teardown is not None:
            teardown(self)

    def load_plugin(self, plugin_: plugin.Plugin) -> None:
        plugin_.load(self)

    def add_task(self, task: plugin.Task) -> None:
        if task.name in self.tasks:
            raise ValueError(f"Task `{task.name}` is already registered")
        self.tasks[task.name] = task

    def remove_task(self, name: str) -> t.Optional[plugin.Task]:
        return self.tasks.pop(name, None)

    # Models

    def read_text(self, value: str) -> str:
        return self.config.read_text(value, self.base)

    def coding(self) -> SubshiftSpec:
        if self.config.model is constants.ModelKind.COCYCLE:
            assert self.config.coding is not None  # guaranteed by config validation
            return serialization.parse_subshift(self.read_text(self.config.coding))
        return SubshiftSpec.full_shift(self.config.branches)

    def horseshoe(self, **overrides: float) -> HorseshoeModel:
        """The linear horseshoe of the configuration, with parameters optionally replaced."""
        parameters: t.Dict[str, t.Any] = {
            "expansion": self.config.expansion,
            "contraction": self.config.contraction,
        } | overrides
        return HorseshoeModel.linear(
            parameters["expansion"], parameters["contraction"], self.config.branches
        )

    def cocycle_model(self) -> CocycleModel:
        config = self.config
        if config.unstable is None or config.stable is None:
            raise ValueError("A cocycle model needs both `unstable` and `stable` cocycles")
        return CocycleModel(
            coding=self.coding(),
            unstable=serialization.parse_cocycle(self.read_text(config.unstable)),
            stable=serialization.parse_cocycle(self.read_text(config.stable)),
        )

    def bundles(self) -> t.Tuple[SubshiftSpec, t.Tuple[MatrixCocycle, ...]]:
        """The coding and whichever derivative cocycles the configuration provides."""
        if self.config.model is not constants.ModelKind.COCYCLE:
            model = self.horseshoe()
            return model.coding, (model.unstable_cocycle(), model.stable_cocycle())

        texts = (self.config.unstable, self.config.stable)
        cocycles = tuple(
            serialization.parse_cocycle(self.read_text(text)) for text in texts if text is not None
        )
        return self.coding(), cocycles

    def model(self) -> t.Union[HorseshoeModel, CocycleModel]:
        if self.config.model is constants.ModelKind.COCYCLE:
            return self.cocycle_model()
        return self.horseshoe()

    # Outputs

    def write_csv(
        self, name: str, header: t.Sequence[str], rows: t.Iterable[t.Sequence[t.Any]]
    ) -> str:
        return str(serialization.write_csv(self.out / name, header, rows))

    def provenance(self) -> t.Dict[str, t.Any]:
        return {
            "tolerances": {
                "root": self.config.tol,
                "power": constants.SolverConfig.POWER_TOL,
                "defect": constants.SolverConfig.DEFECT_TOLERANCE,
            },
            "budgets": {
                "enumeration": constants.BudgetConfig.ENUMERATION_BUDGET,
                "points": constants.BudgetConfig.POINT_BUDGET,
                "block": constants.BudgetConfig.BLOCK_BUDGET,
            },
            "seed": self.config.seed,
            "threads": self.config.threads,
        }

    def run(self) -> t.Tuple[constants.ExitStatus, pathlib.Path]:
        """Run the configured task and write `report.json` next to its data files."""
        name = self.config.task.value
        if name not in self.tasks:
            raise LookupError(f"No loaded plugin provides the task `{name}`")

        self.out.mkdir(parents=True, exist_ok=True)
        LOGGER.info(f"Running task `{name}` into {self.out}")
        started = time.perf_counter()
        outcome = self.tasks[name](self)
        elapsed = time.perf_counter() - started

        report = RunReport(
            task=self.config.task,
            status=outcome.status,
            config=self.config,
            provenance=self.provenance() | {"seconds": round(elapsed, 3)},
            result=outcome.result,
            files=tuple(outcome.files),
        )
        path = self.out / "report.json"
        path.write_text(report.json(), encoding="utf-8")

        LOGGER.info(f"Task `{name}` finished in {elapsed:.2f}s with status {outcome.status.name}")
        return outcome.status, path

