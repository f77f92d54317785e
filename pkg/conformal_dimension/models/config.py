import pathlib
import typing as t

import dotenv
import pydantic

from .. import constants
from .base import ContentBase

__all__ = ("RunConfig",)

U64_MAX = 2**64 - 1


class RunConfig(ContentBase):
    """A batch run: which model, which task, and the numeric knobs.

    Parsed from a plain `KEY=value` document; unknown keys are rejected.
    """

    task: constants.Task
    model: constants.ModelKind = constants.ModelKind.LINEAR_HORSESHOE

    # Linear horseshoe parameters
    branches: int = pydantic.Field(default=2, ge=2, le=16)
    expansion: t.Optional[float] = pydantic.Field(default=None, gt=1.0)
    contraction: t.Optional[float] = pydantic.Field(default=None, gt=0.0, lt=1.0)
    expansion_b: t.Optional[float] = pydantic.Field(default=None, gt=1.0)

    # Cocycle models: inline text or `@path`
    coding: t.Optional[str] = None
    unstable: t.Optional[str] = None
    stable: t.Optional[str] = None

    # Numeric knobs
    k_max: t.Optional[int] = pydantic.Field(default=None, ge=0, le=8)
    tol: float = pydantic.Field(default=constants.SolverConfig.ROOT_TOL, ge=1e-14, le=1e-3)
    depth: int = pydantic.Field(default=9, ge=1, le=24)
    scales: t.Optional[t.Tuple[float, ...]] = None
    seed: t.Optional[int] = pydantic.Field(default=None, ge=0, le=U64_MAX)
    memory: int = pydantic.Field(default=1, ge=1, le=4)
    t_min: float = pydantic.Field(default=0.0, ge=0.0)
    t_max: float = pydantic.Field(default=2.0, gt=0.0)
    t_points: int = pydantic.Field(default=50, ge=2, le=10_000)
    sweep_parameter: t.Literal["expansion", "contraction"] = "expansion"
    sweep_min: t.Optional[float] = None
    sweep_max: t.Optional[float] = None
    sweep_step: t.Optional[float] = pydantic.Field(default=None, gt=0.0)
    sample_size: int = pydantic.Field(default=4000, ge=10, le=10**6)

    # Outputs
    out: str = "out"
    threads: int = pydantic.Field(default=1, ge=1, le=256)

    @pydantic.validator("scales", pre=True)
    def _split_scales(cls, value: t.Any):
        if isinstance(value, str):
            return tuple(float(part) for part in value.split(",") if part.strip())
        return value

    @pydantic.validator("scales")
    def _check_scales(cls, scales: t.Optional[t.Tuple[float, ...]]):
        if scales is None:
            return scales
        if len(scales) < 4:
            raise ValueError("At least four scales are required")
        if any(scale <= 0 for scale in scales) or list(scales) != sorted(scales, reverse=True):
            raise ValueError("Scales must be positive and decreasing")
        return scales

    @pydantic.root_validator(skip_on_failure=True)
    def _check_task_requirements(cls, values: t.Dict[str, t.Any]):
        task: constants.Task = values["task"]
        model: constants.ModelKind = values["model"]

        if task.needs_seed and values["seed"] is None:
            raise ValueError(f"Task `{task.value}` samples points and needs an explicit seed")

        if model is constants.ModelKind.LINEAR_HORSESHOE and task is not constants.Task.VERIFY:
            missing = [key for key in ("expansion", "contraction") if values[key] is None]
            if missing and not (task is constants.Task.SWEEP and len(missing) == 1):
                raise ValueError(f"A linear horseshoe needs {', '.join(missing)}")

        if model is constants.ModelKind.COCYCLE:
            if task in (constants.Task.BOXCOUNT, constants.Task.HOLDER, constants.Task.SWEEP):
                raise ValueError(f"Task `{task.value}` needs a geometric (horseshoe) model")
            if values["coding"] is None or values["unstable"] is None:
                raise ValueError("A cocycle model needs `coding` and `unstable`")
            if task is constants.Task.DIM and values["stable"] is None:
                raise ValueError("The dimension task needs a `stable` cocycle")

        if task is constants.Task.SWEEP:
            if None in (values["sweep_min"], values["sweep_max"], values["sweep_step"]):
                raise ValueError("A sweep needs sweep_min, sweep_max and sweep_step")
            if values["sweep_max"] < values["sweep_min"]:
                raise ValueError("sweep_max must not be below sweep_min")
            if values[values["sweep_parameter"]] is not None:
                raise ValueError(f"`{values['sweep_parameter']}` is swept; do not also fix it")

        if task is constants.Task.HOLDER and values["expansion_b"] is None:
            raise ValueError("The holder task compares against `expansion_b`")

        if values["t_max"] <= values["t_min"]:
            raise ValueError("t_max must exceed t_min")
        return values

    @classmethod
    def load(
        cls,
        path: t.Optional[pathlib.Path] = None,
        **overrides: t.Any,
    ) -> "RunConfig":
        """Read a `KEY=value` document and apply command-line overrides on top."""
        raw: t.Dict[str, t.Any] = {}
        if path is not None:
            raw = {
                key.strip().lower(): value
                for key, value in dotenv.dotenv_values(path).items()
                if value is not None
            }
        raw |= {key: value for key, value in overrides.items() if value is not None}
        return cls.parse_obj(raw)

    def read_text(self, value: str, base: t.Optional[pathlib.Path] = None) -> str:
        """Resolve an inline value or an `@path` reference relative to `base`."""
        if not value.startswith("@"):
            return value
        path = pathlib.Path(value[1:])
        if base is not None and not path.is_absolute():
            path = base / path
        return path.read_text(encoding="utf-8")
