import typing as t

import pydantic

from .. import constants
from .base import ContentBase
from .cocycle import MatrixCocycle
from .symbolic import SubshiftSpec

__all__ = (
    "BowenRoot",
    "BracketRow",
    "CocycleModel",
    "BundleReport",
    "DimensionReport",
    "SweepPoint",
    "SweepResult",
    "check_monotone",
)

# Bracket monotonicity is checked up to a multiple of the root tolerance.
MONOTONE_SLACK = 1e-9


class BowenRoot(ContentBase):
    """The zero of a strictly decreasing pressure function, with its certifying bracket."""

    value: float = pydantic.Field(ge=0.0)
    bracket: t.Tuple[float, float]
    residual: float = pydantic.Field(ge=0.0)
    pressure_lo: float
    pressure_hi: float
    level: int = 0
    scheme: str = ""

    @pydantic.root_validator(skip_on_failure=True)
    def _check_bracket(cls, values: t.Dict[str, t.Any]):
        lo, hi = values["bracket"]
        if not lo <= values["value"] <= hi:
            raise ValueError(f"Root {values['value']} lies outside its bracket [{lo}, {hi}]")
        if not values["pressure_lo"] >= 0.0 >= values["pressure_hi"]:
            raise ValueError("Bracket does not straddle the zero of the pressure")
        return values

    @property
    def width(self) -> float:
        return self.bracket[1] - self.bracket[0]

    # Declared last: the name shadows the typing alias inside the class body.
    @property
    def t(self) -> float:
        return self.value


class BracketRow(ContentBase):
    """Roots of the block pressure of `f^(2^k)` with norm (lower) and co-norm (upper)."""

    k: int = pydantic.Field(ge=0)
    lower: float
    upper: float

    @pydantic.root_validator(skip_on_failure=True)
    def _check_order(cls, values: t.Dict[str, t.Any]):
        if values["lower"] > values["upper"] + MONOTONE_SLACK:
            raise ValueError(
                "Lower bracket {lower} exceeds upper bracket {upper} at k={k}".format(**values)
            )
        return values

    @property
    def gap(self) -> float:
        return self.upper - self.lower


def check_monotone(rows: t.Sequence[BracketRow], slack: float = MONOTONE_SLACK) -> None:
    for previous, current in zip(rows, rows[1:]):
        if current.lower < previous.lower - slack:
            raise ValueError(f"Lower brackets decrease between k={previous.k} and k={current.k}")
        if current.upper > previous.upper + slack:
            raise ValueError(f"Upper brackets increase between k={previous.k} and k={current.k}")


class CocycleModel(ContentBase):
    """A hyperbolic set given only by its coding and the two derivative cocycles."""

    coding: SubshiftSpec
    unstable: MatrixCocycle
    stable: MatrixCocycle

    @pydantic.root_validator(skip_on_failure=True)
    def _check_bundles(cls, values: t.Dict[str, t.Any]):
        q = values["coding"].alphabet_size
        for name in ("unstable", "stable"):
            cocycle: MatrixCocycle = values[name]
            if cocycle.symbols != q:
                raise ValueError(f"The {name} cocycle has {cocycle.symbols} generators, not {q}")
            if cocycle.orientation is not constants.Orientation(name):
                raise ValueError(f"The {name} cocycle is declared {cocycle.orientation.value}")
        return values


class BundleReport(ContentBase):
    """Everything computed for one bundle (unstable, or stable through the inverse map)."""

    root: BowenRoot
    brackets: t.Sequence[BracketRow]
    defect: float = pydantic.Field(ge=0.0)
    defect_level: int
    expansion_certified: bool
    average_conformal: bool
    # The deepest `[lower, upper]` bracket; filled in from `brackets`.
    interval: t.Optional[t.Tuple[float, float]] = None

    @pydantic.validator("brackets")
    def _check_brackets(cls, brackets: t.Sequence[BracketRow]):
        if not brackets:
            raise ValueError("At least one bracket level is required")
        return tuple(brackets)

    @pydantic.root_validator(skip_on_failure=True)
    def _check_root_in_bracket(cls, values: t.Dict[str, t.Any]):
        last: BracketRow = values["brackets"][-1]
        slack = values["root"].width + MONOTONE_SLACK
        check_monotone(values["brackets"], slack=2 * slack)
        if not last.lower - slack <= values["root"].value <= last.upper + slack:
            raise ValueError(
                f"Root {values['root'].value} lies outside the certified interval "
                f"[{last.lower}, {last.upper}]"
            )
        values["interval"] = (last.lower, last.upper)
        return values


class DimensionReport(ContentBase):
    """The dimension of a hyperbolic set as the sum of its two slice dimensions."""

    unstable: BundleReport
    stable: BundleReport
    dim_total: float
    # Sum of the two bundle intervals; `dim_total` lies inside up to the root tolerance.
    dim_interval: t.Optional[t.Tuple[float, float]] = None
    box_count_ref: t.Optional[float] = None
    certified: bool
    flags: t.Sequence[str] = ()
    k_max: int
    tol: float
    seed: t.Optional[int] = None

    @pydantic.root_validator(skip_on_failure=True)
    def _check_sum(cls, values: t.Dict[str, t.Any]):
        expected = values["unstable"].root.value + values["stable"].root.value
        if abs(values["dim_total"] - expected) > 1e-12:
            raise ValueError("dim_total must equal t_u + t_s")
        (u_lo, u_hi), (s_lo, s_hi) = values["unstable"].interval, values["stable"].interval
        values["dim_interval"] = (u_lo + s_lo, u_hi + s_hi)
        values["flags"] = tuple(values["flags"])
        return values

    @property
    def t_u(self) -> BowenRoot:
        return self.unstable.root

    @property
    def t_s(self) -> BowenRoot:
        return self.stable.root

    @property
    def brackets_by_k(self) -> t.Sequence[BracketRow]:
        return self.unstable.brackets

    @property
    def defect_certificate(self) -> t.Tuple[float, float]:
        return self.unstable.defect, self.stable.defect


class SweepPoint(ContentBase):
    parameter: float
    dim_total: t.Optional[float] = None
    certified: bool = False
    error: t.Optional[str] = None


class SweepResult(ContentBase):
    points: t.Sequence[SweepPoint]
    max_jump: float
    monotone_decreasing: bool
    monotone_increasing: bool

    @property
    def succeeded(self) -> t.Sequence[SweepPoint]:
        return tuple(point for point in self.points if point.dim_total is not None)
