import typing as t

import numpy as np
import pydantic

from .. import constants
from .base import ContentBase, Matrix
from .cocycle import MatrixCocycle
from .symbolic import MarkovMeasure, SubshiftSpec

__all__ = (
    "EdgePotential",
    "SingularPotential",
    "PotentialSpec",
    "PressureEstimate",
    "VariationalResult",
)


class EdgePotential(ContentBase):
    """A locally constant potential: one value per admissible symbol pair."""

    kind: t.Literal[constants.PotentialKind.EDGE] = constants.PotentialKind.EDGE
    values: Matrix

    @classmethod
    def constant(cls, c: float, q: int) -> "EdgePotential":
        return cls(values=np.full((q, q), float(c)))

    @classmethod
    def from_symbols(cls, per_symbol: t.Sequence[float]) -> "EdgePotential":
        """A potential depending only on the current symbol: `values[i][j] = per_symbol[i]`."""
        column = np.asarray(per_symbol, dtype=float)[:, None]
        return cls(values=np.repeat(column, column.shape[0], axis=1))

    def check(self, spec: SubshiftSpec) -> None:
        if self.values.shape != spec.transitions.shape:
            raise ValueError(
                f"Potential shape {self.values.shape} does not match the coding "
                f"{spec.transitions.shape}"
            )

    def scaled(self, factor: float) -> "EdgePotential":
        return EdgePotential(values=factor * self.values)


class SingularPotential(ContentBase):
    """The potential family `sign * coefficient * log X(Df^n)` with X the norm or the co-norm.

    With the default sign this is `-t log ||Df^n||` (super-additive) or `-t log m(Df^n)`
    (sub-additive).
    """

    kind: t.Literal[constants.PotentialKind.NORM, constants.PotentialKind.CONORM]
    cocycle: MatrixCocycle
    coefficient: float = pydantic.Field(ge=0.0)
    sign: t.Literal[-1, 1] = -1

    @classmethod
    def norm(cls, cocycle: MatrixCocycle, coefficient: float) -> "SingularPotential":
        return cls(kind=constants.PotentialKind.NORM, cocycle=cocycle, coefficient=coefficient)

    @classmethod
    def conorm(cls, cocycle: MatrixCocycle, coefficient: float) -> "SingularPotential":
        return cls(kind=constants.PotentialKind.CONORM, cocycle=cocycle, coefficient=coefficient)

    @property
    def which(self) -> constants.SingularValue:
        return constants.SingularValue(self.kind.value)

    @property
    def is_subadditive(self) -> bool:
        """Whether `phi_{m+n} <= phi_m + phi_n o f^m` holds for this member of the family."""
        if self.coefficient == 0.0:
            return True
        return (self.kind is constants.PotentialKind.CONORM) == (self.sign < 0)

    def check(self, spec: SubshiftSpec) -> None:
        if self.cocycle.symbols != spec.alphabet_size:
            raise ValueError(
                f"Cocycle has {self.cocycle.symbols} generators for "
                f"{spec.alphabet_size} symbols"
            )


PotentialSpec = t.Union[EdgePotential, SingularPotential]


class PressureEstimate(ContentBase):
    """A pressure approximant, in nats, with how it was obtained."""

    value: float
    level_n: int = pydantic.Field(ge=1)
    scheme: constants.Scheme
    monotonicity_note: str = ""
    potential: str = ""
    words: int = 0


class VariationalResult(ContentBase):
    """Best `h_mu + Phi_*(mu)` found over finite-memory Markov measures."""

    best_value: float
    pressure_ref: float
    gap: float
    argmax: MarkovMeasure
    memory: int
    depth: int
    converged: bool
    iterations: int
    restarts: int
    gibbs_value: t.Optional[float] = None
