import typing as t

import numpy as np
import pydantic
from scipy.sparse import csgraph

from .base import ContentBase, Matrix, Vector

__all__ = ("SubshiftSpec", "Word", "MarkovMeasure", "is_irreducible")

ROW_SUM_TOL = 1e-12
STATIONARY_TOL = 1e-10


def is_irreducible(transitions: np.ndarray) -> bool:  # type: ignore[type-arg]
    """Whether the transition digraph is strongly connected."""
    n_components, _ = csgraph.connected_components(
        np.asarray(transitions) > 0, directed=True, connection="strong"
    )
    return int(n_components) == 1


class SubshiftSpec(ContentBase):
    """A subshift of finite type: a finite alphabet and a 0/1 transition matrix.

    `transitions[i][j] == 1` means the symbol `j` may follow the symbol `i`.
    """

    alphabet_size: int = pydantic.Field(gt=0)
    transitions: Matrix
    irreducible: bool = False

    @pydantic.root_validator(skip_on_failure=True)
    def _validate_transitions(cls, values: t.Dict[str, t.Any]):
        q: int = values["alphabet_size"]
        transitions: np.ndarray = values["transitions"]  # type: ignore[type-arg]

        if transitions.shape != (q, q):
            raise ValueError(f"Transition matrix must be {q}x{q}, got {transitions.shape}")
        if not np.all((transitions == 0) | (transitions == 1)):
            raise ValueError("Transition matrix entries must be 0 or 1")
        if not (transitions.any(axis=0).all() and transitions.any(axis=1).all()):
            raise ValueError("Every symbol needs a successor and a predecessor (dead symbol)")

        values["irreducible"] = is_irreducible(transitions)
        return values

    @classmethod
    def from_rows(cls, rows: t.Sequence[t.Sequence[int]]) -> "SubshiftSpec":
        return cls(alphabet_size=len(rows), transitions=rows)

    @classmethod
    def full_shift(cls, q: int) -> "SubshiftSpec":
        return cls(alphabet_size=q, transitions=np.ones((q, q)))

    @classmethod
    def golden_mean(cls) -> "SubshiftSpec":
        """The shift on two symbols forbidding the word `11`."""
        return cls.from_rows([[1, 1], [1, 0]])

    def admissible(self, a: int, b: int) -> bool:
        return bool(self.transitions[a, b])

    def transposed(self) -> "SubshiftSpec":
        """The coding of the inverse map: words read backwards."""
        return SubshiftSpec(alphabet_size=self.alphabet_size, transitions=self.transitions.T)


class Word(ContentBase):
    """A finite admissible sequence of symbols, in time order."""

    symbols: t.Tuple[int, ...]

    @pydantic.validator("symbols")
    def _validate_symbols(cls, symbols: t.Tuple[int, ...]):
        if any(symbol < 0 for symbol in symbols):
            raise ValueError("Symbols must be non-negative")
        return symbols

    def __len__(self) -> int:
        return len(self.symbols)

    def is_admissible(self, spec: SubshiftSpec) -> bool:
        if any(symbol >= spec.alphabet_size for symbol in self.symbols):
            return False
        return all(spec.admissible(a, b) for a, b in zip(self.symbols, self.symbols[1:]))

    def reversed(self) -> "Word":
        return Word(symbols=self.symbols[::-1])

    def __add__(self, other: "Word") -> "Word":
        return Word(symbols=self.symbols + other.symbols)

    def __str__(self) -> str:
        separator = "" if max(self.symbols, default=0) < 10 else "."
        return separator.join(map(str, self.symbols))


class MarkovMeasure(ContentBase):
    """A shift-invariant Markov measure: a row-stochastic matrix and its stationary vector."""

    stochastic: Matrix
    stationary: Vector

    @pydantic.root_validator(skip_on_failure=True)
    def _validate_measure(cls, values: t.Dict[str, t.Any]):
        stochastic: np.ndarray = values["stochastic"]  # type: ignore[type-arg]
        stationary: np.ndarray = values["stationary"]  # type: ignore[type-arg]
        q = stationary.shape[0]

        if stochastic.shape != (q, q):
            raise ValueError(f"Stochastic matrix must be {q}x{q}, got {stochastic.shape}")
        if np.any(stochastic < 0) or np.any(stationary < 0):
            raise ValueError("Probabilities must be non-negative")
        if np.max(np.abs(stochastic.sum(axis=1) - 1.0)) > ROW_SUM_TOL:
            raise ValueError("Rows of the stochastic matrix must sum to 1")
        if abs(stationary.sum() - 1.0) > STATIONARY_TOL:
            raise ValueError("Stationary vector must sum to 1")
        if np.max(np.abs(stationary @ stochastic - stationary)) > STATIONARY_TOL:
            raise ValueError("Stationary vector is not a left fixed vector of the matrix")
        return values

    @property
    def size(self) -> int:
        return int(self.stationary.shape[0])

    def edge_weights(self) -> np.ndarray:  # type: ignore[type-arg]
        """The two-cylinder measures `stationary[i] * stochastic[i][j]`."""
        return self.stationary[:, None] * self.stochastic

    def supported_on(self, spec: SubshiftSpec) -> bool:
        return self.size == spec.alphabet_size and not np.any(
            (self.stochastic > 0) & (spec.transitions == 0)
        )
