"""Subshifts of finite type: admissible words, entropy and Markov measures.

Everything downstream enumerates words in the same lexicographic order, so sums over
words are reduced in a fixed order and results reproduce to the last bit.
"""
import logging
import typing as t

import numpy as np
from scipy import special

from . import constants
from .errors import ConvergenceError, DomainError, ResourceError
from .models import FloatArray, IntArray, MarkovMeasure, SubshiftSpec, Word, is_irreducible

__all__ = (
    "check_budget",
    "word_array",
    "word_count",
    "enumerate_words",
    "perron",
    "spectral_radius",
    "topological_entropy",
    "stationary_distribution",
    "markov_measure",
    "markov_entropy",
    "integrate_edge_function",
    "gibbs_measure",
    "parry_measure",
    "random_markov_measure",
    "higher_block",
    "is_irreducible",
)

LOGGER = logging.getLogger(__name__)

MODULE = "symbolic_core"

EdgeFunction = t.Union[t.Callable[[int, int], float], np.ndarray]  # type: ignore[type-arg]


def check_budget(module: str, what: str, requested: int, bound: t.Optional[int] = None) -> None:
    bound = constants.BudgetConfig.ENUMERATION_BUDGET if bound is None else bound
    if requested > bound:
        raise ResourceError(
            module, f"{what} exceeds the enumeration budget", requested=requested, bound=bound
        )


def require_irreducible(spec: SubshiftSpec, module: str = MODULE) -> None:
    if not spec.irreducible:
        raise DomainError(module, "the transition matrix must be irreducible (transitive coding)")


def word_array(spec: SubshiftSpec, n: int, *, budget: t.Optional[int] = None) -> IntArray:
    """All admissible words of length `n`, one per row, in lexicographic order."""
    if n < 1:
        raise DomainError(MODULE, f"word length must be at least 1, got {n}")
    q = spec.alphabet_size
    check_budget(MODULE, f"{q}^{n} candidate words", q**n, budget)

    allowed = spec.transitions.astype(bool)
    words = np.arange(q, dtype=np.int64)[:, None]
    for _ in range(n - 1):
        candidates = np.repeat(words, q, axis=0)
        successors = np.tile(np.arange(q, dtype=np.int64), words.shape[0])
        keep = allowed[candidates[:, -1], successors]
        words = np.column_stack((candidates[keep], successors[keep]))

    return words


def word_count(spec: SubshiftSpec, n: int) -> int:
    """`1^T A^(n-1) 1`, computed exactly."""
    power = np.linalg.matrix_power(spec.transitions.astype(np.int64).astype(object), n - 1)
    return int(power.sum())


def enumerate_words(spec: SubshiftSpec, n: int) -> t.Iterator[Word]:
    """Stream the admissible words of length `n` (the `n`-cylinders)."""
    for row in word_array(spec, n):
        yield Word(symbols=tuple(int(symbol) for symbol in row))


def perron(
    matrix: np.ndarray,  # type: ignore[type-arg]
    *,
    tol: t.Optional[float] = None,
    max_iter: t.Optional[int] = None,
) -> t.Tuple[float, FloatArray]:
    """Spectral radius and right eigenvector of a non-negative matrix.

    Power iteration on the shifted matrix `W / s + I`, which is primitive whenever `W`
    is irreducible; the Collatz-Wielandt ratios bracket the eigenvalue and iteration
    stops once the bracket is relatively tighter than `tol`.
    """
    tol = constants.SolverConfig.POWER_TOL if tol is None else tol
    max_iter = constants.SolverConfig.POWER_MAX_ITER if max_iter is None else max_iter

    matrix = np.asarray(matrix, dtype=np.float64)
    if np.any(matrix < 0):
        raise DomainError(MODULE, "power iteration needs a non-negative matrix")
    scale = float(matrix.max())
    if scale <= 0.0:
        raise DomainError(MODULE, "power iteration needs a non-zero matrix")

    shifted = matrix / scale + np.eye(matrix.shape[0])
    vector = np.ones(matrix.shape[0])
    lo = hi = 1.0
    for iteration in range(1, max_iter + 1):
        image = shifted @ vector
        ratios = image / vector
        lo, hi = float(ratios.min()), float(ratios.max())
        vector = image / image.max()
        if hi - lo <= tol * max(0.5 * (lo + hi) - 1.0, np.finfo(float).tiny):
            LOGGER.debug(f"Power iteration converged after {iteration} steps")
            return scale * (0.5 * (lo + hi) - 1.0), vector

    raise ConvergenceError(
        MODULE,
        f"power iteration did not reach relative tolerance {tol:g} in {max_iter} steps",
        best=scale * (0.5 * (lo + hi) - 1.0),
    )


def spectral_radius(matrix: np.ndarray, **kwargs: t.Any) -> float:  # type: ignore[type-arg]
    return perron(matrix, **kwargs)[0]


def topological_entropy(spec: SubshiftSpec) -> float:
    """`log` of the spectral radius of the transition matrix, in nats."""
    require_irreducible(spec)
    return float(np.log(spectral_radius(spec.transitions)))


def stationary_distribution(stochastic: np.ndarray) -> FloatArray:  # type: ignore[type-arg]
    """The left fixed probability vector of a row-stochastic matrix."""
    q = stochastic.shape[0]
    system = np.vstack((stochastic.T - np.eye(q), np.ones((1, q))))
    rhs = np.zeros(q + 1)
    rhs[-1] = 1.0
    solution = np.linalg.lstsq(system, rhs, rcond=None)[0]
    solution = np.clip(solution, 0.0, None)
    return solution / solution.sum()


def markov_measure(stochastic: np.ndarray) -> MarkovMeasure:  # type: ignore[type-arg]
    """Build the invariant Markov measure of a stochastic matrix.

    Rows are renormalized first so that accumulated rounding never trips validation.
    """
    stochastic = np.asarray(stochastic, dtype=np.float64)
    stochastic = stochastic / stochastic.sum(axis=1, keepdims=True)
    return MarkovMeasure(stochastic=stochastic, stationary=stationary_distribution(stochastic))


def markov_entropy(measure: MarkovMeasure) -> float:
    """Entropy of a Markov measure in nats, with the convention `0 log 0 = 0`."""
    row_entropies = -special.xlogy(measure.stochastic, measure.stochastic).sum(axis=1)
    return float(measure.stationary @ row_entropies)


def _edge_values(f: EdgeFunction, support: np.ndarray) -> FloatArray:  # type: ignore[type-arg]
    if callable(f):
        values = np.zeros(support.shape)
        for i, j in zip(*np.nonzero(support)):
            values[i, j] = f(int(i), int(j))
        return values
    return np.where(support, np.asarray(f, dtype=np.float64), 0.0)


def integrate_edge_function(measure: MarkovMeasure, f: EdgeFunction) -> float:
    """`sum_ij stationary[i] * stochastic[i][j] * f(i, j)` over the edges the measure charges."""
    weights = measure.edge_weights()
    values = _edge_values(f, weights > 0)
    if not np.all(np.isfinite(values)):
        raise DomainError(MODULE, "edge function must be finite on every charged edge")
    return float(np.sum(weights * values))


def gibbs_measure(
    spec: SubshiftSpec, values: np.ndarray  # type: ignore[type-arg]
) -> MarkovMeasure:
    """The equilibrium state of a locally constant potential.

    With `W = A * exp(values)`, Perron root `rho` and right eigenvector `r`, the
    equilibrium is the Markov measure `P[i][j] = W[i][j] r[j] / (rho r[i])`.
    """
    require_irreducible(spec)
    exponent = np.where(spec.transitions > 0, values, -np.inf)
    weights = np.exp(exponent - exponent[spec.transitions > 0].max())
    rho, right = perron(weights)
    return markov_measure(weights * right[None, :] / (rho * right[:, None]))


def parry_measure(spec: SubshiftSpec) -> MarkovMeasure:
    """The measure of maximal entropy of an irreducible subshift."""
    return gibbs_measure(spec, np.zeros(spec.transitions.shape))


def random_markov_measure(spec: SubshiftSpec, rng: np.random.Generator) -> MarkovMeasure:
    """A random Markov measure charging exactly the admissible transitions."""
    require_irreducible(spec)
    raw = rng.exponential(size=spec.transitions.shape) * spec.transitions
    return markov_measure(raw)


def higher_block(spec: SubshiftSpec, m: int) -> t.Tuple[SubshiftSpec, IntArray]:
    """The `m`-block presentation: states are admissible `m`-words.

    The word `u` may be followed by `v` when they overlap in `m - 1` symbols. A
    one-step Markov measure on this graph is a memory-`m` Markov measure on `spec`.
    """
    words = word_array(spec, m)
    if m == 1:
        return spec, words

    q = spec.alphabet_size
    codes = words @ (q ** np.arange(m - 1, -1, -1, dtype=np.int64))
    n = words.shape[0]
    transitions = np.zeros((n, n))
    allowed = spec.transitions.astype(bool)
    for symbol in range(q):
        ok = allowed[words[:, -1], symbol]
        successor_codes = (codes[ok] % q ** (m - 1)) * q + symbol
        transitions[np.nonzero(ok)[0], np.searchsorted(codes, successor_codes)] = 1.0

    return SubshiftSpec(alphabet_size=n, transitions=transitions), words
