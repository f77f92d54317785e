"""Topological pressure of additive and sub/super-additive potentials on subshifts.

On a coded system with locally constant data the separated sets of the metric
definition are the cylinders themselves, so pressure is computed either exactly from a
weighted transition matrix or from cylinder sums at a fixed level; no limit in the
separation scale is taken.
"""
import concurrent.futures
import dataclasses
import logging
import math
import typing as t

import numpy as np
from scipy import special

from . import cocycle as cocycle_ops
from . import constants, symbolic
from .errors import DomainError, NumericError, ResourceError
from .models import (
    EdgePotential,
    FloatArray,
    IntArray,
    MarkovMeasure,
    MatrixCocycle,
    PotentialSpec,
    PressureEstimate,
    SubshiftSpec,
    VariationalResult,
)

__all__ = (
    "additive_pressure",
    "determinant_pressure",
    "cylinder_pressure_level",
    "fekete_profile",
    "BlockPressure",
    "block_pressure",
    "max_block_level",
    "pressure_curve",
    "measure_value",
    "variational_gap",
)

LOGGER = logging.getLogger(__name__)

MODULE = "pressure"

# Variational checks accept this much numerical slack on h + Phi_* <= P.
VARIATIONAL_SLACK = 1e-9
# Probabilities are kept at least this far from zero during the ascent.
SIMPLEX_FLOOR = 1e-12


def _log_spectral_radius(log_weights: np.ndarray) -> float:  # type: ignore[type-arg]
    """`log rho(exp(log_weights))`, shifting exponents so nothing overflows."""
    finite = np.isfinite(log_weights)
    if not finite.any():
        raise DomainError(MODULE, "weighted transition matrix is identically zero")
    shift = float(log_weights[finite].max())
    weights = np.exp(np.where(finite, log_weights - shift, -np.inf))
    return math.log(symbolic.spectral_radius(weights)) + shift


def _check_potential(potential: PotentialSpec, spec: SubshiftSpec) -> None:
    try:
        potential.check(spec)
    except ValueError as error:
        raise DomainError(MODULE, str(error)) from error


def _describe(potential: PotentialSpec) -> str:
    if isinstance(potential, EdgePotential):
        return "edge"
    sign = "-" if potential.sign < 0 else "+"
    return f"{sign}{potential.coefficient:.12g}*log {potential.which.value}"


def additive_pressure(spec: SubshiftSpec, potential: EdgePotential) -> PressureEstimate:
    """Exact pressure of a locally constant potential: `log rho(A * exp(potential))`."""
    symbolic.require_irreducible(spec, MODULE)
    _check_potential(potential, spec)
    log_weights = np.where(spec.transitions > 0, potential.values, -np.inf)
    return PressureEstimate(
        value=_log_spectral_radius(log_weights),
        level_n=1,
        scheme=constants.Scheme.TRANSFER_MATRIX,
        monotonicity_note="exact",
        potential=_describe(potential),
    )


def determinant_pressure(
    spec: SubshiftSpec, cocycle: MatrixCocycle, coefficient: float
) -> PressureEstimate:
    """Pressure of `-t log |det|^(1/d)`, the additive potential squeezed between the
    norm and co-norm potentials.
    """
    root_log_det = cocycle.log_abs_dets / cocycle.bundle_dim
    estimate = additive_pressure(spec, EdgePotential.from_symbols(-coefficient * root_log_det))
    return estimate.copy(update={"potential": f"-{coefficient:.12g}*log |det|^(1/d)"})


def _word_potential(
    spec: SubshiftSpec, potential: PotentialSpec, words: IntArray
) -> FloatArray:
    """`phi_n` on each cylinder.

    For edge potentials this is the Birkhoff sum along the word, closed by the largest
    value over the admissible successors of its last symbol; for singular potentials
    it is `sign * t * log X` of the product along the word.
    """
    _check_potential(potential, spec)
    if isinstance(potential, EdgePotential):
        values = potential.values
        inner = values[words[:, :-1], words[:, 1:]].sum(axis=1)
        closing = np.where(spec.transitions > 0, values, -np.inf).max(axis=1)
        return inner + closing[words[:, -1]]

    stats = cocycle_ops.batch_product_stats(potential.cocycle, words)
    logs = stats.log_norm if potential.which is constants.SingularValue.NORM else stats.log_conorm
    return potential.sign * potential.coefficient * logs


def _monotonicity_note(potential: PotentialSpec) -> str:
    if isinstance(potential, EdgePotential):
        return "additive: level values converge at rate O(1/n)"
    if potential.is_subadditive:
        return "sub-additive: log Z_n is sub-additive, level values bound the limit from above"
    return "super-additive: log Z_n is super-additive on full shifts, bound from below"


def cylinder_pressure_level(
    spec: SubshiftSpec, potential: PotentialSpec, n: int
) -> PressureEstimate:
    """`(1/n) log sum_w exp(phi_n(w))` over the admissible words of length `n`."""
    words = symbolic.word_array(spec, n)
    log_sum = float(special.logsumexp(_word_potential(spec, potential, words)))
    return PressureEstimate(
        value=log_sum / n,
        level_n=n,
        scheme=constants.Scheme.CYLINDER_SUM,
        monotonicity_note=_monotonicity_note(potential),
        potential=_describe(potential),
        words=int(words.shape[0]),
    )


def fekete_profile(spec: SubshiftSpec, potential: PotentialSpec, n_max: int) -> FloatArray:
    """`a_n = log Z_n` for `n = 1 .. n_max`; index `n - 1` holds level `n`."""
    return np.array(
        [cylinder_pressure_level(spec, potential, n).value * n for n in range(1, n_max + 1)]
    )


def max_block_level(q: int, budget: t.Optional[int] = None) -> int:
    """The largest `k` with `q^(2^k)` block words inside the budget."""
    budget = constants.BudgetConfig.BLOCK_BUDGET if budget is None else budget
    k = 0
    while k < 20 and q ** (2 ** (k + 1)) <= budget:
        k += 1
    return k


@dataclasses.dataclass(frozen=True)
class _Group:
    first: int
    last: int
    values: FloatArray
    log_counts: FloatArray


class BlockPressure:
    """Pressure of `f^(2^k)` with potential `-t log X(Df^(2^k))`, divided by `2^k`.

    The block subshift has one symbol per admissible `2^k`-word `u`, and `u` may be
    followed by `v` when the last symbol of `u` may be followed by the first of `v`.
    Its weighted transition matrix factors through the base alphabet, so its spectral
    radius equals that of the `q x q` matrix `A S` with
    `S[b][c] = sum(exp(-t log X(u)))` over block words from `b` to `c`.
    Singular data of the block words are computed once and reused for every `t`.
    """

    def __init__(self, spec: SubshiftSpec, cocycle: MatrixCocycle, k: int):
        symbolic.require_irreducible(spec, MODULE)
        if cocycle.symbols != spec.alphabet_size:
            raise DomainError(MODULE, "cocycle and coding disagree on the alphabet size")
        if k < 0:
            raise DomainError(MODULE, f"block level must be non-negative, got {k}")

        q = spec.alphabet_size
        budget = constants.BudgetConfig.BLOCK_BUDGET
        if k > 20 or q ** (2**k) > budget:
            raise ResourceError(
                MODULE,
                f"block alphabet {q}^(2^{k}) is too large, the largest feasible k is "
                f"{max_block_level(q, budget)}",
                requested=q ** (2**k) if k <= 20 else budget + 1,
                bound=budget,
            )

        self.spec = spec
        self.cocycle = cocycle
        self.k = k
        self.length = 2**k
        words = symbolic.word_array(spec, self.length, budget=budget)
        self.words = int(words.shape[0])
        stats = cocycle_ops.batch_product_stats(cocycle, words)
        self.defect = max(float(np.max(stats.log_norm - stats.log_conorm)) / self.length, 0.0)

        self._groups: t.Dict[constants.SingularValue, t.List[_Group]] = {}
        for which, logs in (
            (constants.SingularValue.NORM, stats.log_norm),
            (constants.SingularValue.CONORM, stats.log_conorm),
        ):
            self._groups[which] = self._group(words, logs)
        LOGGER.debug(
            f"Prepared block level k={k}: {self.words} words, defect {self.defect:.3g}"
        )

    @staticmethod
    def _group(words: IntArray, logs: FloatArray) -> t.List[_Group]:
        groups: t.List[_Group] = []
        q_first, q_last = words[:, 0], words[:, -1]
        for first in np.unique(q_first):
            for last in np.unique(q_last):
                mask = (q_first == first) & (q_last == last)
                if not mask.any():
                    continue
                values, counts = np.unique(logs[mask], return_counts=True)
                groups.append(_Group(int(first), int(last), values, np.log(counts)))
        return groups

    def __call__(
        self,
        coefficient: float,
        which: constants.SingularValue = constants.SingularValue.NORM,
    ) -> float:
        q = self.spec.alphabet_size
        log_s = np.full((q, q), -np.inf)
        for group in self._groups[which]:
            log_s[group.first, group.last] = special.logsumexp(
                -coefficient * group.values + group.log_counts
            )

        finite = np.isfinite(log_s)
        shift = float(log_s[finite].max())
        matrix = self.spec.transitions @ np.exp(np.where(finite, log_s - shift, -np.inf))
        rho = symbolic.spectral_radius(matrix)
        if rho <= 0.0:
            raise NumericError(MODULE, "block transfer matrix has zero spectral radius")
        return (math.log(rho) + shift) / self.length

    def estimate(
        self,
        coefficient: float,
        which: constants.SingularValue = constants.SingularValue.NORM,
    ) -> PressureEstimate:
        note = (
            "norm: lower approximant, nondecreasing in k"
            if which is constants.SingularValue.NORM
            else "conorm: upper approximant, nonincreasing in k"
        )
        return PressureEstimate(
            value=self(coefficient, which),
            level_n=self.length,
            scheme=constants.Scheme.BLOCK,
            monotonicity_note=note,
            potential=f"-{coefficient:.12g}*log {which.value}",
            words=self.words,
        )


def block_pressure(
    spec: SubshiftSpec,
    cocycle: MatrixCocycle,
    coefficient: float,
    k: int,
    which: constants.SingularValue = constants.SingularValue.NORM,
) -> PressureEstimate:
    """The level-`k` approximant `P(f^(2^k), -t log X(Df^(2^k))) / 2^k`."""
    if coefficient < 0:
        raise DomainError(MODULE, f"dimension potentials need t >= 0, got {coefficient}")
    return BlockPressure(spec, cocycle, k).estimate(coefficient, which)


def pressure_curve(
    spec: SubshiftSpec,
    cocycle: MatrixCocycle,
    coefficients: t.Sequence[float],
    k: int,
    which: constants.SingularValue = constants.SingularValue.NORM,
) -> t.List[t.Dict[str, t.Any]]:
    """Rows `(t, level, scheme, value)` of a block pressure curve, ready for CSV export."""
    block = BlockPressure(spec, cocycle, k)
    return [
        {
            "t": float(coefficient),
            "level": block.length,
            "scheme": f"{constants.Scheme.BLOCK.value}:{which.value}",
            "value": block(float(coefficient), which),
        }
        for coefficient in coefficients
    ]


# Variational principle


class _MarkovObjective:
    """`h_mu + Phi_*(mu)` as a function of the stochastic matrix of a memory-`m` chain.

    States of the chain are admissible `m`-words. For edge potentials the integral is
    exact; singular potentials are averaged over the cylinders of length `depth`.
    """

    def __init__(self, spec: SubshiftSpec, potential: PotentialSpec, memory: int, depth: int):
        self.block_spec, self.states = symbolic.higher_block(spec, memory)
        self.support = self.block_spec.transitions > 0
        self.memory = memory
        self.depth = depth

        if isinstance(potential, EdgePotential):
            _check_potential(potential, spec)
            last = self.states[:, -1]
            self.edge_values = np.where(
                self.support, potential.values[last[:, None], last[None, :]], 0.0
            )
            self.paths: t.Optional[IntArray] = None
        else:
            words = symbolic.word_array(spec, depth)
            self.edge_values = np.zeros(self.support.shape)
            self.word_values = _word_potential(spec, potential, words) / depth
            # State index of each length-m window of each cylinder
            q = spec.alphabet_size
            codes = self.states @ (q ** np.arange(memory - 1, -1, -1, dtype=np.int64))
            windows = np.lib.stride_tricks.sliding_window_view(words, memory, axis=1)
            window_codes = windows @ (q ** np.arange(memory - 1, -1, -1, dtype=np.int64))
            self.paths = np.searchsorted(codes, window_codes)

    def stationary(self, stochastic: FloatArray) -> FloatArray:
        return symbolic.stationary_distribution(stochastic)

    def _row_values(self, stochastic: FloatArray) -> t.Tuple[FloatArray, FloatArray]:
        """Per-state contributions `psi_u` and the cylinder weights they come from."""
        entropy = -special.xlogy(stochastic, stochastic).sum(axis=1)
        psi = entropy + (stochastic * self.edge_values).sum(axis=1)
        if self.paths is None:
            return psi, np.zeros(0)

        steps = stochastic[self.paths[:, :-1], self.paths[:, 1:]].prod(axis=1)
        weighted = steps * self.word_values
        np.add.at(psi, self.paths[:, 0], weighted)
        return psi, weighted

    def value(self, stochastic: FloatArray) -> float:
        psi, _ = self._row_values(stochastic)
        return float(self.stationary(stochastic) @ psi)

    def value_and_gradient(self, stochastic: FloatArray) -> t.Tuple[float, FloatArray]:
        pi = self.stationary(stochastic)
        psi, weighted = self._row_values(stochastic)
        value = float(pi @ psi)

        # Direct dependence of psi on P, weighted by the stationary vector.
        safe = np.where(self.support, stochastic, 1.0)
        direct = pi[:, None] * (-np.log(safe) - 1.0 + self.edge_values)
        if self.paths is not None:
            cylinder = pi[self.paths[:, 0]] * weighted
            for step in range(self.paths.shape[1] - 1):
                a, b = self.paths[:, step], self.paths[:, step + 1]
                np.add.at(direct, (a, b), cylinder / safe[a, b])

        # Dependence through the stationary vector: solve the Poisson equation
        # (I - P) h = psi - value, normalized by pi . h = 0.
        n = stochastic.shape[0]
        system = np.vstack((np.eye(n) - stochastic, pi[None, :]))
        rhs = np.concatenate((psi - value, [0.0]))
        h = np.linalg.lstsq(system, rhs, rcond=None)[0]
        gradient = direct + pi[:, None] * h[None, :]
        return value, np.where(self.support, gradient, 0.0)

    def project(self, matrix: FloatArray) -> FloatArray:
        """Project every row onto the probability simplex over its admissible entries."""
        projected = np.zeros_like(matrix)
        for row in range(matrix.shape[0]):
            allowed = np.nonzero(self.support[row])[0]
            projected[row, allowed] = _project_simplex(matrix[row, allowed], SIMPLEX_FLOOR)
        return projected

    def random_start(self, rng: np.random.Generator) -> FloatArray:
        return self.project(rng.dirichlet(np.ones(self.support.shape[1]), self.support.shape[0]))


def _project_simplex(vector: FloatArray, floor: float) -> FloatArray:
    """Euclidean projection onto `{p >= floor, sum(p) = 1}`."""
    size = vector.shape[0]
    if size == 1:
        return np.ones(1)
    mass = 1.0 - size * floor
    shifted = vector - floor
    ordered = np.sort(shifted)[::-1]
    cumulative = np.cumsum(ordered) - mass
    index = np.arange(1, size + 1)
    rho = np.nonzero(ordered - cumulative / index > 0)[0][-1]
    theta = cumulative[rho] / (rho + 1)
    return np.maximum(shifted - theta, 0.0) + floor


@dataclasses.dataclass
class _Ascent:
    value: float
    stochastic: FloatArray
    iterations: int
    converged: bool


def _ascend(objective: _MarkovObjective, start: FloatArray, max_iter: int) -> _Ascent:
    """Projected gradient ascent with step halving (Armijo backtracking)."""
    current = start
    value, gradient = objective.value_and_gradient(current)
    step = 1.0
    for iteration in range(1, max_iter + 1):
        while True:
            candidate = objective.project(current + step * gradient)
            candidate_value = objective.value(candidate)
            improvement = candidate_value - value
            if improvement >= 1e-4 * float(np.sum(gradient * (candidate - current))):
                break
            step *= 0.5
            if step < 1e-16:
                return _Ascent(value, current, iteration, True)

        moved = float(np.max(np.abs(candidate - current)))
        current = candidate
        value, gradient = objective.value_and_gradient(current)
        if moved < 1e-13 or abs(improvement) < 1e-15:
            return _Ascent(value, current, iteration, True)
        step = min(step * 2.0, 1e3)

    return _Ascent(value, current, max_iter, False)


def _as_measure(stochastic: np.ndarray) -> MarkovMeasure:  # type: ignore[type-arg]
    return symbolic.markov_measure(stochastic)


def measure_value(
    spec: SubshiftSpec,
    potential: PotentialSpec,
    measure: MarkovMeasure,
    depth: int = 1,
) -> float:
    """`h_mu + Phi_*(mu)` for a one-step Markov measure on `spec`."""
    if not measure.supported_on(spec):
        raise DomainError(MODULE, "measure charges transitions the coding forbids")
    objective = _MarkovObjective(spec, potential, memory=1, depth=depth)
    return objective.value(np.asarray(measure.stochastic))


def _default_depth(potential: PotentialSpec) -> int:
    if isinstance(potential, EdgePotential):
        return 1
    return 2 * (potential.cocycle.block_length or 1)


def variational_gap(
    spec: SubshiftSpec,
    potential: PotentialSpec,
    memory: int = 1,
    depth: t.Optional[int] = None,
    *,
    seed: int = 0,
    restarts: t.Optional[int] = None,
    max_iter: t.Optional[int] = None,
    workers: int = 1,
) -> VariationalResult:
    """Maximize `h_mu + Phi_*(mu)` over memory-`m` Markov measures and compare with the
    pressure.

    For singular potentials the reference pressure is the cylinder sum at `depth`, which
    bounds `h_mu + (1/depth) int phi_depth dmu` from above for every measure.
    """
    symbolic.require_irreducible(spec, MODULE)
    depth = _default_depth(potential) if depth is None else depth
    if memory < 1:
        raise DomainError(MODULE, f"memory must be at least 1, got {memory}")
    if depth < memory and not isinstance(potential, EdgePotential):
        raise DomainError(MODULE, f"depth {depth} must be at least the memory {memory}")
    restarts = constants.SolverConfig.OPTIMIZER_RESTARTS if restarts is None else restarts
    max_iter = constants.SolverConfig.OPTIMIZER_MAX_ITER if max_iter is None else max_iter

    objective = _MarkovObjective(spec, potential, memory, depth)
    starts = [
        objective.random_start(np.random.default_rng([seed, index])) for index in range(restarts)
    ]

    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        runs = list(pool.map(lambda start: _ascend(objective, start, max_iter), starts))

    # Highest value wins, ties go to the earliest restart.
    winner_index = max(range(len(runs)), key=lambda index: (runs[index].value, -index))
    winner = runs[winner_index]
    if not winner.converged:
        LOGGER.warning(
            f"Variational optimizer hit {max_iter} iterations; best so far {winner.value:.12g}"
        )

    if isinstance(potential, EdgePotential):
        reference = additive_pressure(spec, potential).value
        gibbs = symbolic.gibbs_measure(spec, potential.values)
        gibbs_value: t.Optional[float] = measure_value(spec, potential, gibbs)
    else:
        reference = cylinder_pressure_level(spec, potential, depth).value
        gibbs_value = None

    gap = reference - winner.value
    if gap < -VARIATIONAL_SLACK:
        raise NumericError(
            MODULE, f"variational inequality violated: h + Phi_* exceeds pressure by {-gap:.3g}"
        )

    LOGGER.info(
        f"Variational gap {gap:.3g} at memory {memory}, depth {depth} "
        f"(restart {winner_index} of {restarts})"
    )
    return VariationalResult(
        best_value=winner.value,
        pressure_ref=reference,
        gap=gap,
        argmax=_as_measure(winner.stochastic),
        memory=memory,
        depth=depth,
        converged=winner.converged,
        iterations=winner.iterations,
        restarts=restarts,
        gibbs_value=gibbs_value,
    )
