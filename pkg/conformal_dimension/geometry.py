"""Sampling horseshoes, box counting and the conjugacy exponent between two horseshoes.

A point of the horseshoe is pinned down by its past and its future itinerary. The future
`w_0 w_1 ...` fixes the unstable coordinates through the inverse unstable branches
`x = g_(w_0)(g_(w_1)(...))`; the past `... w_(-2) w_(-1)` fixes the stable
coordinates through the forward stable branches `y = h_(w_(-1))(h_(w_(-2))(...))`.
Truncating both at depth `n` leaves a product rectangle, represented by the image of
the center of the cube.
"""
import concurrent.futures
import logging
import math
import typing as t

import numpy as np
from scipy import spatial, stats

from . import constants, symbolic
from .errors import DomainError
from .models import (
    BoxCountResult,
    FloatArray,
    HolderFit,
    HorseshoeModel,
    IntArray,
    PointCloud,
    Word,
)

__all__ = (
    "sample_invariant_set",
    "sample_unstable_slice",
    "sample_stable_slice",
    "dyadic_scales",
    "geometric_scales",
    "point_spacing",
    "usable_scales",
    "box_count",
    "holder_exponent_fit",
)

LOGGER = logging.getLogger(__name__)

MODULE = "geometry"

MIN_SCALES = 4
# Counts above this share of the cloud size mean every point sits in its own box
SATURATION = 0.5


def _starts(rng: t.Optional[np.random.Generator], count: int, dim: int) -> FloatArray:
    if rng is None:
        return np.full((count, dim), 0.5)
    return rng.random((count, dim))


def _unstable_coordinates(
    model: HorseshoeModel, words: IntArray, start: FloatArray
) -> FloatArray:
    """`g_(w_0) o ... o g_(w_(n-1))` applied to `start`, one row per word."""
    inverse = np.linalg.inv(model.unstable_linear)
    offsets = model.unstable_offset
    x = np.array(np.broadcast_to(start, (words.shape[0], model.unstable_dim)))
    for position in range(words.shape[1] - 1, -1, -1):
        symbol = words[:, position]
        x = np.einsum("nij,nj->ni", inverse[symbol], x - offsets[symbol])
    return x


def _stable_coordinates(
    model: HorseshoeModel, words: IntArray, start: FloatArray
) -> FloatArray:
    """`h_(w_(n-1)) o ... o h_(w_0)` applied to `start`, for pasts written in time order."""
    y = np.array(np.broadcast_to(start, (words.shape[0], model.stable_dim)))
    for position in range(words.shape[1]):
        symbol = words[:, position]
        y = np.einsum("nij,nj->ni", model.stable_linear[symbol], y) + model.stable_offset[symbol]
    return y


def _rng(seed: t.Optional[int], jitter: bool) -> t.Optional[np.random.Generator]:
    if not jitter:
        return None
    if seed is None:
        raise DomainError(MODULE, "jittered sampling needs an explicit seed")
    return np.random.default_rng(seed)


def _check_depth(model: HorseshoeModel, depth: int, exponent: int) -> None:
    if depth < 1:
        raise DomainError(MODULE, f"sampling depth must be at least 1, got {depth}")
    q = model.branches
    symbolic.check_budget(
        MODULE,
        f"{q}^{exponent * depth} sample points",
        q ** (exponent * depth),
        constants.BudgetConfig.POINT_BUDGET,
    )


def sample_invariant_set(
    model: HorseshoeModel,
    depth: int,
    seed: t.Optional[int] = None,
    *,
    jitter: bool = False,
) -> PointCloud:
    """One point per product rectangle of depth `depth` (admissible past and future).

    Points are rectangle centers; with `jitter` they are drawn uniformly inside their
    rectangle instead. Either way every point lies within `max_contraction^depth` of
    the horseshoe.
    """
    _check_depth(model, depth, 2)
    rng = _rng(seed, jitter)
    words = symbolic.word_array(model.coding, depth, budget=constants.BudgetConfig.POINT_BUDGET)
    count = words.shape[0]
    futures = _unstable_coordinates(model, words, _starts(rng, count, model.unstable_dim))
    pasts = _stable_coordinates(model, words, _starts(rng, count, model.stable_dim))

    junction = model.coding.transitions[words[:, -1][:, None], words[:, 0][None, :]] > 0
    past_index, future_index = np.nonzero(junction)
    points = np.hstack((futures[future_index], pasts[past_index]))

    LOGGER.info(f"Sampled {points.shape[0]} points of the horseshoe at depth {depth}")
    return PointCloud(
        points=points,
        depth=depth,
        seed=seed,
        resolution=model.max_contraction**depth,
        kind="invariant-set",
    )


def _local_piece(points: FloatArray, columns: slice, beta: float) -> FloatArray:
    """Points within `beta` of the first point along the given coordinates."""
    if beta >= 1.0:
        return points
    offsets = np.abs(points[:, columns] - points[0, columns]).max(axis=1)
    return points[offsets <= beta]


def _check_itinerary(model: HorseshoeModel, word: Word, what: str) -> IntArray:
    if len(word) == 0 or not word.is_admissible(model.coding):
        raise DomainError(MODULE, f"inadmissible {what} itinerary {word}")
    return np.asarray([word.symbols], dtype=np.int64)


def _check_beta(model: HorseshoeModel, beta: t.Optional[float]) -> float:
    beta = model.beta if beta is None else beta
    if not 0.0 < beta <= 1.0:
        raise DomainError(MODULE, f"local manifold size must lie in (0, 1], got {beta}")
    return beta


def sample_unstable_slice(
    model: HorseshoeModel,
    past: Word,
    depth: int,
    *,
    beta: t.Optional[float] = None,
    seed: t.Optional[int] = None,
    jitter: bool = False,
) -> PointCloud:
    """Points of the local unstable manifold selected by `past`, one per future cylinder."""
    _check_depth(model, depth, 1)
    beta = _check_beta(model, beta)
    past_word = _check_itinerary(model, past, "past")
    rng = _rng(seed, jitter)

    y = _stable_coordinates(model, past_word, _starts(None, 1, model.stable_dim))
    futures = symbolic.word_array(model.coding, depth)
    futures = futures[model.coding.transitions[past.symbols[-1], futures[:, 0]] > 0]
    x = _unstable_coordinates(model, futures, _starts(rng, futures.shape[0], model.unstable_dim))
    points = np.hstack((x, np.repeat(y, x.shape[0], axis=0)))
    points = _local_piece(points, slice(0, model.unstable_dim), beta)

    LOGGER.debug(f"Unstable slice after past {past}: {points.shape[0]} points (beta={beta})")
    return PointCloud(
        points=points,
        depth=depth,
        seed=seed,
        resolution=model.max_contraction**depth,
        kind="unstable-slice",
    )


def sample_stable_slice(
    model: HorseshoeModel,
    future: Word,
    depth: int,
    *,
    beta: t.Optional[float] = None,
    seed: t.Optional[int] = None,
    jitter: bool = False,
) -> PointCloud:
    """Points of the local stable manifold selected by `future`, one per past cylinder."""
    _check_depth(model, depth, 1)
    beta = _check_beta(model, beta)
    future_word = _check_itinerary(model, future, "future")
    rng = _rng(seed, jitter)

    x = _unstable_coordinates(model, future_word, _starts(None, 1, model.unstable_dim))
    pasts = symbolic.word_array(model.coding, depth)
    pasts = pasts[model.coding.transitions[pasts[:, -1], future.symbols[0]] > 0]
    y = _stable_coordinates(model, pasts, _starts(rng, pasts.shape[0], model.stable_dim))
    points = np.hstack((np.repeat(x, y.shape[0], axis=0), y))
    points = _local_piece(points, slice(model.unstable_dim, None), beta)

    LOGGER.debug(f"Stable slice before future {future}: {points.shape[0]} points (beta={beta})")
    return PointCloud(
        points=points,
        depth=depth,
        seed=seed,
        resolution=model.max_contraction**depth,
        kind="stable-slice",
    )


# Box counting


def geometric_scales(base: float, lo_exp: int, hi_exp: int) -> FloatArray:
    """`base^-lo_exp, ..., base^-hi_exp`, decreasing."""
    if base <= 1.0 or hi_exp < lo_exp:
        raise DomainError(MODULE, f"no scales for base {base} and exponents {lo_exp}..{hi_exp}")
    return float(base) ** -np.arange(lo_exp, hi_exp + 1, dtype=np.float64)


def dyadic_scales(lo_exp: int, hi_exp: int) -> FloatArray:
    return geometric_scales(2.0, lo_exp, hi_exp)


def point_spacing(cloud: PointCloud) -> float:
    """Median sup-norm distance from a point to its nearest distinct neighbour."""
    if cloud.size < 2:
        return 0.0
    points = np.asarray(cloud.points)
    distances, _ = spatial.cKDTree(points).query(points, k=2, p=np.inf)
    nearest = distances[:, 1]
    nearest = nearest[nearest > 0.0]
    return float(np.median(nearest)) if nearest.size else 0.0


def usable_scales(cloud: PointCloud, scales: t.Optional[t.Sequence[float]] = None) -> FloatArray:
    """Drop scales at or below the sampling resolution and above a quarter of the diameter.

    Without explicit scales, dyadic scales run from a quarter of the diameter down to four
    times the coarser of the resolution and the typical nearest-neighbour spacing.
    """
    if scales is None:
        floor = max(cloud.resolution, point_spacing(cloud), 2.0**-40)
        lo_exp = math.ceil(math.log2(4.0 / cloud.diameter))
        hi_exp = math.floor(math.log2(1.0 / floor)) - 2
        return dyadic_scales(lo_exp, max(hi_exp, lo_exp))

    candidate = np.sort(np.asarray(scales, dtype=np.float64))[::-1]
    keep = (candidate > cloud.resolution) & (candidate <= cloud.diameter / 4.0)
    if not keep.all():
        LOGGER.debug(f"Discarding scales outside the usable range: {candidate[~keep]}")
    return candidate[keep]


def _unsaturated(counts: IntArray, size: int) -> int:
    """How many leading scales to keep before the counts saturate at the cloud size."""
    saturated = np.nonzero(counts > SATURATION * size)[0]
    if saturated.size == 0:
        return int(counts.shape[0])
    return max(int(saturated[0]), MIN_SCALES)


def _count_boxes(points: FloatArray, anchor: FloatArray, scale: float) -> int:
    cells = np.floor((points - anchor) / scale).astype(np.int64)
    return int(np.unique(cells, axis=0).shape[0])


def box_count(
    cloud: PointCloud,
    scales: t.Optional[t.Sequence[float]] = None,
    *,
    threads: int = 1,
) -> BoxCountResult:
    """Count occupied grid boxes per scale and fit `log N` against `-log delta`.

    The grid is anchored at the componentwise minimum of the cloud. Grid boxes stand in
    for the balls of the covering number; the two counts agree up to a constant factor,
    so the fitted exponent is the same.
    """
    if cloud.size < 2 or cloud.diameter == 0.0:
        LOGGER.warning("Degenerate point cloud (all points equal); reporting slope 0")
        fallback = dyadic_scales(1, MIN_SCALES) if scales is None else np.asarray(scales)
        return BoxCountResult(
            scales=fallback,
            counts=(1,) * len(fallback),
            slope=0.0,
            intercept=0.0,
            fit_quality=0.0,
            stderr=0.0,
            ambient_dim=cloud.ambient_dim,
        )

    grid = usable_scales(cloud, scales)
    if grid.shape[0] < MIN_SCALES:
        raise DomainError(
            MODULE,
            f"only {grid.shape[0]} scales lie between the resolution {cloud.resolution:.3g} "
            f"and a quarter of the diameter {cloud.diameter:.3g}; at least {MIN_SCALES} needed",
        )

    points = np.asarray(cloud.points)
    anchor = points.min(axis=0)
    with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
        counts = np.array(
            list(pool.map(lambda scale: _count_boxes(points, anchor, float(scale)), grid))
        )

    keep = _unsaturated(counts, cloud.size)
    if keep < counts.shape[0]:
        LOGGER.warning(
            f"Dropping {counts.shape[0] - keep} saturated scales below {grid[keep - 1]:.3g}"
        )
        grid, counts = grid[:keep], counts[:keep]

    envelope = np.maximum.accumulate(counts)
    if np.any(envelope != counts):
        LOGGER.warning(f"Grid counts {counts.tolist()} not monotone in the scale; using envelope")

    fit = stats.linregress(-np.log(grid), np.log(envelope))
    slope = float(fit.slope)
    if not 0.0 <= slope <= cloud.ambient_dim:
        LOGGER.warning(f"Fitted slope {slope:.6g} clipped to [0, {cloud.ambient_dim}]")
        slope = min(max(slope, 0.0), float(cloud.ambient_dim))

    LOGGER.info(
        f"Box count over {grid.shape[0]} scales: slope {slope:.6g} +- {fit.stderr:.2g} "
        f"(R^2 {fit.rvalue**2:.6f})"
    )
    return BoxCountResult(
        scales=grid,
        counts=tuple(int(count) for count in envelope),
        slope=slope,
        intercept=float(fit.intercept),
        fit_quality=float(fit.rvalue**2),
        stderr=float(fit.stderr),
        ambient_dim=cloud.ambient_dim,
    )


# Hölder exponent of the conjugacy


def _continue_walks(
    transitions: FloatArray, rng: np.random.Generator, first: IntArray, length: int
) -> IntArray:
    """Uniform random admissible continuations of `first` up to `length` symbols."""
    words = np.empty((first.shape[0], length), dtype=np.int64)
    words[:, 0] = first
    for position in range(1, length):
        allowed = transitions[words[:, position - 1]]
        cumulative = np.cumsum(allowed, axis=1)
        draw = rng.random(first.shape[0]) * cumulative[:, -1]
        words[:, position] = (cumulative <= draw[:, None]).sum(axis=1)
    return words


def _two_successors(allowed: FloatArray, rng: np.random.Generator) -> t.Tuple[IntArray, IntArray]:
    """Two distinct allowed symbols per row, uniformly at random."""
    scores = np.where(allowed > 0, rng.random(allowed.shape), -1.0)
    ranked = np.argsort(-scores, axis=1)
    return ranked[:, 0], ranked[:, 1]


def _diverging_pairs(
    model: HorseshoeModel, rng: np.random.Generator, count: int, prefix: int, depth: int
) -> t.Tuple[IntArray, IntArray]:
    """Pairs of admissible words agreeing on exactly their first `prefix` symbols."""
    transitions = np.asarray(model.coding.transitions)
    q = model.branches
    branching = transitions.sum(axis=1) >= 2

    if prefix == 0:
        head = np.zeros((count, 0), dtype=np.int64)
        allowed = np.ones((count, q))
    else:
        if not branching.any():
            raise DomainError(MODULE, "no symbol of the coding has two successors")
        starts = rng.choice(np.nonzero(branching)[0], size=count) if prefix == 1 else None
        if starts is not None:
            head = starts[:, None]
        else:
            head = np.empty((0, prefix), dtype=np.int64)
            while head.shape[0] < count:
                walks = _continue_walks(transitions, rng, rng.integers(q, size=count), prefix)
                head = np.vstack((head, walks[branching[walks[:, -1]]]))
            head = head[:count]
        allowed = transitions[head[:, -1]]

    first, second = _two_successors(allowed, rng)
    length = depth - prefix
    return (
        np.hstack((head, _continue_walks(transitions, rng, first, length))),
        np.hstack((head, _continue_walks(transitions, rng, second, length))),
    )


def _log_distances(
    model: HorseshoeModel, first: IntArray, second: IntArray, prefix: int
) -> FloatArray:
    """`log |x(first) - x(second)|` computed through the shared prefix exactly.

    The two points differ only after the prefix, so their difference is the difference
    of the tails pushed through the linear parts of the shared inverse branches.
    """
    center = _starts(None, 1, model.unstable_dim)
    delta = _unstable_coordinates(model, first[:, prefix:], center) - _unstable_coordinates(
        model, second[:, prefix:], center
    )
    inverse = np.linalg.inv(model.unstable_linear)
    log_scale = np.zeros(first.shape[0])
    for step, position in enumerate(range(prefix - 1, -1, -1), start=1):
        delta = np.einsum("nij,nj->ni", inverse[first[:, position]], delta)
        if step % constants.SolverConfig.RESCALE_EVERY == 0:
            scale = np.abs(delta).max(axis=1)
            delta = delta / scale[:, None]
            log_scale += np.log(scale)
    return np.log(np.linalg.norm(delta, axis=1)) + log_scale


def holder_exponent_fit(
    model_a: HorseshoeModel,
    model_b: HorseshoeModel,
    depth: int,
    sample_size: int,
    seed: int,
) -> HolderFit:
    """Fit the exponent of the conjugacy between the unstable slices of two horseshoes.

    Points with the same itinerary correspond under the conjugacy, so the slope of
    `log d_b` against `log d_a` over pairs of points measures how distances transform.
    The conjugacy and its inverse are Hölder with exponents `slope` and `1/slope`;
    `r_lower` is the smaller of the two.
    """
    if not model_a.same_coding(model_b):
        raise DomainError(MODULE, "codings differ: the models are not conjugate on their codes")
    if model_a.unstable_dim != model_b.unstable_dim:
        raise DomainError(MODULE, "the models have unstable bundles of different dimension")
    if depth < 2:
        raise DomainError(MODULE, f"the Hölder fit needs depth >= 2, got {depth}")

    rng = np.random.default_rng(seed)
    per_level = max(1, sample_size // (depth - 1))
    log_a: t.List[FloatArray] = []
    log_b: t.List[FloatArray] = []
    for prefix in range(depth - 1):
        first, second = _diverging_pairs(model_a, rng, per_level, prefix, depth)
        log_a.append(_log_distances(model_a, first, second, prefix))
        log_b.append(_log_distances(model_b, first, second, prefix))

    x, y = np.concatenate(log_a), np.concatenate(log_b)
    fit = stats.linregress(x, y)
    slope = float(fit.slope)
    if slope <= 0.0:
        raise DomainError(MODULE, f"distances do not correspond (fitted slope {slope:.6g})")

    r_lower = min(slope, 1.0 / slope)
    LOGGER.info(f"Hölder fit over {x.shape[0]} pairs: slope {slope:.6g}, r = {r_lower:.6g}")
    return HolderFit(
        r_lower=r_lower,
        slope=slope,
        fit_quality=float(fit.rvalue**2),
        pairs=int(x.shape[0]),
        depth=depth,
        seed=seed,
    )
