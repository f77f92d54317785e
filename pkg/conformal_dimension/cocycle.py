"""Products of derivative cocycles along words and their singular data."""
import logging
import typing as t

import numpy as np

from . import constants, symbolic
from .errors import DomainError, NumericError
from .models import FloatArray, IntArray, MatrixCocycle, SingularStats, SubshiftSpec, Word

__all__ = (
    "batch_products",
    "batch_product_stats",
    "product_stats",
    "conformality_defect",
    "lyapunov_bounds",
    "expansion_certificate",
)

LOGGER = logging.getLogger(__name__)

MODULE = "cocycle"


class BatchStats(t.NamedTuple):
    log_norm: FloatArray
    log_conorm: FloatArray
    log_abs_det: FloatArray


def _check_words(cocycle: MatrixCocycle, words: IntArray) -> None:
    if words.ndim != 2 or words.shape[1] < 1:
        raise DomainError(MODULE, "words must be a non-empty (count x length) array")
    if words.size and (words.min() < 0 or words.max() >= cocycle.symbols):
        raise DomainError(MODULE, f"word symbols must lie in 0..{cocycle.symbols - 1}")


def batch_products(
    cocycle: MatrixCocycle, words: IntArray
) -> t.Tuple[FloatArray, FloatArray]:
    """Ordered products `G[w_(n-1)] ... G[w_0]` for every row `w` of `words`.

    Products are renormalized by their largest entry every few factors; the second
    return value holds the accumulated `log` of those factors.
    """
    _check_words(cocycle, words)
    count, length = words.shape
    every = constants.SolverConfig.RESCALE_EVERY

    products = np.broadcast_to(np.eye(cocycle.bundle_dim), (count, *cocycle.generators.shape[1:]))
    log_scale = np.zeros(count)
    for position in range(length):
        products = cocycle.generators[words[:, position]] @ products
        if (position + 1) % every == 0 or position == length - 1:
            scale = np.abs(products).max(axis=(1, 2))
            if not np.all(np.isfinite(scale)) or np.any(scale <= 0.0):
                raise NumericError(MODULE, f"product left the floating point range at {position}")
            products = products / scale[:, None, None]
            log_scale += np.log(scale)

    return products, log_scale


def batch_product_stats(cocycle: MatrixCocycle, words: IntArray) -> BatchStats:
    """Vectorized `product_stats` over the rows of `words`.

    The co-norm is recovered from the exact determinant and the larger singular values,
    `log m = log|det| - sum(log s_i, i < d)`, which stays accurate when the product is
    badly conditioned.
    """
    products, log_scale = batch_products(cocycle, words)
    singular_values = np.linalg.svd(products, compute_uv=False)
    if np.any(singular_values[:, 0] <= 0.0):
        raise NumericError(MODULE, "rescaled product collapsed to zero")

    d = cocycle.bundle_dim
    log_norm = np.log(singular_values[:, 0]) + log_scale
    log_abs_det = cocycle.log_abs_dets[words].sum(axis=1)
    leading = np.log(singular_values[:, : d - 1]).sum(axis=1) + (d - 1) * log_scale
    log_conorm = log_abs_det - leading
    # Rounding can push the two ends past each other for conformal products.
    log_conorm = np.minimum(log_conorm, log_norm)
    return BatchStats(log_norm, log_conorm, log_abs_det)


def product_stats(
    cocycle: MatrixCocycle, word: Word, *, spec: t.Optional[SubshiftSpec] = None
) -> SingularStats:
    """Norm, co-norm and determinant of the product of generators along `word`."""
    if len(word) < 1:
        raise DomainError(MODULE, "product_stats needs a word of length at least 1")
    if spec is not None and not word.is_admissible(spec):
        raise DomainError(MODULE, f"word {word} is not admissible")

    stats = batch_product_stats(cocycle, np.asarray([word.symbols], dtype=np.int64))
    return SingularStats(
        log_norm=float(stats.log_norm[0]),
        log_conorm=float(stats.log_conorm[0]),
        log_abs_det=float(stats.log_abs_det[0]),
        length=len(word),
        bundle_dim=cocycle.bundle_dim,
    )


def conformality_defect(cocycle: MatrixCocycle, spec: SubshiftSpec, n: int) -> float:
    """`max_w (log||A_w|| - log m(A_w)) / n` over the admissible words of length `n`."""
    stats = batch_product_stats(cocycle, symbolic.word_array(spec, n))
    defect = float(np.max(stats.log_norm - stats.log_conorm)) / n
    return max(defect, 0.0)


def lyapunov_bounds(
    cocycle: MatrixCocycle, spec: SubshiftSpec, n: int
) -> t.Tuple[float, float]:
    """An enclosure of every Lyapunov exponent of every invariant measure on the bundle."""
    stats = batch_product_stats(cocycle, symbolic.word_array(spec, n))
    return float(stats.log_conorm.min()) / n, float(stats.log_norm.max()) / n


def expansion_certificate(cocycle: MatrixCocycle, spec: SubshiftSpec) -> bool:
    """Whether the cocycle provably expands (unstable) or contracts (stable).

    Checks every generator first and falls back to every admissible word of the
    declared block length.
    """
    singular_values = np.linalg.svd(cocycle.generators, compute_uv=False)
    if cocycle.orientation is constants.Orientation.UNSTABLE:
        if np.all(singular_values[:, -1] > 1.0):
            return True
    elif np.all(singular_values[:, 0] < 1.0):
        return True

    if cocycle.block_length is None:
        LOGGER.warning(
            f"{cocycle.orientation.value} cocycle is not uniform per step and declares no "
            "block length"
        )
        return False

    stats = batch_product_stats(cocycle, symbolic.word_array(spec, cocycle.block_length))
    if cocycle.orientation is constants.Orientation.UNSTABLE:
        return bool(np.all(stats.log_conorm > 0.0))
    return bool(np.all(stats.log_norm < 0.0))
