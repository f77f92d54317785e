import typing as t

import numpy as np
import pydantic

from .. import constants
from .base import ContentBase, Matrix, MatrixStack, Vector
from .cocycle import MatrixCocycle
from .symbolic import SubshiftSpec

__all__ = ("HorseshoeModel", "PointCloud", "BoxCountResult", "HolderFit")


def _bounding_boxes(linear: np.ndarray, offset: np.ndarray):  # type: ignore[type-arg]
    """Axis-aligned bounds of the images of the unit cube under `x -> linear @ x + offset`."""
    dim = linear.shape[-1]
    corners = np.array(np.meshgrid(*[[0.0, 1.0]] * dim, indexing="ij")).reshape(dim, -1)
    images = np.einsum("qij,jc->qic", linear, corners) + offset[:, :, None]
    return images.min(axis=2), images.max(axis=2)


def _min_separation(lo: np.ndarray, hi: np.ndarray) -> float:  # type: ignore[type-arg]
    """Smallest gap between pairwise bounding boxes; negative when two of them overlap."""
    q = lo.shape[0]
    best = np.inf
    for i in range(q):
        for j in range(i + 1, q):
            separation = np.max(np.maximum(lo[j] - hi[i], lo[i] - hi[j]))
            best = min(best, float(separation))
    return best


class HorseshoeModel(ContentBase):
    """A piecewise affine horseshoe on the unit cube `[0, 1]^(d_u + d_s)`.

    Branch `i` acts as `(x, y) -> (U_i x + a_i, S_i y + b_i)` with `U_i` expanding the
    unstable coordinates `x` and `S_i` contracting the stable coordinates `y`.
    The coding says which branch may follow which.
    """

    coding: SubshiftSpec
    unstable_linear: MatrixStack
    unstable_offset: Matrix
    stable_linear: MatrixStack
    stable_offset: Matrix
    beta: float = pydantic.Field(default=1.0, gt=0.0, le=1.0)
    min_gap: float = pydantic.Field(default=0.0, ge=0.0)

    @pydantic.root_validator(skip_on_failure=True)
    def _validate_branches(cls, values: t.Dict[str, t.Any]):
        q = values["coding"].alphabet_size
        u_lin, u_off = values["unstable_linear"], values["unstable_offset"]
        s_lin, s_off = values["stable_linear"], values["stable_offset"]

        if u_lin.shape[0] != q or s_lin.shape[0] != q:
            raise ValueError(f"Expected {q} branches to match the coding")
        if u_off.shape != u_lin.shape[:2] or s_off.shape != s_lin.shape[:2]:
            raise ValueError("Offsets must have one row per branch and one column per coordinate")

        if np.any(np.linalg.svd(u_lin, compute_uv=False)[:, -1] <= 1.0):
            raise ValueError("Every branch must expand the unstable coordinates")
        if np.any(np.linalg.svd(s_lin, compute_uv=False)[:, 0] >= 1.0):
            raise ValueError("Every branch must contract the stable coordinates")

        # Markov property: inverse branches on the unstable side and forward branches on
        # the stable side place disjoint copies of the unit cube.
        u_inv = np.linalg.inv(u_lin)
        u_gap = _min_separation(*_bounding_boxes(u_inv, -np.einsum("qij,qj->qi", u_inv, u_off)))
        s_gap = _min_separation(*_bounding_boxes(s_lin, s_off))
        gap = min(u_gap, s_gap)
        if q > 1 and (gap <= 0.0 or gap < values["min_gap"] - 1e-12):
            raise ValueError(
                f"Branch images overlap or are closer than the declared gap ({gap:.3g})"
            )
        return values

    @classmethod
    def linear(
        cls,
        expansion: float,
        contraction: float,
        branches: int = 2,
        *,
        coding: t.Optional[SubshiftSpec] = None,
        beta: float = 1.0,
    ) -> "HorseshoeModel":
        """The evenly gapped affine horseshoe with one unstable and one stable coordinate.

        Its unstable slices are Cantor sets with ratio `1/expansion`, its stable slices
        Cantor sets with ratio `contraction`.
        """
        q = branches
        if q < 2:
            raise ValueError("A horseshoe needs at least two branches")
        if expansion <= q or contraction >= 1.0 / q:
            raise ValueError(
                f"{q} branches need expansion > {q} and contraction < 1/{q} to leave gaps"
            )

        u_gap = (1.0 - q / expansion) / (q - 1)
        s_gap = (1.0 - q * contraction) / (q - 1)
        inverse_offsets = np.arange(q) * (1.0 / expansion + u_gap)

        return cls(
            coding=coding or SubshiftSpec.full_shift(q),
            unstable_linear=np.full((q, 1, 1), float(expansion)),
            unstable_offset=(-expansion * inverse_offsets)[:, None],
            stable_linear=np.full((q, 1, 1), float(contraction)),
            stable_offset=(np.arange(q) * (contraction + s_gap))[:, None],
            beta=beta,
            min_gap=min(u_gap, s_gap),
        )

    @property
    def branches(self) -> int:
        return self.coding.alphabet_size

    @property
    def unstable_dim(self) -> int:
        return int(self.unstable_linear.shape[1])

    @property
    def stable_dim(self) -> int:
        return int(self.stable_linear.shape[1])

    @property
    def ambient_dim(self) -> int:
        return self.unstable_dim + self.stable_dim

    @property
    def max_contraction(self) -> float:
        """The slowest rate at which rectangles shrink, over both coordinate blocks."""
        inverse_rate = 1.0 / np.linalg.svd(self.unstable_linear, compute_uv=False)[:, -1]
        stable_rate = np.linalg.svd(self.stable_linear, compute_uv=False)[:, 0]
        return float(max(inverse_rate.max(), stable_rate.max()))

    def unstable_cocycle(self) -> MatrixCocycle:
        """The cocycle `Df|E^u` induced by the branch derivatives."""
        return MatrixCocycle(
            generators=self.unstable_linear, orientation=constants.Orientation.UNSTABLE
        )

    def stable_cocycle(self) -> MatrixCocycle:
        """The cocycle `Df|E^s` induced by the branch derivatives."""
        return MatrixCocycle(
            generators=self.stable_linear, orientation=constants.Orientation.STABLE
        )

    def same_coding(self, other: "HorseshoeModel") -> bool:
        return self.coding.alphabet_size == other.coding.alphabet_size and bool(
            np.array_equal(self.coding.transitions, other.coding.transitions)
        )


class PointCloud(ContentBase):
    """Representative points of cylinder rectangles of a horseshoe."""

    points: Matrix
    depth: int = pydantic.Field(ge=0)
    seed: t.Optional[int] = None
    resolution: float = pydantic.Field(ge=0.0)
    kind: str = "invariant-set"

    @property
    def size(self) -> int:
        return int(self.points.shape[0])

    @property
    def ambient_dim(self) -> int:
        return int(self.points.shape[1])

    @property
    def diameter(self) -> float:
        """The largest side of the bounding box of the cloud."""
        if self.size == 0:
            return 0.0
        return float(np.max(self.points.max(axis=0) - self.points.min(axis=0)))


class BoxCountResult(ContentBase):
    """Occupied grid boxes per scale and the fitted scaling exponent."""

    scales: Vector
    counts: t.Tuple[int, ...]
    slope: float
    intercept: float
    fit_quality: float
    stderr: float
    ambient_dim: int

    @pydantic.root_validator(skip_on_failure=True)
    def _check_counts(cls, values: t.Dict[str, t.Any]):
        scales: np.ndarray = values["scales"]  # type: ignore[type-arg]
        counts = values["counts"]
        if len(counts) != scales.shape[0]:
            raise ValueError("One count per scale is required")
        if np.any(np.diff(scales) >= 0):
            raise ValueError("Scales must be strictly decreasing")
        if any(later < earlier for earlier, later in zip(counts, counts[1:])):
            raise ValueError("Counts must not grow with the box size")
        if not -1e-9 <= values["slope"] <= values["ambient_dim"] + 1e-9:
            raise ValueError(f"Fitted slope {values['slope']} is outside [0, ambient dimension]")
        return values


class HolderFit(ContentBase):
    """Empirical exponent of the conjugacy between two codings of the same shift."""

    r_lower: float
    slope: float
    fit_quality: float
    pairs: int
    depth: int
    seed: int
