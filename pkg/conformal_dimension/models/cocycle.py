import typing as t

import numpy as np
import pydantic

from .. import constants
from .base import ContentBase, MatrixStack

__all__ = ("MatrixCocycle", "SingularStats")

SANDWICH_SLACK = 1e-9


class MatrixCocycle(ContentBase):
    """A locally constant derivative cocycle: one invertible matrix per symbol.

    For the unstable orientation the generators are the restrictions `Df|E^u` and the
    cocycle should expand; for the stable orientation they are `Df|E^s` and it should
    contract. `block_length` optionally declares an `L` after which every admissible
    product is uniformly expanding (or contracting).
    """

    generators: MatrixStack
    orientation: constants.Orientation = constants.Orientation.UNSTABLE
    block_length: t.Optional[int] = pydantic.Field(default=None, gt=0)

    @pydantic.validator("generators")
    def _validate_generators(cls, generators: np.ndarray):  # type: ignore[type-arg]
        if generators.shape[0] == 0:
            raise ValueError("A cocycle needs at least one generator")

        singular_values = np.linalg.svd(generators, compute_uv=False)
        smallest = singular_values[:, -1]
        if np.any(smallest <= 0.0):
            raise ValueError("Every generator must be invertible")

        condition = singular_values[:, 0] / smallest
        if np.any(condition >= constants.SolverConfig.CONDITION_CAP):
            raise ValueError(
                "Generator condition number {cond:.3g} exceeds the cap {cap:.3g}".format(
                    cond=float(condition.max()), cap=constants.SolverConfig.CONDITION_CAP
                )
            )
        return generators

    @classmethod
    def scalar(
        cls,
        a: float,
        *,
        dim: int = 1,
        symbols: int = 2,
        orientation: constants.Orientation = constants.Orientation.UNSTABLE,
    ) -> "MatrixCocycle":
        """The conformal cocycle `a * Identity` on every symbol."""
        return cls(generators=np.stack([a * np.eye(dim)] * symbols), orientation=orientation)

    @classmethod
    def from_matrices(
        cls,
        matrices: t.Sequence[t.Any],
        *,
        orientation: constants.Orientation = constants.Orientation.UNSTABLE,
        block_length: t.Optional[int] = None,
    ) -> "MatrixCocycle":
        return cls(
            generators=np.stack([np.atleast_2d(np.asarray(m, dtype=float)) for m in matrices]),
            orientation=orientation,
            block_length=block_length,
        )

    @property
    def bundle_dim(self) -> int:
        return int(self.generators.shape[1])

    @property
    def symbols(self) -> int:
        return int(self.generators.shape[0])

    @property
    def log_abs_dets(self) -> np.ndarray:  # type: ignore[type-arg]
        """Per-generator `log |det|`; products add these exactly."""
        return np.linalg.slogdet(self.generators)[1]

    def inverse(self) -> "MatrixCocycle":
        """The derivative cocycle of the inverse map on the same bundle.

        Products of the inverse cocycle must be taken along reversed words.
        """
        return MatrixCocycle(
            generators=np.linalg.inv(self.generators),
            orientation=self.orientation.flipped,
            block_length=self.block_length,
        )


class SingularStats(ContentBase):
    """Logarithmic singular data of a product of generators along a word."""

    log_norm: float
    log_conorm: float
    log_abs_det: float
    length: int = pydantic.Field(gt=0)
    bundle_dim: int = pydantic.Field(gt=0)

    @pydantic.root_validator(skip_on_failure=True)
    def _check_sandwich(cls, values: t.Dict[str, t.Any]):
        root = values["log_abs_det"] / values["bundle_dim"]
        if not (
            values["log_conorm"] - SANDWICH_SLACK * max(1.0, abs(root))
            <= root
            <= values["log_norm"] + SANDWICH_SLACK * max(1.0, abs(root))
        ):
            raise ValueError(
                "Singular data violate m <= |det|^(1/d) <= norm: {conorm} / {root} / {norm}".format(
                    conorm=values["log_conorm"], root=root, norm=values["log_norm"]
                )
            )
        return values

    @property
    def defect(self) -> float:
        """The per-step gap between norm and co-norm."""
        return (self.log_norm - self.log_conorm) / self.length
