import typing as t

import numpy as np
import numpy.typing as npt
import pydantic

__all__ = ("ContentBase", "Matrix", "MatrixStack", "Vector", "FloatArray", "IntArray")

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]


def _as_readonly(value: t.Any, *, ndim: int, dtype: t.Any) -> t.Any:
    try:
        array = np.array(value, dtype=dtype)
    except (TypeError, ValueError) as e:
        raise TypeError(f"Expected a numeric array, got {type(value).__name__}") from e

    if array.ndim != ndim:
        raise ValueError(f"Expected a {ndim}-dimensional array, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise ValueError("Array entries must be finite")

    array.setflags(write=False)
    return array


class Matrix(np.ndarray):  # type: ignore[type-arg]
    """Field type for a read-only 2-dimensional float array, such that it
    supports pydantic model validation.
    """

    @classmethod
    def __get_validators__(cls):
        yield lambda value: _as_readonly(value, ndim=2, dtype=np.float64)


class Vector(np.ndarray):  # type: ignore[type-arg]
    """Field type for a read-only 1-dimensional float array."""

    @classmethod
    def __get_validators__(cls):
        yield lambda value: _as_readonly(value, ndim=1, dtype=np.float64)


class MatrixStack(np.ndarray):  # type: ignore[type-arg]
    """Field type for a read-only stack of square matrices, shape (q, d, d)."""

    @classmethod
    def __get_validators__(cls):
        def _validate(value: t.Any):
            array = _as_readonly(value, ndim=3, dtype=np.float64)
            if array.shape[1] != array.shape[2]:
                raise ValueError(f"Stacked matrices must be square, got shape {array.shape}")
            return array

        yield _validate


def _encode_array(array: np.ndarray) -> t.Any:  # type: ignore[type-arg]
    return array.tolist()


class ContentBase(pydantic.BaseModel):
    class Config:
        allow_mutation = False
        frozen = True
        extra = pydantic.Extra.forbid
        json_encoders = {np.ndarray: _encode_array}
