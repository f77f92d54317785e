from __future__ import annotations

import enum
import os

import dotenv

dotenv.load_dotenv()

_PREFIX = "CONFDIM_"


def _env(name: str, default: str) -> str:
    return os.environ.get(_PREFIX + name, default)


class BudgetConfig:
    ENUMERATION_BUDGET = int(_env("ENUMERATION_BUDGET", str(2**20)))
    POINT_BUDGET = int(_env("POINT_BUDGET", str(2**22)))
    BLOCK_BUDGET = int(_env("BLOCK_BUDGET", str(2**20)))


class SolverConfig:
    ROOT_TOL = float(_env("ROOT_TOL", "1e-10"))
    POWER_TOL = float(_env("POWER_TOL", "1e-12"))
    POWER_MAX_ITER = int(_env("POWER_MAX_ITER", str(10**5)))
    CONDITION_CAP = float(_env("CONDITION_CAP", "1e8"))
    DEFECT_TOLERANCE = float(_env("DEFECT_TOLERANCE", "0.05"))
    K_MAX = int(_env("K_MAX", "4"))
    RESCALE_EVERY = int(_env("RESCALE_EVERY", "16"))
    OPTIMIZER_RESTARTS = int(_env("OPTIMIZER_RESTARTS", "20"))
    OPTIMIZER_MAX_ITER = int(_env("OPTIMIZER_MAX_ITER", str(10**4)))


class LogConfig:
    LEVEL = _env("LOG_LEVEL", "DEBUG").upper()
    FILE = _env("LOG_FILE", "logs/conformal_dimension.log")
    # Comma-separated `name=LEVEL` pairs, e.g. `conformal_dimension.pressure=INFO`
    OVERRIDES = _env("LOG_OVERRIDES", "")


# Enums


class Orientation(str, enum.Enum):
    """Which bundle a cocycle is a derivative of."""

    UNSTABLE = "unstable"
    STABLE = "stable"

    @property
    def flipped(self) -> Orientation:
        """The orientation of the inverse cocycle."""
        return Orientation.STABLE if self is Orientation.UNSTABLE else Orientation.UNSTABLE


class SingularValue(str, enum.Enum):
    """The singular value a sub- or super-additive potential is built from."""

    NORM = "norm"
    CONORM = "conorm"


class PotentialKind(str, enum.Enum):
    EDGE = "edge"
    NORM = "norm"
    CONORM = "conorm"


class Scheme(str, enum.Enum):
    """How a pressure value was computed."""

    TRANSFER_MATRIX = "transfer-matrix"
    CYLINDER_SUM = "cylinder-sum"
    BLOCK = "block-2^k"


class ModelKind(str, enum.Enum):
    LINEAR_HORSESHOE = "linear_horseshoe"
    COCYCLE = "cocycle"


class Task(str, enum.Enum):
    ENTROPY = "entropy"
    PRESSURE = "pressure"
    DIM = "dim"
    BOXCOUNT = "boxcount"
    SWEEP = "sweep"
    HOLDER = "holder"
    VERIFY = "verify"

    @property
    def needs_seed(self) -> bool:
        """Whether this task samples and therefore requires an explicit seed."""
        return self in (Task.BOXCOUNT, Task.HOLDER, Task.VERIFY)


class ExitStatus(enum.IntEnum):
    OK = 0
    DOMAIN = 1
    RESOURCE = 2
    VERIFICATION = 3
