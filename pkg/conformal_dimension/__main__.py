from __future__ import annotations

import argparse
import logging
import pathlib
import sys
import typing as t

import pydantic

from . import constants, log
from .errors import ConformalDimensionError
from .models import RunConfig
from .runner import DEFAULT_EXTENSIONS, Runner

LOGGER = logging.getLogger(__name__)


# Reports carry numpy arrays; orjson writes them without the `tolist` round trip.
try:
    import orjson

    REPORT_OPTIONS = orjson.OPT_SERIALIZE_NUMPY | orjson.OPT_NON_STR_KEYS

    def _dump_report(value: t.Any, *, default: t.Callable[[t.Any], t.Any]) -> str:
        return orjson.dumps(value, default=default, option=REPORT_OPTIONS).decode()

    pydantic.BaseConfig.json_loads = orjson.loads
    pydantic.BaseConfig.json_dumps = _dump_report
    LOGGER.debug("Using orjson for report serialization")

except ModuleNotFoundError:
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conformal-dimension",
        description="Dimensions of average conformal hyperbolic sets.",
    )
    parser.add_argument("--config", type=pathlib.Path, help="KEY=value run configuration")
    parser.add_argument("--task", choices=[task.value for task in constants.Task])
    parser.add_argument("--out", help="output directory (default: out)")
    parser.add_argument("--threads", type=int)
    parser.add_argument("--seed", type=int)
    return parser


def run(argv: t.Optional[t.Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    log.setup()

    try:
        config = RunConfig.load(
            args.config,
            task=args.task,
            out=args.out,
            threads=args.threads,
            seed=args.seed,
        )
        runner = Runner(config, base=args.config.parent if args.config else None)
        for extension in DEFAULT_EXTENSIONS:
            runner.load_extension(extension)
        status, report = runner.run()

    except pydantic.ValidationError as e:
        LOGGER.error(f"Invalid configuration:\n{e}")
        return constants.ExitStatus.DOMAIN

    except ConformalDimensionError as e:
        LOGGER.error(f"{type(e).__name__}: {e}")
        return e.exit_code

    except ValueError as e:
        LOGGER.error(f"Invalid input: {e}")
        return constants.ExitStatus.DOMAIN

    except OSError as e:
        LOGGER.error(f"Could not read or write a run file: {e}")
        return constants.ExitStatus.DOMAIN

    print(report)
    return status


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
