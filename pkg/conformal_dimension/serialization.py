"""Plain-text formats for codings and cocycles, and the CSV writers.

Subshift text::

    2
    11
    10

Cocycle text (one block of `d` rows per symbol, blocks separated by blank lines)::

    2 unstable 2
    0 -8
    2 0

    0 -8
    2 0

Both formats also have a one-line form for configuration values: `11,10` for codings and
`2 unstable 2 | 0 -8; 2 0 | 0 -8; 2 0` for cocycles.
"""
import csv
import logging
import pathlib
import typing as t

import numpy as np

from . import constants
from .errors import DomainError
from .models import MatrixCocycle, PointCloud, SubshiftSpec

__all__ = (
    "parse_subshift",
    "dump_subshift",
    "parse_cocycle",
    "dump_cocycle",
    "format_value",
    "write_csv",
    "write_points",
)

LOGGER = logging.getLogger(__name__)

MODULE = "serialization"


def _content_lines(text: str) -> t.List[str]:
    return [line.split("#", 1)[0].strip() for line in text.strip().splitlines()]


def _parse_row(row: str) -> t.List[int]:
    digits = row.replace(" ", "").replace(",", "")
    if not digits or any(digit not in "01" for digit in digits):
        raise DomainError(MODULE, f"transition rows must be 0/1 digits, got `{row}`")
    return [int(digit) for digit in digits]


def parse_subshift(text: str) -> SubshiftSpec:
    lines = [line for line in _content_lines(text) if line]
    if len(lines) == 1:
        rows = [_parse_row(row) for row in lines[0].split(",")]
    else:
        try:
            q = int(lines[0])
        except (IndexError, ValueError) as e:
            raise DomainError(MODULE, "subshift text must start with the alphabet size") from e
        rows = [_parse_row(row) for row in lines[1:]]
        if len(rows) != q:
            raise DomainError(MODULE, f"expected {q} transition rows, got {len(rows)}")

    try:
        return SubshiftSpec.from_rows(rows)
    except ValueError as e:
        raise DomainError(MODULE, str(e)) from e


def dump_subshift(spec: SubshiftSpec) -> str:
    rows = ("".join(str(int(entry)) for entry in row) for row in spec.transitions)
    return "\n".join((str(spec.alphabet_size), *rows)) + "\n"


def _parse_header(header: str) -> t.Tuple[int, constants.Orientation, t.Optional[int]]:
    parts = header.split()
    if len(parts) not in (2, 3):
        raise DomainError(MODULE, f"cocycle header must be `d orientation [L]`, got `{header}`")
    try:
        d = int(parts[0])
        orientation = constants.Orientation(parts[1].lower())
        block_length = int(parts[2]) if len(parts) == 3 else None
    except ValueError as e:
        raise DomainError(MODULE, f"malformed cocycle header `{header}`") from e
    return d, orientation, block_length


def _parse_matrix(rows: t.Sequence[str], d: int) -> t.List[t.List[float]]:
    try:
        matrix = [[float(entry) for entry in row.split()] for row in rows]
    except ValueError as e:
        raise DomainError(MODULE, f"matrix entries must be decimals: {list(rows)}") from e
    if len(matrix) != d or any(len(row) != d for row in matrix):
        raise DomainError(MODULE, f"expected a {d}x{d} matrix, got {list(rows)}")
    return matrix


def parse_cocycle(text: str) -> MatrixCocycle:
    lines = _content_lines(text)
    if len([line for line in lines if line]) == 1:
        header, *blocks = (part.strip() for part in text.split("|"))
        block_rows = [[row.strip() for row in block.split(";")] for block in blocks]
    else:
        while lines and not lines[0]:
            lines.pop(0)
        header, body = lines[0], lines[1:]
        block_rows: t.List[t.List[str]] = []
        current: t.List[str] = []
        for line in body:
            if line:
                current.append(line)
            elif current:
                block_rows.append(current)
                current = []
        if current:
            block_rows.append(current)

    d, orientation, block_length = _parse_header(header)
    if not block_rows:
        raise DomainError(MODULE, "a cocycle needs at least one matrix")
    matrices = [_parse_matrix(rows, d) for rows in block_rows]
    try:
        return MatrixCocycle.from_matrices(
            matrices, orientation=orientation, block_length=block_length
        )
    except ValueError as e:
        raise DomainError(MODULE, str(e)) from e


def dump_cocycle(cocycle: MatrixCocycle) -> str:
    header = f"{cocycle.bundle_dim} {cocycle.orientation.value}"
    if cocycle.block_length is not None:
        header += f" {cocycle.block_length}"
    blocks = (
        "\n".join(" ".join(format_value(entry) for entry in row) for row in matrix)
        for matrix in cocycle.generators
    )
    return header + "\n" + "\n\n".join(blocks) + "\n"


def format_value(value: t.Any) -> str:
    """Floats with 12 significant digits; everything else through `str`."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    return str(value)


def write_csv(
    path: pathlib.Path, header: t.Sequence[str], rows: t.Iterable[t.Sequence[t.Any]]
) -> pathlib.Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as file:
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(header)
        count = 0
        for row in rows:
            writer.writerow([format_value(value) for value in row])
            count += 1

    LOGGER.debug(f"Wrote {count} rows to {path}")
    return path


def write_points(path: pathlib.Path, cloud: PointCloud) -> pathlib.Path:
    header = [f"x{index}" for index in range(cloud.ambient_dim)]
    return write_csv(path, header, cloud.points.tolist())
