import pathlib

import numpy as np
import pytest

from conformal_dimension import constants, geometry, serialization
from conformal_dimension.errors import DomainError
from conformal_dimension.models import HorseshoeModel, SubshiftSpec

ROTATED_TEXT = """\
2 unstable 2
0 -8
2 0

0 -8
2 0
"""


def test_parse_subshift_forms(golden_mean: SubshiftSpec):
    multi_line = serialization.parse_subshift("2\n11\n10\n")
    inline = serialization.parse_subshift("11,10")
    assert multi_line == inline == golden_mean


def test_dump_subshift(golden_mean: SubshiftSpec):
    assert serialization.dump_subshift(golden_mean) == "2\n11\n10\n"
    assert serialization.parse_subshift(serialization.dump_subshift(golden_mean)) == golden_mean


def test_subshift_comments_are_ignored():
    spec = serialization.parse_subshift("# golden mean\n2\n11  # from 0\n10\n")
    assert spec == SubshiftSpec.golden_mean()


@pytest.mark.parametrize(
    "text",
    [
        "3\n11\n10\n",  # too few rows
        "2\n12\n10\n",  # not 0/1
        "x\n11\n10\n",  # no alphabet size
        "10,10",  # dead symbol
    ],
)
def test_malformed_subshifts(text: str):
    with pytest.raises(DomainError):
        serialization.parse_subshift(text)


def test_parse_cocycle(rotated):
    parsed = serialization.parse_cocycle(ROTATED_TEXT)
    assert parsed.orientation is constants.Orientation.UNSTABLE
    assert parsed.block_length == 2
    assert np.array_equal(parsed.generators, rotated.generators)


def test_parse_inline_cocycle(rotated):
    parsed = serialization.parse_cocycle("2 unstable | 0 -8; 2 0 | 0 -8; 2 0")
    assert parsed.block_length is None
    assert np.array_equal(parsed.generators, rotated.generators)

    stable = serialization.parse_cocycle("1 STABLE | 0.25 | 0.5")
    assert stable.orientation is constants.Orientation.STABLE
    assert stable.generators[:, 0, 0].tolist() == [0.25, 0.5]


def test_dump_cocycle(rotated):
    assert serialization.parse_cocycle(serialization.dump_cocycle(rotated)) == rotated


@pytest.mark.parametrize(
    "text",
    [
        "2 sideways | 1 0; 0 1",  # unknown orientation
        "2 unstable | 1 0; 0",  # ragged matrix
        "2 unstable | 1 0; 0 x",  # not a number
        "2 unstable",  # no matrices
        "2 unstable | 1 0; 0 0",  # singular
    ],
)
def test_malformed_cocycles(text: str):
    with pytest.raises(DomainError):
        serialization.parse_cocycle(text)


def test_format_value():
    assert serialization.format_value(1 / 3) == "0.333333333333"
    assert serialization.format_value(np.float64(2.0)) == "2"
    assert serialization.format_value(True) == "true"
    assert serialization.format_value(np.bool_(False)) == "false"
    assert serialization.format_value(None) == ""
    assert serialization.format_value(7) == "7"


def test_write_csv(tmp_path: pathlib.Path):
    path = serialization.write_csv(
        tmp_path / "nested" / "table.csv", ("a", "b"), [(1, 0.5), (2, None)]
    )
    assert path.read_text(encoding="utf-8") == "a,b\n1,0.5\n2,\n"


def test_write_points(tmp_path: pathlib.Path):
    cloud = geometry.sample_invariant_set(HorseshoeModel.linear(3.0, 0.2), 2)
    lines = serialization.write_points(tmp_path / "points.csv", cloud).read_text().splitlines()
    assert lines[0] == "x0,x1"
    assert len(lines) == cloud.size + 1
