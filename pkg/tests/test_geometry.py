import math

import numpy as np
import pytest

from conformal_dimension import geometry
from conformal_dimension.errors import DomainError, ResourceError
from conformal_dimension.models import HorseshoeModel, PointCloud, SubshiftSpec, Word

T_U = math.log(2) / math.log(3)
T_S = math.log(2) / math.log(5)


def test_invariant_set_sample(horseshoe: HorseshoeModel):
    cloud = geometry.sample_invariant_set(horseshoe, 4)
    assert cloud.size == 2**8
    assert cloud.ambient_dim == 2
    assert cloud.resolution == pytest.approx(3.0**-4)
    assert np.all((cloud.points >= 0.0) & (cloud.points <= 1.0))
    assert np.unique(cloud.points, axis=0).shape[0] == cloud.size


def test_sampling_is_reproducible(horseshoe: HorseshoeModel):
    plain = geometry.sample_invariant_set(horseshoe, 3)
    assert np.array_equal(plain.points, geometry.sample_invariant_set(horseshoe, 3).points)

    jittered = geometry.sample_invariant_set(horseshoe, 3, 11, jitter=True)
    again = geometry.sample_invariant_set(horseshoe, 3, 11, jitter=True)
    assert np.array_equal(jittered.points, again.points)
    assert not np.array_equal(jittered.points, plain.points)
    assert np.max(np.abs(jittered.points - plain.points)) <= jittered.resolution


def test_jitter_needs_a_seed(horseshoe: HorseshoeModel):
    with pytest.raises(DomainError):
        geometry.sample_invariant_set(horseshoe, 3, jitter=True)


def test_sampling_budget(horseshoe: HorseshoeModel):
    with pytest.raises(ResourceError):
        geometry.sample_invariant_set(horseshoe, 12)


def test_invariant_set_respects_the_coding():
    model = HorseshoeModel.linear(3.0, 0.2, coding=SubshiftSpec.golden_mean())
    cloud = geometry.sample_invariant_set(model, 5)
    # Pasts and futures of length 5 are joined only through admissible transitions.
    assert cloud.size < 13 * 13


def test_unstable_slice(horseshoe: HorseshoeModel):
    cloud = geometry.sample_unstable_slice(horseshoe, Word(symbols=(0, 1)), 6)
    assert cloud.size == 2**6
    assert np.ptp(cloud.points[:, 1]) == 0.0
    assert cloud.kind == "unstable-slice"


def test_stable_slice(horseshoe: HorseshoeModel):
    cloud = geometry.sample_stable_slice(horseshoe, Word(symbols=(1,)), 6)
    assert cloud.size == 2**6
    assert np.ptp(cloud.points[:, 0]) == 0.0


def test_slice_itinerary_must_be_admissible():
    model = HorseshoeModel.linear(3.0, 0.2, coding=SubshiftSpec.golden_mean())
    with pytest.raises(DomainError):
        geometry.sample_unstable_slice(model, Word(symbols=(1, 1)), 4)


def test_local_manifold_size(horseshoe: HorseshoeModel):
    full = geometry.sample_unstable_slice(horseshoe, Word(symbols=(0,)), 6)
    local = geometry.sample_unstable_slice(horseshoe, Word(symbols=(0,)), 6, beta=0.2)
    assert 0 < local.size < full.size
    assert np.all(np.abs(local.points[:, 0] - local.points[0, 0]) <= 0.2)
    with pytest.raises(DomainError):
        geometry.sample_unstable_slice(horseshoe, Word(symbols=(0,)), 6, beta=1.5)


def test_scales():
    assert geometry.dyadic_scales(1, 3) == pytest.approx([0.5, 0.25, 0.125])
    assert geometry.geometric_scales(3.0, 0, 2) == pytest.approx([1.0, 1 / 3, 1 / 9])
    with pytest.raises(DomainError):
        geometry.geometric_scales(1.0, 0, 2)


def test_usable_scales_drop_out_of_range(horseshoe: HorseshoeModel):
    cloud = geometry.sample_invariant_set(horseshoe, 4)
    kept = geometry.usable_scales(cloud, [0.5, 0.2, 0.1, 0.05, 1e-4])
    assert kept.tolist() == [0.2, 0.1, 0.05]


def test_unstable_slice_dimension(horseshoe: HorseshoeModel):
    cloud = geometry.sample_unstable_slice(horseshoe, Word(symbols=(0, 0)), 16)
    result = geometry.box_count(cloud)
    assert result.slope == pytest.approx(T_U, abs=0.03)
    assert list(result.counts) == sorted(result.counts)
    assert result.fit_quality > 0.99


def test_stable_slice_dimension(horseshoe: HorseshoeModel):
    cloud = geometry.sample_stable_slice(horseshoe, Word(symbols=(0, 0)), 16)
    assert geometry.box_count(cloud).slope == pytest.approx(T_S, abs=0.03)


def test_slices_over_different_pasts_agree(horseshoe: HorseshoeModel):
    slopes = [
        geometry.box_count(geometry.sample_unstable_slice(horseshoe, Word(symbols=past), 12)).slope
        for past in ((0, 0), (0, 1), (1, 1))
    ]
    assert max(slopes) - min(slopes) <= 1e-12


@pytest.mark.slow
def test_whole_set_dimension(horseshoe: HorseshoeModel):
    cloud = geometry.sample_invariant_set(horseshoe, 9, 0)
    assert cloud.size >= 10**5
    result = geometry.box_count(cloud, threads=2)
    assert len(result.counts) >= 6
    assert result.slope == pytest.approx(T_U + T_S, abs=0.05)


def test_degenerate_cloud_has_slope_zero():
    cloud = PointCloud(points=np.zeros((5, 2)), depth=0, resolution=0.0)
    result = geometry.box_count(cloud)
    assert result.slope == 0.0
    assert set(result.counts) == {1}


@pytest.fixture
def segment(rng: np.random.Generator) -> PointCloud:
    points = np.column_stack((rng.uniform(0.0, 1.0, 10**4), np.zeros(10**4)))
    return PointCloud(points=points, depth=0, resolution=0.0, kind="segment")


def test_point_spacing(segment: PointCloud):
    spacing = geometry.point_spacing(segment)
    assert 1e-5 < spacing < 1e-4
    assert geometry.point_spacing(PointCloud(points=np.zeros((3, 2)), depth=0, resolution=0.0)) == 0


def test_segment_dimension_with_default_scales(segment: PointCloud):
    result = geometry.box_count(segment)
    assert result.slope == pytest.approx(1.0, abs=0.05)
    assert result.scales.min() >= 4 * geometry.point_spacing(segment)
    assert max(result.counts) <= segment.size / 2


def test_saturated_scales_are_dropped(segment: PointCloud):
    result = geometry.box_count(segment, geometry.dyadic_scales(2, 30))
    assert result.scales.shape[0] < 29
    assert max(result.counts) <= segment.size / 2
    assert result.slope == pytest.approx(1.0, abs=0.05)


def test_box_count_needs_enough_scales(horseshoe: HorseshoeModel):
    cloud = geometry.sample_invariant_set(horseshoe, 2)
    with pytest.raises(DomainError):
        geometry.box_count(cloud, [0.2, 0.1, 0.05, 0.025])


def test_holder_fit_of_identical_models(horseshoe: HorseshoeModel):
    fit = geometry.holder_exponent_fit(horseshoe, horseshoe, 12, 2000, 5)
    assert fit.r_lower == pytest.approx(1.0, abs=0.01)
    assert fit.pairs >= 2000 - 11


def test_holder_fit_of_perturbed_expansion(horseshoe: HorseshoeModel):
    perturbed = HorseshoeModel.linear(3.3, 0.2)
    fit = geometry.holder_exponent_fit(horseshoe, perturbed, 12, 4000, 5)
    assert fit.r_lower == pytest.approx(math.log(3) / math.log(3.3), abs=0.03)
    assert fit.slope > 1.0


def test_holder_fit_needs_matching_codings(horseshoe: HorseshoeModel):
    other = HorseshoeModel.linear(3.0, 0.2, coding=SubshiftSpec.golden_mean())
    with pytest.raises(DomainError, match="codings differ"):
        geometry.holder_exponent_fit(horseshoe, other, 8, 100, 0)


def test_horseshoe_needs_gaps():
    with pytest.raises(ValueError):
        HorseshoeModel.linear(1.5, 0.2)
    with pytest.raises(ValueError):
        HorseshoeModel.linear(3.0, 0.6)
