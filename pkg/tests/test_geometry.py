import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mahc.geometry import (
    TwoCellTopology,
    cached_area_fraction,
    distance_for_overlap_ratio,
    exclusive_fraction,
    intersection_area,
    lens_area,
    overlap_ratio,
)
from mahc.model import Placement


def equal_radius_lens(d):
    # unit circles: 2·acos(d/2) - (d/2)·sqrt(4 - d²)
    return 2 * math.acos(d / 2) - (d / 2) * math.sqrt(4 - d * d)


def test_reference_overlap_ratio(unit_topology):
    assert overlap_ratio(unit_topology) == pytest.approx(0.3375, abs=5e-4)


def test_lens_matches_equal_radius_formula():
    for d in np.linspace(0.0, 2.0, 41):
        assert lens_area(1.0, 1.0, d) == pytest.approx(equal_radius_lens(d), abs=1e-12)


def test_lens_matches_monte_carlo_integration():
    rng = np.random.default_rng(11)
    r1, r2, d = 1.0, 0.6, 0.9
    n = 1_000_000
    x = rng.uniform(-r1, d + r2, n)
    y = rng.uniform(-r1, r1, n)
    hit = (x * x + y * y <= r1 * r1) & ((x - d) ** 2 + y * y <= r2 * r2)
    box = (d + r2 + r1) * 2 * r1
    est = hit.mean() * box
    se = box * math.sqrt(hit.mean() * (1 - hit.mean()) / n)
    assert abs(lens_area(r1, r2, d) - est) < 4 * se


def test_coincident_circles():
    top = TwoCellTopology(1.0, 1.0, 0.0, 5)
    assert overlap_ratio(top) == pytest.approx(1.0)
    assert exclusive_fraction(top, 1) == 0.0


def test_disjoint_circles():
    top = TwoCellTopology(1.0, 1.0, 2.5, 5)
    assert intersection_area(top) == 0.0
    assert exclusive_fraction(top, 1) == pytest.approx(0.5)
    assert exclusive_fraction(top, 2) == pytest.approx(0.5)


def test_contained_circle():
    assert lens_area(2.0, 1.0, 0.5) == pytest.approx(math.pi)
    assert lens_area(1.0, 2.0, 1.0) == pytest.approx(math.pi)


def test_exclusive_fraction_at_reference_distance(unit_topology):
    A = equal_radius_lens(0.8)
    expected = (math.pi - A) / (2 * math.pi - A)
    assert expected == pytest.approx(0.33127, abs=1e-5)
    assert exclusive_fraction(unit_topology, 1) == pytest.approx(expected, abs=1e-12)
    assert exclusive_fraction(unit_topology, 2) == pytest.approx(expected, abs=1e-12)


def test_bad_inputs():
    with pytest.raises(ValueError):
        TwoCellTopology(0.0, 1.0, 0.5, 3)
    with pytest.raises(ValueError):
        TwoCellTopology(1.0, 1.0, -0.1, 3)
    with pytest.raises(ValueError):
        TwoCellTopology(1.0, 1.0, 0.5, 0)
    with pytest.raises(ValueError):
        lens_area(-1.0, 1.0, 0.5)
    with pytest.raises(ValueError):
        exclusive_fraction(TwoCellTopology(1.0, 1.0, 0.5, 3), 3)


def test_cached_area_fraction_cases(unit_topology):
    pl = Placement(3, 1, {2, 3}, {1, 4}, {1, 5})
    assert cached_area_fraction(unit_topology, pl, 2) == 1.0
    assert cached_area_fraction(unit_topology, pl, 1) == 1.0
    single = cached_area_fraction(unit_topology, pl, 4)
    assert single == pytest.approx(math.pi / 4.697838, abs=1e-6)
    assert single == pytest.approx(0.66873, abs=1e-5)
    assert cached_area_fraction(unit_topology, pl, 5) == pytest.approx(single)
    assert cached_area_fraction(unit_topology, pl, 9) == 0.0


@pytest.mark.parametrize("ratio", [0.0, 0.1, 0.3375, 0.5, 0.9, 1.0])
def test_distance_for_overlap_ratio_roundtrip(ratio):
    d = distance_for_overlap_ratio(ratio)
    assert overlap_ratio(TwoCellTopology(1.0, 1.0, d, 1)) == pytest.approx(ratio, abs=1e-8)


def test_distance_for_overlap_ratio_unequal_radii():
    d = distance_for_overlap_ratio(0.2, 1.0, 0.7)
    assert overlap_ratio(TwoCellTopology(1.0, 0.7, d, 1)) == pytest.approx(0.2, abs=1e-8)
    with pytest.raises(ValueError):
        distance_for_overlap_ratio(0.9, 1.0, 0.7)


radii = st.floats(0.1, 5.0, allow_nan=False)


@settings(max_examples=300, deadline=None)
@given(r1=radii, r2=radii, d=st.floats(0.0, 12.0, allow_nan=False))
def test_fractions_partition_union(r1, r2, d):
    top = TwoCellTopology(r1, r2, d, 1)
    inter = top.intersection_area
    assert 0.0 <= inter <= min(top.area_1, top.area_2) * (1 + 1e-12)
    total = exclusive_fraction(top, 1) + exclusive_fraction(top, 2) + overlap_ratio(top)
    assert total == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(r1=radii, r2=radii)
def test_intersection_nonincreasing_in_distance(r1, r2):
    grid = np.linspace(0.0, r1 + r2 + 0.5, 400)
    areas = np.array([lens_area(r1, r2, d) for d in grid])
    assert np.all(np.diff(areas) <= 1e-12)
    # no jumps at the containment or tangency boundaries
    assert np.max(np.abs(np.diff(areas))) < 0.1 * math.pi * max(r1, r2) ** 2


@settings(max_examples=200, deadline=None)
@given(
    r1=radii,
    r2=radii,
    d=st.floats(0.0, 12.0, allow_nan=False),
    cells=st.sampled_from(["coded", "both", "one", "two", "none"]),
)
def test_cached_fraction_range(r1, r2, d, cells):
    top = TwoCellTopology(r1, r2, d, 1)
    pl = {
        "coded": Placement(1, 1, {1, 2}),
        "both": Placement(1, 0, (), {1}, {1}),
        "one": Placement(1, 0, (), {1}, {2}),
        "two": Placement(1, 0, (), {2}, {1}),
        "none": Placement(1, 0, (), {2}, {2}),
    }[cells]
    f = cached_area_fraction(top, pl, 1)
    low = min(top.area_1, top.area_2) / top.union_area
    assert f == 0.0 or low - 1e-12 <= f <= 1.0
    if cells == "coded":
        assert f == 1.0
