"""Coverage geometry of two overlapping circular small cells.

Users are assumed to be spread uniformly over the union of the two discs, so
every access probability below is an area ratio.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .model import Placement

__all__ = [
    "TwoCellTopology",
    "lens_area",
    "intersection_area",
    "exclusive_fraction",
    "overlap_ratio",
    "distance_for_overlap_ratio",
    "cached_area_fraction",
]


def lens_area(r1: float, r2: float, d: float) -> float:
    """Return the area of intersection of two circles.

    Parameters
    ----------
    r1, r2 : float
        Circle radii, both strictly positive.
    d : float
        Distance between the two centres.

    Returns
    -------
    area : float
        0 for disjoint circles, the smaller disc's area when one circle
        contains the other, otherwise the sum of the two circular segments.
    """
    if r1 <= 0 or r2 <= 0:
        raise ValueError(f"radii must be positive, got r1={r1!r}, r2={r2!r}")
    if d < 0:
        raise ValueError(f"distance must be nonnegative, got {d!r}")
    if d >= r1 + r2:
        return 0.0
    if d <= abs(r1 - r2):
        return math.pi * min(r1, r2) ** 2

    # half chord via Kahan's form of Heron's formula; stays accurate at tangency
    a, b, c = sorted((r1, r2, d), reverse=True)
    prod = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c))
    half_chord = 0.5 * math.sqrt(max(prod, 0.0)) / d
    # signed distances from each centre to the radical line
    d1 = (r1 * r1 - r2 * r2 + d * d) / (2.0 * d)
    d2 = d - d1
    area = (
        r1 * r1 * math.atan2(half_chord, d1)
        + r2 * r2 * math.atan2(half_chord, d2)
        - d * half_chord
    )
    return min(max(area, 0.0), math.pi * min(r1, r2) ** 2)


@dataclass(frozen=True)
class TwoCellTopology:
    """Two circular coverage areas with ``user_count`` users spread over them.

    Cell 1 is centred at the origin, cell 2 at ``(distance, 0)``.
    """

    radius_1: float
    radius_2: float
    distance: float
    user_count: int

    def __post_init__(self) -> None:
        if not (self.radius_1 > 0 and self.radius_2 > 0):
            raise ValueError("radii must be positive")
        if not self.distance >= 0:
            raise ValueError("distance must be nonnegative")
        if int(self.user_count) != self.user_count or self.user_count < 1:
            raise ValueError("user_count must be a positive integer")

    @classmethod
    def from_overlap_ratio(
        cls, ratio: float, user_count: int, radius: float = 1.0
    ) -> "TwoCellTopology":
        """Equal-radius topology whose intersection/union ratio is ``ratio``."""
        d = distance_for_overlap_ratio(ratio, radius, radius)
        return cls(radius, radius, d, user_count)

    @property
    def area_1(self) -> float:
        return math.pi * self.radius_1 ** 2

    @property
    def area_2(self) -> float:
        return math.pi * self.radius_2 ** 2

    def area(self, cell: int) -> float:
        _check_cell(cell)
        return self.area_1 if cell == 1 else self.area_2

    @cached_property
    def intersection_area(self) -> float:
        return lens_area(self.radius_1, self.radius_2, self.distance)

    @cached_property
    def union_area(self) -> float:
        return self.area_1 + self.area_2 - self.intersection_area

    @property
    def symmetric(self) -> bool:
        """True when swapping the two cells leaves every load unchanged."""
        return self.radius_1 == self.radius_2

    def with_users(self, user_count: int) -> "TwoCellTopology":
        return TwoCellTopology(self.radius_1, self.radius_2, self.distance, user_count)


def _check_cell(cell: int) -> None:
    if cell not in (1, 2):
        raise ValueError(f"cell index must be 1 or 2, got {cell!r}")


def intersection_area(topology: TwoCellTopology) -> float:
    return topology.intersection_area


def overlap_ratio(topology: TwoCellTopology) -> float:
    """Fraction of the union covered by both cells."""
    return topology.intersection_area / topology.union_area


def exclusive_fraction(topology: TwoCellTopology, cell: int) -> float:
    """Probability that a uniformly placed user is covered by ``cell`` only."""
    _check_cell(cell)
    excl = topology.area(cell) - topology.intersection_area
    return max(excl, 0.0) / topology.union_area


def distance_for_overlap_ratio(
    ratio: float, r1: float = 1.0, r2: float = 1.0, tol: float = 1e-9
) -> float:
    """Invert the intersection/union ratio by bisection on the centre distance.

    The ratio is continuous and nonincreasing in the distance, running from
    ``min(area)/max(area)`` at full containment down to 0 at tangency.
    """
    if r1 <= 0 or r2 <= 0:
        raise ValueError("radii must be positive")
    a1, a2 = math.pi * r1 ** 2, math.pi * r2 ** 2
    top = min(a1, a2) / max(a1, a2)
    if not 0.0 <= ratio <= top + 1e-15:
        raise ValueError(f"overlap ratio must lie in [0, {top}], got {ratio!r}")

    def f(d: float) -> float:
        inter = lens_area(r1, r2, d)
        return inter / (a1 + a2 - inter)

    lo, hi = abs(r1 - r2), r1 + r2
    if ratio >= top:
        return lo
    if ratio <= 0.0:
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > ratio:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def cached_area_fraction(
    topology: TwoCellTopology, placement: "Placement", content: int
) -> float:
    """Share of the union whose users can fetch ``content`` from a cache.

    1 for coded contents and contents held uncoded by both cells, the holding
    cell's area over the union when only one cell holds it uncoded, else 0.
    """
    if content < 1:
        raise ValueError(f"content indices start at 1, got {content!r}")
    if content in placement.coded_set:
        return 1.0
    in1 = content in placement.uncoded_set_1
    in2 = content in placement.uncoded_set_2
    if in1 and in2:
        return 1.0
    if in1:
        return min(topology.area_1 / topology.union_area, 1.0)
    if in2:
        return min(topology.area_2 / topology.union_area, 1.0)
    return 0.0
