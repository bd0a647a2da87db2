"""Expected shared-link load of a two-cell hybrid placement.

The coded load counts coded delivery steps: at step ``i`` the server serves
the ``i``-th distinct coded request queued at each cell, so the number of
steps is the larger of the two per-cell distinct-request counts. Each step
costs ``F·(2-T)/(T+1)`` bits with ``T = 2·M_p/N_p``. The un-cached load counts
distinct full-content broadcasts.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import TwoCellTopology, cached_area_fraction, exclusive_fraction
from .model import ContentLibrary, Placement

__all__ = [
    "DistinctRequestModel",
    "LoadBreakdown",
    "next_distinct_probabilities",
    "next_distinct_probability",
    "distinct_count_table",
    "distinct_request_distribution",
    "distinct_request_model",
    "step_idle_probability",
    "step_cost",
    "coded_step_cost",
    "expected_steps",
    "coded_load",
    "uncached_load",
    "total_load",
    "load_breakdown",
    "baseline_coded_rate",
]


def next_distinct_probabilities(
    coded_mass: float, coded_count: int, exclusive: float, user_count: int
) -> np.ndarray:
    """Probabilities ``q[j]`` that the next request is the ``j``-th new coded one.

    Index 0 is unused and always 0, so ``q[j]`` lines up with ``j = 1..Z+1``;
    ``q[j] = 0`` for ``j > coded_count``.
    """
    q = np.zeros(user_count + 2)
    if coded_count > 0:
        j = np.arange(1, min(coded_count, user_count + 1) + 1)
        q[j] = (1.0 - (j - 1) / coded_count) * coded_mass * exclusive
    return q


def distinct_count_table(q: Sequence[float], user_count: int) -> np.ndarray:
    """Distribution of the distinct coded-request count after each request.

    Returns ``L`` of shape ``(Z+1, Z+1)`` with ``L[z, j] = Pr{l^(z) = j}``,
    built forward from ``L[0, 0] = 1``. ``q`` must be indexable up to ``Z+1``.
    """
    Z = user_count
    q = np.asarray(q, dtype=float)
    stay = 1.0 - q[1 : Z + 2]  # stay[j] = 1 - q[j+1]
    L = np.zeros((Z + 1, Z + 1))
    L[0, 0] = 1.0
    for z in range(1, Z + 1):
        prev = L[z - 1, :z]
        L[z, :z] = prev * stay[:z]
        L[z, 1 : z + 1] += prev * q[1 : z + 1]
    return L


@dataclass(frozen=True)
class DistinctRequestModel:
    """Per-cell distinct coded-request distributions.

    ``q[c]``, ``l_dist[c]`` and ``tail[c]`` are indexed by ``c - 1``.
    ``tail[c][i] = Pr{l_c >= i}`` for ``i = 0..Z+1``.
    """

    q: tuple
    l_dist: tuple
    tail: tuple

    @property
    def user_count(self) -> int:
        return self.l_dist[0].shape[0] - 1

    def tail_at(self, cell: int, step: int) -> float:
        t = self.tail[cell - 1]
        return float(t[step]) if step < t.size else 0.0


def _tail(final_row: np.ndarray) -> np.ndarray:
    # tail[i] = sum_{j >= i} final_row[j], padded with a trailing 0 for i = Z+1
    t = np.append(np.cumsum(final_row[::-1])[::-1], 0.0)
    return np.clip(t, 0.0, 1.0)


def _coded_mass(library: ContentLibrary, placement: Placement) -> float:
    return library.mass(placement.coded_set)


def next_distinct_probability(
    library: ContentLibrary,
    topology: TwoCellTopology,
    placement: Placement,
    cache: int,
    j: int,
) -> float:
    if j < 1:
        raise ValueError("j starts at 1")
    Np = placement.coded_count
    if j > Np:
        return 0.0
    return (1.0 - (j - 1) / Np) * _coded_mass(library, placement) * exclusive_fraction(
        topology, cache
    )


def distinct_request_distribution(
    library: ContentLibrary, topology: TwoCellTopology, placement: Placement, cache: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(q, l_dist, tail)`` for one cell; see :class:`DistinctRequestModel`."""
    Z = topology.user_count
    q = next_distinct_probabilities(
        _coded_mass(library, placement),
        placement.coded_count,
        exclusive_fraction(topology, cache),
        Z,
    )
    L = distinct_count_table(q, Z)
    return q, L, _tail(L[Z])


def distinct_request_model(
    library: ContentLibrary, topology: TwoCellTopology, placement: Placement
) -> DistinctRequestModel:
    parts = [distinct_request_distribution(library, topology, placement, c) for c in (1, 2)]
    q, l_dist, tail = zip(*parts)
    return DistinctRequestModel(q=tuple(q), l_dist=tuple(l_dist), tail=tuple(tail))


def step_idle_probability(model: DistinctRequestModel, step: int) -> float:
    """Probability that neither cell has an ``step``-th distinct coded request."""
    if step < 1:
        raise ValueError("steps start at 1")
    return (1.0 - model.tail_at(1, step)) * (1.0 - model.tail_at(2, step))


def step_cost(coded_share: int, coded_count: int) -> float:
    """(2-T)/(T+1) with T = 2·M_p/N_p; 0 when every cache holds all coded contents."""
    if coded_count == 0 or coded_count <= coded_share:
        return 0.0
    T = 2.0 * coded_share / coded_count
    return (2.0 - T) / (T + 1.0)


def coded_step_cost(placement: Placement) -> float:
    """Load of one coded delivery step, in units of F."""
    return step_cost(placement.coded_share, placement.coded_count)


def expected_steps(
    coded_mass: float, coded_count: int, v1: float, v2: float, user_count: int
) -> float:
    """E[H] = sum_i (1 - Pr{Q_i = 0}) from the two per-cell tail sequences."""
    Z = user_count

    def tail(v):
        q = next_distinct_probabilities(coded_mass, coded_count, v, Z)
        return _tail(distinct_count_table(q, Z)[Z])

    t1, t2 = tail(v1), tail(v2)
    idle = (1.0 - t1[1 : Z + 1]) * (1.0 - t2[1 : Z + 1])
    return float(np.sum(1.0 - idle))


def coded_load(
    library: ContentLibrary, topology: TwoCellTopology, placement: Placement
) -> float:
    """r1: expected bits sent for coded requests."""
    cost = coded_step_cost(placement)
    if cost == 0.0:
        return 0.0
    steps = expected_steps(
        _coded_mass(library, placement),
        placement.coded_count,
        exclusive_fraction(topology, 1),
        exclusive_fraction(topology, 2),
        topology.user_count,
    )
    return library.content_size_bits * cost * steps


def uncached_load(
    library: ContentLibrary, topology: TwoCellTopology, placement: Placement
) -> float:
    """r2: expected bits of full-content broadcasts.

    Content ``n`` is broadcast once if at least one of the ``Z`` users asks for
    it from a spot where no reachable cache holds it.
    """
    Z = topology.user_count
    frac = np.array(
        [cached_area_fraction(topology, placement, n) for n in range(1, library.content_count + 1)]
    )
    miss = library.popularity * (1.0 - frac)
    return library.content_size_bits * float(np.sum(1.0 - (1.0 - miss) ** Z))


@dataclass(frozen=True)
class LoadBreakdown:
    coded: float
    uncached: float

    @property
    def total(self) -> float:
        return self.coded + self.uncached


def load_breakdown(
    library: ContentLibrary, topology: TwoCellTopology, placement: Placement
) -> LoadBreakdown:
    return LoadBreakdown(
        coded_load(library, topology, placement),
        uncached_load(library, topology, placement),
    )


def total_load(
    library: ContentLibrary, topology: TwoCellTopology, placement: Placement
) -> float:
    """r = r1 + r2 in bits."""
    return load_breakdown(library, topology, placement).total


def baseline_coded_rate(K: int, M: float, N: int) -> float:
    """Shared-link rate of centralized coded caching with K users, in units of F."""
    if K < 1 or N < 1:
        raise ValueError("K and N must be positive")
    if not 0 <= M <= N:
        raise ValueError("need 0 <= M <= N")
    return K * (1.0 - M / N) * min(1.0 / (1.0 + K * M / N), N / K)
