"""Monte-Carlo simulation of one delivery phase per trial.

Each trial draws its own generator from ``SeedSequence(base_seed,
spawn_key=(trial,))`` with the PCG64 bit generator, so trial ``k`` sees the
same random stream no matter how many trials run or in which order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .analytic import coded_step_cost
from .geometry import TwoCellTopology
from .model import ContentLibrary, Placement

__all__ = [
    "ONLY_1",
    "ONLY_2",
    "BOTH",
    "TrialOutcome",
    "TrialStatistics",
    "trial_rng",
    "sample_user_positions",
    "sample_demands",
    "simulate_delivery",
    "simulate_trial",
    "run_trials",
    "summarize",
]

ONLY_1 = frozenset({1})
ONLY_2 = frozenset({2})
BOTH = frozenset({1, 2})


def trial_rng(base_seed: int, trial: int) -> np.random.Generator:
    """Generator for trial ``trial`` of a run seeded with ``base_seed``."""
    ss = np.random.SeedSequence(entropy=int(base_seed), spawn_key=(int(trial),))
    return np.random.Generator(np.random.PCG64(ss))


def sample_user_positions(
    topology: TwoCellTopology, rng: np.random.Generator, count: int | None = None
) -> tuple[frozenset, ...]:
    """Access sets of users placed uniformly over the union of the two cells.

    Points are drawn uniformly in the union's bounding box and rejected until
    ``count`` (default ``topology.user_count``) land inside a cell.
    """
    if topology.union_area <= 0:
        raise ValueError("coverage union has zero area")
    n = topology.user_count if count is None else count
    r1, r2, d = topology.radius_1, topology.radius_2, topology.distance
    x_lo, x_hi = min(-r1, d - r2), max(r1, d + r2)
    y_hi = max(r1, r2)
    accepted: list[frozenset] = []
    while len(accepted) < n:
        batch = max(16, 2 * (n - len(accepted)))
        x = rng.uniform(x_lo, x_hi, batch)
        y = rng.uniform(-y_hi, y_hi, batch)
        in1 = x * x + y * y <= r1 * r1
        in2 = (x - d) ** 2 + y * y <= r2 * r2
        for a, b in zip(in1, in2):
            if a and b:
                accepted.append(BOTH)
            elif a:
                accepted.append(ONLY_1)
            elif b:
                accepted.append(ONLY_2)
            if len(accepted) == n:
                break
    return tuple(accepted)


def sample_demands(
    library: ContentLibrary, count: int, rng: np.random.Generator
) -> np.ndarray:
    """``count`` independent requests (1-based content ids) by inverse CDF."""
    cdf = np.cumsum(library.popularity)
    cdf[-1] = 1.0
    u = rng.random(count)
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, library.content_count - 1) + 1


@dataclass(frozen=True)
class TrialOutcome:
    """Result of serving one demand vector.

    ``coded_queues[c - 1]`` holds the distinct coded contents requested from
    users covered by cell ``c`` alone; ``coded_steps`` is the longer queue.
    """

    uncoded_hits: int
    coded_local: int
    coded_queues: tuple
    coded_steps: int
    uncached_broadcasts: int
    ignored_coded: int
    total_load_bits: float
    demand_vector: tuple


def simulate_delivery(
    library: ContentLibrary,
    topology: TwoCellTopology,
    placement: Placement,
    access_sets: Sequence[frozenset],
    demands: Sequence[int],
) -> TrialOutcome:
    """Serve ``demands`` and count the shared-link load.

    A request is served locally when a reachable cell holds the content
    uncoded, or when the content is coded and the user reaches both cells. A
    coded content requested from inside one cell only joins that cell's
    queue. Anything else is broadcast once, however many users ask for it.
    """
    if len(access_sets) != len(demands):
        raise ValueError("need one access set per demand")
    uncoded = {1: placement.uncoded_set_1, 2: placement.uncoded_set_2}
    coded = placement.coded_set
    hits = coded_local = 0
    queues: dict[int, set] = {1: set(), 2: set()}
    broadcast: set = set()
    for cells, n in zip(access_sets, demands):
        n = int(n)
        if any(n in uncoded[c] for c in cells):
            hits += 1
        elif n in coded:
            if len(cells) == 2:
                coded_local += 1
            else:
                (c,) = cells
                queues[c].add(n)
        else:
            broadcast.add(n)

    # a content already broadcast in full needs no coded delivery
    ignored = 0
    for c in (1, 2):
        dup = queues[c] & broadcast
        ignored += len(dup)
        queues[c] -= dup

    steps = max(len(queues[1]), len(queues[2]))
    F = library.content_size_bits
    load = F * coded_step_cost(placement) * steps + F * len(broadcast)
    return TrialOutcome(
        uncoded_hits=hits,
        coded_local=coded_local,
        coded_queues=(frozenset(queues[1]), frozenset(queues[2])),
        coded_steps=steps,
        uncached_broadcasts=len(broadcast),
        ignored_coded=ignored,
        total_load_bits=load,
        demand_vector=tuple(int(n) for n in demands),
    )


def simulate_trial(
    library: ContentLibrary,
    topology: TwoCellTopology,
    placement: Placement,
    base_seed: int,
    trial: int,
) -> TrialOutcome:
    rng = trial_rng(base_seed, trial)
    access = sample_user_positions(topology, rng)
    demands = sample_demands(library, topology.user_count, rng)
    return simulate_delivery(library, topology, placement, access, demands)


@dataclass(frozen=True)
class TrialStatistics:
    runs: int
    mean_load: float
    std_load: float
    ci_halfwidth: float

    @property
    def ci_low(self) -> float:
        return self.mean_load - self.ci_halfwidth

    @property
    def ci_high(self) -> float:
        return self.mean_load + self.ci_halfwidth


def summarize(loads: Sequence[float]) -> TrialStatistics:
    """Mean, sample std (n-1 divisor) and 95% normal CI half-width."""
    x = np.asarray(loads, dtype=float)
    runs = x.size
    if runs < 1:
        raise ValueError("need at least one trial")
    mean = float(x.mean())
    std = float(x.std(ddof=1)) if runs > 1 else 0.0
    return TrialStatistics(runs, mean, std, 1.96 * std / math.sqrt(runs))


def run_trials(
    library: ContentLibrary,
    topology: TwoCellTopology,
    placement: Placement,
    runs: int = 2000,
    base_seed: int = 0,
) -> TrialStatistics:
    if runs < 1:
        raise ValueError("runs must be at least 1")
    loads = [
        simulate_trial(library, topology, placement, base_seed, k).total_load_bits
        for k in range(runs)
    ]
    return summarize(loads)
