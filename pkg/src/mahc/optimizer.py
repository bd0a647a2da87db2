"""Exhaustive placement search for the two-cell cluster.

The objective separates into a coded part, which depends only on
``(M_p, N_p, coded popularity mass)``, and a sum of per-content un-cached
terms that depend only on where each content sits. For every coded set the
search therefore scores all ordered pairs of uncoded sets at once as a
matrix, which keeps the full enumeration exact while evaluating each
candidate in O(1).
"""
from __future__ import annotations

import functools
import itertools
import math
import time
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .analytic import expected_steps, step_cost, total_load
from .geometry import TwoCellTopology, exclusive_fraction
from .model import ContentLibrary, Placement, SchemeMode

__all__ = [
    "EXACT_LIMIT",
    "CapacityError",
    "InfeasibleError",
    "OptimizationResult",
    "coded_shares",
    "enumerate_placements",
    "count_placements",
    "optimize",
    "optimize_heuristic",
    "brute_force_optimize",
]

EXACT_LIMIT = 14
TIE_TOL = 1e-12


class CapacityError(ValueError):
    """Exact search was asked for a library too large to enumerate."""


class InfeasibleError(ValueError):
    """The scheme has no feasible placement for the given capacity."""


@dataclass(frozen=True)
class OptimizationResult:
    best_placement: Placement
    best_load: float
    scheme: SchemeMode
    evaluations: int
    wall_time: float


def coded_shares(
    mode: SchemeMode, M: int, N: int, allow_partial_coded: bool = False
) -> list[tuple[int, int]]:
    """Feasible ``(M_p, N_p)`` pairs for ``mode``, ordered by M_p then N_p.

    Unless ``allow_partial_coded`` is set, ``N_p <= 2·M_p`` so the two caches
    together hold every coded content in full.
    """
    if mode is SchemeMode.UNCODED:
        return [(0, 0)]
    if mode is SchemeMode.MACC:
        if M == 0:
            return [(0, 0)]
        shares = [M]
    else:
        shares = range(0, M + 1)
    pairs = []
    for Mp in shares:
        if Mp == 0:
            pairs.append((0, 0))
            continue
        u = M - Mp
        for Np in range(Mp + 1, N + 1):
            # the coded set and at least one cell's uncoded set must fit
            if Np + u <= N and (allow_partial_coded or Np <= 2 * Mp):
                pairs.append((Mp, Np))
    return pairs


def _uncoded_pairs(pool: tuple, size: int, symmetric: bool):
    combos = list(itertools.combinations(pool, size))
    for a, A in enumerate(combos):
        start = a if symmetric else 0
        for B in combos[start:]:
            yield A, B


def enumerate_placements(
    library: ContentLibrary,
    mode: SchemeMode,
    M: int,
    symmetric: bool = False,
    candidates: Optional[int] = None,
    allow_partial_coded: bool = False,
) -> Iterator[Placement]:
    """Yield every feasible placement for ``mode`` exactly once.

    With ``symmetric=True`` a placement and its cell-swapped twin are emitted
    once, as the one whose cell-1 uncoded set is lexicographically smaller.
    ``candidates`` restricts all sets to the most popular contents.
    """
    N = library.content_count
    if not 0 <= M <= N:
        raise ValueError(f"capacity M={M} outside [0, {N}]")
    universe = tuple(range(1, (candidates or N) + 1))
    for Mp, Np in coded_shares(mode, M, len(universe), allow_partial_coded):
        u = M - Mp
        for coded in itertools.combinations(universe, Np):
            rest = tuple(n for n in universe if n not in coded)
            for A, B in _uncoded_pairs(rest, u, symmetric):
                yield Placement(M, Mp, frozenset(coded), frozenset(A), frozenset(B))


def count_placements(
    library: ContentLibrary,
    mode: SchemeMode,
    M: int,
    symmetric: bool = False,
    allow_partial_coded: bool = False,
) -> int:
    """Closed-form size of :func:`enumerate_placements`' output."""
    N = library.content_count
    total = 0
    for Mp, Np in coded_shares(mode, M, N, allow_partial_coded):
        c = math.comb(N - Np, M - Mp)
        pairs = c * (c + 1) // 2 if symmetric else c * c
        total += math.comb(N, Np) * pairs
    return total


class _ContentTerms:
    """Per-content un-cached load terms for each holding status."""

    def __init__(self, library: ContentLibrary, topology: TwoCellTopology):
        Z = topology.user_count
        p = library.popularity
        F = library.content_size_bits
        f1 = topology.area_1 / topology.union_area
        f2 = topology.area_2 / topology.union_area

        def term(frac):
            return F * (1.0 - (1.0 - p * (1.0 - frac)) ** Z)

        self.none = term(0.0)
        self.only1 = term(f1)
        self.only2 = term(f2)
        self.both = term(1.0)


@functools.lru_cache(maxsize=None)
def _membership(pool_size: int, size: int):
    """All ``size``-subsets of ``range(pool_size)`` and their 0/1 indicator rows."""
    combos = list(itertools.combinations(range(pool_size), size))
    member = np.zeros((len(combos), pool_size))
    for k, combo in enumerate(combos):
        member[k, list(combo)] = 1.0
    member.setflags(write=False)
    return combos, member


def _search(
    library: ContentLibrary,
    topology: TwoCellTopology,
    mode: SchemeMode,
    M: int,
    slack: Optional[int] = None,
    allow_partial_coded: bool = False,
):
    N = library.content_count
    F = library.content_size_bits
    Z = topology.user_count
    v1 = exclusive_fraction(topology, 1)
    v2 = exclusive_fraction(topology, 2)
    symmetric = topology.symmetric
    terms = _ContentTerms(library, topology)
    p = library.popularity

    best_load = math.inf
    best_key = None
    evaluations = 0
    steps_cache: dict = {}

    for Mp, Np in coded_shares(mode, M, N, allow_partial_coded):
        u = M - Mp
        limit = N
        if slack is not None:
            limit = min(N, Np + 2 * u + slack)
        if Np + u > limit:
            continue
        universe = tuple(range(1, limit + 1))
        cost = step_cost(Mp, Np)

        for coded in itertools.combinations(universe, Np):
            coded_idx = np.array(coded, dtype=int) - 1
            if cost > 0.0:
                mass = float(np.sum(p[coded_idx]))
                key = (Np, mass)
                if key not in steps_cache:
                    steps_cache[key] = expected_steps(mass, Np, v1, v2, Z)
                r1 = F * cost * steps_cache[key]
            else:
                r1 = 0.0
            rest = np.array([n for n in universe if n not in coded], dtype=int)
            ridx = rest - 1
            # contents outside the candidate universe are never cached
            outside = terms.none[limit:].sum() if limit < N else 0.0
            base = r1 + float(terms.none[ridx].sum()) + outside

            combos, member = _membership(len(rest), u)
            C = len(combos)
            d1 = terms.only1[ridx] - terms.none[ridx]
            d2 = terms.only2[ridx] - terms.none[ridx]
            e = terms.both[ridx] - terms.only1[ridx] - terms.only2[ridx] + terms.none[ridx]
            loads = (
                base
                + (member @ d1)[:, None]
                + (member @ d2)[None, :]
                + (member * e) @ member.T
            )
            if symmetric:
                mask = np.triu(np.ones((C, C), dtype=bool))
                evaluations += C * (C + 1) // 2
                masked = np.where(mask, loads, np.inf)
            else:
                evaluations += C * C
                masked = loads
            low = float(masked.min())
            if best_key is None or low < best_load - TIE_TOL * max(1.0, abs(best_load)):
                # first entry within tolerance of the minimum in row-major
                # order is the lexicographically smallest (A, B) pair
                a, b = np.argwhere(masked <= low + TIE_TOL * max(1.0, abs(low)))[0]
                best_load = low
                best_key = (
                    Mp,
                    frozenset(coded),
                    frozenset(int(rest[i]) for i in combos[a]),
                    frozenset(int(rest[i]) for i in combos[b]),
                )

    if best_key is None:
        raise InfeasibleError(f"{mode.value} has no feasible placement for M={M}, N={N}")
    Mp, coded, A, B = best_key
    return Placement(M, Mp, coded, A, B), evaluations


def _finish(library, topology, mode, M, placement, evaluations, t0):
    load = total_load(library, topology, placement)
    return OptimizationResult(
        best_placement=placement,
        best_load=load,
        scheme=mode,
        evaluations=evaluations,
        wall_time=time.perf_counter() - t0,
    )


def optimize(
    library: ContentLibrary,
    topology: TwoCellTopology,
    mode: SchemeMode = SchemeMode.MAHC,
    M: int = 0,
    heuristic_slack: Optional[int] = None,
    allow_partial_coded: bool = False,
) -> OptimizationResult:
    """Minimum-load placement for ``mode`` at capacity ``M``.

    Ties are broken by smallest ``M_p``, then ``N_p``, then the
    lexicographically smallest coded set and uncoded sets. ``best_load`` is
    recomputed from scratch with :func:`~mahc.analytic.total_load`.

    Raises
    ------
    CapacityError
        If ``N`` exceeds :data:`EXACT_LIMIT` and no heuristic slack is given.
    InfeasibleError
        If ``mode`` admits no placement at this capacity (MACC with ``M = N``).
    """
    N = library.content_count
    if not 0 <= M <= N:
        raise ValueError(f"capacity M={M} outside [0, {N}]")
    if heuristic_slack is not None:
        return optimize_heuristic(
            library, topology, mode, M, heuristic_slack, allow_partial_coded
        )
    if N > EXACT_LIMIT:
        raise CapacityError(
            f"exact search supports N <= {EXACT_LIMIT} contents, got N={N}; "
            "pass a heuristic slack (e.g. --heuristic-slack 2) to restrict the "
            "search to the most popular contents"
        )
    t0 = time.perf_counter()
    placement, evaluations = _search(
        library, topology, mode, M, allow_partial_coded=allow_partial_coded
    )
    return _finish(library, topology, mode, M, placement, evaluations, t0)


def optimize_heuristic(
    library: ContentLibrary,
    topology: TwoCellTopology,
    mode: SchemeMode,
    M: int,
    slack: int = 2,
    allow_partial_coded: bool = False,
) -> OptimizationResult:
    """Exact search restricted, per ``(M_p, N_p)``, to the top
    ``N_p + 2(M - M_p) + slack`` contents. Its load upper-bounds the optimum."""
    if slack < 0:
        raise ValueError("slack must be nonnegative")
    if not 0 <= M <= library.content_count:
        raise ValueError(f"capacity M={M} outside [0, {library.content_count}]")
    t0 = time.perf_counter()
    placement, evaluations = _search(
        library, topology, mode, M, slack=slack, allow_partial_coded=allow_partial_coded
    )
    return _finish(library, topology, mode, M, placement, evaluations, t0)


def brute_force_optimize(
    library: ContentLibrary,
    topology: TwoCellTopology,
    mode: SchemeMode,
    M: int,
    allow_partial_coded: bool = False,
) -> OptimizationResult:
    """Reference search: score every enumerated placement with ``total_load``."""
    t0 = time.perf_counter()
    best, best_load, count = None, math.inf, 0
    placements = enumerate_placements(
        library, mode, M, symmetric=topology.symmetric, allow_partial_coded=allow_partial_coded
    )
    for placement in placements:
        count += 1
        load = total_load(library, topology, placement)
        if best is None or load < best_load - TIE_TOL * max(1.0, abs(best_load)):
            best, best_load = placement, load
    if best is None:
        raise InfeasibleError(f"{mode.value} has no feasible placement for M={M}")
    return _finish(library, topology, mode, M, best, count, t0)
