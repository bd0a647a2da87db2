"""Independent reference computations and the bundled self-checks.

The enumeration oracle walks every joint (region, request) outcome of ``Z``
users, so it is exponential in ``Z`` and only meant for tiny instances.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .analytic import distinct_count_table, next_distinct_probabilities, total_load
from .geometry import TwoCellTopology, overlap_ratio
from .model import ContentLibrary, SchemeMode
from .optimizer import optimize
from .simulator import run_trials

__all__ = [
    "Enumeration",
    "enumerate_outcomes",
    "recursion_distribution",
    "oracle_grid",
    "CheckResult",
    "run_checks",
]


@dataclass(frozen=True)
class Enumeration:
    """Exact joint law of the per-cell distinct coded-request counts.

    ``joint[a, b] = Pr{l_1 = a, l_2 = b}``.
    """

    joint: np.ndarray

    @property
    def cell_1(self) -> np.ndarray:
        return self.joint.sum(axis=1)

    @property
    def cell_2(self) -> np.ndarray:
        return self.joint.sum(axis=0)

    def marginal(self, cell: int) -> np.ndarray:
        return self.cell_1 if cell == 1 else self.cell_2

    @property
    def expected_steps(self) -> float:
        """E[max(l_1, l_2)], the exact mean number of coded delivery steps."""
        a, b = np.indices(self.joint.shape)
        return float(np.sum(np.maximum(a, b) * self.joint))


def enumerate_outcomes(
    weights: Sequence[float],
    coded: Iterable[int],
    v1: float,
    v2: float,
    user_count: int,
) -> Enumeration:
    """Brute-force the distinct coded-request counts of both cells.

    Parameters
    ----------
    weights : sequence of float
        Request probability of content ``n`` at position ``n - 1``.
    coded : iterable of int
        1-based ids of the coded contents.
    v1, v2 : float
        Probabilities of a user being covered by cell 1 only / cell 2 only;
        the remainder is the overlap, whose coded requests are served locally.
    user_count : int
        Number of users ``Z``.
    """
    p = [float(w) for w in weights]
    coded = frozenset(coded)
    regions = ((1, v1), (2, v2), (0, 1.0 - v1 - v2))
    single = [
        (region, n, pr * pn)
        for region, pr in regions
        if pr > 0
        for n, pn in enumerate(p, start=1)
        if pn > 0
    ]
    joint = np.zeros((user_count + 1, user_count + 1))
    for outcome in itertools.product(single, repeat=user_count):
        prob = 1.0
        seen = {1: set(), 2: set()}
        for region, n, w in outcome:
            prob *= w
            if region and n in coded:
                seen[region].add(n)
        joint[len(seen[1]), len(seen[2])] += prob
    return Enumeration(joint)


def recursion_distribution(
    weights: Sequence[float], coded: Iterable[int], v: float, user_count: int
) -> np.ndarray:
    """Final row of the distinct-count recursion for one cell."""
    coded = list(coded)
    mass = float(sum(weights[n - 1] for n in coded))
    q = next_distinct_probabilities(mass, len(coded), v, user_count)
    return distinct_count_table(q, user_count)[user_count]


def _oracle_libraries(N: int, Np: int):
    """Weight vectors in which the first ``Np`` (coded) contents are equally popular."""
    rest = N - Np
    yield [1.0 / N] * N
    if rest:
        coded_share = 0.6
        other = [float(k) for k in range(rest, 0, -1)]
        total = sum(other)
        yield [coded_share / Np] * Np + [(1 - coded_share) * o / total for o in other]


def oracle_grid(
    max_users: int = 4,
    max_contents: int = 3,
    exclusive: Sequence[float] = (0.2, 0.33, 0.5),
) -> float:
    """Largest |recursion - enumeration| over the small-instance grid."""
    worst = 0.0
    for N in range(1, max_contents + 1):
        for Np in range(1, N + 1):
            coded = range(1, Np + 1)
            for weights in _oracle_libraries(N, Np):
                for v in exclusive:
                    other = (1.0 - v) / 2.0
                    for Z in range(1, max_users + 1):
                        exact = enumerate_outcomes(weights, coded, v, other, Z).cell_1
                        approx = recursion_distribution(weights, coded, v, Z)
                        worst = max(worst, float(np.max(np.abs(exact - approx))))
    return worst


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    observed: str
    expected: str

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: observed {self.observed}; expected {self.expected}"


def _check(name: str, fn: Callable[[], CheckResult]) -> CheckResult:
    try:
        return fn()
    except Exception as exc:  # a crashing check is a failed check
        return CheckResult(name, False, f"error {type(exc).__name__}: {exc}", "no error")


def run_checks(
    library: ContentLibrary,
    topology: TwoCellTopology,
    capacity: int,
    runs: int = 2000,
    seed: int = 0,
) -> list[CheckResult]:
    """Oracle, geometry, normalisation, dominance and agreement checks."""
    results = []

    def geometry():
        ratio = overlap_ratio(TwoCellTopology(1.0, 1.0, 0.8, 1))
        return CheckResult(
            "geometry ratio (r=1, d=0.8)",
            abs(ratio - 0.3375) <= 5e-4,
            f"{ratio:.6f}",
            "0.3375 ± 0.0005",
        )

    def oracle():
        err = oracle_grid()
        return CheckResult(
            "recursion vs enumeration (Z<=4, N<=3)", err <= 1e-12, f"max error {err:.3e}", "<= 1e-12"
        )

    def normalisation():
        worst = 0.0
        N = library.content_count
        for Np in range(1, N + 1):
            mass = float(library.popularity[:Np].sum())
            for v in (0.0, 0.2, 0.5, 1.0):
                q = next_distinct_probabilities(mass, Np, v, topology.user_count)
                table = distinct_count_table(q, topology.user_count)
                worst = max(worst, float(np.max(np.abs(table.sum(axis=1) - 1.0))))
        return CheckResult(
            "recursion normalisation", worst <= 1e-9, f"max |sum - 1| {worst:.3e}", "<= 1e-9"
        )

    best = {}

    def dominance():
        for mode in SchemeMode:
            best[mode] = optimize(library, topology, mode, capacity)
        hybrid = best[SchemeMode.MAHC].best_load
        others = {m.label: best[m].best_load for m in (SchemeMode.MACC, SchemeMode.UNCODED)}
        ok = all(hybrid <= load + 1e-12 for load in others.values())
        observed = f"MAHC {hybrid:.6g}, " + ", ".join(f"{k} {v:.6g}" for k, v in others.items())
        return CheckResult("scheme dominance", ok, observed, "MAHC <= MACC and MAHC <= uncoded")

    def recompute():
        worst = 0.0
        for res in best.values():
            fresh = total_load(library, topology, res.best_placement)
            worst = max(worst, abs(fresh - res.best_load))
        return CheckResult("optimizer recomputation", worst <= 1e-12, f"max diff {worst:.3e}", "<= 1e-12")

    def agreement():
        lines, ok = [], True
        F = library.content_size_bits
        for mode, res in best.items():
            stats = run_trials(library, topology, res.best_placement, runs, seed)
            tol = max(3 * stats.ci_halfwidth, 0.05 * res.best_load)
            gap = abs(stats.mean_load - res.best_load)
            ok &= gap <= tol
            lines.append(f"{mode.label} |{stats.mean_load / F:.4f}-{res.best_load / F:.4f}|")
        return CheckResult(
            f"simulation vs analysis ({runs} runs)",
            ok,
            "; ".join(lines),
            "gap <= max(3·CI, 5% of analytic)",
        )

    for name, fn in [
        ("geometry", geometry),
        ("oracle", oracle),
        ("normalisation", normalisation),
        ("dominance", dominance),
        ("recompute", recompute),
        ("agreement", agreement),
    ]:
        if name in ("recompute", "agreement") and len(best) < len(SchemeMode):
            results.append(CheckResult(name, False, "skipped", "optimizer results"))
            continue
        results.append(_check(name, fn))
    return results
