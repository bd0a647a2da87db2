"""Content library, popularity profiles and cache placements.

Contents are identified by 1-based indices in nonincreasing popularity order,
so content ``n`` has popularity ``library.popularity[n - 1]``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

__all__ = [
    "ContentLibrary",
    "Placement",
    "PlacementViolation",
    "SchemeMode",
    "zipf_popularity",
    "validate_placement",
    "check_placement",
]


def zipf_popularity(content_count: int, alpha: float) -> np.ndarray:
    """Zipf request probabilities ``p_n ∝ n**-alpha`` for ``n = 1..N``.

    ``alpha = 0`` gives the uniform profile.
    """
    if content_count < 1:
        raise ValueError("content_count must be at least 1")
    if alpha < 0:
        raise ValueError(f"Zipf exponent must be nonnegative, got {alpha!r}")
    weights = np.arange(1, content_count + 1, dtype=float) ** (-float(alpha))
    return weights / weights.sum()


@dataclass(frozen=True, eq=False)
class ContentLibrary:
    """N equal-size contents with a request distribution.

    Parameters
    ----------
    popularity : array-like
        Request probability of each content, nonincreasing and summing to 1.
    content_size_bits : float
        Size ``F`` of each content. Loads are expressed in these units.
    """

    popularity: np.ndarray
    content_size_bits: float = 1.0

    def __post_init__(self) -> None:
        p = np.asarray(self.popularity, dtype=float).copy()
        if p.ndim != 1 or p.size < 1:
            raise ValueError("popularity must be a nonempty vector")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValueError("popularity entries must be finite and nonnegative")
        if abs(p.sum() - 1.0) > 1e-9:
            raise ValueError(f"popularity must sum to 1, sums to {p.sum()!r}")
        if np.any(np.diff(p) > 1e-15):
            raise ValueError("popularity must be sorted in nonincreasing order")
        if not self.content_size_bits > 0:
            raise ValueError("content_size_bits must be positive")
        p.setflags(write=False)
        object.__setattr__(self, "popularity", p)

    @classmethod
    def zipf(cls, content_count: int, alpha: float, content_size_bits: float = 1.0):
        return cls(zipf_popularity(content_count, alpha), content_size_bits)

    @classmethod
    def from_weights(cls, weights: Iterable[float], content_size_bits: float = 1.0):
        """Normalise arbitrary nonnegative weights and sort them canonically."""
        w = np.sort(np.asarray(list(weights), dtype=float))[::-1]
        if w.sum() <= 0:
            raise ValueError("weights must have positive total")
        return cls(w / w.sum(), content_size_bits)

    @property
    def content_count(self) -> int:
        return int(self.popularity.size)

    def p(self, content: int) -> float:
        return float(self.popularity[content - 1])

    def mass(self, contents: Iterable[int]) -> float:
        return float(sum(self.popularity[n - 1] for n in contents))


class SchemeMode(enum.Enum):
    """Which part of the placement space a scheme may use."""

    MAHC = "MAHC"
    MACC = "MACC"
    UNCODED = "ConventionalUncoded"

    @classmethod
    def parse(cls, text: str) -> "SchemeMode":
        key = text.strip().lower()
        aliases = {
            "mahc": cls.MAHC,
            "hybrid": cls.MAHC,
            "macc": cls.MACC,
            "coded": cls.MACC,
            "uncoded": cls.UNCODED,
            "conventional": cls.UNCODED,
            "conventionaluncoded": cls.UNCODED,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown scheme {text!r}") from None

    @property
    def label(self) -> str:
        return {"MAHC": "MAHC", "MACC": "MACC", "ConventionalUncoded": "uncoded"}[self.value]


@dataclass(frozen=True)
class Placement:
    """Per-cell cache contents for the two-cell cluster.

    ``coded_share`` contents' worth of each cache (``M_p``) holds coded
    fragments of every content in ``coded_set``; the rest of each cache holds
    whole contents, ``uncoded_set_1`` in cell 1 and ``uncoded_set_2`` in cell 2.
    ``cluster_membership`` maps each cell to its coded-delivery cluster; both
    cells always share cluster 0 in the two-cell network.
    """

    cache_capacity: int
    coded_share: int = 0
    coded_set: frozenset = frozenset()
    uncoded_set_1: frozenset = frozenset()
    uncoded_set_2: frozenset = frozenset()
    cluster_membership: tuple = field(default=(0, 0))

    def __post_init__(self) -> None:
        for name in ("coded_set", "uncoded_set_1", "uncoded_set_2"):
            object.__setattr__(self, name, frozenset(int(n) for n in getattr(self, name)))

    @property
    def coded_count(self) -> int:
        """N_p, the number of contents in the coded part."""
        return len(self.coded_set)

    @property
    def uncoded_share(self) -> int:
        return self.cache_capacity - self.coded_share

    @property
    def load_factor(self) -> Optional[float]:
        """T = 2·M_p/N_p, or None without a coded part."""
        if not self.coded_set:
            return None
        return 2.0 * self.coded_share / len(self.coded_set)

    def uncoded_set(self, cell: int) -> frozenset:
        if cell == 1:
            return self.uncoded_set_1
        if cell == 2:
            return self.uncoded_set_2
        raise ValueError(f"cell index must be 1 or 2, got {cell!r}")

    def swapped(self) -> "Placement":
        return Placement(
            self.cache_capacity,
            self.coded_share,
            self.coded_set,
            self.uncoded_set_2,
            self.uncoded_set_1,
            self.cluster_membership[::-1],
        )

    def tie_key(self) -> tuple:
        """Total order used to break ties between equal-load placements."""
        return (
            self.coded_share,
            len(self.coded_set),
            tuple(sorted(self.coded_set)),
            tuple(sorted(self.uncoded_set_1)),
            tuple(sorted(self.uncoded_set_2)),
        )

    def describe(self) -> str:
        def fmt(s):
            return ",".join(str(n) for n in sorted(s))

        return (
            f"M={self.cache_capacity} M_p={self.coded_share} "
            f"coded={{{fmt(self.coded_set)}}} "
            f"uncoded1={{{fmt(self.uncoded_set_1)}}} "
            f"uncoded2={{{fmt(self.uncoded_set_2)}}}"
        )


@dataclass(frozen=True)
class PlacementViolation:
    """First constraint a placement breaks."""

    constraint: str
    message: str

    def __str__(self) -> str:
        return f"{self.constraint}: {self.message}"


def validate_placement(
    placement: Placement,
    library: ContentLibrary,
    mode: Optional[SchemeMode] = None,
    allow_partial_coded: bool = False,
) -> Optional[PlacementViolation]:
    """Return the first violated constraint, or None when ``placement`` is valid.

    With ``mode`` given, the scheme's preset (all-coded for MACC, no coded part
    for conventional uncoded caching) is checked too.

    By default a coded part must satisfy ``N_p <= 2·M_p``: the two caches
    then jointly hold every coded content, which is what lets users in the
    overlap decode coded contents without the shared link. Pass
    ``allow_partial_coded=True`` to accept any ``M_p < N_p``.
    """
    N = library.content_count
    M, Mp = placement.cache_capacity, placement.coded_share
    Np = placement.coded_count

    if not 0 <= M <= N:
        return PlacementViolation("capacity", f"cache capacity M={M} outside [0, {N}]")
    if not 0 <= Mp <= M:
        return PlacementViolation("coded_share", f"coded share M_p={Mp} outside [0, {M}]")
    for name in ("coded_set", "uncoded_set_1", "uncoded_set_2"):
        bad = sorted(n for n in getattr(placement, name) if not 1 <= n <= N)
        if bad:
            return PlacementViolation("index", f"{name} has contents outside 1..{N}: {bad}")
    if Mp == 0 and Np != 0:
        return PlacementViolation(
            "coded_count", f"coded set of {Np} contents needs a positive coded share"
        )
    if Mp > 0 and not Mp < Np <= N:
        return PlacementViolation(
            "coded_count", f"need M_p < N_p <= N, got M_p={Mp}, N_p={Np}, N={N}"
        )
    if Mp > 0 and not allow_partial_coded and Np > 2 * Mp:
        return PlacementViolation(
            "coded_coverage",
            f"N_p={Np} > 2·M_p={2 * Mp}: the two caches cannot jointly hold every coded content",
        )
    for cell in (1, 2):
        size = len(placement.uncoded_set(cell))
        if size != M - Mp:
            return PlacementViolation(
                f"uncoded_size_{cell}",
                f"cell {cell} holds {size} uncoded contents, needs M - M_p = {M - Mp}",
            )
        overlap = placement.coded_set & placement.uncoded_set(cell)
        if overlap:
            return PlacementViolation(
                f"disjoint_{cell}",
                f"contents {sorted(overlap)} are both coded and uncoded in cell {cell}",
            )
    if tuple(placement.cluster_membership) != (0, 0):
        return PlacementViolation(
            "cluster", "both cells must belong to the single coded-delivery cluster"
        )
    if mode is SchemeMode.MACC and Mp != M:
        return PlacementViolation("mode", f"MACC requires M_p = M, got M_p={Mp}, M={M}")
    if mode is SchemeMode.UNCODED and (Mp != 0 or Np != 0):
        return PlacementViolation("mode", "conventional uncoded caching has no coded part")
    return None


def check_placement(
    placement: Placement, library: ContentLibrary, mode=None, allow_partial_coded=False
) -> None:
    """Raise ValueError when ``placement`` is invalid."""
    violation = validate_placement(placement, library, mode, allow_partial_coded)
    if violation is not None:
        raise ValueError(str(violation))
