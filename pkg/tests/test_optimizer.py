import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mahc.analytic import total_load
from mahc.geometry import TwoCellTopology
from mahc.model import ContentLibrary, SchemeMode, validate_placement
from mahc.optimizer import (
    EXACT_LIMIT,
    CapacityError,
    InfeasibleError,
    brute_force_optimize,
    coded_shares,
    count_placements,
    enumerate_placements,
    optimize,
    optimize_heuristic,
)

MODES = list(SchemeMode)


def test_uncoded_enumeration_counts():
    lib = ContentLibrary.zipf(3, 1.0)
    full = list(enumerate_placements(lib, SchemeMode.UNCODED, 1))
    assert len(full) == 9
    assert len(list(enumerate_placements(lib, SchemeMode.UNCODED, 1, symmetric=True))) == 6


def test_macc_uses_whole_cache():
    lib = ContentLibrary.zipf(5, 1.0)
    placements = list(enumerate_placements(lib, SchemeMode.MACC, 2))
    assert {p.coded_share for p in placements} == {2}
    assert {p.coded_count for p in placements} == {3, 4}
    with_partial = list(enumerate_placements(lib, SchemeMode.MACC, 2, allow_partial_coded=True))
    assert {p.coded_count for p in with_partial} == {3, 4, 5}


def test_zero_capacity_has_single_empty_placement():
    lib = ContentLibrary.zipf(4, 1.0)
    for mode in MODES:
        (only,) = list(enumerate_placements(lib, mode, 0))
        assert only.coded_share == 0 and not only.coded_set and not only.uncoded_set_1


def test_coded_shares_respect_coverage():
    assert coded_shares(SchemeMode.MAHC, 2, 5) == [(0, 0), (1, 2), (2, 3), (2, 4)]
    assert (1, 3) in coded_shares(SchemeMode.MAHC, 2, 5, allow_partial_coded=True)
    assert coded_shares(SchemeMode.MACC, 4, 4) == []


@pytest.mark.parametrize("mode", MODES)
@pytest.mark.parametrize("N, M", [(3, 1), (4, 2), (5, 3), (5, 5), (6, 2)])
@pytest.mark.parametrize("symmetric", [False, True])
@pytest.mark.parametrize("partial", [False, True])
def test_enumeration_is_complete_and_valid(mode, N, M, symmetric, partial):
    lib = ContentLibrary.zipf(N, 1.0)
    placements = list(enumerate_placements(lib, mode, M, symmetric, allow_partial_coded=partial))
    assert len(placements) == count_placements(lib, mode, M, symmetric, partial)
    assert len({p.tie_key() for p in placements}) == len(placements)
    for p in placements:
        assert validate_placement(p, lib, mode, allow_partial_coded=partial) is None
    if symmetric:
        # one representative per swap pair: the lexicographically ordered one
        assert all(sorted(p.uncoded_set_1) <= sorted(p.uncoded_set_2) for p in placements)
        full = {p.tie_key() for p in enumerate_placements(lib, mode, M, False, allow_partial_coded=partial)}
        covered = {p.tie_key() for p in placements} | {p.swapped().tie_key() for p in placements}
        assert covered == full


def _topologies():
    yield TwoCellTopology(1.0, 1.0, 0.8, 6)
    yield TwoCellTopology(1.0, 1.0, 1.7, 12)
    yield TwoCellTopology(1.0, 0.7, 0.9, 8)
    yield TwoCellTopology(0.5, 1.2, 1.1, 5)


@pytest.mark.parametrize("mode", MODES)
@pytest.mark.parametrize("N, M", [(4, 1), (5, 2), (6, 3)])
@pytest.mark.parametrize("alpha", [0.0, 0.9, 1.8])
def test_fast_search_matches_brute_force(mode, N, M, alpha):
    lib = ContentLibrary.zipf(N, alpha)
    for top in _topologies():
        fast = optimize(lib, top, mode, M)
        slow = brute_force_optimize(lib, top, mode, M)
        assert fast.best_load == pytest.approx(slow.best_load, abs=1e-12)
        assert fast.best_placement == slow.best_placement


def test_fast_search_matches_brute_force_with_partial_coding():
    lib = ContentLibrary.zipf(6, 0.8)
    top = TwoCellTopology(1.0, 0.8, 1.0, 7)
    for mode in (SchemeMode.MAHC, SchemeMode.MACC):
        fast = optimize(lib, top, mode, 2, allow_partial_coded=True)
        slow = brute_force_optimize(lib, top, mode, 2, allow_partial_coded=True)
        assert fast.best_load == pytest.approx(slow.best_load, abs=1e-12)
        assert fast.best_placement == slow.best_placement


@settings(max_examples=60, deadline=None)
@given(
    st.integers(3, 8),
    st.floats(0.0, 2.5),
    st.floats(0.0, 2.2),
    st.integers(1, 14),
    st.data(),
)
def test_dominance_and_recompute(N, alpha, d, Z, data):
    lib = ContentLibrary.zipf(N, alpha)
    top = TwoCellTopology(1.0, 1.0, d, Z)
    M = data.draw(st.integers(0, N - 1))
    results = {mode: optimize(lib, top, mode, M) for mode in MODES}
    hybrid = results[SchemeMode.MAHC].best_load
    assert hybrid <= results[SchemeMode.MACC].best_load + 1e-12
    assert hybrid <= results[SchemeMode.UNCODED].best_load + 1e-12
    for res in results.values():
        assert abs(total_load(lib, top, res.best_placement) - res.best_load) <= 1e-12
        assert validate_placement(res.best_placement, lib, res.scheme) is None


@pytest.mark.parametrize("mode", MODES)
def test_more_cache_never_hurts(reference_library, reference_topology, mode):
    # MACC has no placement at M = N
    top = 10 if mode is SchemeMode.MACC else 11
    loads = [optimize(reference_library, reference_topology, mode, M).best_load for M in range(top)]
    assert all(b <= a + 1e-12 for a, b in zip(loads, loads[1:]))
    if mode is not SchemeMode.MACC:
        assert loads[-1] == 0.0


def test_determinism(reference_library, reference_topology):
    a = optimize(reference_library, reference_topology, SchemeMode.MAHC, 3)
    b = optimize(reference_library, reference_topology, SchemeMode.MAHC, 3)
    assert a.best_placement == b.best_placement
    assert a.best_load == b.best_load
    assert a.evaluations == b.evaluations


def test_tie_break_prefers_smaller_indices():
    # uniform popularity with coincident cells: every uncoded placement of
    # distinct contents ties, and the lexicographically first must win
    lib = ContentLibrary.zipf(5, 0.0)
    top = TwoCellTopology(1.0, 1.0, 0.0, 4)
    res = optimize(lib, top, SchemeMode.UNCODED, 1)
    assert res.best_placement.uncoded_set_1 == {1}
    assert res.best_placement.uncoded_set_2 == {2}


# frozen from the exhaustive reference search, which agrees exactly
REFERENCE_OPTIMA = {
    SchemeMode.MAHC: (2, {2, 3, 4, 5}, {1}, {1}, 2.315249574193436, 33972),
    SchemeMode.MACC: (3, {1, 2, 3, 4}, set(), set(), 2.4234458771896574, 672),
    SchemeMode.UNCODED: (0, set(), {1, 2, 3}, {1, 2, 4}, 2.472147330824139, 7260),
}


@pytest.mark.parametrize("mode", MODES)
def test_reference_configuration_optimum(reference_library, reference_topology, mode):
    Mp, coded, A, B, load, evaluations = REFERENCE_OPTIMA[mode]
    res = optimize(reference_library, reference_topology, mode, 3)
    p = res.best_placement
    assert (p.coded_share, p.coded_set, p.uncoded_set_1, p.uncoded_set_2) == (Mp, coded, A, B)
    assert res.best_load == pytest.approx(load, abs=1e-12)
    assert res.evaluations == evaluations


@pytest.mark.parametrize("alpha", [1.2, 2.0])
def test_heuristic_matches_exact_at_reference_point(alpha, reference_topology):
    lib = ContentLibrary.zipf(10, alpha)
    for mode in MODES:
        exact = optimize(lib, reference_topology, mode, 3)
        approx = optimize_heuristic(lib, reference_topology, mode, 3, slack=2)
        assert approx.best_load == pytest.approx(exact.best_load, abs=1e-12)
        assert approx.evaluations <= exact.evaluations


def test_full_slack_equals_exact():
    lib = ContentLibrary.zipf(7, 0.6)
    top = TwoCellTopology(1.0, 1.0, 1.2, 9)
    for mode in MODES:
        exact = optimize(lib, top, mode, 2)
        wide = optimize_heuristic(lib, top, mode, 2, slack=7)
        assert wide.best_placement == exact.best_placement


@settings(max_examples=30, deadline=None)
@given(st.integers(4, 9), st.floats(0.0, 2.0), st.integers(0, 3))
def test_heuristic_upper_bounds_exact(N, alpha, slack):
    lib = ContentLibrary.zipf(N, alpha)
    top = TwoCellTopology(1.0, 1.0, 0.9, 8)
    exact = optimize(lib, top, SchemeMode.MAHC, 2)
    assert optimize_heuristic(lib, top, SchemeMode.MAHC, 2, slack).best_load >= exact.best_load - 1e-12


def test_large_library_needs_heuristic():
    lib = ContentLibrary.zipf(EXACT_LIMIT + 1, 1.0)
    top = TwoCellTopology(1.0, 1.0, 0.8, 10)
    with pytest.raises(CapacityError, match="heuristic"):
        optimize(lib, top, SchemeMode.MAHC, 3)
    res = optimize(lib, top, SchemeMode.MAHC, 3, heuristic_slack=2)
    assert res.best_load > 0


def test_macc_full_cache_is_infeasible(reference_topology):
    lib = ContentLibrary.zipf(4, 1.0)
    with pytest.raises(InfeasibleError):
        optimize(lib, reference_topology, SchemeMode.MACC, 4)
    assert optimize(lib, reference_topology, SchemeMode.MAHC, 4).best_load == 0.0


def test_rejects_bad_capacity(reference_library, reference_topology):
    with pytest.raises(ValueError):
        optimize(reference_library, reference_topology, SchemeMode.MAHC, 11)
    with pytest.raises(ValueError):
        optimize_heuristic(reference_library, reference_topology, SchemeMode.MAHC, 2, slack=-1)
