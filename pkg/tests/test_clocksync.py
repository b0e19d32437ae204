import itertools

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from qbsync.clocksync import (
    SyncConfig,
    accepted_sources,
    check_c1_c2,
    claimed_vector,
    decode_difference,
    encode_difference,
    run_sync,
    triangle_consistent,
    wrap,
)
from qbsync.harness import BotAlways, Crash, FaultProfile, LieClockDifferences, SplitBroadcast, Transcript, profiles_for, replay
from qbsync.clocksync import sync_config_dict


def test_encode_examples():
    assert encode_difference(-1, 4) == (1, 1, 1, 1) == oracles.twos_complement(-1, 4)
    assert encode_difference(5, 4) == (0, 1, 0, 1)
    assert encode_difference(-8, 4) == (1, 0, 0, 0)
    with pytest.raises(ValueError):
        encode_difference(8, 4)
    with pytest.raises(ValueError):
        encode_difference(-9, 4)


def test_round_trip_exhaustive():
    for d in range(-32, 32):
        bits = encode_difference(d, 6)
        assert bits == oracles.twos_complement(d, 6)
        assert decode_difference(bits) == d


@given(st.integers())
def test_wrap_in_range(d):
    w = wrap(d, 8)
    assert -128 <= w < 128 and (w - d) % 256 == 0


def test_config_validation():
    with pytest.raises(ValueError):
        SyncConfig(fresh_lists_per_bit=False)
    with pytest.raises(ValueError):
        SyncConfig(bit_width=1)
    with pytest.raises(ValueError):
        SyncConfig(backend="carrier pigeon")


def test_triangle_and_cliques():
    offsets = [5, 1, 0, 9]
    vecs = {x: claimed_vector(x, offsets, FaultProfile(x), 8) for x in range(1, 5)}
    assert all(triangle_consistent(vecs[a], vecs[b], a, b) for a, b in itertools.combinations(range(1, 5), 2))
    assert accepted_sources(vecs) == (1, 2, 3, 4)
    vecs[4] = claimed_vector(4, offsets, FaultProfile(4, LieClockDifferences({1: 3})), 8)
    assert accepted_sources(vecs) == (1, 2, 3)
    vecs[2] = None
    assert accepted_sources(vecs) == (1, 3)


def test_three_honest_clocks_converge():
    res = run_sync([5, 1, 0], None, SyncConfig(bit_width=8))
    assert len(set(res.after)) == 1
    assert res.report.c1 and res.report.c2 and not res.report.aborted
    assert res.report.qb_runs == 3 * 3 * 8
    assert res.report.messages == res.report.qb_runs * 4


def test_equal_clocks_do_not_move():
    res = run_sync([7, 7, 7, 7], None, SyncConfig(bit_width=6))
    assert res.after == [7] * 4 and res.report.adjustments == [0] * 4


def test_liar_cannot_split_honest_clocks():
    offsets = [10, 3, 0, 6]
    for lie in ({1: 5}, {1: -9, 2: 4, 3: 1}, {2: 30}):
        prof = profiles_for(4, {4: LieClockDifferences(lie)})
        res = run_sync(offsets, prof, SyncConfig(bit_width=8), seed=1)
        assert res.report.c1 and res.report.c2


def test_faulty_sources_dropped():
    offsets = [4, 0, 9, 2]
    for s in (Crash(1), BotAlways(), SplitBroadcast({1: 0, 2: 1, 3: 0})):
        res = run_sync(offsets, profiles_for(4, {4: s}), SyncConfig(bit_width=8), seed=2)
        assert res.report.c1 and res.report.c2
        aborted = [e["source"] for e in res.report.per_rotation if e["aborted"]]
        assert 4 in aborted or not isinstance(s, (Crash, BotAlways))


def test_quantum_backend_matches_dealer_outcome():
    offsets = [3, 0, 2]
    d = run_sync(offsets, None, SyncConfig(bit_width=4, backend="dealer"))
    q = run_sync(offsets, None, SyncConfig(bit_width=4, backend="quantum"))
    assert d.after == q.after


def test_out_of_range_difference_rejected():
    with pytest.raises(ValueError):
        run_sync([0, 200, 0], None, SyncConfig(bit_width=8))


def test_check_c1_c2():
    assert check_c1_c2([0, 4, 2], [2, 2, 2], [1, 2, 3]) == {"c1": True, "c2": True, "max_honest_spread": 4, "max_adjustment": 2}
    assert not check_c1_c2([0, 1], [5, 5], [1, 2])["c2"]


def test_sync_replay():
    offsets = [6, 0, 3, 1]
    faults = {2: LieClockDifferences({1: 2})}
    cfg = SyncConfig(bit_width=6)
    t = Transcript("clocksync", 9, sync_config_dict(offsets, faults, cfg))
    run_sync(offsets, profiles_for(4, faults), cfg, seed=9, transcript=t)
    assert replay(t).identical


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(0, 40), min_size=3, max_size=5), st.integers(0, 1000))
def test_honest_sync_property(offsets, seed):
    res = run_sync(offsets, None, SyncConfig(bit_width=7), seed=seed)
    assert res.report.c1 and res.report.c2
    assert min(offsets) <= res.after[0] <= max(offsets)
