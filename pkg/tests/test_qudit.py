import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from qbsync.lists import validate_list_set
from qbsync.qudit import (
    BudgetExhausted,
    QuditState,
    apply_basis_phase,
    apply_encoding,
    generate_list_set,
    measure_initial_projection,
    omega,
    pass_probability,
    prepare_initial,
    run_distribution_round,
    run_distribution_rounds,
)
from qbsync.rng import derive_rng


def test_prepare_initial_values():
    assert np.allclose(prepare_initial(2).amplitudes, [0.70710678, 0.70710678], atol=1e-8)
    assert np.allclose(prepare_initial(3).amplitudes, 0.57735027, atol=1e-8)
    for m in range(2, 12):
        assert prepare_initial(m).norm() == pytest.approx(1.0, abs=1e-12)
        assert prepare_initial(m).dim == m


def test_prepare_initial_rejects_small_m():
    with pytest.raises(ValueError):
        prepare_initial(1)


@pytest.mark.parametrize("m", [2, 3, 5])
def test_basis_phase_matches_dense_matrix(m):
    for c in range(m):
        got = apply_basis_phase(prepare_initial(m), c).amplitudes
        assert np.allclose(got, oracles.basis_matrix(m, c) @ oracles.psi0(m), atol=1e-9)


def test_basis_phase_m3_c1():
    w = omega(3)
    got = apply_basis_phase(prepare_initial(3), 1)
    assert np.allclose(got.amplitudes, np.array([1, w, w]) / math.sqrt(3), atol=1e-9)


def test_basis_phase_identity_cases():
    s = prepare_initial(5)
    assert apply_basis_phase(s, 0).allclose(s)
    assert apply_basis_phase(apply_basis_phase(s, 1), 4).allclose(s)
    with pytest.raises(ValueError):
        apply_basis_phase(s, 5)
    with pytest.raises(ValueError):
        apply_basis_phase(s, -1)


@pytest.mark.parametrize("m", [2, 3, 4])
def test_encoding_matches_dense_matrix(m):
    for n in range(m):
        got = apply_encoding(prepare_initial(m), n).amplitudes
        assert np.allclose(got, oracles.encoding_matrix(m, n) @ oracles.psi0(m), atol=1e-9)


def test_encoding_m3_n1_and_additivity():
    w = omega(3)
    s = prepare_initial(3)
    assert np.allclose(apply_encoding(s, 1).amplitudes, np.array([1, w, w * w]) / math.sqrt(3), atol=1e-9)
    assert apply_encoding(s, 0).allclose(s)
    m = 6
    s = prepare_initial(m)
    for a, b in itertools.product(range(m), repeat=2):
        assert apply_encoding(apply_encoding(s, a), b).allclose(apply_encoding(s, (a + b) % m))
    with pytest.raises(ValueError):
        apply_encoding(s, m)


ops = st.integers(min_value=2, max_value=9).flatmap(
    lambda m: st.tuples(
        st.just(m),
        st.lists(st.tuples(st.sampled_from(["basis", "enc"]), st.integers(0, m - 1)), min_size=1, max_size=12),
        st.randoms(use_true_random=False),
    )
)


def _apply(state, seq):
    for kind, x in seq:
        state = apply_basis_phase(state, x) if kind == "basis" else apply_encoding(state, x)
    return state


@settings(max_examples=60, deadline=None)
@given(ops)
def test_unitarity_and_commutation(case):
    m, seq, rnd = case
    s = _apply(prepare_initial(m), seq)
    assert s.norm() == pytest.approx(1.0, abs=1e-9)
    shuffled = list(seq)
    rnd.shuffle(shuffled)
    assert _apply(prepare_initial(m), shuffled).allclose(s)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 8).flatmap(lambda m: st.tuples(st.just(m), st.lists(st.integers(0, m - 1), min_size=m - 1, max_size=m - 1), st.lists(st.integers(0, 1), min_size=m - 1, max_size=m - 1))))
def test_phases_cancel_when_sums_vanish(case):
    m, cs, bits = case
    cs = cs + [(-sum(cs)) % m]
    ns = [(-sum(bits)) % m] + bits
    s = prepare_initial(m)
    for c, n in zip(cs, ns):
        s = apply_encoding(apply_basis_phase(s, c), n)
    assert s.allclose(prepare_initial(m))
    assert pass_probability(s) == 1.0


@pytest.mark.parametrize("m", [2, 3, 4])
def test_pass_probability_exhaustive(m):
    w = omega(m)
    for cs, ns, _ in oracles.all_tuples(m):
        s = prepare_initial(m)
        for c, n in zip(cs, ns):
            s = apply_encoding(apply_basis_phase(s, c), n)
        p = pass_probability(s)
        assert p == pytest.approx(oracles.pass_prob(m, cs, ns), abs=1e-9)
        C, S = sum(cs) % m, sum(ns) % m
        if S == 0:
            assert p == pytest.approx(abs((1 + (m - 1) * w**C) / m) ** 2, abs=1e-9)
        if C == 0:
            assert p == (1.0 if S == 0 else 0.0)


def test_pass_probability_m3_c1_s0():
    s = apply_basis_phase(prepare_initial(3), 1)
    assert pass_probability(s) == pytest.approx(1 / 3, abs=1e-12)


def test_measure_extremes():
    g = derive_rng(0)
    s = prepare_initial(4)
    for _ in range(200):
        d = measure_initial_projection(s, 1.0, g)
        assert d.detected and d.passed
        assert not measure_initial_projection(s, 0.0, g).detected
    orth = apply_encoding(s, 1)
    assert not any(measure_initial_projection(orth, 1.0, g).passed for _ in range(200))
    with pytest.raises(ValueError):
        measure_initial_projection(s, 1.5, g)


def test_single_rounds_respect_invariants():
    g = derive_rng(1)
    kept = 0
    for _ in range(3000):
        r = run_distribution_round(3, 1.0, g)
        assert r.kept == (r.detected and r.projected_initial and r.basis_sum_ok)
        assert all(0 <= c < 3 for c in r.basis_choices)
        assert 0 <= r.encoded_values[0] < 3 and set(r.encoded_values[1:]) <= {0, 1}
        if r.kept:
            kept += 1
            assert sum(r.encoded_values) % 3 == 0
    # 3000 rounds at rate 1/9: mean 333, sd ~17
    assert abs(kept - 3000 / 9) < 4 * math.sqrt(3000 * (1 / 9) * (8 / 9))
    assert [p for p, _ in r.reveals()] == [3, 2, 1]


def test_eta_zero_never_keeps():
    b = run_distribution_rounds(3, 0.0, derive_rng(2), 5000)
    assert not b.kept.any()


@pytest.mark.parametrize("m", [2, 3, 4, 5])
def test_keep_rate_matches_enumeration(m):
    expected = float(oracles.keep_rate(m))
    assert expected == pytest.approx(1 / m**2)
    n = 20_000
    b = run_distribution_rounds(m, 1.0, derive_rng(10, m), n)
    assert np.all(b.encoded_values[b.kept].sum(axis=1) % m == 0)
    sd = math.sqrt(expected * (1 - expected) / n)
    assert abs(b.kept.mean() - expected) < 3 * sd


@pytest.mark.parametrize("eta", [0.3, 0.7])
def test_detector_scaling(eta):
    m, n = 3, 60_000
    p = eta / 9
    b = run_distribution_rounds(m, eta, derive_rng(11), n)
    assert abs(b.kept.mean() - p) < 3 * math.sqrt(p * (1 - p) / n)


def test_generate_list_set_valid_and_round_count():
    used = []
    for t in range(20):
        ls = generate_list_set(3, 100, 1.0, derive_rng(12, t))
        assert ls.length == 100 and ls.provenance == "quantum"
        assert validate_list_set(ls).ok
        used.append(ls.rounds_consumed)
    # rounds to 100 successes at p=1/9: mean 900, sd sqrt(100*(8/9))*9 ~ 85 per run
    assert abs(np.mean(used) - 900) < 3 * 85 / math.sqrt(20)


def test_generate_list_set_m2_lists_equal():
    ls = generate_list_set(2, 500, 1.0, derive_rng(13))
    assert np.array_equal(ls.lists[0], ls.lists[1])


def test_generate_list_set_budget():
    with pytest.raises(BudgetExhausted):
        generate_list_set(3, 10, 0.0, derive_rng(14))
    with pytest.raises(BudgetExhausted):
        generate_list_set(3, 100, 1.0, derive_rng(14), budget=50)


def test_state_is_value_type():
    s = prepare_initial(3)
    t = apply_basis_phase(s, 1)
    assert s.allclose(prepare_initial(3)) and not t.allclose(s)
    assert isinstance(t, QuditState)
