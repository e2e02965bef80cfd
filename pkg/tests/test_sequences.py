"""Sequence generators, ratio sweeps, Stirling bracketing, envelopes."""

import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp, mpf

from cantordim import (
    envelope_bound_monotone_from,
    envelope_ratio_bound,
    eps_for,
    faithfulness_diagnostic,
    faithfulness_ratio,
    fit_envelope,
    fit_subgeometric,
    log_prefix_product,
    make_sequence,
    stirling_log_factorial,
    working_dps,
)
from cantordim.sequences import SequenceError

CONSTANT2 = {"kind": "constant", "s": 2}
ARITH = {"kind": "arithmetic", "a1": 2, "d": 1}
GEO = {"kind": "geometric", "b1": 2, "q": 2}
COUNTER = {"kind": "counterexample"}


# ---------------------------------------------------------------------------
# construction and terms
# ---------------------------------------------------------------------------


def test_constant_terms():
    seq = make_sequence(CONSTANT2)
    assert seq.term(5) == 2
    assert seq.eventually_bounded() is True


def test_arithmetic_terms():
    seq = make_sequence(ARITH)
    assert [seq.term(k) for k in (1, 2, 9)] == [2, 3, 10]


def test_counterexample_spikes_are_lazy():
    seq = make_sequence(COUNTER)
    assert seq.term(10) == 10**10
    assert seq.term(11) == 2
    assert seq.term(100) == 10**100
    assert seq.term(1) == 2


def test_geometric_terms_and_log_terms():
    seq = make_sequence(GEO)
    assert seq.term(5) == 2**5
    with working_dps(50):
        assert abs(seq.log_term(20) - mp.ln(mpf(2**20))) <= eps_for(50)


@pytest.mark.parametrize(
    "spec",
    [
        {"kind": "constant", "s": 1},
        {"kind": "arithmetic", "a1": 1, "d": 1},
        {"kind": "arithmetic", "a1": 2, "d": 0},
        {"kind": "geometric", "b1": 1, "q": 2},
        {"kind": "geometric", "b1": 2, "q": "1/2"},
        {"kind": "custom", "table": [2, 1]},
        {"kind": "custom", "table": []},
        {"kind": "nonsense"},
    ],
)
def test_invalid_descriptors_rejected(spec):
    with pytest.raises(SequenceError):
        make_sequence(spec)


def test_rational_parameters_need_integer_terms():
    seq = make_sequence({"kind": "arithmetic", "a1": 2, "d": "3/2"})
    assert seq.term(3) == 5  # 2 + 2*(3/2)
    with pytest.raises(SequenceError):
        seq.term(2)  # 3.5 is not an integer


def test_custom_table_and_tail():
    capped = make_sequence({"kind": "custom", "table": [2, 3, 4]})
    assert capped.term(3) == 4
    assert capped.max_rank() == 3
    with pytest.raises(SequenceError):
        capped.term(4)
    tailed = make_sequence(
        {"kind": "custom", "table": [5, 5], "tail": {"kind": "constant", "s": 3}}
    )
    assert tailed.term(2) == 5
    assert tailed.term(7) == 3
    assert tailed.eventually_bounded() is True


def test_descriptor_round_trip():
    for spec in (CONSTANT2, ARITH, GEO, COUNTER,
                 {"kind": "custom", "table": [2, 3], "tail": GEO}):
        seq = make_sequence(spec)
        assert make_sequence(seq.descriptor()).descriptor() == seq.descriptor()


# ---------------------------------------------------------------------------
# log prefix products (oracles: exact big-integer products, then one log)
# ---------------------------------------------------------------------------


def test_log_prefix_constant():
    with working_dps(50):
        got = log_prefix_product(make_sequence(CONSTANT2), 10).log()
        assert abs(got - 10 * mp.ln(2)) <= eps_for(50)


def test_log_prefix_arithmetic_vs_factorial_oracle():
    with working_dps(50):
        got = log_prefix_product(make_sequence(ARITH), 9).log()
        assert abs(got - mp.ln(mpf(math.factorial(10)))) <= eps_for(50)


def test_log_prefix_counterexample_vs_bigint_oracle():
    with working_dps(50):
        got = log_prefix_product(make_sequence(COUNTER), 10).log()
        assert abs(got - mp.ln(mpf(2**9 * 10**10))) <= eps_for(50)


@settings(max_examples=60, deadline=None)
@given(
    st.sampled_from([CONSTANT2, ARITH, GEO, COUNTER, {"kind": "constant", "s": 7}]),
    st.integers(min_value=2, max_value=40),
)
def test_prefix_product_is_incremental(spec, k):
    seq = make_sequence(spec)
    with working_dps(50):
        whole = log_prefix_product(seq, k).log()
        stepwise = log_prefix_product(seq, k - 1).log() + seq.log_term(k)
        assert abs(whole - stepwise) <= eps_for(50)


# ---------------------------------------------------------------------------
# ratios
# ---------------------------------------------------------------------------


def test_ratio_constant_closed_form():
    seq = make_sequence(CONSTANT2)
    with working_dps(50):
        assert abs(faithfulness_ratio(seq, 101) - mpf(1) / 100) <= eps_for(50)
        for k in (2, 17, 400):
            assert abs(faithfulness_ratio(seq, k) * (k - 1) - 1) <= eps_for(50)


def test_ratio_counterexample_vs_direct_oracle():
    seq = make_sequence(COUNTER)
    with working_dps(50):
        want = mp.ln(mpf(10**10)) / mp.ln(mpf(2**9))
        assert abs(faithfulness_ratio(seq, 10) - want) <= mpf("1e-12")
        assert abs(want - mpf("3.6910312165")) < mpf("1e-9")


def test_ratio_arithmetic_vs_factorial_oracle():
    seq = make_sequence(ARITH)
    with working_dps(50):
        want = mp.ln(11) / mp.ln(mpf(math.factorial(10)))
        got = faithfulness_ratio(seq, 10)
        assert abs(got - want) <= eps_for(50)
        assert abs(got - mpf("0.15875")) < mpf("1e-4")


def test_ratio_needs_k_at_least_2():
    with pytest.raises(SequenceError):
        faithfulness_ratio(make_sequence(CONSTANT2), 1)


# ---------------------------------------------------------------------------
# Stirling bracketing (oracle: exact big-integer factorial, then one log)
# ---------------------------------------------------------------------------


def test_stirling_brackets_exact_log_factorial_up_to_500():
    with working_dps(50):
        fact = 1
        for m in range(1, 501):
            fact *= m
            exact = mp.ln(mpf(fact))
            bounds = stirling_log_factorial(m)
            assert bounds.lower <= exact <= bounds.upper, m


def test_stirling_spot_values():
    with working_dps(50):
        assert stirling_log_factorial(1).contains(0)
        assert stirling_log_factorial(10).contains(mp.ln(mpf(3628800)))
        assert stirling_log_factorial(100).contains(mp.ln(mpf(math.factorial(100))))
        assert abs(mp.ln(mpf(math.factorial(100))) - mpf("363.73938")) < mpf("1e-4")


def test_stirling_rejects_nonpositive():
    with pytest.raises(SequenceError):
        stirling_log_factorial(0)


# ---------------------------------------------------------------------------
# the progression-envelope bound
# ---------------------------------------------------------------------------


def test_envelope_bound_dominates_ratio_and_decreases():
    seq = make_sequence(ARITH)
    with working_dps(50):
        prev = None
        k0 = envelope_bound_monotone_from(2, 3, 1000)
        assert k0 <= 10
        for k in range(10, 1001):
            bound = envelope_ratio_bound(k, 2, 3)
            assert bound >= faithfulness_ratio(seq, k), k
            if prev is not None:
                assert bound < prev, k
            prev = bound


def test_envelope_bound_domain():
    with pytest.raises(SequenceError):
        envelope_ratio_bound(3, 2, 3)
    with pytest.raises(SequenceError):
        envelope_ratio_bound(10, 1, 3)


@pytest.mark.parametrize(
    "spec",
    [
        {"kind": "arithmetic", "a1": 2, "d": 1},
        {"kind": "arithmetic", "a1": 3, "d": 2},
        {"kind": "geometric", "b1": 2, "q": 2},
    ],
)
def test_fitted_envelope_bound_dominates_any_conforming_sequence(spec):
    # whenever the progression envelope fits, the closed-form bound with
    # the fitted parameters sits above the observed ratios
    seq = make_sequence(spec)
    fit = fit_envelope(seq, 300)
    assert fit.fits
    with working_dps(50):
        k0 = envelope_bound_monotone_from(fit.b1, fit.q, 300)
        prev = None
        for k in range(10, 301):
            bound = envelope_ratio_bound(k, fit.b1, fit.q)
            assert bound >= faithfulness_ratio(seq, k), (spec, k)
            if prev is not None and k > k0:
                assert bound < prev, (spec, k)
            prev = bound


# ---------------------------------------------------------------------------
# the diagnostic sweep
# ---------------------------------------------------------------------------


def test_diagnostic_constant_met():
    rep = faithfulness_diagnostic(make_sequence(CONSTANT2), 1000)
    assert rep.verdict == "criterion_met_numerically"
    assert rep.violation_ranks == []
    ks = [k for k, _ in rep.ratios]
    assert ks == list(range(2, 1001))  # no gaps
    # r_k = 1/(k-1), so the partial sum of squares approaches pi^2/6
    with working_dps(50):
        assert abs(rep.square_summable_partial - mp.pi**2 / 6) < mpf("2e-3")


def test_diagnostic_counterexample_violated():
    rep = faithfulness_diagnostic(make_sequence(COUNTER), 1000)
    assert rep.verdict == "criterion_violated"
    assert rep.violation_ranks == [10, 100, 1000]
    assert rep.subgeometric.witness_q == 10
    assert rep.envelope.fits is False


def test_diagnostic_arithmetic_met_with_envelope():
    rep = faithfulness_diagnostic(make_sequence(ARITH), 1000)
    assert rep.verdict == "criterion_met_numerically"
    env = rep.envelope
    assert (env.fits, env.a1, env.d, env.b1, env.q) == (True, 2, 1, 2, 2)
    assert env.degenerate_geometric is False


def test_diagnostic_geometric_degenerate_flag():
    rep = faithfulness_diagnostic(make_sequence({"kind": "geometric", "b1": 3, "q": 1}), 100)
    assert rep.envelope.degenerate_geometric is True
    assert any("q = 1" in note for note in rep.notes)


def test_diagnostic_respects_custom_cap():
    seq = make_sequence({"kind": "custom", "table": [2, 3, 4, 5]})
    rep = faithfulness_diagnostic(seq, 4)
    assert len(rep.ratios) == 3
    with pytest.raises(SequenceError):
        faithfulness_diagnostic(seq, 5)


def test_diagnostic_short_range_is_not_violated_by_one_spike():
    rep = faithfulness_diagnostic(make_sequence(COUNTER), 20)
    assert rep.verdict == "inconclusive"
    assert rep.violation_ranks == [10]


def test_subgeometric_witness_constant():
    assert fit_subgeometric(make_sequence({"kind": "constant", "s": 7}), 50).witness_q == 7


def test_report_serializes_to_json_and_csv():
    rep = faithfulness_diagnostic(make_sequence(ARITH), 50)
    payload = rep.to_jsonable()
    text = json.dumps(payload, sort_keys=True)
    assert json.loads(text)["verdict"] == rep.verdict
    rows = list(rep.csv_rows())
    assert rows[0] == ("k", "r_k")
    assert len(rows) == 1 + len(rep.ratios)
