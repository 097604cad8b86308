import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sfwm_ladder.coincidence import (EventStream, PairRates, auto_correlation, cross_correlate,
                                     estimate_R, excess_area, expected_histogram,
                                     flatness_pvalue, forward_rates, generate_events,
                                     read_events, thermal_events, write_events)
from sfwm_ladder.errors import InsufficientStatistics
from sfwm_ladder.statistics import DetectorModel, NormalizedTrace, pair_production_rate

TAU = np.arange(-2e-9, 10e-9, 0.01e-9)
IDEAL = DetectorModel(bin_width=1e-9)


def box_trace(height=5.8, lo=0.0, hi=1e-9):
    # excess ``height`` on [lo, hi) with sharp edges
    g2 = np.where((TAU >= lo) & (TAU < hi - 1e-15), 1 + height, 1.0)
    return NormalizedTrace(tau=TAU, g2=g2, B=1.0)


def gauss_trace():
    return NormalizedTrace(tau=TAU, g2=1 + 5 * np.exp(-((TAU - 3e-9) / 1e-9) ** 2), B=1.0)


def test_forward_rates_reproduce_singles():
    tr = gauss_trace()
    det = DetectorModel(efficiency=0.5, dark_rate=100.0)
    rates = forward_rates(tr, 8000.0, 50000.0, det, det)
    assert rates.R_pair == pytest.approx(8000 * 50000 * excess_area(tr) / 0.25)
    s1 = det.efficiency * (rates.R_pair + rates.R_s1_bg) + det.dark_rate
    assert s1 == pytest.approx(8000.0)


def test_forward_rates_reject_impossible_singles():
    with pytest.raises(ValueError):
        forward_rates(gauss_trace(), 10.0, 10.0, DetectorModel(dark_rate=100.0), IDEAL)


def test_zero_efficiency_records_only_dark_counts():
    det = DetectorModel(efficiency=0.0, dark_rate=50.0)
    s = generate_events(gauss_trace(), PairRates(0.0, 1e4, 1e4), det, det, 2.0, seed=1)
    assert s.singles[0] == pytest.approx(50.0, rel=0.3)
    det = DetectorModel(efficiency=0.0)
    s = generate_events(gauss_trace(), PairRates(0.0, 1e4, 1e4), det, det, 2.0, seed=1)
    assert s.s1_times.size == 0 and s.s2_times.size == 0


def test_independent_streams_give_flat_histogram():
    s = generate_events(gauss_trace(), PairRates(0.0, 2e4, 2e4), IDEAL, IDEAL, 5.0, seed=3)
    hist = cross_correlate(s, 1e-9, (-50e-9, 50e-9))
    assert flatness_pvalue(hist) > 1e-3
    assert hist.g2.mean() == pytest.approx(1.0, abs=0.05)


def test_generation_is_deterministic():
    rates = PairRates(1e3, 1e4, 1e4)
    a = generate_events(gauss_trace(), rates, IDEAL, IDEAL, 2.5, seed=42)
    b = generate_events(gauss_trace(), rates, IDEAL, IDEAL, 2.5, seed=42)
    c = generate_events(gauss_trace(), rates, IDEAL, IDEAL, 2.5, seed=43)
    assert np.array_equal(a.s1_times, b.s1_times) and np.array_equal(a.s2_times, b.s2_times)
    assert not np.array_equal(a.s1_times, c.s1_times)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**63), st.floats(0.1, 3.0), st.integers(1, 4))
def test_events_sorted_and_in_range(seed, duration, threads):
    det = DetectorModel(response_fwhm=1e-9, efficiency=0.7, dark_rate=10.0)
    s = generate_events(gauss_trace(), PairRates(500.0, 2e3, 2e3), det, det, duration, seed,
                        threads=threads)
    for t in (s.s1_times, s.s2_times):
        assert np.all(np.diff(t) >= 0)
        assert t.size == 0 or (t[0] >= 0 and t[-1] <= duration)


def test_event_stream_validation():
    with pytest.raises(ValueError):
        EventStream(np.array([0.5, 0.2]), np.empty(0), 1.0, 0)
    with pytest.raises(ValueError):
        EventStream(np.array([1.5]), np.empty(0), 1.0, 0)
    with pytest.raises(ValueError):
        generate_events(gauss_trace(), PairRates(0, 1, 1), IDEAL, IDEAL, 0.0, seed=1)
    with pytest.raises(ValueError):
        PairRates(-1.0, 0.0, 0.0)


def test_empty_stream_histogram():
    s = EventStream(np.empty(0), np.empty(0), 1.0, 0)
    hist = cross_correlate(s, 1e-9, (-5e-9, 5e-9))
    assert hist.counts.sum() == 0
    assert np.all(hist.g2 == 0)
    assert flatness_pvalue(hist) == 1.0
    with pytest.raises(InsufficientStatistics):
        estimate_R(s, 1e-9, (-5e-9, 5e-9))


def test_histogram_hand_example():
    s = EventStream(np.array([1.0, 2.0]), np.array([1.0 + 3.5e-9, 2.0 - 0.5e-9]), 10.0, 0)
    hist = cross_correlate(s, 1e-9, (-2e-9, 5e-9))
    assert hist.counts.tolist() == [0, 1, 0, 0, 0, 1, 0]
    assert hist.accidental_floor == pytest.approx(4 * 1e-9 / 10.0)


def test_expected_histogram_of_box():
    edges = np.arange(-2e-9, 4e-9 + 1e-15, 1e-9)
    g = expected_histogram(box_trace(), IDEAL, IDEAL, edges)
    # the sharp edge is resolved to one 0.01 ns grid step
    np.testing.assert_allclose(g, [1, 1, 6.8, 1, 1, 1], atol=0.05)
    assert g.sum() - g.size == pytest.approx(5.8, rel=1e-6)


def test_recovers_nonclassical_R():
    tr = box_trace()
    rates = forward_rates(tr, 1e5, 1e5, IDEAL, IDEAL)
    s = generate_events(tr, rates, IDEAL, IDEAL, 10.0, seed=11)
    est = estimate_R(s, 1e-9, (-5e-9, 5e-9), tau0=0.5e-9)
    assert abs(est.R - 6.8**2) <= 3 * est.sigma_R
    assert est.R > 1 + 3 * est.sigma_R
    assert est.g_auto1 == pytest.approx(1.0, abs=0.1)


def test_uncorrelated_streams_give_unit_R():
    s = generate_events(gauss_trace(), PairRates(0.0, 1e5, 1e5), IDEAL, IDEAL, 10.0, seed=12)
    est = estimate_R(s, 1e-9, (-5e-9, 5e-9), tau0=0.5e-9)
    assert abs(est.R - 1.0) <= 3 * est.sigma_R


def test_thermal_light_is_classical():
    s = thermal_events(1e5, 1e5, coherence_time=2e-6, duration=1.0, seed=10)
    est = estimate_R(s, 0.2e-6, (-0.1e-6, 0.1e-6), tau0=0.0)
    assert est.g_auto1 == pytest.approx(2.0, rel=0.15)
    assert est.R <= 1 + 3 * est.sigma_R


def test_sparse_stream_is_insufficient():
    s = generate_events(gauss_trace(), PairRates(0.0, 20.0, 20.0), IDEAL, IDEAL, 1.0, seed=5)
    with pytest.raises(InsufficientStatistics):
        estimate_R(s, 1e-9, (-5e-9, 5e-9))
    with pytest.raises(InsufficientStatistics):
        auto_correlation(s.s1_times, s.duration, 1e-9)


def test_cross_estimator_is_unbiased():
    tr = box_trace()
    rates = forward_rates(tr, 2e5, 2e5, IDEAL, IDEAL)
    g = []
    for seed in range(100):
        s = generate_events(tr, rates, IDEAL, IDEAL, 0.5, seed=seed)
        hist = cross_correlate(s, 1e-9, (-1e-9, 2e-9))
        g.append(hist.g2[1])
    g = np.array(g)
    assert abs(g.mean() - 6.8) <= 3 * g.std(ddof=1) / np.sqrt(g.size)


def test_pair_rate_closure_when_pairs_dominate():
    det1 = DetectorModel(efficiency=0.5)
    det2 = DetectorModel(efficiency=0.3)
    rates = PairRates(2e4, 0.0, 0.0)
    s = generate_events(gauss_trace(), rates, det1, det2, 5.0, seed=21)
    hist = cross_correlate(s, 1e-9, (-2e-9, 10e-9))
    coinc = (hist.counts.sum() - hist.accidental_floor * hist.counts.size) / s.duration
    M = pair_production_rate(*s.singles, coinc)
    assert M == pytest.approx(rates.R_pair, rel=0.03)


def test_events_file_round_trip(tmp_path):
    det = DetectorModel(response_fwhm=0.5e-9)
    s = generate_events(gauss_trace(), PairRates(100.0, 500.0, 800.0), det, det, 1.5, seed=2**40)
    path = tmp_path / "events.txt"
    write_events(path, s)
    back = read_events(path)
    assert back.duration == s.duration and back.seed == s.seed
    np.testing.assert_allclose(back.s1_times, s.s1_times, atol=1e-12, rtol=0)
    np.testing.assert_allclose(back.s2_times, s.s2_times, atol=1e-12, rtol=0)
    assert path.read_text().splitlines()[0].startswith("# biphoton-events v1")


def test_read_rejects_foreign_file(tmp_path):
    path = tmp_path / "x.txt"
    path.write_text("1 0.5\n")
    with pytest.raises(ValueError):
        read_events(path)
