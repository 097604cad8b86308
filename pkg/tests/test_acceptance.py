"""The nine acceptance criteria, each at its stated tolerance and time budget.

Each test records one PASS/FAIL line, printed in the terminal summary.
Run directly (``python3 tests/test_acceptance.py``) for the lines alone.
"""

import math
import time

import numpy as np
import pytest

from sfwm_ladder.biphoton import (DopplerQuadrature, beat_period, g2_closed_form, g2_fourier,
                                  local_maxima)
from sfwm_ladder.coincidence import (PairRates, cross_correlate, flatness_pvalue, forward_rates,
                                     generate_events, estimate_R, thermal_events)
from sfwm_ladder.config import parse_config
from sfwm_ladder.core import AtomicSystem, FieldDrive, ghz_2pi, mhz_2pi
from sfwm_ladder.statistics import (DetectorModel, NormalizedTrace, cauchy_schwarz_R,
                                    cauchy_schwarz_sigma, convolve_detector,
                                    pair_production_rate, total_g2)
from sfwm_ladder.susceptibility import chi1_s2, chi3_s2, oracle_chi1_s2, oracle_chi3_s2
from sfwm_ladder.sweeps import SweepSpec, evaluate, run_sweep

try:
    from conftest import ACCEPTANCE
except ImportError:  # pragma: no cover
    ACCEPTANCE = {}


def record(n, ok, detail):
    ACCEPTANCE[n] = (bool(ok), detail)
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def random_perturbative_sets(count, seed):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        system = AtomicSystem(gamma1=mhz_2pi(rng.uniform(1, 300)),
                              Gamma1=mhz_2pi(rng.uniform(1, 300)),
                              N=10 ** rng.uniform(15, 19), T=300.0)
        op1 = mhz_2pi(rng.uniform(10, 200))
        drive = FieldDrive.from_detunings(
            system, Delta1=ghz_2pi(rng.uniform(-3, 3)), Delta1p=ghz_2pi(rng.uniform(-3, 3)),
            Delta2=mhz_2pi(rng.uniform(-50, 50)), Omega_p1=op1, Omega_p2=1e-3 * op1)
        yield system, drive


def test_criterion_1_oracle_equivalence():
    t0 = time.perf_counter()
    err1, err3 = [], []
    for system, drive in random_perturbative_sets(100, seed=20240501):
        err1.append(abs(chi1_s2(system, drive) / oracle_chi1_s2(system, drive) - 1))
        err3.append(abs(chi3_s2(system, drive) / oracle_chi3_s2(system, drive) - 1))
    elapsed = time.perf_counter() - t0
    ok3 = max(err3) <= 1e-3
    ok1 = max(err1) <= 1e-3
    record(1, ok1 and ok3 and elapsed < 10,
           f"chi3 max rel err {max(err3):.2e} ({'ok' if ok3 else 'bad'}); "
           f"chi1 max rel err {max(err1):.2e}, median {np.median(err1):.2e} "
           f"({'ok' if ok1 else 'bad'}); {elapsed:.2f} s")


def test_criterion_2_fig3a_beating(fig3a):
    t0 = time.perf_counter()
    tr = g2_closed_form(fig3a.system, fig3a.drive, fig3a.tau, quad=None)
    maxima = local_maxima(tr.tau, tr.g2_unnormalized)
    period = beat_period(tr.tau, tr.g2_unnormalized)
    elapsed = time.perf_counter() - t0
    ok = abs(period / 6.94e-9 - 1) <= 0.05 and maxima.size >= 3 and elapsed < 5
    record(2, ok, f"period {period * 1e9:.3f} ns (6.94 +- 5%), {maxima.size} maxima in (0, 25] ns;"
                  f" {elapsed:.2f} s")


def test_criterion_3_hot_suppression():
    t0 = time.perf_counter()
    counts = {}
    for name in ("fig3b_text", "fig3b_caption"):
        scn = parse_config({"preset": name})
        assert scn.system.T == pytest.approx(383.15)
        tr = g2_closed_form(scn.system, scn.drive, scn.tau, quad=scn.doppler)
        counts[name] = local_maxima(tr.tau, tr.g2_unnormalized).size
    elapsed = time.perf_counter() - t0
    ok = all(c == 1 for c in counts.values()) and elapsed < 30
    record(3, ok, f"local maxima {counts}; {elapsed:.2f} s")


def test_criterion_4_route_agreement(fig3a):
    t0 = time.perf_counter()
    closed = g2_closed_form(fig3a.system, fig3a.drive, fig3a.tau, quad=None)
    fourier = g2_fourier(fig3a.system, fig3a.drive, fig3a.tau)
    idx = local_maxima(closed.tau, closed.g2_unnormalized)[:3]
    rel = np.abs(fourier.g2_unnormalized[idx] / closed.g2_unnormalized[idx] - 1)
    elapsed = time.perf_counter() - t0
    ok = idx.size == 3 and rel.max() <= 0.02 and elapsed < 60
    record(4, ok, "relative differences at first three maxima "
                  f"{', '.join(f'{r:.2e}' for r in rel)}; {elapsed:.2f} s")


def test_criterion_5_trends(experiment):
    t0 = time.perf_counter()
    det = run_sweep(SweepSpec.linspace("pump2_detuning", 0.5, 3.0, 11), experiment)
    pwr = run_sweep(SweepSpec.linspace("pump2_power", 10.0, 100.0, 10), experiment)
    g_det = np.array([r["g2_zero"] for r in det])
    g_pwr = np.array([r["g2_zero"] for r in pwr])
    elapsed = time.perf_counter() - t0
    up = bool(np.all(np.diff(g_det) >= 0))
    down = bool(np.all(np.diff(g_pwr) <= 0))
    record(5, up and down and elapsed < 60,
           f"detuning sweep non-decreasing={up} ({g_det[0]:.3g} -> {g_det[-1]:.3g}); "
           f"pump-2 power sweep non-increasing={down} ({g_pwr[0]:.3g} -> {g_pwr[-1]:.3g});"
           f" {elapsed:.2f} s")


def test_criterion_6_cauchy_schwarz():
    R = cauchy_schwarz_R(46.3, 1.00, 1.00)
    sigma = cauchy_schwarz_sigma(46.3, 2.7, 1.00, 0.04, 1.00, 0.14)
    record(6, R == 46.3 and 5 <= sigma <= 12, f"R = {R!r}, sigma_R = {sigma:.3f} (in [5, 12])")


def test_criterion_7_pair_rate():
    M = pair_production_rate(8000, 50000, 40)
    record(7, M == 1.0e7, f"M = {M:.6g} /s")


def test_criterion_8_monte_carlo(experiment):
    t0 = time.perf_counter()
    res = evaluate(experiment)
    ideal = total_g2(res.trace, res.B, res.signal_scale)
    tau_peak, peak = ideal.peak()
    det = DetectorModel(bin_width=0.1e-9)
    rates = forward_rates(ideal, 8000.0, 50000.0, det, det)
    stream = generate_events(ideal, rates, det, det, 100.0, seed=8)
    hist = cross_correlate(stream, 0.1e-9, (-10e-9, 20e-9))
    i = int(np.searchsorted(hist.bin_edges, tau_peak, side="right")) - 1
    g_hat, se = hist.g2[i], hist.g2_sigma[i]
    z = abs(g_hat - peak) / se
    ok_peak = z <= 3

    flat = generate_events(ideal, PairRates(0.0, 8000.0, 50000.0), det, det, 100.0, seed=9)
    p = flatness_pvalue(cross_correlate(flat, 1e-9, (-50e-9, 50e-9)))
    ok_flat = p > 0.01

    thermal = thermal_events(1e5, 1e5, coherence_time=2e-6, duration=1.0, seed=10)
    est = estimate_R(thermal, 0.2e-6, (-0.1e-6, 0.1e-6), tau0=0.0)
    ok_thermal = est.R <= 1 + 3 * est.sigma_R
    elapsed = time.perf_counter() - t0
    record(8, ok_peak and ok_flat and ok_thermal and elapsed < 120,
           f"g2(0) {g_hat:.2f} +- {se:.2f} vs {peak:.2f} ({z:.2f} SE); control p = {p:.3f}; "
           f"thermal R = {est.R:.3f} +- {est.sigma_R:.3f}; {elapsed:.1f} s")


def test_criterion_9_numerical_hygiene(fig3a, experiment):
    scn = experiment
    coarse = g2_closed_form(scn.system, scn.drive, scn.tau, quad=DopplerQuadrature(order=64),
                            check_convergence=False).g2_unnormalized
    fine = g2_closed_form(scn.system, scn.drive, scn.tau, quad=DopplerQuadrature(order=128),
                          check_convergence=False).g2_unnormalized
    doubling = float(np.max(np.abs(fine - coarse)) / np.max(fine))

    four = g2_fourier(fig3a.system, fig3a.drive, fig3a.tau)
    g = four.g2_unnormalized
    leakage = float(np.max(g[four.tau < 0]) / np.max(g))

    tau = np.arange(-20e-9, 40e-9, 0.02e-9)
    trace = NormalizedTrace(tau=tau, g2=1 + 5 * np.exp(-((tau - 5e-9) / 1e-9) ** 2), B=1.0)
    smooth = convolve_detector(trace, DetectorModel(response_fwhm=1.5e-9, bin_width=0.1e-9))
    baseline = float(np.max(np.abs(smooth.g2[(tau < -10e-9) | (tau > 25e-9)] - 1)))

    det = DetectorModel(response_fwhm=1e-9, efficiency=0.5, dark_rate=100.0)
    ideal = NormalizedTrace(tau=tau, g2=trace.g2, B=1.0)
    rates = PairRates(500.0, 2e4, 3e4)
    a = generate_events(ideal, rates, det, det, 6.5, seed=2**63 + 5, threads=1)
    b = generate_events(ideal, rates, det, det, 6.5, seed=2**63 + 5, threads=4)
    same = (np.array_equal(a.s1_times, b.s1_times) and np.array_equal(a.s2_times, b.s2_times))

    ok = doppler_ok = doubling < 1e-6
    ok = ok and leakage <= 1e-4 and baseline <= 1e-9 and same
    record(9, ok, f"order doubling {doubling:.1e} ({'ok' if doppler_ok else 'bad'}); "
                  f"leakage {leakage:.1e}; baseline {baseline:.1e}; "
                  f"thread-count reproducible={same}")


if __name__ == "__main__":
    import sys

    raise SystemExit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider"] + sys.argv[1:]))
