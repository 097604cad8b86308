"""Scenario evaluation, one-dimensional sweeps and the files they write."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from . import __version__
from .biphoton import g2_closed_form, g2_fourier, local_maxima
from .coincidence import (cross_correlate, estimate_R, expected_histogram, forward_rates,
                          generate_events, write_events)
from .config import Scenario, _base_name
from .core import FieldDrive, TWO_PI_GHZ, validate_regime
from .errors import ConfigError, SFWMError
from .statistics import NoiseModel, convolve_detector, noise_factor_B, total_g2

# parameter -> (CLI unit, description)
PARAMETERS = {
    "pump2_detuning": ("GHz_2pi", "pump-2 detuning Delta1'"),
    "pump1_detuning": ("GHz_2pi", "pump-1 detuning Delta1"),
    "pump2_power": ("uW", "pump-2 power; scales the noise coefficient A"),
    "pump1_power": ("mW", "pump-1 power; scales Omega_p1 and eps_p1"),
    "temperature": ("C", "cell temperature"),
}
OBSERVABLES = ("g2_trace", "g2_peak", "R", "B")
TRACE_COLUMNS = ("tau_ns", "g2")
SWEEP_COLUMNS = ("param", "g2_zero", "B", "R")
HISTOGRAM_COLUMNS = ("tau_ns", "counts", "g2", "g2_expected")


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple
    observable: str = "g2_peak"

    def __post_init__(self):
        if self.parameter not in PARAMETERS:
            raise ValueError(f"unknown sweep parameter {self.parameter!r}; "
                             f"choose from {', '.join(PARAMETERS)}")
        if self.observable not in OBSERVABLES:
            raise ValueError(f"unknown observable {self.observable!r}")
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.size == 0:
            raise ValueError("sweep needs at least one value")
        steps = np.diff(vals)
        if vals.size > 1 and not (np.all(steps > 0) or np.all(steps < 0)):
            raise ValueError("sweep values must be strictly monotone")

    @classmethod
    def linspace(cls, parameter, start, stop, points, observable="g2_peak"):
        if points < 1:
            raise ValueError("points must be >= 1")
        return cls(parameter, tuple(np.linspace(start, stop, points).tolist()), observable)


@dataclass(frozen=True)
class ScenarioResult:
    trace: object
    B: float
    signal_scale: float
    normalized: object
    g2_zero: float
    tau_peak: float
    R: float
    warnings: tuple


def _raw_trace(scn: Scenario):
    if scn.method == "fourier":
        return g2_fourier(scn.system, scn.drive, scn.tau, quad=scn.doppler)
    return g2_closed_form(scn.system, scn.drive, scn.tau, quad=scn.doppler)


def noise_floor(scn: Scenario) -> float:
    model = NoiseModel.from_drive(scn.system, scn.drive, kappa_A=scn.kappa_A)
    if scn.doppler is None:
        model = replace(model, doppler=None)
    return noise_factor_B(model, scn.system)


def evaluate(scn: Scenario) -> ScenarioResult:
    """G2, noise floor, calibrated and detector-smoothed g2, its peak and R."""
    trace = _raw_trace(scn)
    B = noise_floor(scn)
    det = scn.trace_detector
    if scn.signal_scale is not None:
        scale = scn.signal_scale
    elif scn.target_g2_peak is not None:
        unit = convolve_detector(total_g2(trace, B, 1.0), det)
        scale = (scn.target_g2_peak - 1.0) / (float(np.max(unit.g2)) - 1.0)
    else:
        scale = 1.0
    norm = convolve_detector(total_g2(trace, B, scale), det)
    tau_peak, g2_zero = norm.peak()
    R = g2_zero**2 / (scn.g_auto[0] * scn.g_auto[1])
    return ScenarioResult(trace=trace, B=B, signal_scale=scale, normalized=norm,
                          g2_zero=g2_zero, tau_peak=tau_peak, R=R,
                          warnings=tuple(validate_regime(scn.drive)))


def calibrated(scn: Scenario) -> Scenario:
    """Freeze ``target_g2_peak`` into a fixed ``signal_scale`` at this operating point."""
    if scn.target_g2_peak is None:
        return scn
    return replace(scn, signal_scale=evaluate(scn).signal_scale, target_g2_peak=None)


def _rebuild_drive(scn: Scenario, **changes) -> FieldDrive:
    d = scn.drive
    args = dict(Delta1=d.Delta1, Delta1p=d.Delta1p, Delta2=d.Delta2, Omega_p1=d.Omega_p1,
                Omega_p2=d.Omega_p2, mode_area=d.mode_area)
    args.update(changes)
    return FieldDrive.from_detunings(scn.system, **args)


def _reference_power(scn: Scenario, key: str, parameter: str) -> float:
    ref = scn.pump_powers.get(key)
    if ref is None:
        raise ConfigError(f"a {parameter} sweep needs a reference power in the config",
                          field=f"drive.{'pump1_power_mW' if key == 'p1' else 'pump2_power_uW'}")
    return ref


def apply_parameter(scn: Scenario, parameter: str, value: float) -> Scenario:
    """Scenario with one swept parameter set to ``value`` (in the CLI unit)."""
    if parameter == "pump2_detuning":
        return replace(scn, drive=_rebuild_drive(scn, Delta1p=value * TWO_PI_GHZ))
    if parameter == "pump1_detuning":
        return replace(scn, drive=_rebuild_drive(scn, Delta1=value * TWO_PI_GHZ))
    if parameter == "temperature":
        return replace(scn, system=scn.system.with_(T=value + 273.15))
    if parameter == "pump2_power":
        ratio = value * 1e-6 / _reference_power(scn, "p2", parameter)
        # G2 stays at the calibrated operating point; only the noise coefficient moves
        return replace(scn, kappa_A=scn.kappa_A * math.sqrt(ratio))
    if parameter == "pump1_power":
        ratio = value * 1e-3 / _reference_power(scn, "p1", parameter)
        return replace(scn, drive=_rebuild_drive(scn, Omega_p1=scn.drive.Omega_p1
                                                 * math.sqrt(ratio)))
    raise ValueError(f"unknown sweep parameter {parameter!r}")


def run_sweep(spec: SweepSpec, base: Scenario, threads: int | None = None) -> list[dict]:
    """One row per value, in input order; the signal scale is fixed at the base point."""
    base = calibrated(base)

    def point(value):
        try:
            res = evaluate(apply_parameter(base, spec.parameter, value))
        except SFWMError as exc:
            exc.args = (f"{spec.parameter}={value!r}: {exc}",)
            raise
        return {"param": value, "g2_zero": res.g2_zero, "B": res.B, "R": res.R}

    if threads and threads > 1 and len(spec.values) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(point, spec.values))
    return [point(v) for v in spec.values]


def _fmt(x) -> str:
    return f"{x:.10g}"


def write_csv(path, columns, rows) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(out: Path, command: str, scn: Scenario, outputs: list[Path],
                   extra: dict | None = None) -> Path:
    """Everything needed to re-run: the merged config, seed, version and output hashes."""
    s, d = scn.system, scn.drive
    manifest = {
        "manifest_version": 1,
        "command": command,
        "version": __version__,
        "preset": scn.preset,
        "seed": scn.seed,
        "config": scn.source,
        "resolved": {
            "gamma1_rad_s": s.gamma1, "Gamma1_rad_s": s.Gamma1, "N_m3": s.N, "T_K": s.T,
            "m_kg": s.m, "L_m": s.L, "Delta1_rad_s": d.Delta1, "Delta1p_rad_s": d.Delta1p,
            "Delta2_rad_s": d.Delta2, "Delta2p_rad_s": d.Delta2p,
            "Omega_p1_rad_s": abs(d.Omega_p1), "Omega_p2_rad_s": abs(d.Omega_p2),
            "eps_p1_V_m": d.eps_p1, "eps_p2_V_m": d.eps_p2,
            "doppler": None if scn.doppler is None else [scn.doppler.scheme, scn.doppler.order,
                                                         scn.doppler.cutoff],
            "kappa_A": scn.kappa_A, "method": scn.method,
            "tau_s": [float(scn.tau[0]), float(scn.tau[-1]), int(scn.tau.size)],
        },
        "outputs": {p.name: _sha256(p) for p in outputs},
    }
    if extra:
        manifest.update(extra)
    path = out / "run_manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def run_scenario(scn: Scenario, out_dir) -> dict:
    """Write ``trace.csv``, ``summary.json`` and ``run_manifest.json``; return the summary."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    res = evaluate(scn)
    norm = res.normalized
    trace_path = out / "trace.csv"
    write_csv(trace_path, TRACE_COLUMNS, zip(norm.tau * 1e9, norm.g2))
    maxima = local_maxima(norm.tau, norm.g2)
    summary = {
        "g2_zero": res.g2_zero,
        "tau_peak_ns": res.tau_peak * 1e9,
        "B": res.B,
        "signal_scale": res.signal_scale,
        "R": res.R,
        "local_maxima_ns": [float(norm.tau[i]) * 1e9 for i in maxima],
        "warnings": [w.message for w in res.warnings],
    }
    summary_path = out / "summary.json"
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n",
                            encoding="utf-8")
    write_manifest(out, "simulate", scn, [trace_path, summary_path])
    return summary


def run_sweep_files(spec: SweepSpec, scn: Scenario, out_dir, threads=None) -> list[dict]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = run_sweep(spec, scn, threads)
    path = out / "sweep.csv"
    write_csv(path, SWEEP_COLUMNS, ([r[c] for c in SWEEP_COLUMNS] for r in rows))
    write_manifest(out, "sweep", scn, [path], extra={"sweep": {
        "param": spec.parameter, "values": list(spec.values), "unit": PARAMETERS[spec.parameter][0],
    }})
    return rows


def run_events(scn: Scenario, out_dir, duration: float | None = None,
               threads: int | None = None) -> dict:
    """Simulate a detection run, write the event file, histogram and R estimate."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ev = dict(scn.events)
    if duration is not None:
        ev["duration"] = duration
        # record the override so the manifest alone reproduces this run
        source = dict(scn.source)
        events = {k: v for k, v in source.get("events", {}).items() if _base_name(k) != "duration"}
        source["events"] = {**events, "duration_s": duration}
        scn = replace(scn, events=ev, source=source)
    res = evaluate(scn)
    # the generator applies the jitter itself, so it gets the unsmoothed line shape
    ideal = total_g2(res.trace, res.B, res.signal_scale)
    det = scn.detector
    rates = forward_rates(ideal, ev["singles_s1"], ev["singles_s2"], det, det)
    stream = generate_events(ideal, rates, det, det, ev["duration"], scn.seed, threads=threads)
    events_path = out / "events.txt"
    write_events(events_path, stream)
    window = (ev["window_start"], ev["window_stop"])
    hist = cross_correlate(stream, ev["bin_width"], window)
    expect = expected_histogram(ideal, det, det, hist.bin_edges)
    hist_path = out / "histogram.csv"
    write_csv(hist_path, HISTOGRAM_COLUMNS,
              zip(hist.centers * 1e9, hist.counts, hist.g2, expect))
    summary = {"S1": stream.singles[0], "S2": stream.singles[1], "R_pair": rates.R_pair,
               "duration_s": ev["duration"]}
    try:
        est = estimate_R(stream, ev["bin_width"], window, auto_window=ev["auto_window"])
        summary.update(R=est.R, sigma_R=est.sigma_R, g_cross=est.g_cross,
                       g_auto1=est.g_auto1, g_auto2=est.g_auto2, tau0_ns=est.tau0 * 1e9)
    except SFWMError as exc:
        summary["R_error"] = str(exc)
    summary_path = out / "events_summary.json"
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n",
                            encoding="utf-8")
    write_manifest(out, "events", scn, [events_path, hist_path, summary_path],
                   extra={"events": {"duration_s": ev["duration"]}})
    return summary
