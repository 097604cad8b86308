"""JSON scenario configuration, unit-suffixed keys and the shipped presets.

Every physical key carries its unit as a suffix, for example
``gamma1_MHz_2pi``, ``delta1_GHz_2pi``, ``temperature_C`` or ``length_cm``.
Angular rates quoted as ``*_MHz_2pi`` are multiplied by 2 pi x 1e6 on load.
``gamma1`` and ``Gamma1`` are the half-rates of the coherence decay
constants, not FWHM linewidths.

A config may name a ``preset``; its own keys then override the preset's
key by key.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from importlib import resources
import json
import math
import re

import numpy as np

from .biphoton import DopplerQuadrature
from .core import AMU, AtomicSystem, Dipoles, DEFAULT_DIPOLES, FieldDrive, TWO_PI_GHZ, TWO_PI_MHZ
from .errors import ConfigError
from .statistics import DetectorModel

PRESETS = ("fig3a", "fig3b_caption", "fig3b_text", "experiment")

UNITS = {
    "rate": {"MHz_2pi": TWO_PI_MHZ, "GHz_2pi": TWO_PI_GHZ, "rad_s": 1.0},
    "density": {"cm3": 1e6, "m3": 1.0},
    "length": {"cm": 1e-2, "mm": 1e-3, "m": 1.0},
    "time": {"ns": 1e-9, "ps": 1e-12, "us": 1e-6, "s": 1.0},
    "frequency": {"Hz": 1.0, "kHz": 1e3},
    "power": {"mW": 1e-3, "uW": 1e-6, "W": 1.0},
    "area": {"mm2": 1e-6, "m2": 1.0},
}

_POS = ("> 0", lambda v: v > 0)
_NONNEG = (">= 0", lambda v: v >= 0)
_UNIT = ("in [0, 1]", lambda v: 0 <= v <= 1)
_ANY = None

# section -> name -> (kind, default, check); default ``...`` marks a required key
SCHEMA = {
    "system": {
        "gamma1": ("rate", ..., _POS),
        "Gamma1": ("rate", ..., _POS),
        "density": ("density", ..., _NONNEG),
        "temperature": ("temperature", ..., _POS),
        "length": ("length", 0.05, _POS),
        "mass_amu": ("plain", 84.911789738, _POS),
    },
    "drive": {
        "delta1": ("rate", ..., _ANY),
        "delta1p": ("rate", None, _ANY),
        "delta2": ("rate", 0.0, _ANY),
        "Omega_p1": ("rate", ..., _NONNEG),
        "Omega_p2": ("rate", ..., _NONNEG),
        "pump1_power": ("power", None, _POS),
        "pump2_power": ("power", None, _POS),
        "waist1": ("length", None, _POS),
        "waist2": ("length", None, _POS),
        "mode_area": ("area", None, _POS),
    },
    "doppler": {
        "frozen_atoms": ("bool", False, _ANY),
        "scheme": ("str", "gauss_hermite", ("gauss_hermite or trapezoid",
                                            lambda v: v in ("gauss_hermite", "trapezoid"))),
        "order": ("int", 64, (">= 8", lambda v: v >= 8)),
        "cutoff": ("plain", 5.0, _POS),
    },
    "noise": {
        "kappa_A": ("plain", 1.0, _NONNEG),
        "signal_scale": ("plain", None, _POS),
        "target_g2_peak": ("plain", None, ("> 1", lambda v: v > 1)),
        "g_auto1": ("plain", 1.0, _POS),
        "g_auto2": ("plain", 1.0, _POS),
    },
    "detector": {
        "response_fwhm": ("time", 0.0, _NONNEG),
        "bin_width": ("time", 0.1e-9, _POS),
        "efficiency": ("plain", 1.0, _UNIT),
        "dark_rate": ("frequency", 0.0, _NONNEG),
    },
    "tau": {
        "start": ("time", -5e-9, _ANY),
        "stop": ("time", 50e-9, _ANY),
        "step": ("time", 0.02e-9, _POS),
    },
    "events": {
        "singles_s1": ("frequency", 8000.0, _NONNEG),
        "singles_s2": ("frequency", 50000.0, _NONNEG),
        "duration": ("time", 10.0, _POS),
        "window_start": ("time", -10e-9, _ANY),
        "window_stop": ("time", 20e-9, _ANY),
        "bin_width": ("time", 0.1e-9, _POS),
        "auto_window": ("time", 50e-9, _POS),
    },
}
TOP_LEVEL = {"preset", "description", "method", "seed", "dipoles_Cm"}
TOP_LEVEL |= set(SCHEMA)
METHODS = ("closed_form", "fourier")


@dataclass(frozen=True)
class Scenario:
    """Fully resolved run description in SI units."""

    system: AtomicSystem
    drive: FieldDrive
    doppler: DopplerQuadrature | None
    kappa_A: float
    signal_scale: float | None
    target_g2_peak: float | None
    g_auto: tuple[float, float]
    detector: DetectorModel
    tau: np.ndarray
    method: str
    events: dict
    seed: int
    preset: str | None
    pump_powers: dict = field(default_factory=dict)
    source: dict = field(default_factory=dict)

    @property
    def trace_detector(self) -> DetectorModel:
        # the delay t_s2 - t_s1 carries the jitter of both channels
        d = self.detector
        return DetectorModel(response_fwhm=math.sqrt(2) * d.response_fwhm,
                             bin_width=d.bin_width, efficiency=d.efficiency,
                             dark_rate=d.dark_rate)


def preset_dict(name: str) -> dict:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}",
                          field="preset")
    text = resources.files(__package__).joinpath("presets").joinpath(f"{name}.json").read_text()
    return json.loads(text)


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(_strip_overridden(out[k], v), v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _strip_overridden(section: dict, over: dict) -> dict:
    # an override in one unit replaces the base value in any other unit
    bases = {_base_name(k) for k in over}
    return {k: v for k, v in section.items() if _base_name(k) not in bases}


_SUFFIX = re.compile(r"_(MHz_2pi|GHz_2pi|rad_s|cm3|m3|cm|mm|m|ns|ps|us|s|kHz|Hz|mW|uW|W|mm2|m2|C|K)$")


def _base_name(key: str) -> str:
    return _SUFFIX.sub("", key)


class _Locator:
    def __init__(self, text: str | None):
        self.lines = text.splitlines() if text else []

    def line(self, key: str):
        pat = f'"{key}"'
        for i, ln in enumerate(self.lines, 1):
            if pat in ln:
                return i
        return None


def _convert(kind, value, unit, path):
    if kind == "temperature":
        value = _number(value, path)
        return value + 273.15 if unit == "C" else value
    if kind in UNITS:
        return _number(value, path) * UNITS[kind][unit]
    return value


def _number(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", field=path)
    if not math.isfinite(value):
        raise ConfigError("value must be finite", field=path)
    return float(value)


def _units_for(kind):
    if kind == "temperature":
        return ("C", "K")
    if kind in UNITS:
        return tuple(UNITS[kind])
    return ("",)


def _parse_section(name, raw, loc: _Locator) -> dict:
    spec = SCHEMA[name]
    if not isinstance(raw, dict):
        raise ConfigError("section must be a JSON object", field=name, line=loc.line(name))
    out = {}
    seen = {}
    for key, value in raw.items():
        path = f"{name}.{key}"
        match = None
        for base, (kind, _, _) in spec.items():
            for unit in _units_for(kind):
                if key == (f"{base}_{unit}" if unit else base):
                    match = base, kind, unit
        if match is None:
            allowed = ", ".join(f"{b}" + ("_<unit>" if _units_for(k)[0] else "")
                                for b, (k, _, _) in spec.items())
            raise ConfigError(f"unknown key; expected one of {allowed}", field=path,
                              line=loc.line(key))
        base, kind, unit = match
        if base in seen:
            raise ConfigError(f"given twice ({seen[base]} and {key})", field=path,
                              line=loc.line(key))
        seen[base] = key
        if value is None:
            out[base] = None
            continue
        try:
            if kind == "bool":
                if not isinstance(value, bool):
                    raise ConfigError("expected true or false", field=path)
                val = value
            elif kind == "int":
                if isinstance(value, bool) or not isinstance(value, int):
                    raise ConfigError("expected an integer", field=path)
                val = value
            elif kind == "str":
                if not isinstance(value, str):
                    raise ConfigError("expected a string", field=path)
                val = value
            else:
                val = _convert(kind, value, unit, path)
        except ConfigError as exc:
            raise ConfigError(exc.message, field=path, line=loc.line(key)) from None
        check = spec[base][2]
        if check is not None and not check[1](val):
            raise ConfigError(f"must be {check[0]} (got {value!r})", field=path,
                              line=loc.line(key))
        out[base] = val
    for base, (kind, default, _) in spec.items():
        if base not in out:
            if default is ...:
                units = "/".join(_units_for(kind))
                raise ConfigError(f"required (units: {units})", field=f"{name}.{base}",
                                  line=loc.line(name))
            out[base] = default
    return out


def _parse_dipoles(raw, loc):
    if raw is None:
        return DEFAULT_DIPOLES
    if not isinstance(raw, dict) or set(raw) != {"u21", "u13", "u34", "u42"}:
        raise ConfigError("needs exactly u21, u13, u34, u42", field="dipoles_Cm",
                          line=loc.line("dipoles_Cm"))
    vals = {k: _number(v, f"dipoles_Cm.{k}") for k, v in raw.items()}
    bad = [k for k, v in vals.items() if v < 0]
    if bad:
        raise ConfigError("must be >= 0", field=f"dipoles_Cm.{bad[0]}", line=loc.line(bad[0]))
    return Dipoles(**vals)


def merged_config(raw: dict, preset: str | None = None) -> dict:
    """Preset (argument wins over the config's own ``preset`` key) overlaid by ``raw``."""
    name = preset or raw.get("preset")
    if name is None:
        return copy.deepcopy(raw)
    merged = _merge(preset_dict(name), {k: v for k, v in raw.items() if k != "preset"})
    merged["preset"] = name
    return merged


def parse_config(raw: dict, text: str | None = None, preset: str | None = None,
                 seed: int | None = None) -> Scenario:
    """Validate a config mapping and resolve it into a :class:`Scenario`."""
    loc = _Locator(text)
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    cfg = merged_config(raw, preset)
    for key in cfg:
        if key not in TOP_LEVEL:
            raise ConfigError("unknown top-level key", field=key, line=loc.line(key))
    for required in ("system", "drive"):
        if required not in cfg:
            raise ConfigError("section missing", field=required)
    sec = {name: _parse_section(name, cfg.get(name, {}), loc) for name in SCHEMA}

    s = sec["system"]
    system = AtomicSystem(gamma1=s["gamma1"], Gamma1=s["Gamma1"], N=s["density"],
                          T=s["temperature"], m=s["mass_amu"] * AMU, L=s["length"],
                          dipoles=_parse_dipoles(cfg.get("dipoles_Cm"), loc))
    d = sec["drive"]
    mode_area = d["mode_area"]
    if mode_area is None and d["waist1"] is not None:
        mode_area = math.pi * d["waist1"] ** 2
    drive = FieldDrive.from_detunings(system, Delta1=d["delta1"], Delta1p=d["delta1p"],
                                      Delta2=d["delta2"], Omega_p1=d["Omega_p1"],
                                      Omega_p2=d["Omega_p2"], mode_area=mode_area)
    q = sec["doppler"]
    try:
        doppler = None if q["frozen_atoms"] else DopplerQuadrature(q["scheme"], q["order"],
                                                                   q["cutoff"])
    except ValueError as exc:
        raise ConfigError(str(exc), field="doppler") from None
    n = sec["noise"]
    if n["signal_scale"] is not None and n["target_g2_peak"] is not None:
        raise ConfigError("give signal_scale or target_g2_peak, not both", field="noise",
                          line=loc.line("noise"))
    t = sec["tau"]
    if t["stop"] <= t["start"]:
        raise ConfigError("stop must exceed start", field="tau.stop", line=loc.line("tau"))
    count = int(round((t["stop"] - t["start"]) / t["step"])) + 1
    tau = t["start"] + t["step"] * np.arange(count)
    det = sec["detector"]
    detector = DetectorModel(response_fwhm=det["response_fwhm"], bin_width=det["bin_width"],
                             efficiency=det["efficiency"], dark_rate=det["dark_rate"])
    ev = sec["events"]
    if ev["window_stop"] <= ev["window_start"]:
        raise ConfigError("window_stop must exceed window_start", field="events.window_stop",
                          line=loc.line("events"))
    method = cfg.get("method", "closed_form")
    if method not in METHODS:
        raise ConfigError(f"must be one of {', '.join(METHODS)}", field="method",
                          line=loc.line("method"))
    run_seed = cfg.get("seed", 0) if seed is None else seed
    if isinstance(run_seed, bool) or not isinstance(run_seed, int) or not 0 <= run_seed < 2**64:
        raise ConfigError("must be an unsigned 64-bit integer", field="seed",
                          line=loc.line("seed"))
    return Scenario(system=system, drive=drive, doppler=doppler, kappa_A=n["kappa_A"],
                    signal_scale=n["signal_scale"], target_g2_peak=n["target_g2_peak"],
                    g_auto=(n["g_auto1"], n["g_auto2"]), detector=detector, tau=tau,
                    method=method, events=ev, seed=run_seed, preset=cfg.get("preset"),
                    pump_powers={"p1": d["pump1_power"], "p2": d["pump2_power"]},
                    source=cfg)


def load_config(path, preset: str | None = None, seed: int | None = None) -> Scenario:
    """Read a config file or a run manifest written by a previous run."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    if isinstance(raw, dict) and "manifest_version" in raw:
        cfg = raw.get("config")
        if not isinstance(cfg, dict):
            raise ConfigError("manifest lacks a config object", field="config")
        return parse_config(cfg, preset=preset, seed=raw.get("seed") if seed is None else seed)
    return parse_config(raw, text=text, preset=preset, seed=seed)
