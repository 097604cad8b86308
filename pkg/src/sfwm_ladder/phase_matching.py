"""Beam geometry, wave-vector mismatch and the sinc phase-matching envelope."""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

from .core import C, AtomicSystem, FieldDrive
from .susceptibility import chi1_s2

FIELDS = ("p1", "p2", "s1", "s2")
# pumps are annihilated, signals created: k_p1 + k_p2 - k_s1 - k_s2
_GENERATION = {"p1": 1.0, "p2": 1.0, "s1": -1.0, "s2": -1.0}
DELTA_FLAG_RATIO = 0.1


def _default_signs():
    # counter-propagating pumps; each signal runs along the pump of equal wavelength
    return {"p1": 1, "p2": -1, "s1": 1, "s2": -1}


@dataclass(frozen=True)
class BeamGeometry:
    """In-plane beam directions.

    Each field travels along ``propagation_sign * z`` tilted by a signed angle
    in the x-z plane. Pump 1 defines the axis; pump 2 is tilted by
    ``pump_angle``, signal 2 by ``alpha`` relative to the pump-1 line and
    signal 1 by ``beta`` relative to the pump-2 line.
    """

    alpha: float = 0.0
    beta: float = 0.0
    pump_angle: float = 0.0
    propagation_sign: dict = field(default_factory=_default_signs)
    custom_tilts: dict | None = None

    def __post_init__(self):
        for name in ("alpha", "beta", "pump_angle"):
            val = getattr(self, name)
            if not 0 <= val < math.pi / 2:
                raise ValueError(f"{name} must lie in [0, pi/2)")

    @classmethod
    def experiment(cls) -> "BeamGeometry":
        return cls(alpha=math.radians(3.6), beta=math.radians(3.6), pump_angle=math.radians(0.9))

    def tilts(self) -> dict:
        if self.custom_tilts is not None:
            return dict(self.custom_tilts)
        return {"p1": 0.0, "p2": self.pump_angle, "s1": self.pump_angle + self.beta,
                "s2": -self.alpha}

    def directions(self) -> dict:
        out = {}
        for name, th in self.tilts().items():
            s = self.propagation_sign[name]
            out[name] = s * np.array([math.sin(th), math.cos(th)])
        return out


@dataclass(frozen=True)
class Mismatch:
    longitudinal: complex
    transverse: complex


def signal_wavenumber(omega, chi1):
    """``omega/c + (omega/2c) chi1``, the first-order expansion of ``omega sqrt(1+chi)/c``."""
    return omega / C + omega / (2 * C) * chi1


def wavevector_mismatch(geometry: BeamGeometry, wavenumbers: dict) -> Mismatch:
    """Mismatch of ``k_p1 + k_p2 - k_s1 - k_s2``.

    Returns the z component (signed by the propagation conventions) and the
    in-plane transverse component; only the longitudinal part feeds the
    phase-matching envelope.
    """
    dirs = geometry.directions()
    x = sum(_GENERATION[f] * np.asarray(wavenumbers[f]) * dirs[f][0] for f in FIELDS)
    z = sum(_GENERATION[f] * np.asarray(wavenumbers[f]) * dirs[f][1] for f in FIELDS)
    if np.ndim(z) == 0:
        return Mismatch(longitudinal=complex(z), transverse=complex(x))
    return Mismatch(longitudinal=z, transverse=x)


def phase_matching_function(delta_k, L, k_sum=None):
    """``sinc(dk L / 2) exp(i k_sum L / 2)``; ``k_sum`` is ``k_s2 + k_s1`` (phase dropped if None)."""
    if L <= 0:
        raise ValueError("L must be positive")
    x = np.asarray(delta_k) * L / 2
    env = np.sinc(x / np.pi)
    if k_sum is None:
        return env
    return env * np.exp(1j * np.asarray(k_sum) * L / 2)


def drive_wavenumbers(system: AtomicSystem, drive: FieldDrive, signal_offset=0.0,
                      dispersion: bool = True) -> dict:
    """Wavenumbers of the four fields with signal 2 offset by ``signal_offset`` (rad/s).

    Signal 1 follows from energy conservation; signal 2 carries the linear
    susceptibility when ``dispersion`` is set, signal 1 is taken as vacuum.
    """
    off = np.asarray(signal_offset, dtype=np.float64)
    w_s2 = drive.omega_s2 + off
    w_s1 = drive.omega_p1 + drive.omega_p2 - w_s2
    if dispersion:
        chis = np.array([chi1_s2(system, drive.with_(Delta2p=drive.Delta2p + o,
                                                     Delta2=drive.Delta2 + o))
                         for o in np.atleast_1d(off)]).reshape(off.shape)
    else:
        chis = np.zeros(off.shape)
    return {
        "p1": drive.omega_p1 / C,
        "p2": drive.omega_p2 / C,
        "s1": signal_wavenumber(w_s1, 0.0),
        "s2": signal_wavenumber(w_s2, chis),
    }


def _rms_width(t, weight):
    w = np.asarray(weight, dtype=np.float64)
    total = np.trapezoid(w, t)
    if total <= 0:
        return 0.0
    mean = np.trapezoid(t * w, t) / total
    return float(np.sqrt(max(np.trapezoid((t - mean) ** 2 * w, t) / total, 0.0)))


@dataclass(frozen=True)
class DeltaApproxReport:
    phi_width: float
    g2_width: float
    ratio: float
    degraded: bool


def delta_approximation_check(system: AtomicSystem, drive: FieldDrive, tau_grid,
                              geometry: BeamGeometry | None = None, g2=None,
                              n_omega: int = 4096, dispersion: bool = False,
                              threshold: float = DELTA_FLAG_RATIO) -> DeltaApproxReport:
    """Compare the temporal width of the transformed phase-matching envelope with G2.

    Widths are RMS widths of ``|Phi~(t)|^2`` and of ``G2(tau)``. The
    frequency span resolves the time grid; the step resolves the longer of
    the grid extent and the cell transit ``2 L / c``. ``g2`` may be supplied
    as a precomputed array on ``tau_grid``; otherwise the frozen-atom
    closed form is used.
    """
    from .biphoton import g2_closed_form

    geometry = geometry or BeamGeometry()
    tau = np.asarray(tau_grid, dtype=np.float64)
    if g2 is None:
        g2 = g2_closed_form(system, drive, tau, quad=None).g2_unnormalized
    g2_width = _rms_width(tau, g2)

    dt = float(np.min(np.diff(tau)))
    extent = max(tau[-1] - tau[0], 4 * system.L / C)
    n = max(n_omega, int(2 ** math.ceil(math.log2(2 * extent / dt))))
    domega = 2 * math.pi / (n * dt)
    offsets = (np.arange(n) - n // 2) * domega
    ks = drive_wavenumbers(system, drive, offsets, dispersion=dispersion)
    dk = wavevector_mismatch(geometry, ks).longitudinal
    phi = phase_matching_function(np.real(dk), system.L)
    t = (np.arange(n) - n // 2) * dt
    # (1/2pi) sum Phi(w) exp(-i w t) dw on the centred grids
    phit = np.fft.fftshift(np.fft.fft(np.fft.ifftshift(phi))) * domega / (2 * math.pi)
    phi_width = _rms_width(t, np.abs(phit) ** 2)
    ratio = phi_width / g2_width if g2_width > 0 else math.inf
    return DeltaApproxReport(phi_width=phi_width, g2_width=g2_width, ratio=ratio,
                             degraded=ratio > threshold)
