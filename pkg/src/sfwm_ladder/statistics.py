"""Noise floor, normalised cross-correlation, detector smoothing and pair statistics."""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .biphoton import CorrelationTrace, DopplerQuadrature, _velocity_nodes
from .core import C, AtomicSystem, FieldDrive
from .errors import GridTooCoarse, QuadratureNotConverged, ZeroNoiseFloor

FWHM_TO_SIGMA = 1.0 / (2.0 * math.sqrt(2.0 * math.log(2.0)))
# the Lorentzian pole can sit inside the Doppler profile; a dense trapezoid
# converges geometrically where Gauss-Hermite stalls
NOISE_QUADRATURE = DopplerQuadrature(scheme="trapezoid", order=4001, cutoff=6.0)


@dataclass(frozen=True)
class NoiseModel:
    """Fluorescence noise of the pump-2 transition.

    ``A`` is the transition coefficient (rad/s), ``A = kappa_A * |Omega_p2|``;
    ``detuning`` is the pump-2 detuning and ``omega`` its optical frequency,
    which sets the Doppler shift ``omega * v / c``.
    """

    A: float
    gamma: float
    detuning: float
    omega: float
    doppler: DopplerQuadrature | None = NOISE_QUADRATURE
    kappa_A: float = 1.0

    def __post_init__(self):
        if self.kappa_A < 0:
            raise ValueError("kappa_A must be >= 0")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")

    @classmethod
    def from_drive(cls, system: AtomicSystem, drive: FieldDrive, kappa_A: float = 1.0,
                   doppler: DopplerQuadrature | None = NOISE_QUADRATURE) -> "NoiseModel":
        return cls(A=kappa_A * abs(drive.Omega_p2), gamma=system.gamma1, detuning=drive.Delta1p,
                   omega=drive.omega_p2, doppler=doppler, kappa_A=kappa_A)


@dataclass(frozen=True)
class DetectorModel:
    response_fwhm: float = 0.0
    bin_width: float = 0.1e-9
    efficiency: float = 1.0
    dark_rate: float = 0.0

    def __post_init__(self):
        if self.response_fwhm < 0:
            raise ValueError("response_fwhm must be >= 0")
        if self.bin_width <= 0:
            raise ValueError("bin_width must be positive")
        if not 0.0 <= self.efficiency <= 1.0:
            raise ValueError("efficiency must lie in [0, 1]")
        if self.dark_rate < 0:
            raise ValueError("dark_rate must be >= 0")


@dataclass(frozen=True)
class NormalizedTrace:
    tau: np.ndarray
    g2: np.ndarray
    B: float = math.nan
    signal_scale: float = 1.0

    def peak(self):
        i = int(np.argmax(self.g2))
        return float(self.tau[i]), float(self.g2[i])


def _doppler_mean_response(model: NoiseModel, system: AtomicSystem, quad):
    vel, w = _velocity_nodes(system, quad)
    det = model.detuning + model.omega / C * vel
    return np.sum(w / (det - 1j * model.gamma))


def noise_factor_B(model: NoiseModel, system: AtomicSystem, check_convergence: bool = True) -> float:
    """``|<A / (Delta_D - i gamma)>_v|^2`` averaged over the thermal velocity density."""
    if model.A == 0:
        return 0.0
    mean = _doppler_mean_response(model, system, model.doppler)
    if model.doppler is not None and check_convergence:
        fine = _doppler_mean_response(model, system, model.doppler.refined())
        change = abs(fine - mean) / abs(fine)
        if change > 1e-6:
            raise QuadratureNotConverged(
                f"noise average moved by {change:.3g} on order doubling",
                coarse=abs(model.A * mean) ** 2, fine=abs(model.A * fine) ** 2)
    return float(abs(model.A * mean) ** 2)


def total_g2(trace: CorrelationTrace, B: float, signal_scale: float = 1.0) -> NormalizedTrace:
    """``(signal_scale * G2 + B) / B`` on the trace grid."""
    if B == 0:
        raise ZeroNoiseFloor("noise floor B = 0 leaves the normalised correlation undefined")
    if B < 0:
        raise ValueError("B must be positive")
    g2 = (signal_scale * np.asarray(trace.g2_unnormalized) + B) / B
    return NormalizedTrace(tau=np.asarray(trace.tau), g2=g2, B=B, signal_scale=signal_scale)


def scale_for_peak(trace: CorrelationTrace, B: float, target_peak: float) -> float:
    """``signal_scale`` that puts the peak of :func:`total_g2` at ``target_peak``."""
    peak = float(np.max(trace.g2_unnormalized))
    if peak <= 0:
        raise ValueError("trace has no signal to scale")
    return (target_peak - 1.0) * B / peak


def convolve_detector(trace: NormalizedTrace, det: DetectorModel) -> NormalizedTrace:
    """Gaussian timing response followed by a box average over ``bin_width``.

    The excess ``g2 - 1`` is convolved (zero beyond the grid), so any constant
    baseline passes through unchanged.
    """
    tau = np.asarray(trace.tau)
    dt = float(tau[1] - tau[0])
    excess = np.asarray(trace.g2, dtype=np.float64) - 1.0
    if det.response_fwhm > 0:
        if dt > det.response_fwhm / 5 * (1 + 1e-12):
            raise GridTooCoarse(f"grid step {dt:.3g} s exceeds response_fwhm/5")
        sigma = det.response_fwhm * FWHM_TO_SIGMA
        half = int(math.ceil(6 * sigma / dt))
        x = np.arange(-half, half + 1) * dt
        kern = np.exp(-0.5 * (x / sigma) ** 2)
        excess = np.convolve(excess, kern / kern.sum(), mode="same")
    nbox = int(round(det.bin_width / dt))
    if nbox > 1:
        excess = np.convolve(excess, np.full(nbox, 1.0 / nbox), mode="same")
    return NormalizedTrace(tau=tau, g2=1.0 + excess, B=trace.B, signal_scale=trace.signal_scale)


def cauchy_schwarz_R(g_cross_sq, g_auto1, g_auto2):
    """``g_cross^2 / (g_auto1 g_auto2)``; values above 1 are non-classical."""
    if g_auto1 <= 0 or g_auto2 <= 0:
        raise ValueError("autocorrelations must be positive")
    return g_cross_sq / (g_auto1 * g_auto2)


def cauchy_schwarz_sigma(g_cross_sq, sigma_cross_sq, g_auto1, sigma_auto1, g_auto2, sigma_auto2):
    """First-order propagated standard error of :func:`cauchy_schwarz_R`."""
    r = cauchy_schwarz_R(g_cross_sq, g_auto1, g_auto2)
    rel = math.sqrt((sigma_cross_sq / g_cross_sq) ** 2 + (sigma_auto1 / g_auto1) ** 2
                    + (sigma_auto2 / g_auto2) ** 2)
    return r * rel


def pair_production_rate(S1, S2, Rc):
    """``M = S1 S2 / Rc`` from net singles and coincidence rates."""
    if Rc <= 0:
        raise ValueError("Rc must be positive")
    return S1 * S2 / Rc


def fwhm(tau, values):
    """Full width at half maximum of a single-peaked curve, linearly interpolated."""
    tau = np.asarray(tau)
    y = np.asarray(values)
    i = int(np.argmax(y))
    half = y[i] / 2
    left = i
    while left > 0 and y[left] > half:
        left -= 1
    right = i
    while right < y.size - 1 and y[right] > half:
        right += 1
    tl = np.interp(half, [y[left], y[left + 1]], [tau[left], tau[left + 1]])
    tr = np.interp(half, [y[right], y[right - 1]], [tau[right], tau[right - 1]])
    return float(tr - tl)
