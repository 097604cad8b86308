"""Two-photon correlation function G2(tau).

Two independent routes:

* :func:`g2_closed_form` evaluates the time-domain two-exponential amplitude
  (decay term minus the dressed oscillating term) and averages it over the
  1-D thermal velocity distribution.
* :func:`g2_fourier` transforms the signal-2 third-order susceptibility
  spectrum numerically and squares the result.

Both carry the same physical prefactor so their traces can be compared
directly. The optical carrier ``exp(-i w_s2 tau)`` is dropped by default
(envelope mode); it never changes ``|amplitude|^2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.signal import find_peaks
from scipy.special import sici

from . import kernels
from .core import C, EPS0, HBAR, AtomicSystem, FieldDrive, most_probable_speed
from .errors import DegenerateDenominator, GridTooCoarse, QuadratureNotConverged
from .susceptibility import DENOM_FLOOR, chi3_s2_spectrum

CONVERGENCE_RTOL = 1e-6
DEFAULT_TAU_NS = (-5.0, 50.0, 0.02)


def default_tau_grid(start_ns=DEFAULT_TAU_NS[0], stop_ns=DEFAULT_TAU_NS[1],
                     step_ns=DEFAULT_TAU_NS[2]):
    n = int(round((stop_ns - start_ns) / step_ns)) + 1
    return (start_ns + step_ns * np.arange(n)) * 1e-9


@dataclass(frozen=True)
class DopplerQuadrature:
    scheme: str = "gauss_hermite"
    order: int = 64
    cutoff: float = 5.0

    def __post_init__(self):
        if self.scheme not in ("gauss_hermite", "trapezoid"):
            raise ValueError(f"unknown quadrature scheme {self.scheme!r}")
        if self.order < 8:
            raise ValueError("quadrature order must be >= 8")
        if self.scheme == "trapezoid" and self.cutoff < 4:
            raise ValueError("trapezoid cutoff must be >= 4 (units of u)")

    def refined(self) -> "DopplerQuadrature":
        order = 2 * self.order if self.scheme == "gauss_hermite" else 2 * self.order - 1
        return DopplerQuadrature(self.scheme, order, self.cutoff)

    def nodes(self, u: float):
        """Velocities and weights for the normalised density exp(-v^2/u^2)/(u sqrt(pi))."""
        if self.scheme == "gauss_hermite":
            x, w = np.polynomial.hermite.hermgauss(self.order)
            return u * x, w / math.sqrt(math.pi)
        x = np.linspace(-self.cutoff, self.cutoff, self.order)
        w = np.exp(-x**2) * (x[1] - x[0]) / math.sqrt(math.pi)
        w[0] *= 0.5
        w[-1] *= 0.5
        return u * x, w


FROZEN = None  # pass as ``quad`` for atoms at rest


@dataclass(frozen=True)
class CorrelationTrace:
    tau: np.ndarray
    amplitude: np.ndarray
    g2_unnormalized: np.ndarray
    scale: float = 1.0
    method: str = "closed_form_eq22"
    meta: dict = field(default_factory=dict)

    def peak(self):
        i = int(np.argmax(self.g2_unnormalized))
        return self.tau[i], self.g2_unnormalized[i]


def _velocity_nodes(system: AtomicSystem, quad):
    if quad is None:
        return np.zeros(1), np.ones(1)
    return quad.nodes(most_probable_speed(system.T, system.m))


def prefactor(system: AtomicSystem, drive: FieldDrive) -> float:
    """``N L u21 u13 u34 u42 eps_p1 eps_p2 sqrt(w_s1 w_s2) / (4 hbar^3 eps0 pi c)``."""
    d = system.dipoles
    return (system.N * system.L * d.u21 * d.u13 * d.u34 * d.u42 * drive.eps_p1 * drive.eps_p2
            * math.sqrt(drive.omega_s1 * drive.omega_s2) / (4 * HBAR**3 * EPS0 * math.pi * C))


def doppler_detuning(drive: FieldDrive, v, sign: int = 1):
    return drive.Delta1 + sign * drive.omega_p1 / C * np.asarray(v, dtype=np.float64)


def _check_closed_form_denominators(system, drive, delta_d):
    rabi_sq = abs(drive.Omega_p1) ** 2
    den = 1j * delta_d * (2 * system.Gamma1 - system.gamma1) + rabi_sq
    if np.any(np.abs(den) < DENOM_FLOOR) or np.any(delta_d == 0):
        raise DegenerateDenominator("closed-form amplitude denominator vanishes")


def _closed_form_amplitude(system, drive, tau, vel, weights, carrier, sign):
    delta_d = doppler_detuning(drive, vel, sign)
    _check_closed_form_denominators(system, drive, delta_d)
    amp = kernels.doppler_amplitude(tau, delta_d, weights, system.gamma1, system.Gamma1,
                                    abs(drive.Omega_p1) ** 2)
    amp = prefactor(system, drive) * amp
    if carrier:
        amp = amp * np.exp(-1j * drive.omega_s2 * tau)
    return amp


def amplitude_at_velocity(system: AtomicSystem, drive: FieldDrive, tau, v: float = 0.0,
                          carrier: bool = False, doppler_sign: int = 1):
    """Integrand of the velocity average at a single atomic velocity ``v``.

    Zero for tau < 0. Assumes the signal-1 detuning is near zero and the
    pump-1 detuning dominates the decay rates; neither is enforced.
    """
    tau_arr = np.atleast_1d(np.asarray(tau, dtype=np.float64))
    amp = _closed_form_amplitude(system, drive, tau_arr, np.array([v]), np.ones(1),
                                 carrier, doppler_sign)
    return amp if np.ndim(tau) else complex(amp[0])


def g2_closed_form(system: AtomicSystem, drive: FieldDrive, tau_grid,
                   quad: DopplerQuadrature | None = DopplerQuadrature(),
                   check_convergence: bool = True, carrier: bool = False,
                   doppler_sign: int = 1) -> CorrelationTrace:
    """Doppler-averaged closed-form G2 on ``tau_grid`` (seconds).

    The velocity weight is the normalised 1-D Maxwell-Boltzmann density.
    With ``check_convergence`` the average is repeated at doubled order and
    :class:`QuadratureNotConverged` is raised if the trace moves by more than
    1e-6 of its peak.
    """
    tau = np.asarray(tau_grid, dtype=np.float64)
    vel, w = _velocity_nodes(system, quad)
    amp = _closed_form_amplitude(system, drive, tau, vel, w, carrier, doppler_sign)
    g2 = np.abs(amp) ** 2
    meta = {"quadrature": None if quad is None else (quad.scheme, quad.order)}
    if quad is not None and check_convergence:
        vel2, w2 = _velocity_nodes(system, quad.refined())
        g2_fine = np.abs(_closed_form_amplitude(system, drive, tau, vel2, w2, carrier,
                                                doppler_sign)) ** 2
        peak = g2_fine.max()
        change = float(np.abs(g2 - g2_fine).max() / peak) if peak > 0 else 0.0
        meta["refinement_change"] = change
        if change > CONVERGENCE_RTOL:
            raise QuadratureNotConverged(
                f"order {quad.order} -> {quad.refined().order} changed G2 by {change:.3g}",
                coarse=g2, fine=g2_fine)
    return CorrelationTrace(tau=tau, amplitude=amp, g2_unnormalized=g2,
                            method="closed_form_eq22", meta=meta)


def fourier_amplitude(omega, spectrum, tau):
    """``(1/2pi) integral spectrum(w) exp(-i w tau) dw`` by the trapezoid rule on ``omega``."""
    omega = np.asarray(omega, dtype=np.float64)
    dw = np.diff(omega)
    w = np.zeros_like(omega)
    w[:-1] += dw / 2
    w[1:] += dw / 2
    return kernels.fourier_sum(omega, np.asarray(spectrum) * w, tau) / (2 * math.pi)


def _tail_integral(W, tau):
    """``2 * integral_W^inf cos(x tau) / x^2 dx``, the symmetric 1/x^2 tail beyond +-W."""
    tau = np.asarray(tau, dtype=np.float64)
    a = np.abs(tau)
    si, _ = sici(W * a)
    return 2 * (np.cos(W * tau) / W - a * (math.pi / 2 - si))


def default_signal_grid(system: AtomicSystem, drive: FieldDrive, quad=None, tau=None,
                        points_per_width: int = 10, span_factor: float = 40.0):
    """Uniform signal-detuning grid for :func:`g2_fourier`.

    The step resolves the narrowest linewidth and keeps the transform's
    period at least four times the largest ``|tau|``.
    """
    g, G = system.gamma1, system.Gamma1
    rabi_sq = abs(drive.Omega_p1) ** 2
    width = min(g, 2 * G)
    step = width / points_per_width
    if tau is not None and np.size(tau):
        step = min(step, 2 * math.pi / (4 * float(np.max(np.abs(tau)))))
    vel, _ = _velocity_nodes(system, quad)
    d1 = doppler_detuning(drive, vel)
    scale = max(g, 2 * G + rabi_sq * g / float(np.min(d1**2 + g**2)),
                float(np.max(rabi_sq / np.sqrt(d1**2 + g**2))))
    half = span_factor * scale
    n = int(math.ceil(half / step))
    return step * np.arange(-n, n + 1)


def _check_signal_grid(system, omega, tau, points_per_width=10):
    domega = np.diff(omega)
    if np.any(domega <= 0) or not np.allclose(domega, domega[0], rtol=1e-9, atol=0):
        raise GridTooCoarse("signal grid must be uniform and increasing")
    step = domega[0]
    width = min(system.gamma1, 2 * system.Gamma1)
    if step > width / points_per_width * (1 + 1e-9):
        raise GridTooCoarse(f"signal grid step {step:.3g} rad/s coarser than "
                            f"linewidth/{points_per_width} = {width / points_per_width:.3g}")
    if 2 * math.pi / step <= 2 * float(np.max(np.abs(tau))):
        raise GridTooCoarse("signal grid step aliases the requested tau range")


def g2_fourier(system: AtomicSystem, drive: FieldDrive, tau_grid, omega_grid=None,
               quad: DopplerQuadrature | None = FROZEN, carrier: bool = False,
               tail_correction: bool = True) -> CorrelationTrace:
    """G2 from the numerical transform of the chi3 spectrum.

    ``omega_grid`` is the signal-2 detuning ``w_s2 - w21`` (rad/s). The
    spectrum is averaged over velocity at the amplitude level, transformed
    with the trapezoid rule, and the asymptotic ``1/x^2`` tail outside the
    grid is added in closed form. No causal step is imposed, so values for
    tau < 0 measure numerical leakage.
    """
    tau = np.asarray(tau_grid, dtype=np.float64)
    omega = default_signal_grid(system, drive, quad, tau) if omega_grid is None else np.asarray(omega_grid)
    _check_signal_grid(system, omega, tau)
    vel, w = _velocity_nodes(system, quad)
    d1 = doppler_detuning(drive, vel)
    spectrum = np.zeros(omega.shape, dtype=np.complex128)
    tail_coef = 0.0 + 0.0j
    d = system.dipoles
    k = system.N * d.u21 * d.u13 * d.u34 * d.u42 / (HBAR**3 * EPS0)
    for vi, wi, di in zip(vel, w, d1):
        spectrum += wi * chi3_s2_spectrum(system, drive, omega, delta1=di)
        # large-|x| limit of the spectrum: i K / (G13 x^2)
        tail_coef += wi * 1j * k / (system.gamma1 + 1j * di)
    integral = fourier_amplitude(omega, spectrum, tau)
    if tail_correction:
        W = 0.5 * (abs(omega[0]) + abs(omega[-1]))
        integral = integral + tail_coef * _tail_integral(W, tau) / (2 * math.pi)
    pref = (-1j * system.L * drive.eps_p1 * drive.eps_p2
            * math.sqrt(drive.omega_s1 * drive.omega_s2) / (4 * math.pi * C))
    amp = pref * integral
    if carrier:
        amp = amp * np.exp(-1j * drive.omega_s2 * tau)
    return CorrelationTrace(tau=tau, amplitude=amp, g2_unnormalized=np.abs(amp) ** 2,
                            method="fourier_eq21",
                            meta={"n_omega": omega.size, "omega_half_span": float(omega[-1])})


def local_maxima(tau, values, lo=0.0, hi=25e-9, rel_prominence=1e-3):
    """Indices of local maxima with ``lo < tau <= hi``.

    Peaks must stand out by ``rel_prominence`` of the global maximum in the
    window so that rounding ripples are ignored.
    """
    tau = np.asarray(tau)
    values = np.asarray(values)
    sel = np.nonzero((tau > lo) & (tau <= hi))[0]
    if sel.size < 3:
        return sel[:0]
    seg = values[sel]
    peaks, _ = find_peaks(seg, prominence=rel_prominence * seg.max())
    return sel[peaks]


def beat_period(tau, values, lo=0.0, hi=25e-9):
    """Mean spacing of consecutive local maxima, refined by parabolic interpolation."""
    idx = local_maxima(tau, values, lo, hi)
    if idx.size < 2:
        return math.nan
    refined = []
    for i in idx:
        y0, y1, y2 = values[i - 1], values[i], values[i + 1]
        denom = y0 - 2 * y1 + y2
        shift = 0.5 * (y0 - y2) / denom if denom != 0 else 0.0
        refined.append(tau[i] + shift * (tau[i + 1] - tau[i]))
    return float(np.mean(np.diff(refined)))
