"""Physical constants, parameter types and elementary conversions.

Every frequency and rate is stored as an angular quantity in rad/s. ``gamma1``
and ``Gamma1`` are the half-rates that appear in the coherence decay rates:
the intermediate levels |2>, |3> lose population at ``2*gamma1`` and the upper
level |4> at ``2*Gamma1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
import math

import numpy as np
from scipy import constants as _sc

HBAR = _sc.hbar
K_B = _sc.k
C = _sc.c
EPS0 = _sc.epsilon_0
AMU = _sc.atomic_mass
MASS_RB85 = 84.911789738 * AMU

# transition wavelengths of the effective four-level ladder
LAMBDA_21 = 780.241e-9   # 5S1/2 -> 5P3/2, shared by |2> and |3>
LAMBDA_42 = 1529.4e-9    # 5P3/2 -> 4D5/2, shared by |4><2| and |4><3|
OMEGA_21 = 2 * math.pi * C / LAMBDA_21
OMEGA_42 = 2 * math.pi * C / LAMBDA_42

TWO_PI_MHZ = 2 * math.pi * 1e6
TWO_PI_GHZ = 2 * math.pi * 1e9

CLOSURE_RTOL = 1e-9
HIERARCHY_LIMIT = 0.1


def mhz_2pi(value):
    """Convert a value quoted in MHz (x 2 pi) to rad/s."""
    return value * TWO_PI_MHZ


def to_mhz_2pi(value):
    return value / TWO_PI_MHZ


def ghz_2pi(value):
    return value * TWO_PI_GHZ


@dataclass(frozen=True)
class Dipoles:
    """Dipole matrix elements (C m), real and non-negative."""

    u21: float
    u13: float
    u34: float
    u42: float

    def __post_init__(self):
        for name in ("u21", "u13", "u34", "u42"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"dipole {name} must be >= 0")


# nominal effective dipoles; 5S-5P from the D2 line strength, 5P-4D of similar order
DEFAULT_DIPOLES = Dipoles(u21=2.54e-29, u13=2.54e-29, u34=1.8e-29, u42=1.8e-29)


@dataclass(frozen=True)
class AtomicSystem:
    gamma1: float
    Gamma1: float
    N: float
    T: float
    m: float = MASS_RB85
    L: float = 0.05
    dipoles: Dipoles = DEFAULT_DIPOLES

    def __post_init__(self):
        checks = (
            ("gamma1", self.gamma1 > 0),
            ("Gamma1", self.Gamma1 > 0),
            ("N", self.N >= 0),
            ("T", self.T > 0),
            ("m", self.m > 0),
            ("L", self.L > 0),
        )
        for name, ok in checks:
            if not ok:
                raise ValueError(f"AtomicSystem.{name} out of range: {getattr(self, name)!r}")

    def with_(self, **changes) -> "AtomicSystem":
        return replace(self, **changes)


@dataclass(frozen=True)
class FieldDrive:
    """Optical frequencies, detunings, pump Rabi frequencies and amplitudes.

    Detuning signs: ``Delta1 = w43 - w_p1``, ``Delta1p = w_p2 - w31``,
    ``Delta2 = w42 - w_s1``, ``Delta2p = w_s2 - w21``.
    """

    omega_p1: float
    omega_p2: float
    omega_s1: float
    omega_s2: float
    Delta1: float
    Delta1p: float
    Delta2: float
    Delta2p: float
    Omega_p1: complex
    Omega_p2: complex
    eps_p1: float
    eps_p2: float
    mode_area: float = math.pi * (0.68e-3) ** 2

    @classmethod
    def from_detunings(cls, system: AtomicSystem, *, Delta1, Delta1p=None, Delta2=0.0,
                       Delta2p=None, Omega_p1, Omega_p2, mode_area=None) -> "FieldDrive":
        """Build a drive from detunings and pump Rabi frequencies.

        Missing primed detunings are filled in from two-photon closure
        ``Delta1 - Delta1p = Delta2 - Delta2p``; ``Delta1p`` defaults to ``Delta1``.
        Field amplitudes follow from the Rabi frequencies and dipoles.
        """
        if Delta1p is None:
            Delta1p = Delta1 if Delta2p is None else Delta2p - Delta2 + Delta1
        if Delta2p is None:
            Delta2p = Delta2 - Delta1 + Delta1p
        d = system.dipoles
        eps1 = HBAR * abs(Omega_p1) / d.u34 if d.u34 > 0 else 0.0
        eps2 = HBAR * abs(Omega_p2) / d.u13 if d.u13 > 0 else 0.0
        kwargs = {}
        if mode_area is not None:
            kwargs["mode_area"] = mode_area
        return cls(
            omega_p1=OMEGA_42 - Delta1,
            omega_p2=OMEGA_21 + Delta1p,
            omega_s1=OMEGA_42 - Delta2,
            omega_s2=OMEGA_21 + Delta2p,
            Delta1=Delta1, Delta1p=Delta1p, Delta2=Delta2, Delta2p=Delta2p,
            Omega_p1=complex(Omega_p1), Omega_p2=complex(Omega_p2),
            eps_p1=eps1, eps_p2=eps2, **kwargs,
        )

    def with_(self, **changes) -> "FieldDrive":
        return replace(self, **changes)

    @property
    def two_photon_residual(self) -> float:
        return (self.Delta1 - self.Delta1p) - (self.Delta2 - self.Delta2p)


@dataclass(frozen=True)
class RelaxationRates:
    G21: complex
    G31: complex
    G42: complex
    G43: complex
    G41: complex

    def conj(self, name: str) -> complex:
        """Rate of the transposed coherence, e.g. ``conj('G13')``."""
        i, j = name[1], name[2]
        return getattr(self, f"G{j}{i}").conjugate()


def rabi_frequency(dipole, field_amplitude):
    """Rabi frequency ``mu E / hbar`` in rad/s (complex if the field is)."""
    if np.any(np.asarray(dipole) < 0):
        raise ValueError("dipole must be >= 0")
    return dipole * field_amplitude / HBAR


def relaxation_rates(system: AtomicSystem, drive: FieldDrive) -> RelaxationRates:
    g, G = system.gamma1, system.Gamma1
    return RelaxationRates(
        G21=complex(g, -drive.Delta2p),
        G31=complex(g, -drive.Delta1p),
        G42=complex(2 * G + g, -drive.Delta2),
        G43=complex(2 * G + g, -drive.Delta1),
        G41=complex(2 * G, drive.Delta2 - drive.Delta1),
    )


def most_probable_speed(T, m=MASS_RB85):
    """Most probable thermal speed sqrt(2 k_B T / m) in m/s."""
    if np.any(np.asarray(T) <= 0) or np.any(np.asarray(m) <= 0):
        raise ValueError("T and m must be positive")
    return np.sqrt(2.0 * K_B * T / m)


@dataclass(frozen=True)
class RegimeWarning:
    kind: str
    message: str
    value: float = field(default=float("nan"))


def validate_regime(drive: FieldDrive) -> list[RegimeWarning]:
    """Flag (never reject) drives outside the perturbative assumptions."""
    out = []
    p1 = abs(drive.Omega_p1)
    p2 = abs(drive.Omega_p2)
    ratio = math.inf if p1 == 0 and p2 > 0 else (p2 / p1 if p1 > 0 else 0.0)
    if ratio > HIERARCHY_LIMIT:
        out.append(RegimeWarning(
            "hierarchy", f"|Omega_p2|/|Omega_p1| = {ratio:.3g} exceeds {HIERARCHY_LIMIT}", ratio))
    scale = max(abs(drive.Delta1), abs(drive.Delta1p), abs(drive.Delta2), abs(drive.Delta2p))
    resid = abs(drive.two_photon_residual)
    if resid >= CLOSURE_RTOL * max(scale, 1.0) and resid > 0:
        out.append(RegimeWarning(
            "closure", f"two-photon closure broken by {resid:.3g} rad/s", resid))
    return out
