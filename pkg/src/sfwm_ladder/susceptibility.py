"""Steady-state density matrix of the ladder and the signal-2 susceptibilities.

The steady-state solver builds the full 16x16 Liouvillian of the four-level
system in the rotating frame, with every detuning folded into the complex
coherence rates, and solves it with the trace condition. It is deliberately
brute force: it is the reference that the closed forms are checked against.

Levels are indexed 0..3 for |1>..|4>.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import EPS0, HBAR, AtomicSystem, FieldDrive, relaxation_rates
from .errors import DegenerateDenominator, SingularSystem

DENOM_FLOOR = 1e-30
RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class CoherenceState:
    rho: np.ndarray
    residual: float

    def __getitem__(self, ij):
        """1-based access, ``state[2, 1]`` is rho_21."""
        i, j = ij
        return self.rho[i - 1, j - 1]

    @property
    def trace(self):
        return np.trace(self.rho)


@dataclass(frozen=True)
class Susceptibilities:
    chi1_s2: complex
    chi3_s2: complex
    chi1_s1: complex
    chi1_s1_negligible: bool


def _coherence_rates(system: AtomicSystem, drive: FieldDrive) -> np.ndarray:
    """4x4 table of coherence decay rates with Gamma_ji = conj(Gamma_ij).

    Real parts are the closed-form damping constants. Imaginary parts come
    from rotating-frame level energies fixed by G21, G31 and G41, the rates
    on the signal-2 pathway, so that every coherence rotates consistently
    and the generator stays physical. G42 and G43 then keep their damping
    but take path-consistent detunings; they enter neither chi1_s2 nor
    chi3_s2 at the orders extracted here.
    """
    r = relaxation_rates(system, drive)
    g, G = system.gamma1, system.Gamma1
    energy = np.array([0.0, -r.G21.imag, -r.G31.imag, -r.G41.imag])
    damping = {(1, 0): g, (2, 0): g, (3, 0): 2 * G, (2, 1): 2 * g,
               (3, 1): 2 * G + g, (3, 2): 2 * G + g}
    table = np.zeros((4, 4), dtype=np.complex128)
    for (i, j), val in damping.items():
        table[i, j] = val - 1j * (energy[i] - energy[j])
        table[j, i] = np.conj(table[i, j])
    return table


def _coupling(drive: FieldDrive, Omega_s1, Omega_s2) -> np.ndarray:
    v = np.zeros((4, 4), dtype=np.complex128)
    v[1, 0] = -Omega_s2
    v[2, 0] = -drive.Omega_p2
    v[3, 2] = -drive.Omega_p1
    v[3, 1] = -Omega_s1
    return v + v.conj().T


def liouvillian(system: AtomicSystem, drive: FieldDrive, Omega_s1=0.0, Omega_s2=0.0,
                closure: str = "cascade") -> np.ndarray:
    """Superoperator acting on row-major ``vec(rho)``.

    ``closure`` selects how |4> repopulates the intermediate levels:
    ``"cascade"`` splits its decay equally between |2> and |3>, ``"via2"``
    sends all of it to |2>. Both decay routes end in |1>.
    """
    eye = np.eye(4)
    v = _coupling(drive, Omega_s1, Omega_s2)
    lv = -1j * (np.kron(v, eye) - np.kron(eye, v.T))
    rates = _coherence_rates(system, drive)
    idx = lambda i, j: 4 * i + j  # noqa: E731
    for i in range(4):
        for j in range(4):
            if i != j:
                lv[idx(i, j), idx(i, j)] -= rates[i, j]
    g2 = 2 * system.gamma1
    G2 = 2 * system.Gamma1
    if closure == "cascade":
        b2, b3 = 0.5, 0.5
    elif closure == "via2":
        b2, b3 = 1.0, 0.0
    else:
        raise ValueError(f"unknown closure {closure!r}")
    p1, p2, p3, p4 = idx(0, 0), idx(1, 1), idx(2, 2), idx(3, 3)
    lv[p2, p2] -= g2
    lv[p3, p3] -= g2
    lv[p1, p2] += g2
    lv[p1, p3] += g2
    lv[p4, p4] -= G2
    lv[p2, p4] += b2 * G2
    lv[p3, p4] += b3 * G2
    return lv


def steady_state_solve(system: AtomicSystem, drive: FieldDrive, Omega_s1=0.0, Omega_s2=0.0,
                       closure: str = "cascade") -> CoherenceState:
    lv = liouvillian(system, drive, Omega_s1, Omega_s2, closure)
    a = lv.copy()
    b = np.zeros(16, dtype=np.complex128)
    # replace the rho_11 balance with trace conservation
    a[0, :] = 0.0
    a[0, [0, 5, 10, 15]] = 1.0
    b[0] = 1.0
    scale = np.abs(lv).max()
    if scale == 0 or np.linalg.cond(a / max(scale, 1.0)) > 1e13:
        raise SingularSystem("steady-state system is rank deficient (check decay rates)")
    x = np.linalg.solve(a, b)
    resid = float(np.abs(lv @ x).max() / scale)
    if resid > RESIDUAL_TOL:
        raise SingularSystem(f"steady-state residual {resid:.3g} exceeds {RESIDUAL_TOL}")
    rho = x.reshape(4, 4)
    return CoherenceState(rho=rho, residual=resid)


def _weak_amplitude(drive: FieldDrive, rel):
    ref = abs(drive.Omega_p1)
    return rel * ref if ref > 0 else rel


def oracle_chi1_s2(system: AtomicSystem, drive: FieldDrive, rel: float = 1e-6,
                   closure: str = "cascade") -> complex:
    """Linear signal-2 response read off the solved rho_21.

    Uses a symmetric difference in the signal-2 Rabi frequency, so terms even
    in the probe drop out.
    """
    s = _weak_amplitude(drive, rel)
    plus = steady_state_solve(system, drive, Omega_s2=s, closure=closure)[2, 1]
    minus = steady_state_solve(system, drive, Omega_s2=-s, closure=closure)[2, 1]
    coef = (plus - minus) / (2 * s)
    return complex(system.N * system.dipoles.u21**2 * coef / (HBAR * EPS0))


def oracle_chi3_s2(system: AtomicSystem, drive: FieldDrive, rel: float = 1e-4,
                   closure: str = "cascade") -> complex:
    """Third-order signal-2 response from the mixed difference of rho_21.

    rho_21 is sampled at (+-a, +-b) in (Omega_p2, Omega_s1); the mixed
    second difference isolates the term bilinear in the two weak fields.
    Requires a non-zero pump-1 Rabi frequency.
    """
    if drive.Omega_p1 == 0:
        raise ValueError("oracle_chi3_s2 needs Omega_p1 != 0")
    a = abs(drive.Omega_p2) or _weak_amplitude(drive, rel)
    b = _weak_amplitude(drive, rel)
    vals = {}
    for sa in (1, -1):
        for sb in (1, -1):
            d = drive.with_(Omega_p2=sa * a)
            vals[sa, sb] = steady_state_solve(system, d, Omega_s1=sb * b, closure=closure)[2, 1]
    coef = (vals[1, 1] - vals[1, -1] - vals[-1, 1] + vals[-1, -1]) / (4 * a * b)
    d = system.dipoles
    return complex(system.N * d.u21 * d.u13 * d.u34 * d.u42 * coef
                   / (HBAR**3 * EPS0 * drive.Omega_p1))


def _check_denominator(value, what):
    if abs(value) < DENOM_FLOOR:
        raise DegenerateDenominator(f"{what} denominator vanishes ({value!r})")


def chi1_s2(system: AtomicSystem, drive: FieldDrive) -> complex:
    """First-order signal-2 susceptibility, closed form as printed.

    ``-i N u21^2 (G14 + 2 gamma1) / (hbar eps0 (G13 G14 + |Omega_p1|^2))``
    with ``G13 = conj(G31)`` and ``G14 = conj(G41)``.
    """
    r = relaxation_rates(system, drive)
    g13, g14 = r.conj("G13"), r.conj("G14")
    den = g13 * g14 + abs(drive.Omega_p1) ** 2
    _check_denominator(den, "chi1_s2")
    num = -1j * system.N * system.dipoles.u21**2 * (g14 + 2 * system.gamma1)
    return complex(num / (HBAR * EPS0 * den))


def chi3_s2(system: AtomicSystem, drive: FieldDrive) -> complex:
    """Third-order signal-2 susceptibility (m^2/V^2).

    ``-i N u21 u13 u34 u42 / (hbar^3 eps0 G21 (G31 G41 + |Omega_p1|^2))``
    """
    r = relaxation_rates(system, drive)
    inner = r.G31 * r.G41 + abs(drive.Omega_p1) ** 2
    den = r.G21 * inner
    _check_denominator(den, "chi3_s2")
    d = system.dipoles
    return complex(-1j * system.N * d.u21 * d.u13 * d.u34 * d.u42 / (HBAR**3 * EPS0 * den))


def chi3_s2_spectrum(system: AtomicSystem, drive: FieldDrive, signal_detuning, delta1=None):
    """Causal spectral form of the signal-2 nonlinearity for the Fourier route.

    ``signal_detuning`` is ``w_s2 - w21`` (array, rad/s), with energy
    conservation fixing ``w_s1``. Both the signal coherence and the
    two-photon coherence respond at that detuning,

        -i K / ((gamma1 - i x) (G13 (2 Gamma1 - i x) + |Omega_p1|^2)),

    with ``G13 = gamma1 + i delta1`` the pump-1 dressed intermediate rate.
    This is the product of denominators of the closed form with the conjugate
    pairing used for chi1_s2; its transform is the two-exponential amplitude.
    ``delta1`` defaults to the drive's pump-1 detuning (pass the Doppler-shifted
    value for moving atoms).
    """
    x = np.asarray(signal_detuning, dtype=np.float64)
    d1 = drive.Delta1 if delta1 is None else delta1
    g, G = system.gamma1, system.Gamma1
    g13 = g + 1j * d1
    den = (g - 1j * x) * (g13 * (2 * G - 1j * x) + abs(drive.Omega_p1) ** 2)
    if np.any(np.abs(den) < DENOM_FLOOR):
        raise DegenerateDenominator("chi3 spectrum denominator vanishes")
    d = system.dipoles
    k = system.N * d.u21 * d.u13 * d.u34 * d.u42 / (HBAR**3 * EPS0)
    return -1j * k / den


def chi1_two_level(A, Delta, gamma):
    """Two-level linear response ``A / (Delta - i gamma)``."""
    if np.any(np.asarray(gamma) <= 0):
        raise ValueError("gamma must be positive")
    return A / (Delta - 1j * gamma)


def susceptibilities(system: AtomicSystem, drive: FieldDrive, populations=None,
                     negligible_ratio: float = 1e-6) -> Susceptibilities:
    """All three susceptibilities; ``populations`` defaults to all atoms in |1>.

    chi1_s1 is the linear response on the |2>-|4> transition and scales with
    the population difference rho_22 - rho_44.
    """
    pops = np.array([1.0, 0.0, 0.0, 0.0]) if populations is None else np.asarray(populations)
    r = relaxation_rates(system, drive)
    c1 = chi1_s2(system, drive)
    c3 = chi3_s2(system, drive)
    diff = float(np.real(pops[1] - pops[3]))
    cs1 = complex(1j * system.N * system.dipoles.u42**2 * diff / (HBAR * EPS0 * r.G42))
    ref = abs(c1) if c1 != 0 else 1.0
    return Susceptibilities(chi1_s2=c1, chi3_s2=c3, chi1_s1=cs1,
                            chi1_s1_negligible=abs(cs1) <= negligible_ratio * ref)
