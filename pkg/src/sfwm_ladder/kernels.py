"""Hot inner loops, each in a numba and a pure-numpy flavour.

The public names (``fourier_sum``, ``doppler_amplitude``, ``cross_histogram``,
``auto_coincidences``) dispatch on :data:`sfwm_ladder._jit.USE_NUMBA`. Both
flavours are importable directly so they can be tested and benchmarked
against each other.
"""

import numpy as np

from ._jit import USE_NUMBA, njit

_CHUNK = 256


# -- Fourier sum: a(tau) = sum_j w_j exp(-i omega_j tau) ---------------------

def fourier_sum_numpy(omega, weights, tau):
    omega = np.asarray(omega, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.complex128)
    tau = np.asarray(tau, dtype=np.float64)
    out = np.empty(tau.shape, dtype=np.complex128)
    for start in range(0, tau.size, _CHUNK):
        t = tau[start:start + _CHUNK]
        out[start:start + _CHUNK] = np.exp(-1j * np.outer(t, omega)) @ weights
    return out


@njit(cache=True, fastmath=False)
def _fourier_sum_jit(omega, weights, tau):
    out = np.empty(tau.shape[0], dtype=np.complex128)
    for k in range(tau.shape[0]):
        t = tau[k]
        acc_re = 0.0
        acc_im = 0.0
        for j in range(omega.shape[0]):
            ph = omega[j] * t
            c = np.cos(ph)
            s = np.sin(ph)
            w = weights[j]
            # w * (c - i s)
            acc_re += w.real * c + w.imag * s
            acc_im += w.imag * c - w.real * s
        out[k] = acc_re + 1j * acc_im
    return out


def fourier_sum_numba(omega, weights, tau):
    return _fourier_sum_jit(np.ascontiguousarray(omega, dtype=np.float64),
                            np.ascontiguousarray(weights, dtype=np.complex128),
                            np.ascontiguousarray(tau, dtype=np.float64))


# -- Doppler-averaged two-term amplitude ------------------------------------

def doppler_amplitude_numpy(tau, delta_d, weights, gamma1, Gamma1, rabi_sq):
    """Sum over velocity nodes of the bracketed two-exponential amplitude.

    ``delta_d`` holds the Doppler-shifted pump-1 detuning at each node and
    ``weights`` the normalised quadrature weights. Entries with tau < 0 are 0.
    """
    tau = np.asarray(tau, dtype=np.float64)
    delta_d = np.asarray(delta_d, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    denom = 1j * delta_d * (2.0 * Gamma1 - gamma1) + rabi_sq
    rate = 2.0 * Gamma1 + gamma1 * rabi_sq / delta_d**2 - 1j * rabi_sq / delta_d
    coef = weights / denom
    out = np.zeros(tau.shape, dtype=np.complex128)
    pos = np.nonzero(tau >= 0.0)[0]
    for start in range(0, pos.size, _CHUNK):
        idx = pos[start:start + _CHUNK]
        t = tau[idx][:, None]
        terms = np.exp(-gamma1 * t) - np.exp(-rate[None, :] * t)
        out[idx] = terms @ coef
    return out


@njit(cache=True)
def _doppler_amplitude_jit(tau, delta_d, weights, gamma1, Gamma1, rabi_sq):
    n = delta_d.shape[0]
    coef = np.empty(n, dtype=np.complex128)
    rate = np.empty(n, dtype=np.complex128)
    for j in range(n):
        d = delta_d[j]
        coef[j] = weights[j] / (1j * d * (2.0 * Gamma1 - gamma1) + rabi_sq)
        rate[j] = 2.0 * Gamma1 + gamma1 * rabi_sq / (d * d) - 1j * rabi_sq / d
    out = np.zeros(tau.shape[0], dtype=np.complex128)
    for k in range(tau.shape[0]):
        t = tau[k]
        if t < 0.0:
            continue
        slow = np.exp(-gamma1 * t)
        acc = 0.0 + 0.0j
        for j in range(n):
            acc += coef[j] * (slow - np.exp(-rate[j] * t))
        out[k] = acc
    return out


def doppler_amplitude_numba(tau, delta_d, weights, gamma1, Gamma1, rabi_sq):
    return _doppler_amplitude_jit(np.ascontiguousarray(tau, dtype=np.float64),
                                  np.ascontiguousarray(delta_d, dtype=np.float64),
                                  np.ascontiguousarray(weights, dtype=np.float64),
                                  float(gamma1), float(Gamma1), float(rabi_sq))


# -- Coincidence histograms -------------------------------------------------

def cross_histogram_numpy(t1, t2, lo, bin_width, nbins):
    """Histogram of ``t2[j] - t1[i]`` over all pairs in ``[lo, lo + nbins*bin_width)``.

    Both inputs must be sorted ascending.
    """
    t1 = np.asarray(t1, dtype=np.float64)
    t2 = np.asarray(t2, dtype=np.float64)
    counts = np.zeros(nbins, dtype=np.int64)
    if t1.size == 0 or t2.size == 0:
        return counts
    hi = lo + nbins * bin_width
    first = np.searchsorted(t2, t1 + lo, side="left")
    last = np.searchsorted(t2, t1 + hi, side="left")
    n_pairs = last - first
    step = 1 << 16
    for start in range(0, t1.size, step):
        sl = slice(start, start + step)
        reps = n_pairs[sl]
        total = int(reps.sum())
        if total == 0:
            continue
        owner = np.repeat(np.arange(reps.size), reps)
        offs = np.arange(total) - np.repeat(np.cumsum(reps) - reps, reps)
        j = first[sl][owner] + offs
        dt = t2[j] - t1[sl][owner]
        b = np.floor((dt - lo) / bin_width).astype(np.int64)
        b = b[(b >= 0) & (b < nbins)]
        counts += np.bincount(b, minlength=nbins)
    return counts


@njit(cache=True)
def _cross_histogram_jit(t1, t2, lo, bin_width, nbins):
    counts = np.zeros(nbins, dtype=np.int64)
    n2 = t2.shape[0]
    hi = lo + nbins * bin_width
    j0 = 0
    for i in range(t1.shape[0]):
        start = t1[i] + lo
        while j0 < n2 and t2[j0] < start:
            j0 += 1
        j = j0
        stop = t1[i] + hi
        while j < n2 and t2[j] < stop:
            b = int(np.floor((t2[j] - t1[i] - lo) / bin_width))
            if 0 <= b < nbins:
                counts[b] += 1
            j += 1
    return counts


def cross_histogram_numba(t1, t2, lo, bin_width, nbins):
    return _cross_histogram_jit(np.ascontiguousarray(t1, dtype=np.float64),
                                np.ascontiguousarray(t2, dtype=np.float64),
                                float(lo), float(bin_width), int(nbins))


def auto_coincidences_numpy(t, window):
    """Number of ordered pairs i < j with ``0 <= t[j] - t[i] < window``."""
    t = np.asarray(t, dtype=np.float64)
    if t.size < 2:
        return 0
    last = np.searchsorted(t, t + window, side="left")
    return int(np.sum(last - np.arange(t.size) - 1))


@njit(cache=True)
def _auto_coincidences_jit(t, window):
    n = t.shape[0]
    total = 0
    j = 0
    for i in range(n):
        if j < i + 1:
            j = i + 1
        while j < n and t[j] - t[i] < window:
            j += 1
        total += j - i - 1
    return total


def auto_coincidences_numba(t, window):
    t = np.ascontiguousarray(t, dtype=np.float64)
    if t.shape[0] < 2:
        return 0
    return int(_auto_coincidences_jit(t, float(window)))


if USE_NUMBA:
    fourier_sum = fourier_sum_numba
    doppler_amplitude = doppler_amplitude_numba
    cross_histogram = cross_histogram_numba
    auto_coincidences = auto_coincidences_numba
else:
    fourier_sum = fourier_sum_numpy
    doppler_amplitude = doppler_amplitude_numpy
    cross_histogram = cross_histogram_numpy
    auto_coincidences = auto_coincidences_numpy
