"""Synthetic photon-pair detection: event generation, coincidence histograms, R estimates.

Events are generated in fixed one-second chunks. Chunk ``k`` draws from
``SeedSequence(seed, spawn_key=(k,))`` so the output depends only on the seed,
never on how many worker threads produced it.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import io
import math
import os

import numpy as np
from scipy import signal, stats

from . import kernels
from .errors import InsufficientStatistics
from .statistics import (FWHM_TO_SIGMA, DetectorModel, NormalizedTrace, cauchy_schwarz_R,
                         cauchy_schwarz_sigma)

CHUNK_S = 1.0
MIN_EXPECTED = 10.0
EVENTS_HEADER = "# biphoton-events v1, duration={duration!r}, seed={seed}"


@dataclass(frozen=True)
class EventStream:
    s1_times: np.ndarray
    s2_times: np.ndarray
    duration: float
    seed: int

    def __post_init__(self):
        for name in ("s1_times", "s2_times"):
            t = getattr(self, name)
            if t.size and (t[0] < 0 or t[-1] > self.duration or np.any(np.diff(t) < 0)):
                raise ValueError(f"{name} must be sorted and lie within [0, duration]")

    @property
    def singles(self):
        """Measured singles rates (S1, S2) in counts/s."""
        return self.s1_times.size / self.duration, self.s2_times.size / self.duration


@dataclass(frozen=True)
class CoincidenceHistogram:
    bin_edges: np.ndarray
    counts: np.ndarray
    n_triggers: int
    accidental_floor: float

    @property
    def centers(self):
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    @property
    def g2(self):
        """Counts normalised to the accidental expectation; zeros when it vanishes."""
        if self.accidental_floor == 0:
            return np.zeros(self.counts.size)
        return self.counts / self.accidental_floor

    @property
    def g2_sigma(self):
        if self.accidental_floor == 0:
            return np.zeros(self.counts.size)
        return np.sqrt(self.counts) / self.accidental_floor


@dataclass(frozen=True)
class PairRates:
    R_pair: float
    R_s1_bg: float
    R_s2_bg: float

    def __post_init__(self):
        for name in ("R_pair", "R_s1_bg", "R_s2_bg"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


@dataclass(frozen=True)
class REstimate:
    R: float
    sigma_R: float
    g_cross: float
    g_auto1: float
    g_auto2: float
    tau0: float


def _excess_density(trace: NormalizedTrace):
    tau = np.asarray(trace.tau, dtype=np.float64)
    dens = np.clip(np.asarray(trace.g2, dtype=np.float64) - 1.0, 0.0, None)
    return tau, dens


def excess_area(trace: NormalizedTrace) -> float:
    """``integral (g2 - 1) dtau`` over the positive excess, in seconds."""
    tau, dens = _excess_density(trace)
    return float(np.trapezoid(dens, tau))


def forward_rates(trace: NormalizedTrace, S1: float, S2: float,
                  det1: DetectorModel, det2: DetectorModel) -> PairRates:
    """Emission rates that reproduce net singles ``S1``, ``S2`` and the trace's g2.

    Detected pairs arrive at ``S1 S2 * integral(g2 - 1)``; emitted pairs follow
    by dividing out both efficiencies, and the backgrounds fill the remaining
    singles after dark counts.
    """
    area = excess_area(trace)
    eta = det1.efficiency * det2.efficiency
    if area > 0 and eta == 0:
        raise ValueError("pairs cannot be detected with zero efficiency")
    r_pair = S1 * S2 * area / eta if area > 0 else 0.0
    bgs = []
    for S, det in ((S1, det1), (S2, det2)):
        if det.efficiency == 0:
            bgs.append(0.0)
            continue
        bg = (S - det.dark_rate) / det.efficiency - r_pair
        if bg < 0:
            raise ValueError("singles too low for the requested pair rate and dark counts")
        bgs.append(bg)
    return PairRates(R_pair=r_pair, R_s1_bg=bgs[0], R_s2_bg=bgs[1])


class _DelaySampler:
    # inverse CDF of the pair delay, linear between grid points
    def __init__(self, trace: NormalizedTrace):
        tau, dens = _excess_density(trace)
        cdf = np.concatenate(([0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(tau))))
        self.total = cdf[-1]
        if self.total > 0:
            keep = np.concatenate(([True], np.diff(cdf) > 0))
            self.cdf = cdf[keep] / self.total
            self.tau = tau[keep]

    def __call__(self, u):
        return np.interp(u, self.cdf, self.tau)


def _detect(rng, times, det: DetectorModel):
    kept = times[rng.random(times.size) < det.efficiency]
    if det.response_fwhm > 0:
        kept = kept + rng.normal(0.0, det.response_fwhm * FWHM_TO_SIGMA, kept.size)
    return kept


def _chunk(k, seed, duration, rates: PairRates, sampler, det1, det2):
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(k,)))
    t0 = k * CHUNK_S
    span = min(CHUNK_S, duration - t0)

    def uniform(rate):
        return t0 + span * rng.random(rng.poisson(rate * span))

    if rates.R_pair > 0 and sampler.total > 0:
        p1 = uniform(rates.R_pair)
        p2 = p1 + sampler(rng.random(p1.size))
    else:
        p1 = p2 = np.empty(0)
    s1 = np.concatenate((p1, uniform(rates.R_s1_bg)))
    s2 = np.concatenate((p2, uniform(rates.R_s2_bg)))
    s1 = np.concatenate((_detect(rng, s1, det1), uniform(det1.dark_rate)))
    s2 = np.concatenate((_detect(rng, s2, det2), uniform(det2.dark_rate)))
    return s1, s2


def _merge(parts, duration):
    t = np.sort(np.concatenate(parts)) if parts else np.empty(0)
    return t[(t >= 0) & (t <= duration)]


def generate_events(trace: NormalizedTrace, rates: PairRates, det1: DetectorModel,
                    det2: DetectorModel, duration: float, seed: int,
                    threads: int | None = None) -> EventStream:
    """Pairs with delay density ``g2 - 1`` plus Poisson backgrounds and dark counts.

    Signal-2 photons follow their signal-1 partner by the sampled delay
    ``tau = t_s2 - t_s1``. Efficiency thins every photon before jitter; dark
    counts bypass both.
    """
    if duration <= 0:
        raise ValueError("duration must be positive")
    sampler = _DelaySampler(trace)
    n_chunks = int(math.ceil(duration / CHUNK_S))
    workers = threads or min(n_chunks, os.cpu_count() or 1)

    def job(k):
        return _chunk(k, seed, duration, rates, sampler, det1, det2)

    if workers > 1 and n_chunks > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, range(n_chunks)))
    else:
        parts = [job(k) for k in range(n_chunks)]
    return EventStream(s1_times=_merge([p[0] for p in parts], duration),
                       s2_times=_merge([p[1] for p in parts], duration),
                       duration=float(duration), seed=int(seed))


def cross_correlate(stream: EventStream, bin_width: float,
                    window: tuple[float, float]) -> CoincidenceHistogram:
    """Histogram of ``t_s2 - t_s1`` over all pairs with delay in ``window``."""
    if bin_width <= 0:
        raise ValueError("bin_width must be positive")
    lo, hi = window
    nbins = int(round((hi - lo) / bin_width))
    if nbins < 1:
        raise ValueError("window shorter than one bin")
    counts = kernels.cross_histogram(stream.s1_times, stream.s2_times, lo, bin_width, nbins)
    n1, n2 = stream.s1_times.size, stream.s2_times.size
    floor = n1 * n2 * bin_width / stream.duration
    return CoincidenceHistogram(bin_edges=lo + bin_width * np.arange(nbins + 1),
                                counts=np.asarray(counts, dtype=np.int64),
                                n_triggers=n1, accidental_floor=floor)


def expected_histogram(trace: NormalizedTrace, det1: DetectorModel, det2: DetectorModel,
                       bin_edges, step: float | None = None) -> np.ndarray:
    """Mean normalised g2 per bin of the forward model.

    The excess is smeared by the combined jitter of both detectors and
    averaged over each bin.
    """
    tau, dens = _excess_density(trace)
    dt = step or float(tau[1] - tau[0])
    edges = np.asarray(bin_edges, dtype=np.float64)
    lo = min(edges[0], tau[0]) - 5e-9
    hi = max(edges[-1], tau[-1]) + 5e-9
    grid = np.arange(lo, hi + dt, dt)
    excess = np.interp(grid, tau, dens, left=0.0, right=0.0)
    sigma = math.hypot(det1.response_fwhm, det2.response_fwhm) * FWHM_TO_SIGMA
    if sigma > 0:
        half = int(math.ceil(6 * sigma / dt))
        kern = np.exp(-0.5 * (np.arange(-half, half + 1) * dt / sigma) ** 2)
        excess = signal.fftconvolve(excess, kern / kern.sum(), mode="same")
    cum = np.concatenate(([0.0], np.cumsum(0.5 * (excess[1:] + excess[:-1]) * dt)))
    at = np.interp(edges, grid, cum)
    return 1.0 + np.diff(at) / np.diff(edges)


def flatness_pvalue(hist: CoincidenceHistogram) -> float:
    """Chi-square p-value of the counts against the accidental floor."""
    if hist.accidental_floor == 0:
        return 1.0
    chi2 = float(np.sum((hist.counts - hist.accidental_floor) ** 2) / hist.accidental_floor)
    return float(stats.chi2.sf(chi2, hist.counts.size))


def auto_correlation(times, duration: float, window: float):
    """Normalised zero-delay autocorrelation and its Poisson error.

    Counts unordered pairs closer than ``window``; an uncorrelated stream of
    ``n`` events expects ``n (n - 1) window / duration`` of them.
    """
    t = np.asarray(times, dtype=np.float64)
    n = t.size
    expected = n * (n - 1) * window / duration
    if expected < MIN_EXPECTED:
        raise InsufficientStatistics(
            f"autocorrelation expects {expected:.3g} pairs, need >= {MIN_EXPECTED}")
    c = kernels.auto_coincidences(t, window)
    return c / expected, math.sqrt(max(c, 1)) / expected


def estimate_R(stream: EventStream, bin_width: float, window: tuple[float, float],
               auto_window: float | None = None, tau0: float | None = None) -> REstimate:
    """Cauchy-Schwarz ratio ``g_cross^2 / (g_auto1 g_auto2)`` from one stream.

    ``g_cross`` is read from the bin containing ``tau0`` (the fullest bin
    when omitted), which must hold at least ten counts. Autocorrelations use
    pairs closer than ``auto_window`` (default ``bin_width / 2``, the same
    delay span as a centred cross bin).
    """
    hist = cross_correlate(stream, bin_width, window)
    if hist.accidental_floor == 0:
        raise InsufficientStatistics("a channel recorded no events")
    if tau0 is None:
        i = int(np.argmax(hist.counts))
    else:
        i = int(np.searchsorted(hist.bin_edges, tau0, side="right")) - 1
        if not 0 <= i < hist.counts.size:
            raise ValueError("tau0 outside the histogram window")
    c = int(hist.counts[i])
    if c < MIN_EXPECTED:
        raise InsufficientStatistics(f"zero-delay bin holds {c} counts, need >= {MIN_EXPECTED:g}")
    g_cross = c / hist.accidental_floor
    sigma_cross_sq = 2 * g_cross**2 / math.sqrt(max(c, 1))
    aw = auto_window or bin_width / 2
    g1, s1 = auto_correlation(stream.s1_times, stream.duration, aw)
    g2, s2 = auto_correlation(stream.s2_times, stream.duration, aw)
    R = cauchy_schwarz_R(g_cross**2, g1, g2)
    sigma = cauchy_schwarz_sigma(g_cross**2, sigma_cross_sq, g1, s1, g2, s2)
    return REstimate(R=R, sigma_R=sigma, g_cross=g_cross, g_auto1=g1, g_auto2=g2,
                     tau0=float(hist.centers[i]))


def thermal_events(rate1: float, rate2: float, coherence_time: float, duration: float,
                   seed: int, dt: float | None = None, block: int = 1 << 20) -> EventStream:
    """Both detectors driven by one chaotic intensity ``|E(t)|^2`` (classical light).

    ``E`` is a complex Ornstein-Uhlenbeck field with unit mean intensity and
    field correlation time ``coherence_time``; counts are Poisson given the
    intensity in each step of length ``dt`` (default ``coherence_time / 50``).
    """
    dt = dt or coherence_time / 50
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    a = math.exp(-dt / coherence_time)
    b = math.sqrt(1 - a * a)
    n = int(round(duration / dt))
    state = (rng.normal() + 1j * rng.normal()) / math.sqrt(2)
    out1, out2 = [], []
    for start in range(0, n, block):
        m = min(block, n - start)
        noise = b * (rng.normal(size=m) + 1j * rng.normal(size=m)) / math.sqrt(2)
        field, _ = signal.lfilter([1.0], [1.0, -a], noise, zi=np.array([a * state]))
        state = field[-1]
        intensity = np.abs(field) ** 2
        t0 = (start + np.arange(m)) * dt
        for rate, out in ((rate1, out1), (rate2, out2)):
            k = rng.poisson(rate * intensity * dt)
            idx = np.repeat(np.arange(m), k)
            out.append(t0[idx] + dt * rng.random(idx.size))
    return EventStream(s1_times=_merge(out1, duration), s2_times=_merge(out2, duration),
                       duration=float(duration), seed=int(seed))


def write_events(path, stream: EventStream):
    """Write the columnar text format: header then ``<channel> <t>`` sorted by time."""
    ch = np.concatenate((np.ones(stream.s1_times.size, dtype=np.int8),
                         np.full(stream.s2_times.size, 2, dtype=np.int8)))
    t = np.concatenate((stream.s1_times, stream.s2_times))
    order = np.lexsort((ch, t))
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(EVENTS_HEADER.format(duration=stream.duration, seed=stream.seed) + "\n")
        fh.writelines(f"{c} {x:.12f}\n" for c, x in zip(ch[order].tolist(), t[order].tolist()))


def read_events(path) -> EventStream:
    with open(path, encoding="ascii") as fh:
        header = fh.readline().strip()
        if not header.startswith("# biphoton-events v1"):
            raise ValueError(f"{path}: not a biphoton-events v1 file")
        fields = dict(part.strip().split("=", 1) for part in header.split(",")[1:])
        body = fh.read()
    data = np.loadtxt(io.StringIO(body), ndmin=2) if body.strip() else np.empty((0, 2))
    ch = data[:, 0].astype(int)
    t = data[:, 1]
    return EventStream(s1_times=np.sort(t[ch == 1]), s2_times=np.sort(t[ch == 2]),
                       duration=float(fields["duration"]), seed=int(fields["seed"]))
