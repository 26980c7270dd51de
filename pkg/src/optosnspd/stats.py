"""Monte Carlo photon counting over many bias periods.

Per-period randomness comes from independent generators seeded with
(master_seed, period_index), so results are identical for any worker count
and any partitioning of the periods.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels as K
from .circuit import DEFAULT_TIME_STEP, OpticalDrive, ReadoutParams, pack_params
from .errors import ContractError, DomainError, NumericalError
from .modulator import ModulatorParams
from .photodiode import PhotodiodeParams
from .snspd import NanowireParams


@dataclass(frozen=True)
class PhotonSource:
    mean_photons_per_pulse: float
    pulse_time_in_period: float  # s
    background_rate: float = 0.0  # events/s during bias-on

    def __post_init__(self):
        if self.mean_photons_per_pulse < 0:
            raise DomainError("mean photon number must be >= 0")
        if self.background_rate < 0:
            raise DomainError("background_rate must be >= 0")
        if self.pulse_time_in_period < 0:
            raise DomainError("pulse time must be >= 0")


@dataclass
class CountHistogram:
    bin_edges: np.ndarray
    counts: np.ndarray  # signed after subtraction
    errors: np.ndarray
    n_periods: int

    def __post_init__(self):
        self.bin_edges = np.asarray(self.bin_edges, dtype=float)
        self.counts = np.asarray(self.counts)
        self.errors = np.asarray(self.errors, dtype=float)
        if len(self.counts) != len(self.bin_edges) - 1 or len(self.errors) != len(
            self.counts
        ):
            raise ContractError("histogram arrays have inconsistent lengths")

    @property
    def bin_centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("bin_lo_s,bin_hi_s,counts,error\n")
            for lo, hi, c, e in zip(
                self.bin_edges[:-1], self.bin_edges[1:], self.counts, self.errors
            ):
                fh.write("%.17e,%.17e,%.17e,%.17e\n" % (lo, hi, c, e))

    def to_json(self, seed=None, preset=None) -> str:
        return json.dumps(
            {
                "bin_edges_s": self.bin_edges.tolist(),
                "counts": np.asarray(self.counts, dtype=float).tolist(),
                "errors": self.errors.tolist(),
                "n_periods": self.n_periods,
                "seed": seed,
                "preset": preset,
            },
            indent=2,
            sort_keys=True,
        )


def sample_pulse_photons(source: PhotonSource, rng: np.random.Generator) -> int:
    """Poisson photon number for one pulse."""
    if source.mean_photons_per_pulse == 0:
        return 0
    return int(rng.poisson(source.mean_photons_per_pulse))


def _period_events(
    drive: OpticalDrive, source: PhotonSource, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Sorted candidate event times within one period plus uniform draws.

    Background is a homogeneous Poisson process during the bias-on window;
    signal photons all arrive at the pulse time.
    """
    t_on = drive.bias_off_time
    n_bg = int(rng.poisson(source.background_rate * t_on)) if source.background_rate else 0
    bg_times = np.sort(rng.uniform(0.0, t_on, n_bg)) if n_bg else np.empty(0)
    n_sig = sample_pulse_photons(source, rng)
    times = np.concatenate([bg_times, np.full(n_sig, source.pulse_time_in_period)])
    order = np.argsort(times, kind="stable")
    times = times[order]
    draws = rng.uniform(size=len(times))
    return times, draws


def run_counting_experiment(
    drive: OpticalDrive,
    source: PhotonSource,
    pd: PhotodiodeParams,
    nw: NanowireParams,
    mod: ModulatorParams,
    readout: ReadoutParams,
    n_periods: int,
    rng_seed: int,
    dt: float = DEFAULT_TIME_STEP,
    workers: int = 1,
) -> np.ndarray:
    """Click delays (s, relative to period start) over n_periods bias periods.

    Each period starts from the reset detector; the first accepted event
    latches and at most one click is recorded per period.
    """
    if n_periods < 1:
        raise DomainError("n_periods must be >= 1")
    par = pack_params(pd, nw, mod, readout, drive)
    n_steps = int(round(drive.period / dt))

    # Event generation is sequential and cheap; simulation is parallel.
    events = []
    for idx in range(n_periods):
        rng = np.random.default_rng([rng_seed, idx])
        events.append(_period_events(drive, source, rng))

    delays = np.full(n_periods, -1.0)

    def simulate_chunk(lo, hi):
        for i in range(lo, hi):
            times, draws = events[i]
            if len(times) == 0:
                continue
            try:
                delays[i] = K.period_click_time(dt, n_steps, par, times, draws)
            except Exception as exc:  # pragma: no cover - kernel failures are bugs
                raise NumericalError(f"simulation failed at period {i}") from exc

    if workers <= 1:
        simulate_chunk(0, n_periods)
    else:
        chunk = (n_periods + workers - 1) // workers
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(simulate_chunk, lo, min(lo + chunk, n_periods))
                for lo in range(0, n_periods, chunk)
            ]
            for fut in futures:
                fut.result()

    return delays[delays >= 0.0]


def build_histogram(delays, bin_edges, n_periods: int = 0) -> CountHistogram:
    """Bin click delays; errors are sqrt(count) per bin (counting statistics)."""
    bin_edges = np.asarray(bin_edges, dtype=float)
    if len(bin_edges) < 2 or np.any(np.diff(bin_edges) <= 0):
        raise DomainError("bin_edges must be strictly increasing")
    counts, _ = np.histogram(np.asarray(delays, dtype=float), bins=bin_edges)
    return CountHistogram(
        bin_edges=bin_edges,
        counts=counts,
        errors=np.sqrt(counts.astype(float)),
        n_periods=n_periods,
    )


def subtract_background(
    signal: CountHistogram, background: CountHistogram
) -> CountHistogram:
    """Signed difference histogram with quadrature-combined errors."""
    if not np.array_equal(signal.bin_edges, background.bin_edges):
        raise ContractError("histograms have different binning")
    if signal.n_periods != background.n_periods:
        raise ContractError("histograms cover different numbers of periods")
    return CountHistogram(
        bin_edges=signal.bin_edges,
        counts=np.asarray(signal.counts, dtype=float)
        - np.asarray(background.counts, dtype=float),
        errors=np.sqrt(signal.errors**2 + background.errors**2),
        n_periods=signal.n_periods,
    )


@dataclass(frozen=True)
class PeakStats:
    peak_delay: float  # s, center of the maximum bin
    fwhm: float  # s, interpolated at half maximum


def peak_stats(hist: CountHistogram) -> Optional[PeakStats]:
    """Peak position and FWHM; None (no-peak) when no bin is positive."""
    counts = np.asarray(hist.counts, dtype=float)
    if len(counts) == 0 or np.max(counts) <= 0:
        return None
    centers = hist.bin_centers
    k = int(np.argmax(counts))
    half = counts[k] / 2.0

    # Walk outward from the peak to the half-maximum crossings.
    left = centers[0] if counts[0] > half else None
    for i in range(k, 0, -1):
        if counts[i - 1] <= half:
            frac = (counts[i] - half) / (counts[i] - counts[i - 1])
            left = centers[i] - frac * (centers[i] - centers[i - 1])
            break
    else:
        left = centers[0]
    right = centers[-1]
    for i in range(k, len(counts) - 1):
        if counts[i + 1] <= half:
            frac = (counts[i] - half) / (counts[i] - counts[i + 1])
            right = centers[i] + frac * (centers[i + 1] - centers[i])
            break
    return PeakStats(peak_delay=float(centers[k]), fwhm=float(right - left))
