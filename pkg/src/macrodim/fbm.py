"""Fractional Brownian motion synthesis on uniform grids.

Sampling is exact in distribution: stationary Gaussian increments with the
fractional-noise autocovariance are drawn by circulant embedding (spectral
sampling through a real FFT), with a dense Cholesky fallback for short grids
or the rare case of an indefinite embedding.  Paths are deterministic
functions of (hurst, grid, seed); the generator is the counter-based Philox
bit stream keyed by the seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np
import scipy.fft
import scipy.linalg
from scipy.stats import ks_2samp

from .reports import KSReport

__all__ = [
    "Hurst",
    "GridSpec",
    "SamplePath",
    "fgn_cov",
    "generate_path",
    "generate_increments_batch",
    "endpoint_samples",
    "check_self_similarity",
    "check_stationary_increments",
    "derive_seed",
]

_EIG_CLIP = 1e-9  # relative magnitude below which negative eigenvalues are zeroed
_CHOLESKY_MAX = 2048


@dataclass(frozen=True)
class Hurst:
    h: float

    def __post_init__(self):
        if not (0.0 < self.h < 1.0):
            raise ValueError(f"Hurst index must lie in (0, 1), got {self.h}")


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid t_k = k * step, k = 0..count."""

    step: float
    count: int

    def __post_init__(self):
        if not (self.step > 0 and math.isfinite(self.step)):
            raise ValueError(f"step must be > 0, got {self.step}")
        if self.count < 1:
            raise ValueError(f"count must be >= 1, got {self.count}")

    @property
    def horizon(self) -> float:
        return self.step * self.count

    def times(self) -> np.ndarray:
        return np.arange(self.count + 1) * self.step

    def index_of(self, t: float) -> int:
        """Grid index of an on-grid time, or ValueError."""
        k = round(t / self.step)
        if not (0 <= k <= self.count) or abs(k * self.step - t) > 1e-9 * max(t, self.step):
            raise ValueError(f"t={t} is not on the grid (step={self.step}, count={self.count})")
        return int(k)


@dataclass(frozen=True)
class SamplePath:
    grid: GridSpec
    hurst: Hurst
    values: np.ndarray
    seed: int
    method: str = "circulant"

    def __post_init__(self):
        if self.values.shape != (self.grid.count + 1,):
            raise ValueError("values length must equal grid.count + 1")
        if self.values[0] != 0.0:
            raise ValueError("paths must start at 0")

    def save_csv(self, path: str | Path) -> None:
        """CSV `t,value` plus a JSON metadata sidecar `<path>.json`."""
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("t,value\n")
            step = self.grid.step
            for k, v in enumerate(self.values):
                fh.write(f"{k * step!r},{float(v)!r}\n")
        meta = {
            "h": self.hurst.h,
            "delta": self.grid.step,
            "count": self.grid.count,
            "seed": self.seed,
            "generator": f"{self.method}-philox",
        }
        with open(str(path) + ".json", "w", encoding="utf-8", newline="\n") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")


def fgn_cov(k: int, hurst: Hurst, step: float = 1.0) -> float:
    """Autocovariance at lag k of the increment sequence B((j+1)d) - B(jd)."""
    if k < 0:
        raise ValueError(f"lag must be >= 0, got {k}")
    if step <= 0:
        raise ValueError(f"step must be > 0, got {step}")
    two_h = 2.0 * hurst.h
    return 0.5 * step**two_h * ((k + 1) ** two_h + abs(k - 1) ** two_h - 2.0 * k**two_h)


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)))


def _embedding_size(m: int) -> int:
    return 1 << max(1, (2 * m - 1)).bit_length()


def _embedding_spectrum(hurst: Hurst, step: float, m: int) -> tuple[np.ndarray, int]:
    """Eigenvalues (rfft half-spectrum) of the circulant embedding, or raises."""
    g = _embedding_size(m)
    k = np.arange(g // 2 + 1, dtype=float)
    two_h = 2.0 * hurst.h
    cov = 0.5 * step**two_h * (
        (k + 1) ** two_h + np.abs(k - 1) ** two_h - 2.0 * k**two_h
    )
    circ = np.concatenate([cov, cov[-2:0:-1]])
    lam = scipy.fft.rfft(circ).real
    del circ
    neg = lam.min()
    if neg < 0:
        if neg < -_EIG_CLIP * lam.max():
            raise FloatingPointError(
                f"indefinite circulant embedding (min eigenvalue {neg:.3e})"
            )
        np.clip(lam, 0.0, None, out=lam)
    return lam, g


_spectrum_cache: dict[tuple[float, float, int], tuple[np.ndarray, int]] = {}


def _cached_spectrum(hurst: Hurst, step: float, m: int):
    key = (hurst.h, step, _embedding_size(m))
    if key not in _spectrum_cache:
        if len(_spectrum_cache) > 8:
            _spectrum_cache.clear()
        _spectrum_cache[key] = _embedding_spectrum(hurst, step, m)
    return _spectrum_cache[key]


def _fgn_circulant(hurst: Hurst, step: float, m: int, rng: np.random.Generator) -> np.ndarray:
    """m exact fractional-noise increments via spectral sampling."""
    lam, g = _cached_spectrum(hurst, step, m)
    half = g // 2
    xi = rng.standard_normal(half + 1)
    eta = rng.standard_normal(half + 1)  # endpoints drawn but unused, keeps streams simple
    spec = np.empty(half + 1, dtype=complex)
    spec[1:half] = np.sqrt(g * lam[1:half] / 2.0) * (xi[1:half] + 1j * eta[1:half])
    spec[0] = math.sqrt(g * lam[0]) * xi[0]
    spec[half] = math.sqrt(g * lam[half]) * xi[half]
    out = scipy.fft.irfft(spec, n=g)
    return out[:m].copy()


def _fgn_cholesky(hurst: Hurst, step: float, m: int, rng: np.random.Generator) -> np.ndarray:
    cov = np.array([fgn_cov(k, hurst, step) for k in range(m)])
    mat = scipy.linalg.toeplitz(cov)
    chol = scipy.linalg.cholesky(mat, lower=True)
    return chol @ rng.standard_normal(m)


def generate_path(hurst: Hurst, grid: GridSpec, seed: int) -> SamplePath:
    """Sample one fBm path on the grid; deterministic in (hurst, grid, seed)."""
    rng = _rng(seed)
    m = grid.count
    try:
        incr = _fgn_circulant(hurst, grid.step, m, rng)
        method = "circulant"
    except FloatingPointError:
        if m > _CHOLESKY_MAX:
            raise
        incr = _fgn_cholesky(hurst, grid.step, m, _rng(seed))
        method = "cholesky"
    values = np.empty(m + 1)
    values[0] = 0.0
    np.cumsum(incr, out=values[1:])
    return SamplePath(grid=grid, hurst=hurst, values=values, seed=seed, method=method)


def generate_increments_batch(hurst: Hurst, grid: GridSpec,
                              seeds: Iterable[int]) -> np.ndarray:
    """Increment rows for many seeds, shape (n_seeds, count).

    Row i is bit-identical to the increments of ``generate_path`` with
    seeds[i]; the FFT is batched for Monte Carlo throughput.
    """
    seeds = list(seeds)
    m = grid.count
    lam, g = _cached_spectrum(hurst, grid.step, m)
    half = g // 2
    spec = np.empty((len(seeds), half + 1), dtype=complex)
    root = np.sqrt(g * lam / 2.0)
    for i, seed in enumerate(seeds):
        rng = _rng(seed)
        xi = rng.standard_normal(half + 1)
        eta = rng.standard_normal(half + 1)
        row = root * (xi + 1j * eta)
        row[0] = math.sqrt(g * lam[0]) * xi[0]
        row[half] = math.sqrt(g * lam[half]) * xi[half]
        spec[i] = row
    out = scipy.fft.irfft(spec, n=g, axis=1)
    return np.ascontiguousarray(out[:, :m])


def endpoint_samples(hurst: Hurst, grid: GridSpec, index: int,
                     seeds: Iterable[int]) -> np.ndarray:
    """B(t_index) over independent seeds."""
    incr = generate_increments_batch(hurst, grid, seeds)
    return incr[:, :index].sum(axis=1)


def check_self_similarity(hurst: Hurst, grid: GridSpec, a: float,
                          seeds: int, base_seed: int = 0) -> KSReport:
    """Two-sample KS test of B(aT) against a^H * B(T) over disjoint seed sets.

    T is chosen as the largest grid time with a*T on the grid, so both
    marginals are evaluated without interpolation.
    """
    if a <= 0:
        raise ValueError(f"scaling factor must be > 0, got {a}")
    if seeds < 2:
        raise ValueError("need at least 2 seeds per sample")
    m = grid.count
    if a >= 1:
        k_ref = int(m / a)
        if k_ref < 1 or grid.index_of(k_ref * grid.step * a) != round(k_ref * a):
            raise ValueError(f"a={a} does not map a grid time into the grid")
    else:
        k_ref = m
        if abs(k_ref * a - round(k_ref * a)) > 1e-9 or round(k_ref * a) < 1:
            raise ValueError(f"a={a} does not map the horizon onto the grid")
    k_scaled = round(k_ref * a)
    s1 = endpoint_samples(hurst, grid, k_scaled, range(base_seed, base_seed + seeds))
    s2 = endpoint_samples(hurst, grid, k_ref,
                          range(base_seed + seeds, base_seed + 2 * seeds))
    stat, pval = (0.0, 1.0) if a == 1 else ks_2samp(s1, a**hurst.h * s2)
    return KSReport(statistic=float(stat), p_value=float(pval),
                    n_samples=seeds, description=f"self-similarity a={a} H={hurst.h}")


def check_stationary_increments(hurst: Hurst, grid: GridSpec, shift: float,
                                seeds: int, base_seed: int = 0) -> KSReport:
    """Two-sample KS test of B(t+s) - B(s) against B(t) at t = horizon - s."""
    if shift < 0:
        raise ValueError(f"shift must be >= 0, got {shift}")
    k_s = grid.index_of(shift)
    k_t = grid.count - k_s
    if k_t < 1:
        raise ValueError("shift leaves no room on the grid")
    incr = generate_increments_batch(hurst, grid, range(base_seed, base_seed + seeds))
    s1 = incr[:, k_s:k_s + k_t].sum(axis=1)
    incr2 = generate_increments_batch(hurst, grid,
                                      range(base_seed + seeds, base_seed + 2 * seeds))
    s2 = incr2[:, :k_t].sum(axis=1)
    stat, pval = (0.0, 1.0) if shift == 0 else ks_2samp(s1, s2)
    return KSReport(statistic=float(stat), p_value=float(pval),
                    n_samples=seeds, description=f"stationary-increments s={shift} H={hurst.h}")


def derive_seed(base_seed: int, *indices: int) -> int:
    """Stable per-task seed: SeedSequence entropy [base_seed, *indices]."""
    ss = np.random.SeedSequence([int(base_seed), *[int(i) for i in indices]])
    return int(ss.generate_state(1, dtype=np.uint64)[0])
