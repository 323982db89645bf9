"""Point-set constructors: level sets, sojourn sets, analytic benchmarks.

The analytic families live inside the blocks S_n = [2^(n-1), 2^n):

* ``make_A_alpha`` spreads ~2^(n*alpha) points evenly over each block,
  giving large-scale dimension alpha;
* ``make_B_alpha`` packs the same number of points into a unit interval at
  the left edge of each block, giving dimension 0;
* ``make_lacunary`` puts the single point 2^n in each block (dimension 0).
"""

from __future__ import annotations

import numpy as np

from .coverdim import DiscreteSet
from .fbm import SamplePath

__all__ = ["level_set", "sojourn_set", "make_A_alpha", "make_B_alpha", "make_lacunary"]


def level_set(path: SamplePath, x: float) -> DiscreteSet:
    """Grid-resolution level set {t : B_t = x}.

    Crossing times are linearly interpolated between consecutive grid points
    with opposite signs of B - x; grid points hitting the level exactly are
    included as-is.
    """
    if not np.isfinite(x):
        raise ValueError("level must be finite")
    d = path.values - x
    step = path.grid.step
    exact = np.flatnonzero(d == 0.0) * step
    k = np.flatnonzero(d[:-1] * d[1:] < 0.0)
    crossings = (k + d[k] / (d[k] - d[k + 1])) * step
    return DiscreteSet.from_values(np.concatenate([exact, crossings]))


def sojourn_set(path: SamplePath, gamma: float) -> DiscreteSet:
    """Grid times with |B_t| <= t^gamma (0^gamma = 0 at t = 0)."""
    h = path.hurst.h
    if not (0.0 < gamma < h):
        raise ValueError(f"gamma must lie in (0, H) = (0, {h}), got {gamma}")
    step = path.grid.step
    t = np.arange(1, path.values.size) * step
    keep = np.abs(path.values[1:]) <= t**gamma
    times = t[keep]
    if path.values[0] == 0.0:
        times = np.concatenate([[0.0], times])
    return DiscreteSet(times)


def _check_alpha(alpha: float, n_max: int) -> None:
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")


def make_A_alpha(alpha: float, n_max: int) -> DiscreteSet:
    """Evenly scattered benchmark: per block, points 2^(n-1) + k*2^(n-1)/2^(n*alpha).

    k runs over {0, ..., floor(2^(n*alpha)) - 1} (integer count convention for
    the non-integer bound).
    """
    _check_alpha(alpha, n_max)
    parts = []
    for n in range(1, n_max + 1):
        k = np.arange(_point_count(alpha, n))
        parts.append(2.0 ** (n - 1) * (1.0 + k / 2.0 ** (n * alpha)))
    return DiscreteSet(np.concatenate(parts))


def _point_count(alpha: float, n: int) -> int:
    # floor(2^(n*alpha)), tolerant of float representation at integer powers
    return int(np.floor(2.0 ** (n * alpha) + 1e-9))


def make_B_alpha(alpha: float, n_max: int) -> DiscreteSet:
    """Clustered benchmark: per block, points 2^(n-1) + k/2^(n*alpha)."""
    _check_alpha(alpha, n_max)
    parts = []
    for n in range(1, n_max + 1):
        k = np.arange(_point_count(alpha, n))
        parts.append(2.0 ** (n - 1) + k / 2.0 ** (n * alpha))
    return DiscreteSet(np.concatenate(parts))


def make_lacunary(n_max: int) -> DiscreteSet:
    """The set {2, 4, ..., 2^n_max}: one point per block S_n, n >= 2."""
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    return DiscreteSet(2.0 ** np.arange(1, n_max + 1))
