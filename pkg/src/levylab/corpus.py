"""Seeded test-function corpus for log-Sobolev sweeps.

Version 1 layout: three Gaussians, three smoothed indicators and ``n_random``
band-limited random fields under a Gaussian window, all centred so that the
periodic box behaves like R^N. Changing any generator constant must bump
``CORPUS_VERSION``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .spectral import ScalarField, TorusGrid

CORPUS_VERSION = 1
DEFAULT_SEED = 20240611
GAUSSIAN_WIDTHS = (0.5, 1.0, 2.0)
INDICATOR_HALF_WIDTHS = (1.0, 2.0, 3.0)
INDICATOR_SMOOTHING = 0.25
WINDOW_WIDTH = 2.0
BAND_LIMIT = 4.0


@dataclass(frozen=True)
class CorpusEntry:
    field_id: str
    field: ScalarField


def default_grid(N: int = 1) -> TorusGrid:
    return TorusGrid(N, 40.0, 1024 if N == 1 else 64)


def _gaussian(grid, width):
    r2 = grid.radius() ** 2
    return np.exp(-r2 / (2.0 * width**2))


def _smoothed_indicator(grid, half_width):
    # product of smoothed steps along each axis
    out = np.ones(grid.shape)
    s = INDICATOR_SMOOTHING
    for c in grid.coords():
        out *= 0.5 * (erf((c + half_width) / s) - erf((c - half_width) / s))
    return out


def _band_limited(grid, rng):
    k = grid.wavenumbers()
    coef = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    coef[k > BAND_LIMIT] = 0.0
    raw = np.fft.ifftn(coef).real
    raw /= np.abs(raw).max()
    return raw * _gaussian(grid, WINDOW_WIDTH)


def default_corpus(grid: TorusGrid = None, n_random: int = 20, seed: int = DEFAULT_SEED) -> list:
    """Gaussians, smoothed indicators and seeded random fields, unit sup norm."""
    grid = default_grid() if grid is None else grid
    entries = []
    for w in GAUSSIAN_WIDTHS:
        entries.append(CorpusEntry(f"gauss-{w:g}", ScalarField(grid, _gaussian(grid, w))))
    for hw in INDICATOR_HALF_WIDTHS:
        entries.append(CorpusEntry(f"indicator-{hw:g}", ScalarField(grid, _smoothed_indicator(grid, hw))))
    rng = np.random.default_rng(seed)
    for i in range(n_random):
        entries.append(CorpusEntry(f"random-{i:02d}", ScalarField(grid, _band_limited(grid, rng))))
    return entries


def random_nonnegative_fields(grid: TorusGrid, count: int, seed: int = DEFAULT_SEED):
    """Nonnegative fields ``|band-limited|`` plus a small windowed floor; for SV and T-contraction sweeps."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        f = np.abs(_band_limited(grid, rng)) * rng.uniform(0.1, 10.0)
        out.append(ScalarField(grid, f))
    return out
