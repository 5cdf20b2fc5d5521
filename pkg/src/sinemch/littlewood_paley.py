"""Dyadic (Littlewood-Paley) decomposition and discrete Besov norms.

The low-frequency cutoff chi is a C-infinity radial profile equal to 1 for
|xi| <= 4/3*(1-delta) and 0 for |xi| >= 4/3*(1+delta).  The annular profiles
are telescoped from it, phi_q(xi) = chi(2^{-q-1}xi) - chi(2^{-q}xi), so the
partition of unity chi + sum_q phi_q = 1 holds to rounding at every resolved
wavenumber and each phi_q is supported in 2^q * [4/3*(1-delta), 8/3*(1+delta)].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .grid import Field, GridSpec, require_finite
from .spectral import from_spectrum, spectrum

_CUT = 4.0 / 3.0


def _smooth_step(t: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.clip(t, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(t > 0.0, np.exp(-1.0 / np.maximum(t, 1e-300)), 0.0)
        b = np.where(t < 1.0, np.exp(-1.0 / np.maximum(1.0 - t, 1e-300)), 0.0)
    return a / (a + b)


def chi_profile(r: np.ndarray, delta: float) -> np.ndarray:
    """Radial cutoff: 1 inside 4/3*(1-delta), 0 outside 4/3*(1+delta)."""
    a = _CUT * (1.0 - delta)
    b = _CUT * (1.0 + delta)
    return 1.0 - _smooth_step((np.abs(r) - a) / (b - a))


@dataclass(frozen=True)
class DyadicPartition:
    """chi and phi profiles sampled on a grid's rfft wavenumber axis."""

    grid: GridSpec
    delta: float
    chi: np.ndarray = field(repr=False)
    phi_blocks: tuple[np.ndarray, ...] = field(repr=False)
    max_q: int

    def block_profile(self, q: int) -> np.ndarray:
        if q == -1:
            return self.chi
        if 0 <= q <= self.max_q:
            return self.phi_blocks[q]
        raise ConfigurationError(f"block index {q} outside [-1, {self.max_q}]")

    def low_pass_profile(self, q: int) -> np.ndarray:
        """Multiplier of S_q = sum_{q' <= q-1} Delta_q', i.e. chi(2^{-q} xi)."""
        if q < 0 or q > self.max_q + 1:
            raise ConfigurationError(f"low-pass index {q} outside [0, {self.max_q + 1}]")
        return chi_profile(self.grid.wavenumbers / 2.0**q, self.delta)

    def residual(self) -> float:
        """Max deviation of chi + sum_q phi_q from 1 over resolved wavenumbers."""
        total = self.chi + sum(self.phi_blocks)
        return float(np.max(np.abs(1.0 - total)))


def build_partition(grid: GridSpec, delta: float = 0.05) -> DyadicPartition:
    """Construct the dyadic partition of unity for a grid.

    delta is the relative smoothing width of the cutoff; it must stay below
    1/6 so that blocks q and q+2 have disjoint supports.
    """
    if not (0.0 < delta < 1.0 / 6.0):
        raise ConfigurationError(f"smoothing width must lie in (0, 1/6), got {delta!r}")
    k = grid.wavenumbers
    chi = chi_profile(k, delta)
    k_max = k[-1]
    # generous upper bound on the largest block with support on the band
    hi = _CUT * (1.0 + delta)
    q_bound = max(0, int(math.ceil(math.log2(max(k_max / hi, 1.0)))) + 1)
    blocks: list[np.ndarray] = []
    for q in range(q_bound + 1):
        phi = chi_profile(k / 2.0 ** (q + 1), delta) - chi_profile(k / 2.0**q, delta)
        if not np.any(phi > 0.0):
            break
        blocks.append(phi)
    if not blocks:
        return DyadicPartition(grid, delta, chi, (), -1)
    return DyadicPartition(grid, delta, chi, tuple(blocks), len(blocks) - 1)


def dyadic_block(f: Field, q: int, partition: DyadicPartition) -> Field:
    """Delta_q f: multiply the spectrum by the block-q profile."""
    require_finite(f)
    if f.grid != partition.grid:
        raise ConfigurationError("field and partition live on different grids")
    return from_spectrum(f.grid, spectrum(f) * partition.block_profile(q))


def low_freq_sum(f: Field, q: int, partition: DyadicPartition) -> Field:
    """S_q f = sum_{q' <= q-1} Delta_q' f via the telescoped multiplier."""
    require_finite(f)
    if f.grid != partition.grid:
        raise ConfigurationError("field and partition live on different grids")
    return from_spectrum(f.grid, spectrum(f) * partition.low_pass_profile(q))


def _lp_norm(values: np.ndarray, p: float, dx: float) -> float:
    if math.isinf(p):
        return float(np.max(np.abs(values)))
    return float((dx * np.sum(np.abs(values) ** p)) ** (1.0 / p))


def besov_norm(
    f: Field, s: float, p_idx: float, r_idx: float, partition: DyadicPartition
) -> float:
    """Discrete Besov norm (sum_{j>=-1} 2^{rjs} ||Delta_j f||_{L^p}^r)^{1/r}.

    p_idx and r_idx live in [1, inf]; pass math.inf for the sup variants.
    """
    for name, v in (("p", p_idx), ("r", r_idx)):
        if not (v >= 1.0):
            raise ConfigurationError(f"Besov index {name} must be in [1, inf], got {v!r}")
    require_finite(f)
    if f.grid != partition.grid:
        raise ConfigurationError("field and partition live on different grids")
    dx = f.grid.spacing
    spec = spectrum(f)
    terms = []
    for j in range(-1, partition.max_q + 1):
        block = np.fft.irfft(spec * partition.block_profile(j), f.grid.n)
        terms.append(2.0 ** (j * s) * _lp_norm(block, p_idx, dx))
    if math.isinf(r_idx):
        return max(terms) if terms else 0.0
    return float(np.sum(np.asarray(terms) ** r_idx) ** (1.0 / r_idx))
