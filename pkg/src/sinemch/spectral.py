"""Spectral operators on periodic fields.

Derivative and Helmholtz inversion act by Fourier multipliers on the rfft
spectrum.  The Green's-function convolutions with p(x) = e^{-|x|}/2 and its
one-sided halves p± come from integrating the one-sided kernels exactly
against the grid's trigonometric interpolant (boundary treated as -inf with
the periodic-image tail restored), which collapses to the closed multipliers
(1 -/+ ik)/(2(1+k^2)).

Pointwise nonlinearities (squares, sin, cos, products) are dealiased by
zero-padding: inputs are lifted to a 2x finer grid, the nonlinearity is
applied there, and the result is truncated back to the resolved band.  The
Nyquist bin is dropped throughout; the resolved band is |k| < pi*(n/2)/L.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Callable

import numpy as np

from .grid import Field, GridSpec, require_finite, require_same_grid

DEALIAS_FACTOR = 2


@lru_cache(maxsize=None)
def _deriv_mult(n: int, L: float) -> np.ndarray:
    k = (np.pi / L) * np.arange(n // 2 + 1)
    m = 1j * k
    m[-1] = 0.0  # Nyquist derivative is set to zero
    m.flags.writeable = False
    return m


@lru_cache(maxsize=None)
def _helmholtz_mult(n: int, L: float) -> np.ndarray:
    k = (np.pi / L) * np.arange(n // 2 + 1)
    m = 1.0 / (1.0 + k**2)
    m.flags.writeable = False
    return m


@lru_cache(maxsize=None)
def _p_plus_mult(n: int, L: float) -> np.ndarray:
    k = (np.pi / L) * np.arange(n // 2 + 1)
    kd = k.copy()
    kd[-1] = 0.0  # keep the Nyquist coefficient real
    m = 0.5 * (1.0 - 1j * kd) / (1.0 + k**2)
    m.flags.writeable = False
    return m


def spectrum(f: Field) -> np.ndarray:
    return np.fft.rfft(f.values)


def from_spectrum(grid: GridSpec, spec: np.ndarray) -> Field:
    return Field(grid, np.fft.irfft(spec, grid.n))


def derivative(f: Field) -> Field:
    """Spectral d/dx; exact for band-limited fields, Nyquist mode dropped."""
    require_finite(f)
    g = f.grid
    return from_spectrum(g, np.fft.rfft(f.values) * _deriv_mult(g.n, g.half_length))


def helmholtz_solve(m: Field) -> Field:
    """u = (1 - d^2/dx^2)^{-1} m via the multiplier 1/(1+k^2)."""
    require_finite(m)
    g = m.grid
    return from_spectrum(g, np.fft.rfft(m.values) * _helmholtz_mult(g.n, g.half_length))


def convolve_p(f: Field) -> Field:
    """Convolution with p(x) = e^{-|x|}/2 (same operator as helmholtz_solve)."""
    return helmholtz_solve(f)


def convolve_p_x(f: Field) -> Field:
    """Convolution with p_x, i.e. d/dx of p*f."""
    require_finite(f)
    g = f.grid
    mult = _helmholtz_mult(g.n, g.half_length) * _deriv_mult(g.n, g.half_length)
    return from_spectrum(g, np.fft.rfft(f.values) * mult)


def convolve_p_plus(f: Field) -> Field:
    """One-sided convolution p_+ * f(x) = e^{-x}/2 * int_{-inf}^{x} e^y f(y) dy."""
    require_finite(f)
    g = f.grid
    return from_spectrum(g, np.fft.rfft(f.values) * _p_plus_mult(g.n, g.half_length))


def convolve_p_minus(f: Field) -> Field:
    """One-sided convolution p_- * f(x) = e^{x}/2 * int_{x}^{inf} e^{-y} f(y) dy."""
    require_finite(f)
    g = f.grid
    mult = np.conj(_p_plus_mult(g.n, g.half_length))
    return from_spectrum(g, np.fft.rfft(f.values) * mult)


def pad_values(values: np.ndarray, factor: int = DEALIAS_FACTOR) -> np.ndarray:
    """Samples of the trigonometric interpolant on a `factor`x finer grid."""
    n = values.shape[0]
    spec = np.fft.rfft(values)
    spec[-1] = 0.0
    fine = np.zeros(factor * n // 2 + 1, dtype=np.complex128)
    fine[: n // 2 + 1] = spec
    return np.fft.irfft(fine * factor, factor * n)


def truncate_values(fine: np.ndarray, n: int) -> np.ndarray:
    """Project fine-grid samples back onto the coarse resolved band."""
    factor = fine.shape[0] // n
    spec = np.fft.rfft(fine)[: n // 2 + 1] / factor
    spec[-1] = 0.0
    return np.fft.irfft(spec, n)


def apply_pointwise(fn: Callable[..., np.ndarray], *fields: Field) -> Field:
    """Dealiased pointwise nonlinearity: evaluate `fn` on 2x-padded samples
    of every input field and truncate the result to the resolved band."""
    grid = require_same_grid(*fields)
    for f in fields:
        require_finite(f)
    fine = fn(*(pad_values(f.values) for f in fields))
    return Field(grid, truncate_values(np.asarray(fine, dtype=np.float64), grid.n))


def eval_spectrum_at(spec: np.ndarray, grid: GridSpec, pts: np.ndarray) -> np.ndarray:
    """Evaluate the trigonometric interpolant with rfft spectrum `spec` at
    arbitrary points (exact at grid points)."""
    pts = np.atleast_1d(np.asarray(pts, dtype=np.float64))
    k = grid.wavenumbers
    phase = np.exp(1j * (pts[:, None] + grid.half_length) * k[None, :])
    w = np.full(k.shape, 2.0)
    w[0] = 1.0
    w[-1] = 1.0
    return (phase * (w * spec)).real.sum(axis=1) / grid.n


def eval_at(f: Field, pts: np.ndarray) -> np.ndarray:
    return eval_spectrum_at(spectrum(f), f.grid, pts)


def spectral_h1_norm(u: Field) -> float:
    """H^1 norm computed from the spectrum: (sum (1+k^2)|a_k|^2 * 2L)^{1/2}."""
    g = u.grid
    a = np.fft.rfft(u.values) / g.n
    k = g.wavenumbers
    w = np.full(k.shape, 2.0)
    w[0] = 1.0
    w[-1] = 1.0
    return float(np.sqrt(2.0 * g.half_length * np.sum(w * (1.0 + k**2) * np.abs(a) ** 2)))


def dealias_band(grid: GridSpec) -> np.ndarray:
    """Boolean mask of rfft bins kept by the classical 2/3 rule (used by
    tests and field generators, not by apply_pointwise itself)."""
    j = np.arange(grid.n // 2 + 1)
    return j <= (2 * (grid.n // 2)) // 3


def band_limited_noise(
    grid: GridSpec,
    rng: np.random.Generator,
    kappa0: float = 2.0,
    amplitude: float = 1.0,
    window_halfwidth: float | None = None,
) -> Field:
    """Random smooth seam-decayed field: Gaussian-enveloped random spectrum,
    localized by a smooth bump window inside |x| < window_halfwidth."""
    g = grid
    k = g.wavenumbers
    phase = rng.uniform(0.0, 2.0 * np.pi, k.shape)
    mag = np.exp(-((k / kappa0) ** 2)) * rng.uniform(0.5, 1.0, k.shape)
    spec = mag * np.exp(1j * phase)
    spec[0] = spec[0].real
    spec[-1] = 0.0
    raw = np.fft.irfft(spec * g.n, g.n)
    half = 0.4 * g.half_length if window_halfwidth is None else window_halfwidth
    t = np.clip(np.abs(g.points) / half, 0.0, 1.0 - 1e-12)
    window = np.exp(1.0 - 1.0 / (1.0 - t**2))  # C-infinity bump, 1 at x=0
    v = raw * window
    peak = np.max(np.abs(v))
    if peak > 0.0:
        v = v * (amplitude / peak)
    return Field(g, v)
