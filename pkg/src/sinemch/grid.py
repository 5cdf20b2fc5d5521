"""Periodic grid and sampled-field primitives.

The computational domain is [-L, L) with n equispaced points, n a power of
two.  Everything downstream (spectral derivatives, Helmholtz inversion,
dyadic blocks) operates on rfft spectra of ``Field`` values, so the grid
carries the rfft wavenumber axis k_j = pi*j/L, j = 0..n/2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ConfigurationError, NumericError


@lru_cache(maxsize=None)
def _points(n: int, L: float) -> np.ndarray:
    x = -L + (2.0 * L / n) * np.arange(n)
    x.flags.writeable = False
    return x


@lru_cache(maxsize=None)
def _wavenumbers(n: int, L: float) -> np.ndarray:
    k = (np.pi / L) * np.arange(n // 2 + 1)
    k.flags.writeable = False
    return k


@dataclass(frozen=True)
class GridSpec:
    """Periodic grid on [-L, L): n points, spacing 2L/n."""

    n: int
    half_length: float

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_length / self.n

    @property
    def points(self) -> np.ndarray:
        return _points(self.n, self.half_length)

    @property
    def wavenumbers(self) -> np.ndarray:
        """rfft wavenumber axis, ending at the Nyquist mode pi*(n/2)/L."""
        return _wavenumbers(self.n, self.half_length)


def make_grid(n: int, half_length: float) -> GridSpec:
    """Validated grid constructor: n a power of two >= 16, L > 0."""
    if not isinstance(n, (int, np.integer)) or n < 16 or (n & (n - 1)) != 0:
        raise ConfigurationError(f"grid size must be a power of two >= 16, got {n!r}")
    L = float(half_length)
    if not np.isfinite(L) or L <= 0.0:
        raise ConfigurationError(f"half-length must be a positive real, got {half_length!r}")
    return GridSpec(int(n), L)


@dataclass(frozen=True)
class Field:
    """Real samples of a function of x on a GridSpec.  Values are copied and
    frozen at construction; Fields are safe to share between workers."""

    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=np.float64, copy=True)
        if v.shape != (self.grid.n,):
            raise ConfigurationError(
                f"field needs {self.grid.n} samples, got shape {v.shape}"
            )
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def linf(self) -> float:
        return float(np.max(np.abs(self.values))) if self.grid.n else 0.0

    def l2(self) -> float:
        return float(np.sqrt(self.grid.spacing * np.sum(self.values**2)))

    def seam_inf(self) -> float:
        """Sup of |values| over the outer half-domain |x| >= L/2."""
        outer = np.abs(self.grid.points) >= 0.5 * self.grid.half_length
        return float(np.max(np.abs(self.values[outer])))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))


def zero_field(grid: GridSpec) -> Field:
    return Field(grid, np.zeros(grid.n))


def require_finite(f: Field, what: str = "field") -> None:
    if not f.is_finite():
        raise NumericError(f"{what} contains non-finite samples")


def require_same_grid(*fields: Field) -> GridSpec:
    grid = fields[0].grid
    for f in fields[1:]:
        if f.grid != grid:
            raise ConfigurationError(f"grid mismatch: {f.grid} vs {grid}")
    return grid
