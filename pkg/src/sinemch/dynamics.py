"""Right-hand sides of the sine-mCH evolution and the blow-up quantity.

The equation m_t + [sin(u^2 - u_x^2) m]_x = 0 with m = u - u_xx is evolved
in the conservative m-form; u is recovered through Helmholtz inversion each
time it is needed, so the m = u - u_xx link stays an invariant instead of a
drift source.  The nonlocal u-form is kept as a cross-validator.

Supported velocity laws:
  sine      V = sin(u^2 - u_x^2)         (the full model)
  mch       V = u^2 - u_x^2              (modified Camassa-Holm limit)
  mch_cubic V = s - s^3/6, s = u^2-u_x^2 (first two terms of the sine series)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, UnsupportedConfigurationError
from .grid import Field, require_same_grid
from .spectral import (
    convolve_p,
    convolve_p_x,
    derivative,
    helmholtz_solve,
    pad_values,
    truncate_values,
)

MODES = ("sine", "mch", "mch_cubic")


@dataclass(frozen=True)
class ModelParams:
    """Dispersion coefficient kappa and velocity law."""

    kappa: float = 0.0
    mode: str = "sine"

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ConfigurationError(f"unknown mode {self.mode!r}, expected one of {MODES}")
        if not np.isfinite(self.kappa):
            raise ConfigurationError("kappa must be finite")


@dataclass(frozen=True)
class SolutionState:
    """(t, u, m) with u and m linked by u = (1-d^2)^{-1} m."""

    t: float
    u: Field
    m: Field

    def __post_init__(self) -> None:
        require_same_grid(self.u, self.m)

    @classmethod
    def from_m(cls, m: Field, t: float = 0.0) -> "SolutionState":
        return cls(t, helmholtz_solve(m), m)

    @property
    def grid(self):
        return self.m.grid

    def helmholtz_residual(self) -> float:
        """Relative defect of (1 - d^2/dx^2) u = m; ~1e-15 by construction."""
        back = self.u.values - derivative(derivative(self.u)).values
        scale = max(float(np.max(np.abs(self.m.values))), 1e-300)
        return float(np.max(np.abs(back - self.m.values))) / scale


def _velocity_fine(s_fine: np.ndarray, mode: str) -> np.ndarray:
    if mode == "sine":
        return np.sin(s_fine)
    if mode == "mch":
        return s_fine
    return s_fine - s_fine**3 / 6.0


def _velocity_slope_fine(s_fine: np.ndarray, mode: str) -> np.ndarray:
    # dV/ds, used by the transport-form right-hand side
    if mode == "sine":
        return np.cos(s_fine)
    if mode == "mch":
        return np.ones_like(s_fine)
    return 1.0 - s_fine**2 / 2.0


def _lift(state: SolutionState) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """u, u_x, m on the dealiasing grid."""
    uf = pad_values(state.u.values)
    uxf = pad_values(derivative(state.u).values)
    mf = pad_values(state.m.values)
    return uf, uxf, mf


def velocity(u: Field, ux: Field) -> Field:
    """V = sin(u^2 - u_x^2), dealiased; |V| <= 1 everywhere."""
    require_same_grid(u, ux)
    fine = np.sin(pad_values(u.values) ** 2 - pad_values(ux.values) ** 2)
    v = truncate_values(fine, u.grid.n)
    # spectral truncation may overshoot the sine bound by O(removed tail)
    return Field(u.grid, np.clip(v, -1.0, 1.0))


def velocity_of_state(state: SolutionState, params: ModelParams | None = None) -> Field:
    mode = "sine" if params is None else params.mode
    uf, uxf, _ = _lift(state)
    v = truncate_values(_velocity_fine(uf**2 - uxf**2, mode), state.grid.n)
    if mode == "sine":
        v = np.clip(v, -1.0, 1.0)
    return Field(state.grid, v)


def blowup_quantity(state: SolutionState) -> Field:
    """M = cos(u^2 - u_x^2) * m * u_x, the precise blow-up quantity."""
    uf, uxf, mf = _lift(state)
    return Field(
        state.grid, truncate_values(np.cos(uf**2 - uxf**2) * mf * uxf, state.grid.n)
    )


def m_rhs(state: SolutionState, params: ModelParams) -> Field:
    """Conservative-form tendency m_t = -d/dx[V m] - kappa * u_x."""
    uf, uxf, mf = _lift(state)
    vf = _velocity_fine(uf**2 - uxf**2, params.mode)
    flux = Field(state.grid, truncate_values(vf * mf, state.grid.n))
    rhs = -derivative(flux).values
    if params.kappa != 0.0:
        rhs = rhs - params.kappa * derivative(state.u).values
    return Field(state.grid, rhs)


def m_rhs_transport(state: SolutionState, params: ModelParams) -> Field:
    """Transport-form tendency m_t = -V m_x - 2 (dV/ds) u_x m^2 - kappa u_x.

    Equivalent to m_rhs by the product rule (d/dx V = 2 (dV/ds) u_x m); kept
    as the cross-validation route.
    """
    uf, uxf, mf = _lift(state)
    s = uf**2 - uxf**2
    mxf = pad_values(derivative(state.m).values)
    out = truncate_values(
        -_velocity_fine(s, params.mode) * mxf
        - 2.0 * _velocity_slope_fine(s, params.mode) * uxf * mf**2,
        state.grid.n,
    )
    if params.kappa != 0.0:
        out = out - params.kappa * derivative(state.u).values
    return Field(state.grid, out)


def u_rhs_nonlocal(state: SolutionState, params: ModelParams | None = None) -> Field:
    """Nonlocal-form tendency u_t = -V u_x - 2 p*(u M) - 2 p_x*(u_x M).

    Only the kappa = 0 sine model has this recast; anything else is
    rejected.
    """
    if params is not None and (params.kappa != 0.0 or params.mode != "sine"):
        raise UnsupportedConfigurationError(
            "nonlocal u-form is only available for the sine model with kappa = 0"
        )
    n = state.grid.n
    uf, uxf, mf = _lift(state)
    s = uf**2 - uxf**2
    Mf = np.cos(s) * mf * uxf
    advection = truncate_values(np.sin(s) * uxf, n)
    uM = Field(state.grid, truncate_values(uf * Mf, n))
    uxM = Field(state.grid, truncate_values(uxf * Mf, n))
    out = -advection - 2.0 * convolve_p(uM).values - 2.0 * convolve_p_x(uxM).values
    return Field(state.grid, out)


def mch_rhs(state: SolutionState) -> Field:
    """Plain mCH tendency m_t = -d/dx[(u^2 - u_x^2) m] for limit comparisons."""
    return m_rhs(state, ModelParams(mode="mch"))
