"""Characteristic flow q(t, x0) and the closed-form identities along it.

dq/dt = sin(u^2 - u_x^2)(t, q) is integrated with RK4 per seed; the stored
field history supplies the velocity, linearly interpolated in t between
stored frames and trigonometrically interpolated in x (exact for the
spectral representation).  Along each trajectory the flow satisfies

    q_x(t)  = exp(+2 int_0^t Mbar ds) > 0,
    mbar(t) = m0(x0) exp(-2 int_0^t Mbar ds),

with Mbar = (cos(u^2-u_x^2) m u_x)(s, q(s, x0)), so sign and zeros of m
travel with the flow and q(t, .) stays an increasing diffeomorphism while
the solution lives.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainContaminationError
from .integrator import FieldHistory, RunOutcome
from .spectral import eval_spectrum_at


@dataclass(frozen=True)
class CharacteristicBundle:
    """Trajectories q(t, x0) with m and M sampled along them.

    Arrays are indexed [time, seed]; qx holds finite-difference estimates of
    dq/dx0 across adjacent seeds (NaN for a single seed).
    """

    seeds: np.ndarray
    times: np.ndarray
    q: np.ndarray = field(repr=False)
    qx: np.ndarray = field(repr=False)
    mbar: np.ndarray = field(repr=False)
    Mbar: np.ndarray = field(repr=False)


def _history_of(run) -> FieldHistory:
    if isinstance(run, FieldHistory):
        return run
    if isinstance(run, RunOutcome):
        if run.field_history is None or len(run.field_history) < 2:
            raise ConfigurationError("run captured no field history; rerun with capture_history")
        return run.field_history
    raise ConfigurationError(f"expected RunOutcome or FieldHistory, got {type(run).__name__}")


def _fd_across_seeds(seeds: np.ndarray, q: np.ndarray) -> np.ndarray:
    nseeds = seeds.shape[0]
    qx = np.full_like(q, np.nan)
    if nseeds < 2:
        return qx
    qx[:, 1:-1] = (q[:, 2:] - q[:, :-2]) / (seeds[2:] - seeds[:-2])
    qx[:, 0] = (q[:, 1] - q[:, 0]) / (seeds[1] - seeds[0])
    qx[:, -1] = (q[:, -1] - q[:, -2]) / (seeds[-1] - seeds[-2])
    return qx


def advect(seeds, run, times=None, substeps: int = 1) -> CharacteristicBundle:
    """Integrate the characteristic ODE for every seed over a run's history.

    `times` defaults to the history's own time grid; `substeps` RK4 steps
    are taken between consecutive output times.  A trajectory leaving the
    trusted half-domain |x| <= L/2 aborts with a domain-contamination error.
    """
    history = _history_of(run)
    grid = history.grid
    seeds = np.atleast_1d(np.asarray(seeds, dtype=np.float64))
    if seeds.size == 0:
        raise ConfigurationError("need at least one seed")
    if times is None:
        times = np.asarray(history.times, dtype=np.float64)
    else:
        times = np.atleast_1d(np.asarray(times, dtype=np.float64))
        if times[0] < history.times[0] - 1e-12 or times[-1] > history.times[-1] + 1e-12:
            raise ConfigurationError("requested times outside the stored history")
    if substeps < 1:
        raise ConfigurationError("substeps must be positive")

    def v_at(t: float, pts: np.ndarray) -> np.ndarray:
        return eval_spectrum_at(history.v_spectrum_at(t), grid, pts)

    half_L = 0.5 * grid.half_length
    nt, ns = times.shape[0], seeds.shape[0]
    q = np.empty((nt, ns))
    q[0] = seeds  # q(0, x0) = x0 exactly
    for i in range(nt - 1):
        pos = q[i].copy()
        t0, t1 = times[i], times[i + 1]
        dt = (t1 - t0) / substeps
        for j in range(substeps):
            ta = t0 + j * dt
            k1 = v_at(ta, pos)
            k2 = v_at(ta + 0.5 * dt, pos + 0.5 * dt * k1)
            k3 = v_at(ta + 0.5 * dt, pos + 0.5 * dt * k2)
            k4 = v_at(ta + dt, pos + dt * k3)
            pos = pos + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if np.any(np.abs(pos) > half_L):
            raise DomainContaminationError(
                f"characteristic left |x| <= L/2 between t={t0:g} and t={t1:g}"
            )
        q[i + 1] = pos

    mbar = np.empty_like(q)
    Mbar = np.empty_like(q)
    for i, t in enumerate(times):
        mbar[i] = eval_spectrum_at(history.m_spectrum_at(t), grid, q[i])
        Mbar[i] = eval_spectrum_at(history.M_spectrum_at(t), grid, q[i])
    return CharacteristicBundle(
        seeds=seeds, times=times, q=q, qx=_fd_across_seeds(seeds, q), mbar=mbar, Mbar=Mbar
    )


def _mbar_integral(bundle: CharacteristicBundle) -> np.ndarray:
    """Trapezoidal cumulative integral of Mbar over the bundle times."""
    t = bundle.times
    M = bundle.Mbar
    out = np.zeros_like(M)
    dt = np.diff(t)[:, None]
    out[1:] = np.cumsum(0.5 * dt * (M[1:] + M[:-1]), axis=0)
    return out


def qx_closed_form(bundle: CharacteristicBundle) -> np.ndarray:
    """q_x(t, x0) = exp(2 int_0^t Mbar ds); strictly positive, 1 at t = 0."""
    return np.exp(2.0 * _mbar_integral(bundle))


def mbar_closed_form(bundle: CharacteristicBundle, m0_at_seeds) -> np.ndarray:
    """m(t, q) = m0(x0) exp(-2 int_0^t Mbar ds); zeros and signs persist."""
    m0 = np.atleast_1d(np.asarray(m0_at_seeds, dtype=np.float64))
    if m0.shape != bundle.seeds.shape:
        raise ConfigurationError("m0_at_seeds must match the seed list")
    return m0[None, :] * np.exp(-2.0 * _mbar_integral(bundle))


def mbar_ode_residual(bundle: CharacteristicBundle) -> np.ndarray:
    """Sup norm per seed of  d(mbar)/dt + 2 mbar Mbar  (centered differences)."""
    if bundle.times.shape[0] < 3:
        raise ConfigurationError("need at least 3 output times for a centered residual")
    t = bundle.times
    dm = (bundle.mbar[2:] - bundle.mbar[:-2]) / (t[2:] - t[:-2])[:, None]
    resid = dm + 2.0 * bundle.mbar[1:-1] * bundle.Mbar[1:-1]
    return np.max(np.abs(resid), axis=0)


def export_bundle_csv(bundle: CharacteristicBundle, m0_at_seeds, path) -> None:
    """CSV dump: (seed, t, q, qx_formula, qx_fd, mbar_field, mbar_formula, Mbar)."""
    qx_formula = qx_closed_form(bundle)
    mbar_formula = mbar_closed_form(bundle, m0_at_seeds)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["seed", "t", "q", "qx_formula", "qx_fd", "mbar_field", "mbar_formula", "Mbar"]
        )
        for j, seed in enumerate(bundle.seeds):
            for i, t in enumerate(bundle.times):
                writer.writerow(
                    [
                        format(seed, ".17g"),
                        format(t, ".17g"),
                        format(bundle.q[i, j], ".17g"),
                        format(qx_formula[i, j], ".17g"),
                        format(bundle.qx[i, j], ".17g"),
                        format(bundle.mbar[i, j], ".17g"),
                        format(mbar_formula[i, j], ".17g"),
                        format(bundle.Mbar[i, j], ".17g"),
                    ]
                )
