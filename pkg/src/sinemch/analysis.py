"""Conservation and blow-up diagnostics.

Tracks the invariant H1 = int m u dx, the blow-up criterion integral
int_0^t ||m||_inf^2 dtau, the pointwise minimum of the blow-up quantity M,
Young-inequality ratios, and the wave-breaking certificate built from the
initial data: with Mbar0 = M(0, x0), mbar0 = m0(x0) > 0 and
C1 = C (||u0||_{H1}^5 + ||u0||_{H1}^3), the certificate fires when

    Mbar0 < 0   and   (Mbar0/mbar0) xi + C1 xi^2 / 2 + 1/mbar0 < 0,

with xi = -Mbar0 / (C1 mbar0), predicting breakdown inside (0, xi].  The
envelope h(t) = 2((Mbar0/mbar0) t + C1 t^2 / 2) + 1/mbar0 is reported
alongside (h(xi) < 0 follows whenever the firing condition holds).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Iterable

import numpy as np

from .dynamics import SolutionState, blowup_quantity
from .errors import (
    ConfigurationError,
    HypothesisViolationError,
    InvariantViolationError,
    UndefinedRatioError,
)
from .grid import Field
from .spectral import spectral_h1_norm


@dataclass(frozen=True)
class DiagnosticsRecord:
    """One diagnostics sample; field names are the NDJSON schema."""

    t: float
    h1: float
    m_inf: float
    m_l2: float
    min_M: float
    blowup_integral: float
    u_inf: float
    ux_inf: float
    uxx_inf: float


@dataclass(frozen=True)
class BreakingCertificate:
    """Theorem-style sufficient condition for wave breaking."""

    x0: float
    mbar0: float
    Mbar0: float
    C1: float
    xi: float
    h_xi: float
    a_xi: float
    fires: bool
    predicted_window: tuple[float, float]


@dataclass(frozen=True)
class EnvelopeReport:
    """Empirical check of the ratio and 1/mbar envelopes along one seed."""

    c1_empirical: float
    h_envelope_holds: bool
    max_h_gap: float
    min_inverse_mbar: float


def h1(state: SolutionState) -> float:
    """Grid quadrature of the conserved quantity int m u dx."""
    return float(state.grid.spacing * np.sum(state.m.values * state.u.values))


def young_probe(state: SolutionState) -> tuple[float, float, float]:
    """Ratios (|u|/|m|, |u_x|/|m|, |u_xx|/|m|) in grid sup norms.

    With ||p||_L1 = ||p_x||_L1 = 1 the first two are <= 1 and the third
    <= 2 (u_xx = u - m pointwise); reported, not asserted.
    """
    from .spectral import derivative

    m_inf = state.m.linf()
    if m_inf == 0.0:
        raise UndefinedRatioError("Young ratios undefined for m identically zero")
    u_inf = state.u.linf()
    ux_inf = derivative(state.u).linf()
    uxx_inf = float(np.max(np.abs(state.u.values - state.m.values)))
    return (u_inf / m_inf, ux_inf / m_inf, uxx_inf / m_inf)


def min_M_track(state: SolutionState) -> float:
    """Grid infimum of 2 cos(u^2-u_x^2) u_x m, i.e. 2 * min_x M."""
    return 2.0 * float(np.min(blowup_quantity(state).values))


def make_record(state: SolutionState, blowup_integral: float) -> DiagnosticsRecord:
    from .spectral import derivative

    return DiagnosticsRecord(
        t=state.t,
        h1=h1(state),
        m_inf=state.m.linf(),
        m_l2=state.m.l2(),
        min_M=float(np.min(blowup_quantity(state).values)),
        blowup_integral=blowup_integral,
        u_inf=state.u.linf(),
        ux_inf=derivative(state.u).linf(),
        uxx_inf=float(np.max(np.abs(state.u.values - state.m.values))),
    )


def certificate_from_values(
    Mbar0: float, mbar0: float, C1: float, x0: float = math.nan
) -> BreakingCertificate:
    """Certificate arithmetic from (Mbar0, mbar0, C1) alone."""
    if mbar0 <= 0.0 or C1 <= 0.0:
        raise HypothesisViolationError("certificate needs mbar0 > 0 and C1 > 0")
    xi = -Mbar0 / (C1 * mbar0)
    quad = (Mbar0 / mbar0) * xi + 0.5 * C1 * xi**2
    a_xi = quad + 1.0 / mbar0
    h_xi = 2.0 * quad + 1.0 / mbar0
    fires = bool(Mbar0 < 0.0 and a_xi < 0.0)
    return BreakingCertificate(
        x0=x0,
        mbar0=mbar0,
        Mbar0=Mbar0,
        C1=C1,
        xi=xi,
        h_xi=h_xi,
        a_xi=a_xi,
        fires=fires,
        predicted_window=(0.0, xi),
    )


def certify(state0: SolutionState, C: float = 1.0) -> BreakingCertificate:
    """Evaluate the wave-breaking certificate on initial data.

    Requires m0 >= 0 (to -1e-12) with some strictly positive mass; the seed
    x0 is the grid argmin of M(0, .) restricted to points where m0 exceeds
    1e-8 of its peak.
    """
    if C <= 0.0:
        raise ConfigurationError("certificate constant C must be positive")
    m0 = state0.m.values
    if float(np.min(m0)) < -1e-12:
        raise HypothesisViolationError("certificate requires m0(x) >= 0 everywhere")
    peak = float(np.max(m0))
    if peak <= 0.0:
        raise HypothesisViolationError("certificate requires m0 > 0 somewhere")
    M0 = blowup_quantity(state0).values
    eligible = m0 > 1e-8 * peak
    idx_local = int(np.argmin(M0[eligible]))
    idx = int(np.flatnonzero(eligible)[idx_local])
    h1n = spectral_h1_norm(state0.u)
    C1 = C * (h1n**5 + h1n**3)
    return certificate_from_values(
        Mbar0=float(M0[idx]),
        mbar0=float(m0[idx]),
        C1=C1,
        x0=float(state0.grid.points[idx]),
    )


def envelope_check(bundle, cert: BreakingCertificate) -> EnvelopeReport:
    """Compare M/m and 1/m along the certificate seed against the envelopes.

    Reports the smallest empirical C1 making M/m <= M(0)/m(0) + C1 t hold on
    the tracked samples, and whether 1/mbar <= h(t) holds with the
    certificate's C1.
    """
    seeds = np.asarray(bundle.seeds, dtype=float)
    j = int(np.argmin(np.abs(seeds - cert.x0)))
    if abs(seeds[j] - cert.x0) > 1e-9:
        raise ConfigurationError("bundle does not track the certificate seed x0")
    mbar = np.asarray(bundle.mbar)[:, j]
    Mbar = np.asarray(bundle.Mbar)[:, j]
    t = np.asarray(bundle.times, dtype=float)
    if np.min(mbar) <= 0.0:
        raise InvariantViolationError("mbar crossed zero along a positive-m0 seed")
    ratio = Mbar / mbar
    later = t > 0.0
    if np.any(later):
        c1_emp = float(np.max((ratio[later] - ratio[0]) / t[later]))
        c1_emp = max(c1_emp, 0.0)
    else:
        c1_emp = 0.0
    h_t = 2.0 * ((cert.Mbar0 / cert.mbar0) * t + 0.5 * cert.C1 * t**2) + 1.0 / cert.mbar0
    gap = 1.0 / mbar - h_t
    max_gap = float(np.max(gap))
    return EnvelopeReport(
        c1_empirical=c1_emp,
        h_envelope_holds=bool(max_gap <= 1e-9 * max(1.0, abs(1.0 / cert.mbar0))),
        max_h_gap=max_gap,
        min_inverse_mbar=float(np.min(1.0 / mbar)),
    )


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        x = float(v)
        if math.isnan(x):
            return "NaN"
        if math.isinf(x):
            return "Infinity" if x > 0 else "-Infinity"
        return format(x, ".17g")
    if isinstance(v, (tuple, list)):
        return "[" + ",".join(_fmt(x) for x in v) + "]"
    if isinstance(v, str):
        return json.dumps(v)
    raise TypeError(f"cannot serialize {type(v).__name__} to NDJSON")


def to_ndjson_line(obj) -> str:
    """Serialize a flat record dataclass to one NDJSON line; floats carry
    17 significant digits so they round-trip exactly."""
    d = asdict(obj) if not isinstance(obj, dict) else obj
    return "{" + ",".join(f"{json.dumps(k)}:{_fmt(v)}" for k, v in d.items()) + "}"


def write_ndjson(path, objs: Iterable) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for obj in objs:
            fh.write(to_ndjson_line(obj) + "\n")
