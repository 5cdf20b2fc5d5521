"""Explicit time stepping with blow-up-aware stopping.

Classical RK4 on the conservative m-form; u is refreshed by Helmholtz
inversion inside every stage.  Error control (when enabled) is by step
doubling: a full step is compared against two half steps and the half-step
result is kept.  Blow-up is flagged by threshold crossing or dt underflow,
never by chasing the singularity itself: past gradient blow-up the spectral
representation is meaningless and the certificate module carries the
prediction instead.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .analysis import DiagnosticsRecord, make_record
from .dynamics import ModelParams, SolutionState, blowup_quantity, m_rhs, velocity_of_state
from .errors import ConfigurationError, DomainContaminationWarning
from .grid import Field, GridSpec
from .spectral import spectrum

REACHED_T_END = "reached_t_end"
BLOWUP_DETECTED = "blowup_detected"
DOMAIN_CONTAMINATED = "domain_contaminated"
STEP_BUDGET_EXHAUSTED = "step_budget_exhausted"

_SEAM_WARN = 1e-12
_SEAM_ABORT = 1e-6


@dataclass(frozen=True)
class StepperConfig:
    dt_init: float
    t_end: float
    cfl: float = 0.3
    max_m_inf: float = 1e4
    max_steps: int = 1_000_000
    adaptive: bool = True
    error_tol: float = 1e-10

    def __post_init__(self) -> None:
        if self.dt_init <= 0.0 or not np.isfinite(self.dt_init):
            raise ConfigurationError("dt_init must be a positive real")
        if not (0.0 < self.cfl <= 1.0):
            raise ConfigurationError("cfl must lie in (0, 1]")
        if self.t_end < 0.0:
            raise ConfigurationError("t_end must be nonnegative")
        if self.max_steps < 1:
            raise ConfigurationError("max_steps must be at least 1")
        if self.max_m_inf <= 0.0 or self.error_tol <= 0.0:
            raise ConfigurationError("max_m_inf and error_tol must be positive")


class FieldHistory:
    """Dense storage of m, V, M spectra for post-hoc characteristic tracing.

    Entries are appended by the run loop at its history cadence; spectra are
    interpolated linearly in t between entries.
    """

    def __init__(self, grid: GridSpec):
        self.grid = grid
        self.times: list[float] = []
        self.m_specs: list[np.ndarray] = []
        self.v_specs: list[np.ndarray] = []
        self.M_specs: list[np.ndarray] = []

    def append(self, state: SolutionState, v_field: Field) -> None:
        if self.times and state.t <= self.times[-1]:
            return
        self.times.append(state.t)
        self.m_specs.append(spectrum(state.m))
        self.v_specs.append(spectrum(v_field))
        self.M_specs.append(spectrum(blowup_quantity(state)))

    def __len__(self) -> int:
        return len(self.times)

    def _bracket(self, t: float) -> tuple[int, float]:
        ts = self.times
        if t <= ts[0]:
            return 0, 0.0
        if t >= ts[-1]:
            return len(ts) - 2, 1.0
        i = int(np.searchsorted(ts, t, side="right")) - 1
        theta = (t - ts[i]) / (ts[i + 1] - ts[i])
        return i, theta

    def _lerp(self, specs: list[np.ndarray], t: float) -> np.ndarray:
        if len(self.times) == 1:
            return specs[0]
        i, theta = self._bracket(t)
        return (1.0 - theta) * specs[i] + theta * specs[i + 1]

    def v_spectrum_at(self, t: float) -> np.ndarray:
        return self._lerp(self.v_specs, t)

    def m_spectrum_at(self, t: float) -> np.ndarray:
        return self._lerp(self.m_specs, t)

    def M_spectrum_at(self, t: float) -> np.ndarray:
        return self._lerp(self.M_specs, t)


@dataclass
class RunOutcome:
    status: str
    final_state: SolutionState
    history: list[DiagnosticsRecord]
    steps: int
    field_history: FieldHistory | None = None
    dt_log: list[float] = field(default_factory=list)
    vinf_log: list[float] = field(default_factory=list)


def step_rk4(state: SolutionState, dt: float, params: ModelParams) -> SolutionState:
    """One classical RK4 update of m; t advances by dt."""
    if dt < 0.0:
        raise ConfigurationError("dt must be nonnegative")
    grid = state.grid

    def rhs(values: np.ndarray) -> np.ndarray:
        return m_rhs(SolutionState.from_m(Field(grid, values)), params).values

    m = state.m.values
    k1 = rhs(m)
    k2 = rhs(m + 0.5 * dt * k1)
    k3 = rhs(m + 0.5 * dt * k2)
    k4 = rhs(m + dt * k3)
    m_new = m + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return SolutionState.from_m(Field(grid, m_new), state.t + dt)


def _finite(state: SolutionState) -> bool:
    return bool(np.all(np.isfinite(state.m.values)))


def run(
    state0: SolutionState,
    cfg: StepperConfig,
    params: ModelParams,
    sinks: Sequence[Callable[[DiagnosticsRecord], None]] = (),
    record_every: int = 10,
    history_every: int = 4,
    capture_history: bool = False,
) -> RunOutcome:
    """Integrate until t_end or a stopping rule fires.

    Emits a DiagnosticsRecord at step 0, every `record_every` accepted steps
    and at termination; stores fields for characteristics every
    `history_every` accepted steps when capture_history is set.
    Deterministic: identical inputs give bit-identical record streams.
    """
    if record_every < 1 or history_every < 1:
        raise ConfigurationError("cadences must be positive")
    grid = state0.grid
    h = grid.spacing
    state = state0
    records: list[DiagnosticsRecord] = []
    fh = FieldHistory(grid) if capture_history else None
    dt_log: list[float] = []
    vinf_log: list[float] = []
    blowup_integral = 0.0
    m_inf = state.m.linf()
    seam_warned = False
    status: str | None = None

    def emit(st: SolutionState) -> None:
        rec = make_record(st, blowup_integral)
        records.append(rec)
        for sink in sinks:
            sink(rec)

    def seam_status(st: SolutionState) -> str | None:
        nonlocal seam_warned
        rel = st.m.seam_inf() / max(1.0, st.m.linf())
        if rel > _SEAM_ABORT:
            return DOMAIN_CONTAMINATED
        if rel > _SEAM_WARN and not seam_warned:
            warnings.warn(
                f"field mass {rel:.2e} (relative) at |x| >= L/2 exceeds the decay gate",
                DomainContaminationWarning,
                stacklevel=2,
            )
            seam_warned = True
        return None

    v_field = velocity_of_state(state, params)
    vinf = max(v_field.linf(), 1e-12)
    emit(state)
    if fh is not None:
        fh.append(state, v_field)
    status = seam_status(state)

    dt = min(cfg.dt_init, cfg.cfl * h / vinf)
    accepted = 0
    while status is None:
        if state.t >= cfg.t_end - 1e-14 * max(cfg.t_end, 1.0):
            status = REACHED_T_END
            break
        if accepted >= cfg.max_steps:
            status = STEP_BUDGET_EXHAUSTED
            break
        dt = min(dt, cfg.t_end - state.t)
        # one attempt; on rejection shrink dt and retry
        proposal: SolutionState | None = None
        growth = 2.0
        if cfg.adaptive:
            full = step_rk4(state, dt, params)
            half = step_rk4(step_rk4(state, 0.5 * dt, params), 0.5 * dt, params)
            if _finite(half) and _finite(full):
                err = float(np.max(np.abs(half.m.values - full.m.values))) / 15.0
                tol = cfg.error_tol * max(1.0, m_inf)
                if err <= tol:
                    proposal = half
                    growth = min(2.0, 0.9 * (tol / max(err, 1e-300)) ** 0.2)
                else:
                    dt *= max(0.1, min(0.5, 0.9 * (tol / err) ** 0.2))
            else:
                dt *= 0.5
        else:
            cand = step_rk4(state, dt, params)
            if _finite(cand):
                proposal = cand
            else:
                dt *= 0.5
        if proposal is None:
            if dt < 1e-12 * cfg.dt_init:
                status = BLOWUP_DETECTED
                break
            continue

        m_inf_new = proposal.m.linf()
        blowup_integral += 0.5 * (proposal.t - state.t) * (m_inf**2 + m_inf_new**2)
        dt_log.append(proposal.t - state.t)
        vinf_log.append(vinf)
        state = proposal
        m_inf = m_inf_new
        accepted += 1

        v_field = velocity_of_state(state, params)
        vinf = max(v_field.linf(), 1e-12)
        if accepted % record_every == 0:
            emit(state)
        if fh is not None and accepted % history_every == 0:
            fh.append(state, v_field)

        if m_inf >= cfg.max_m_inf:
            status = BLOWUP_DETECTED
            break
        status = seam_status(state)
        if status is not None:
            break
        dt = min(dt * growth, cfg.cfl * h / vinf)
        if dt < 1e-12 * cfg.dt_init:
            status = BLOWUP_DETECTED
            break

    if not records or records[-1].t != state.t:
        emit(state)
    if fh is not None and (not fh.times or fh.times[-1] != state.t) and _finite(state):
        fh.append(state, v_field)
    return RunOutcome(
        status=status or REACHED_T_END,
        final_state=state,
        history=records,
        steps=accepted,
        field_history=fh,
        dt_log=dt_log,
        vinf_log=vinf_log,
    )
