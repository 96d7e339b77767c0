"""Time integration of the modified von Neumann dynamics.

Strang splitting per step: half-step unitary frame evolution with the
mid-step Hamiltonian, one RK4 step of the weight ODE, second unitary
half-step.  Work variables follow prescribed piecewise-linear schedules,
so their rates are exact.  Thermodynamic bookkeeping is recorded at the
start of each recorded step, before the state moves.
"""

from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from . import config
from ._kernels import STATUS_BAD_THETA, STATUS_UNREACHABLE, rk4_weight_step
from .bipartite import (
    BipartiteSystem,
    WorkState,
    entropy_rate_deficiency,
    partial_entropy_exchange,
    partial_heat,
    partial_power,
)
from .ensemble import (
    Ensemble,
    Frame,
    RateSplit,
    diag_expectations,
    f1_vector,
    f2_vector,
)
from .errors import (
    ConstraintViolationError,
    InvalidTemperatureError,
    ScenarioError,
    StepSizeError,
    UnreachableExchangeError,
)
from .constitutive import ConstitutiveModel
from .linops import unitary_evolution
from .observables import (
    ThermoRecord,
    energy,
    heat_rate,
    partial_entropies,
)


@dataclass(frozen=True)
class PiecewiseLinear:
    """Vector-valued piecewise-linear function of time with exact rates."""

    times: np.ndarray
    values: np.ndarray  # shape (len(times), m)

    def __post_init__(self):
        t = np.atleast_1d(np.asarray(self.times, dtype=float))
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None] if t.shape[0] > 1 or v.shape[0] == 1 else v[None, :]
        if v.ndim != 2 or v.shape[0] != t.shape[0]:
            raise ScenarioError(f"schedule shape {v.shape} does not match {t.shape[0]} times")
        if t.shape[0] >= 2 and np.any(np.diff(t) <= 0):
            raise ScenarioError("schedule times must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    @classmethod
    def constant(cls, value) -> "PiecewiseLinear":
        return cls(np.array([0.0]), np.atleast_1d(np.asarray(value, float))[None, :])

    @property
    def width(self) -> int:
        return self.values.shape[1]

    def value(self, t: float) -> np.ndarray:
        if self.times.shape[0] == 1:
            return self.values[0].copy()
        return np.array([
            np.interp(t, self.times, self.values[:, j])
            for j in range(self.values.shape[1])
        ])

    def rate(self, t: float) -> np.ndarray:
        if self.times.shape[0] == 1:
            return np.zeros(self.values.shape[1])
        idx = int(np.searchsorted(self.times, t, side="right")) - 1
        idx = min(max(idx, 0), self.times.shape[0] - 2)
        dt_seg = self.times[idx + 1] - self.times[idx]
        if t < self.times[0] or t > self.times[-1]:
            return np.zeros(self.values.shape[1])
        return (self.values[idx + 1] - self.values[idx]) / dt_seg


@dataclass(frozen=True)
class Schedule:
    """Control inputs over time: work-variable blocks and T□."""

    a1: Optional[PiecewiseLinear] = None
    a2: Optional[PiecewiseLinear] = None
    a12: Optional[PiecewiseLinear] = None
    t_box: Optional[PiecewiseLinear] = None

    def work_at(self, t: float, default: WorkState = WorkState()) -> WorkState:
        def val(pl, cur):
            return pl.value(t) if pl is not None else cur

        def rat(pl, cur):
            return pl.rate(t) if pl is not None else np.zeros_like(cur)

        return WorkState(
            val(self.a1, default.a1), val(self.a2, default.a2),
            val(self.a12, default.a12),
            rat(self.a1, default.a1), rat(self.a2, default.a2),
            rat(self.a12, default.a12),
        )

    def t_box_at(self, t: float, default: float) -> float:
        if self.t_box is None:
            return default
        return float(self.t_box.value(t)[0])


@dataclass(frozen=True)
class Scenario:
    system: BipartiteSystem
    model: ConstitutiveModel
    schedule: Schedule = Schedule()
    isolation_events: Tuple[Tuple[float, bool], ...] = ()
    t_end: float = 1.0
    dt: float = 1e-3
    record_every: int = 1
    damping_budget: int = 100  # saturated positivity-damping steps allowed
    # partition temperatures that follow the (fitted) contact temperature
    tie_part_temps: Tuple[str, ...] = ()

    def __post_init__(self):
        for name in self.tie_part_temps:
            if name not in ("theta1", "theta2", "theta12"):
                raise ScenarioError(f"unknown tied temperature {name!r}",
                                    field="tie_part_temps")
        if self.dt <= 0:
            raise ScenarioError("dt must be positive", field="dt")
        if self.t_end < 0:
            raise ScenarioError("t_end must be nonnegative", field="t_end")
        if self.record_every < 1:
            raise ScenarioError("record_every must be >= 1", field="record_every")
        ev = tuple(sorted((float(t), bool(f)) for t, f in self.isolation_events))
        object.__setattr__(self, "isolation_events", ev)

    def isolated_at(self, t: float) -> bool:
        flag = self.system.isolated
        for t_ev, f in self.isolation_events:
            if t_ev <= t + 1e-15:
                flag = f
        return flag


@dataclass(frozen=True)
class StepInfo:
    rates: RateSplit
    theta: float
    damping: float
    renormalized: bool


@dataclass
class RunLog:
    renormalizations: int = 0
    damping_saturations: int = 0


def _weight_step(p, e, dt, model: ConstitutiveModel, t_box, theta_fixed,
                 include_ex, kb):
    out = rk4_weight_step(
        np.ascontiguousarray(p, dtype=np.float64),
        np.ascontiguousarray(e, dtype=np.float64),
        float(dt), 1.0, float(kb),
        float(model.alpha), float(model.conduction.kappa_ex),
        float(t_box), float(theta_fixed),
        bool(model.fit_theta), bool(include_ex), bool(model.track_tbox),
    )
    p_new, dp_iso, dp_ex, theta, damp, status = out
    if status == STATUS_BAD_THETA:
        raise InvalidTemperatureError(
            "contact-temperature fit is nonpositive (inverted populations?)"
        )
    if status == STATUS_UNREACHABLE:
        raise UnreachableExchangeError("requested heat flow is unreachable")
    return p_new, dp_iso, dp_ex, theta, damp


def step(sys: BipartiteSystem, model: ConstitutiveModel, dt: float,
         schedule: Schedule = Schedule(), t: float = 0.0,
         isolated: Optional[bool] = None,
         u_half: Optional[np.ndarray] = None) -> Tuple[BipartiteSystem, StepInfo]:
    """Advance one step; returns the new snapshot and the start-of-step
    rates/temperature actually used (for recording).

    ``u_half`` short-circuits the mid-step unitary when the Hamiltonian is
    time independent (precomputed by ``run``).
    """
    if isolated is None:
        isolated = sys.isolated
    if dt == 0.0:
        return sys, StepInfo(RateSplit.zero(sys.state.dim), sys.temps.theta, 1.0, False)

    t_mid = t + 0.5 * dt
    work_mid = schedule.work_at(t_mid, sys.work)
    h_mid = sys.hamiltonian.total(work_mid)
    t_box = schedule.t_box_at(t_mid, sys.temps.t_box)

    if u_half is None:
        u_half = unitary_evolution(h_mid, 0.5 * dt, sys.hbar)
    frame1 = Frame(u_half @ sys.state.frame.vectors)
    e = diag_expectations(frame1, h_mid)
    p_new, dp_iso, dp_ex, theta, damp = _weight_step(
        sys.state.weights, e, dt, model, t_box, sys.temps.theta,
        not isolated, sys.kb)

    renorm = False
    total = p_new.sum()
    if abs(total - 1.0) > 1e-13:
        p_new = p_new / total
        renorm = True
    frame2 = Frame(u_half @ frame1.vectors)

    work_new = schedule.work_at(t + dt, sys.work)
    temps_new = replace(sys.temps, theta=theta, t_box=t_box)
    rates = RateSplit(dp_ex, dp_iso)
    new_sys = replace(
        sys,
        state=Ensemble(frame2, p_new),
        rates=rates,
        work=work_new,
        temps=temps_new,
        isolated=isolated and bool(np.max(np.abs(dp_ex), initial=0.0) <= 1e-15),
        t=t + dt,
    )
    return new_sys, StepInfo(rates, theta, damp, renorm)


@dataclass(frozen=True)
class Trajectory:
    records: Tuple[ThermoRecord, ...]
    final_state: BipartiteSystem
    log: RunLog

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])

    @property
    def times(self) -> np.ndarray:
        return self.column("t")


def make_record(sys: BipartiteSystem, rates: RateSplit, theta: float,
                t: float, tie_part_temps: Tuple[str, ...] = ()) -> ThermoRecord:
    """Full thermodynamic ledger at one instant, from the state and the
    constitutive rates evaluated there."""
    h = sys.h_total()
    rho = sys.rho()
    kb = sys.kb
    temps = replace(sys.temps, theta=theta,
                    **{name: theta for name in tie_part_temps})
    sys_r = replace(sys, rates=rates,
                    isolated=sys.isolated and bool(
                        np.max(np.abs(rates.dp_ex), initial=0.0) <= 1e-15),
                    temps=temps, t=t)

    p = sys.state.weights
    support = p > config.EPS_LOG
    s = float(-kb * np.sum(p[support] * np.log(p[support])))

    f1 = f1_vector(sys.state, 1.0, kb)
    f2 = f2_vector(sys.state.frame, h, theta)
    s_dot = float(-rates.dp @ f1)
    xi = float(rates.dp_ex @ f2)
    sigma = float(-rates.dp_iso @ f1)

    e_val = energy(h, rho)
    q_dot = heat_rate(h, sys_r.prop())
    w = partial_power(sys_r)
    q = partial_heat(sys_r)
    xi_parts = partial_entropy_exchange(sys_r, heats=q)
    pe = partial_entropies(rho, sys.dims, kb)
    sdot_def, _ = entropy_rate_deficiency(sys_r)

    rec = ThermoRecord(
        t=t, E=e_val, W_dot=w.w_total, Q_dot=q_dot, S=s, S_dot=s_dot,
        Xi=xi, Sigma=sigma, Theta=theta,
        Q1_ex=q.q1_ex, Q2_ex=q.q2_ex, Q12_ex=q.q12_ex,
        Q1_int=q.q1_int, Q2_int=q.q2_int, Q12_int=q.q12_int,
        W1_ex=w.w1_ex, W2_ex=w.w2_ex,
        W1_int=w.w1_int, W2_int=w.w2_int, W12_int=w.w12_int,
        Xi1_ex=xi_parts.xi1_ex, Xi2_ex=xi_parts.xi2_ex, Xi12_ex=xi_parts.xi12_ex,
        Xi1_int=xi_parts.xi1_int, Xi2_int=xi_parts.xi2_int,
        Xi12_int=xi_parts.xi12_int,
        S_def=pe.deficiency, Sdot_def=sdot_def, Xi_ex_gap=xi_parts.ex_gap,
    )
    row = np.array(rec.row())
    if not np.all(np.isfinite(row)):
        raise ConstraintViolationError(f"non-finite observable at t = {t}")
    return rec


def _current_rates(sys: BipartiteSystem, model: ConstitutiveModel,
                   schedule: Schedule, t: float,
                   isolated: bool) -> Tuple[RateSplit, float]:
    """Instantaneous constitutive rates at the current state (dt -> 0 stage)."""
    h = sys.hamiltonian.total(schedule.work_at(t, sys.work))
    e = diag_expectations(sys.state.frame, h)
    t_box = schedule.t_box_at(t, sys.temps.t_box)
    _, dp_iso, dp_ex, theta, _ = _weight_step(
        sys.state.weights, e, 0.0, model, t_box, sys.temps.theta,
        not isolated, sys.kb)
    return RateSplit(dp_ex, dp_iso), theta


def run(scenario: Scenario) -> Trajectory:
    """Integrate from 0 to t_end, recording the thermodynamic ledger every
    ``record_every`` steps and at the endpoint."""
    sys = scenario.system
    model = scenario.model
    sched = scenario.schedule
    n_steps = int(round(scenario.t_end / scenario.dt))
    log = RunLog()
    records = []

    # the Hamiltonian is time independent iff no work variable is scheduled
    static_h = sched.a1 is None and sched.a2 is None and sched.a12 is None
    u_half = None
    if static_h:
        u_half = unitary_evolution(sys.hamiltonian.total(sys.work),
                                   0.5 * scenario.dt, sys.hbar)

    t = 0.0
    for i in range(n_steps + 1):
        isolated = scenario.isolated_at(t)
        if i % scenario.record_every == 0 or i == n_steps:
            rates, theta = _current_rates(sys, model, sched, t, isolated)
            records.append(make_record(sys, rates, theta, t,
                                       scenario.tie_part_temps))
        if i == n_steps:
            break
        sys, info = step(sys, model, scenario.dt, sched, t, isolated, u_half)
        if info.renormalized:
            log.renormalizations += 1
        if info.damping < 1.0:
            log.damping_saturations += 1
            if log.damping_saturations > scenario.damping_budget:
                raise StepSizeError(
                    f"positivity damping saturated {log.damping_saturations} "
                    f"times by t = {t + scenario.dt}; reduce dt"
                )
        t += scenario.dt
    return Trajectory(tuple(records), sys, log)


@dataclass(frozen=True)
class FirstLawAudit:
    max_deviation: float
    threshold: float
    dt: float
    passed: bool


def first_law_audit(traj: Trajectory) -> FirstLawAudit:
    """Central finite difference of E(t) against Ẇ + Q̇ at interior records."""
    if len(traj.records) < 3:
        raise ScenarioError("first-law audit needs at least three records")
    t = traj.times
    e = traj.column("E")
    rhs = traj.column("W_dot") + traj.column("Q_dot")
    dt = float(t[1] - t[0])
    de = (e[2:] - e[:-2]) / (t[2:] - t[:-2])
    dev = float(np.max(np.abs(de - rhs[1:-1])))
    # third-difference estimate of max |E'''| sets the second-order bound
    if e.shape[0] >= 4:
        d3 = np.abs(np.diff(e, n=3)) / dt**3
        e3 = float(np.max(d3)) if d3.size else 0.0
    else:
        e3 = 0.0
    threshold = 10.0 * dt**2 * max(e3, 1e-12) / 6.0 + 1e-12
    return FirstLawAudit(dev, threshold, dt, dev <= threshold)
