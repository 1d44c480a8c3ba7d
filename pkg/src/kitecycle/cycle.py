"""Phase controllers and time integration for the pumping cycle.

A cycle is three phases run in sequence from the single fixed point of
the trajectory, the state (r_max, beta_o):

* retraction - reel in under the low force set-point, flying straight up
  (course angle 180 deg) in the phi = 0 plane, until the tether reaches
  its minimum length;
* transition - fly straight down (course angle 0) at the traction
  coefficients, holding the tether force between the two set-points,
  until the traction elevation is reached;
* traction - hold the representative crosswind state (constant angles)
  and reel out under the high force set-point until the tether reaches
  its maximum length.

Positions advance by explicit Euler with the step scaled by the
characteristic time (r_max - r_min)/v_w_ref; the final step of each
phase is truncated at the terminating crossing so durations are not
quantised to the step size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .atmosphere import Environment, WindState, wind_state_at
from .errors import ConvergenceError, NoTensionError, PhaseError, ValidationError
from .steady_state import (
    AeroSet,
    EffectiveAero,
    EquilibriumResult,
    KiteParams,
    KiteState,
    TetherParams,
    _solve_reel_factor,
    massless_state,
    reel_factor_for_force_massless,
    solve_kinematic_ratio,
    tether_properties,
)

__all__ = [
    "OperationSettings",
    "StepRecord",
    "PhaseResult",
    "CycleResult",
    "simulate_retraction",
    "simulate_transition",
    "simulate_traction",
    "simulate_cycle",
    "steady_retraction_elevation",
    "convergence_study",
]

RETRACTION = "retraction"
TRANSITION = "transition"
TRACTION = "traction"


@dataclass(frozen=True)
class OperationSettings:
    """Operational set-points and simulation controls.

    Angles are radians.  ``force_at`` selects which tether end the force
    set-points regulate; reported power is ground-side either way.
    """

    beta_o: float
    phi_o: float
    chi_o: float
    r_min: float
    r_max: float
    F_out: float
    F_in: float
    dT: float = 0.01
    gravity: bool = True
    force_at: str = "kite"

    def __post_init__(self):
        if not 0.0 < self.r_min < self.r_max:
            raise ValidationError(
                f"requires 0 < r_min < r_max, got r_min={self.r_min}, r_max={self.r_max}"
            )
        if not 0.0 < self.dT <= 1.0:
            raise ValidationError(f"nondimensional time step must be in (0, 1], got {self.dT}")
        if not 0.0 < self.F_in < self.F_out:
            raise ValidationError(
                f"requires 0 < F_in < F_out, got F_in={self.F_in}, F_out={self.F_out}"
            )
        if not 0.0 < self.beta_o < 0.5 * math.pi:
            raise ValidationError(f"traction elevation must be in (0, pi/2), got {self.beta_o}")
        if self.force_at not in ("kite", "ground"):
            raise ValidationError(f"force_at must be 'kite' or 'ground', got {self.force_at!r}")

    @property
    def theta_o(self) -> float:
        return 0.5 * math.pi - self.beta_o


@dataclass(frozen=True)
class StepRecord:
    """One recorded integration step."""

    t: float
    r: float
    theta: float
    phi: float
    chi: float
    f: float
    v_t: float
    v_k: float
    v_a: float
    F_t_kite: float
    F_tg: float
    P: float


@dataclass
class PhaseResult:
    """Time series and aggregate quantities of one phase."""

    phase: str
    duration: float
    mean_power: float
    energy: float
    steps: int
    series: list[StepRecord] = field(repr=False)

    @property
    def start(self) -> StepRecord:
        return self.series[0]

    @property
    def end(self) -> StepRecord:
        return self.series[-1]


@dataclass
class CycleResult:
    """Aggregated pumping-cycle output."""

    retraction: PhaseResult
    transition: PhaseResult
    traction: PhaseResult
    P_m: float
    zeta_m: float
    z_mt: float
    steps: int

    @property
    def phases(self) -> tuple[PhaseResult, PhaseResult, PhaseResult]:
        return (self.retraction, self.transition, self.traction)

    @property
    def duration(self) -> float:
        return sum(p.duration for p in self.phases)


class _PhaseEngine:
    """Shared machinery: per-step equilibrium solves and series bookkeeping."""

    def __init__(
        self,
        env: Environment,
        kite: KiteParams,
        tether: TetherParams,
        op: OperationSettings,
        aero_set: AeroSet,
    ):
        if env.v_w_ref <= 0.0:
            raise ValidationError("cycle simulation requires a positive reference wind speed")
        self.env = env
        self.kite = kite
        self.tether = tether
        self.op = op
        self.aero_set = aero_set
        self.t_star = (op.r_max - op.r_min) / env.v_w_ref
        self.dt = self.t_star * op.dT
        self.f_hint: float | None = None

    def wind_at(self, r: float, theta: float) -> WindState:
        return wind_state_at(r * math.cos(theta), self.env)

    def local_aero(self, r: float) -> tuple[float, EffectiveAero]:
        m_t, C_D = tether_properties(r, self.tether, self.kite, self.aero_set)
        if not self.op.gravity:
            m_t = 0.0
        return m_t, EffectiveAero(C_L=self.aero_set.C_L, C_D=C_D)

    def equilibrium_at(self, state: KiteState, wind: WindState) -> EquilibriumResult:
        m_t, aero = self.local_aero(state.r)
        if self.op.gravity:
            return solve_kinematic_ratio(state, self.kite, m_t, aero, wind)
        return massless_state(state, aero, wind, self.kite.S)

    def solve_force(
        self, F_target: float, r: float, theta: float, phi: float, chi: float,
        wind: WindState,
    ) -> tuple[KiteState, EquilibriumResult]:
        """Reeling factor and equilibrium for a tether-force set-point."""
        m_t, aero = self.local_aero(r)
        probe = KiteState(r=r, theta=theta, phi=phi, chi=chi, f=0.0)
        if not self.op.gravity:
            f = reel_factor_for_force_massless(F_target, probe, aero, wind, self.kite.S)
            state = KiteState(r=r, theta=theta, phi=phi, chi=chi, f=f)
            return state, massless_state(state, aero, wind, self.kite.S)
        f, eq = _solve_reel_factor(
            F_target, self.op.force_at, probe, self.kite, m_t, aero, wind,
            hint=self.f_hint,
        )
        self.f_hint = f
        return KiteState(r=r, theta=theta, phi=phi, chi=chi, f=f), eq

    @staticmethod
    def record(t: float, state: KiteState, eq: EquilibriumResult, wind: WindState) -> StepRecord:
        v_t = state.f * wind.v_w
        v_tau = eq.lam * wind.v_w
        return StepRecord(
            t=t, r=state.r, theta=state.theta, phi=state.phi, chi=state.chi,
            f=state.f, v_t=v_t, v_k=math.hypot(v_t, v_tau), v_a=eq.v_a,
            F_t_kite=eq.F_t_kite, F_tg=eq.F_tg, P=eq.P,
        )

    @staticmethod
    def finish(phase: str, series: list[StepRecord]) -> PhaseResult:
        duration = series[-1].t - series[0].t
        energy = 0.0
        for prev, cur in zip(series, series[1:]):
            energy += 0.5 * (prev.P + cur.P) * (cur.t - prev.t)
        mean_power = energy / duration if duration > 0.0 else 0.0
        return PhaseResult(
            phase=phase, duration=duration, mean_power=mean_power,
            energy=energy, steps=len(series) - 1, series=series,
        )


def simulate_retraction(
    env: Environment,
    kite: KiteParams,
    tether: TetherParams,
    op: OperationSettings,
    t0: float = 0.0,
) -> PhaseResult:
    """Reel in from (r_max, beta_o) under the low force set-point.

    Course angle is 180 deg (upward) in the phi = 0 plane; the phase ends
    when the tether length crosses r_min.  Neglecting gravity the kite
    typically reels out at the start, so the tether length may
    temporarily exceed r_max.
    """
    engine = _PhaseEngine(env, kite, tether, op, kite.aero_retraction)
    r, theta = op.r_max, op.theta_o
    chi, phi = math.pi, 0.0
    t = t0
    stall, stall_limit = 0, max(1, math.ceil(10.0 / op.dT))

    wind = engine.wind_at(r, theta)
    state, eq = engine.solve_force(op.F_in, r, theta, phi, chi, wind)
    series = [engine.record(t, state, eq, wind)]
    while True:
        v_t = state.f * wind.v_w
        beta_rate = -eq.lam * wind.v_w * math.cos(chi) / r
        if r + v_t * engine.dt <= op.r_min and v_t < 0.0:
            dt = (op.r_min - r) / v_t
            r = op.r_min
            theta -= beta_rate * dt  # theta = pi/2 - beta
            t += dt
            done = True
        else:
            if v_t >= 0.0:
                stall += 1
                if stall > stall_limit:
                    raise PhaseError(
                        f"tether length failed to decrease for {stall} consecutive steps"
                    )
            else:
                stall = 0
            r += v_t * engine.dt
            theta -= beta_rate * engine.dt
            t += engine.dt
            done = False
        wind = engine.wind_at(r, theta)
        state, eq = engine.solve_force(op.F_in, r, theta, phi, chi, wind)
        series.append(engine.record(t, state, eq, wind))
        if done:
            return engine.finish(RETRACTION, series)


def simulate_transition(
    env: Environment,
    kite: KiteParams,
    tether: TetherParams,
    op: OperationSettings,
    r_start: float,
    theta_start: float,
    t0: float = 0.0,
) -> PhaseResult:
    """Fly down (course angle 0, phi = 0) at the traction coefficients
    until the traction elevation is reached.

    The winch holds the tether length unless the free-flight tension
    leaves [F_in, F_out]: above F_out it reels out, below F_in it reels
    in, regulating to the violated set-point.
    """
    engine = _PhaseEngine(env, kite, tether, op, kite.aero_traction)
    r, theta = r_start, theta_start
    chi, phi = 0.0, 0.0
    t = t0

    def controlled(r: float, theta: float, wind: WindState) -> tuple[KiteState, EquilibriumResult]:
        try:
            coasting = KiteState(r=r, theta=theta, phi=phi, chi=chi, f=0.0)
            eq0 = engine.equilibrium_at(coasting, wind)
        except NoTensionError:
            # An overflown kite cannot carry tension at constant length;
            # reel in to restore the minimum force.
            return engine.solve_force(op.F_in, r, theta, phi, chi, wind)
        force = eq0.F_t_kite if op.force_at == "kite" else eq0.F_tg
        if force > op.F_out:
            return engine.solve_force(op.F_out, r, theta, phi, chi, wind)
        if force < op.F_in:
            return engine.solve_force(op.F_in, r, theta, phi, chi, wind)
        engine.f_hint = 0.0
        return coasting, eq0

    wind = engine.wind_at(r, theta)
    state, eq = controlled(r, theta, wind)
    series = [engine.record(t, state, eq, wind)]
    if 0.5 * math.pi - theta_start <= op.beta_o:
        return engine.finish(TRANSITION, series)

    stall, stall_limit = 0, max(1, math.ceil(10.0 / op.dT))
    while True:
        v_t = state.f * wind.v_w
        beta_rate = -eq.lam * wind.v_w * math.cos(chi) / r
        beta = 0.5 * math.pi - theta
        if beta + beta_rate * engine.dt <= op.beta_o and beta_rate < 0.0:
            dt = (op.beta_o - beta) / beta_rate
            theta = op.theta_o
            r += v_t * dt
            t += dt
            done = True
        else:
            if beta_rate >= 0.0:
                stall += 1
                if stall > stall_limit:
                    raise PhaseError(
                        f"elevation failed to decrease for {stall} consecutive steps"
                    )
            else:
                stall = 0
            r += v_t * engine.dt
            theta -= beta_rate * engine.dt
            t += engine.dt
            done = False
        wind = engine.wind_at(r, theta)
        state, eq = controlled(r, theta, wind)
        series.append(engine.record(t, state, eq, wind))
        if done:
            return engine.finish(TRANSITION, series)


def simulate_traction(
    env: Environment,
    kite: KiteParams,
    tether: TetherParams,
    op: OperationSettings,
    r_start: float,
    t0: float = 0.0,
) -> PhaseResult:
    """Reel out under the high force set-point at the constant
    representative crosswind state until the tether reaches r_max."""
    engine = _PhaseEngine(env, kite, tether, op, kite.aero_traction)
    r = r_start
    theta, phi, chi = op.theta_o, op.phi_o, op.chi_o
    t = t0
    stall, stall_limit = 0, max(1, math.ceil(10.0 / op.dT))

    wind = engine.wind_at(r, theta)
    state, eq = engine.solve_force(op.F_out, r, theta, phi, chi, wind)
    series = [engine.record(t, state, eq, wind)]
    if r_start >= op.r_max:
        return engine.finish(TRACTION, series)

    while True:
        v_t = state.f * wind.v_w
        if r + v_t * engine.dt >= op.r_max and v_t > 0.0:
            dt = (op.r_max - r) / v_t
            r = op.r_max
            t += dt
            done = True
        else:
            if v_t <= 0.0:
                stall += 1
                if stall > stall_limit:
                    raise PhaseError(
                        f"tether length failed to increase for {stall} consecutive steps"
                    )
            else:
                stall = 0
            r += v_t * engine.dt
            t += engine.dt
            done = False
        wind = engine.wind_at(r, theta)
        state, eq = engine.solve_force(op.F_out, r, theta, phi, chi, wind)
        series.append(engine.record(t, state, eq, wind))
        if done:
            return engine.finish(TRACTION, series)


def simulate_cycle(
    env: Environment,
    kite: KiteParams,
    tether: TetherParams,
    op: OperationSettings,
) -> CycleResult:
    """Run retraction, transition and traction in sequence and aggregate.

    Mean cycle power is the time-weighted mean of the phase powers; the
    power harvesting factor normalises it by the wind power density at
    the average traction altitude times the wing area.
    """
    retraction = simulate_retraction(env, kite, tether, op, t0=0.0)
    transition = simulate_transition(
        env, kite, tether, op,
        r_start=retraction.end.r,
        theta_start=retraction.end.theta,
        t0=retraction.end.t,
    )
    traction = simulate_traction(
        env, kite, tether, op, r_start=transition.end.r, t0=transition.end.t
    )
    energy = retraction.energy + transition.energy + traction.energy
    duration = retraction.duration + transition.duration + traction.duration
    P_m = energy / duration
    z_mt = 0.5 * math.cos(op.theta_o) * (op.r_min + op.r_max)
    wind_mt = wind_state_at(z_mt, env)
    zeta_m = P_m / (wind_mt.P_w * kite.S)
    return CycleResult(
        retraction=retraction,
        transition=transition,
        traction=traction,
        P_m=P_m,
        zeta_m=zeta_m,
        z_mt=z_mt,
        steps=retraction.steps + transition.steps + traction.steps,
    )


def steady_retraction_elevation(
    env: Environment,
    kite: KiteParams,
    tether: TetherParams,
    op: OperationSettings,
    uniform_wind: bool = True,
    radial_only: bool = False,
    tol: float = 1e-7,
    hold_steps: int = 100,
    max_steps: int = 1_000_000,
) -> float:
    """Asymptotic elevation angle of force-controlled upward retraction.

    Diagnostic: integrates the retraction elevation dynamics with the
    tether length held at r_max (so the asymptote is stationary) and no
    length-based termination, until the per-step elevation change stays
    below ``tol`` for ``hold_steps`` consecutive steps.  With
    ``uniform_wind`` the wind speed is v_w_ref at every altitude; the
    fixed point only exists when that wind is strong enough relative to
    the reel-in set-point, otherwise the elevation rises past the zenith.
    ``radial_only`` freezes the tangential motion entirely, a degenerate
    mode in which the start elevation is already stationary.

    Raises:
        ConvergenceError: if the step budget is exhausted or the
            elevation leaves (0, pi/2).
    """
    engine = _PhaseEngine(env, kite, tether, op, kite.aero_retraction)
    r = op.r_max
    theta = op.theta_o
    chi, phi = math.pi, 0.0
    held = 0
    for _ in range(max_steps):
        z = r * math.cos(theta)
        if uniform_wind:
            wind = WindState(v_w=env.v_w_ref, rho=env.density(z))
        else:
            wind = wind_state_at(z, env)
        _, eq = engine.solve_force(op.F_in, r, theta, phi, chi, wind)
        lam = 0.0 if radial_only else eq.lam
        d_beta = lam * wind.v_w / r * engine.dt  # chi = 180 deg: upward
        theta -= d_beta
        if not 0.0 < theta < 0.5 * math.pi:
            raise ConvergenceError(
                "no steady retraction elevation below the zenith for this configuration"
            )
        if abs(d_beta) < tol:
            held += 1
            if held >= hold_steps:
                return 0.5 * math.pi - theta
        else:
            held = 0
    raise ConvergenceError(f"steady elevation search exhausted {max_steps} steps")


def convergence_study(
    env: Environment,
    kite: KiteParams,
    tether: TetherParams,
    op: OperationSettings,
    dT_list: list[float],
) -> list[dict]:
    """Cycle power harvesting factor for a list of time steps.

    ``dT_list`` must be sorted descending; the smallest entry serves as
    the reference against which all rows are normalised.  Returns one row
    per entry: dT, zeta_m, total steps and zeta_m over the reference.
    """
    if not dT_list:
        raise ValidationError("dT_list must contain at least one entry")
    if any(b > a for a, b in zip(dT_list, dT_list[1:])):
        raise ValidationError("dT_list must be sorted in descending order")
    results = [simulate_cycle(env, kite, tether, replace(op, dT=dT)) for dT in dT_list]
    zeta_ref = results[-1].zeta_m
    return [
        {"dT": dT, "zeta_m": res.zeta_m, "steps": res.steps, "ratio": res.zeta_m / zeta_ref}
        for dT, res in zip(dT_list, results)
    ]
