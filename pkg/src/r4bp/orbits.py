"""Symmetric periodic orbits, their continuation in C, and ejection orbits.

A periodic orbit symmetric with respect to the x-axis crosses it
perpendicularly twice per period.  Starting from ``(x0, 0, 0, ydot0)`` we
shoot to the next x-axis crossing and drive ``xdot`` there to zero; the
reflection ``(x, -y, -xdot, ydot, -t)`` then closes the orbit with twice the
crossing time as its period.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace

from scipy.optimize import brentq

from .errors import CollisionError, ConvergenceError, DomainError, IntegrationError, NoCrossingError
from .integrate import (
    EventKind,
    IntegratorConfig,
    Trajectory,
    integrate_regularized,
    integrate_with_regularization,
)
from .model import SynodicState, check_mu, effective_potential, jacobi_constant
from .regularization import collision_state

FD_STEP = 1e-7
MONODROMY_STEP = 1e-6
SEARCH_FACTOR = 5.0
ACCEPT_RESIDUAL = 1e-9
BRANCH_JUMP = 0.05

TERMINATIONS = ("collision_m1", "collision_m23", "period_blowup", "step_failure", "boundary")


@dataclass(frozen=True)
class PeriodicOrbit:
    """Symmetric periodic orbit through ``(x0, 0, 0, ydot0)``.

    ``miss`` is the signed angular momentum about m2/m3 at the closest
    approach to either of them over half a period, and ``miss_distance`` that
    closest distance; the sign flips when a family passes through collision.
    ``stability`` is the trace of the finite-difference monodromy of the
    section map in ``(x, xdot)``, or None when not computed.
    """

    x0: float
    ydot0: float
    period: float
    jacobi_constant: float
    residual: float
    mu: float
    crossing: int = 1
    stability: float | None = None
    miss: float | None = None
    miss_distance: float = math.inf
    min_distance_m1: float = math.inf

    def initial_state(self) -> SynodicState:
        return SynodicState(self.x0, 0.0, 0.0, self.ydot0, 0.0)

    @property
    def orientation(self) -> int:
        """Sign of the angular momentum about the origin at the section."""
        return 1 if self.x0 * self.ydot0 > 0 else -1


@dataclass
class FamilyRecord:
    orbits: list = field(default_factory=list)
    phases: list = field(default_factory=list)
    flags: list = field(default_factory=list)
    termination: str | None = None

    @property
    def phase(self) -> int:
        return self.phases[-1] if self.phases else 0

    def ejection_collision_members(self) -> list:
        return [o for o, f in zip(self.orbits, self.flags) if f.get("ejection_collision")]

    def to_jsonl(self) -> str:
        lines = []
        for orbit, phase, flags in zip(self.orbits, self.phases, self.flags):
            lines.append(
                json.dumps(
                    {
                        "x0": orbit.x0,
                        "ydot0": orbit.ydot0,
                        "T": orbit.period,
                        "C": orbit.jacobi_constant,
                        "residual": orbit.residual,
                        "phase": phase,
                        "flags": flags,
                    }
                )
            )
        return "\n".join(lines) + "\n"


@dataclass
class EjectionCollisionOrbit:
    primary: int
    launch_angle: float
    C: float
    mu: float
    trajectory: Trajectory
    collisions: list

    @property
    def returned(self) -> bool:
        return bool(self.collisions)


# --------------------------------------------------------------------------
# shooting


def _shoot(x0, ydot0, mu, horizon, crossing, config):
    state = SynodicState(x0, 0.0, 0.0, ydot0, 0.0)
    C = jacobi_constant(state, mu)
    traj = integrate_with_regularization(state, C, horizon, mu, config, stop_at_crossing=crossing)
    if traj.status == "collision_m1":
        raise CollisionError("shooting trajectory collides with m1", index=1)
    if traj.status != "crossing":
        raise NoCrossingError(f"no x-axis crossing #{crossing} within t={horizon:.6g} (status {traj.status})")
    hit = traj.events_of(EventKind.X_AXIS_CROSSING)[-1]
    return hit.data["state"][2], hit.t, traj


def _ydot_on_level(x0, C, mu, sign):
    v2 = 2.0 * effective_potential(x0, 0.0, mu) - C
    if v2 <= 0.0:
        raise DomainError(f"x0={x0} lies outside the Hill region of C={C}")
    return sign * math.sqrt(v2)


def _miss(traj: Trajectory):
    near = [a for a in traj.approaches if a.index in (2, 3)]
    if not near:
        return None, math.inf
    best = min(near, key=lambda a: a.distance)
    return best.angular_momentum, best.distance


def refine_symmetric_orbit(
    x0: float,
    mu: float,
    half_period: float,
    ydot0: float | None = None,
    C: float | None = None,
    crossing: int = 1,
    config: IntegratorConfig | None = None,
    tol: float = 1e-10,
    max_iter: int = 25,
    stability: bool = True,
) -> PeriodicOrbit:
    """Newton shooting for a symmetric periodic orbit.

    With ``C`` given, ``x0`` is varied and ``ydot0`` follows from the Jacobi
    constant (its sign taken from ``ydot0`` if supplied, else +1).
    Otherwise ``x0`` is held and ``ydot0`` varied.  The target is
    ``xdot = 0`` at the ``crossing``-th x-axis crossing; the derivative is a
    central difference with step 1e-7.
    """
    mu = check_mu(mu)
    config = config or IntegratorConfig()
    fixed_c = C is not None
    if not fixed_c and ydot0 is None:
        raise ValueError("give ydot0 (fixed x0) or C (fixed energy)")
    sign = 1.0 if ydot0 is None or ydot0 >= 0 else -1.0
    param = float(x0) if fixed_c else float(ydot0)
    half = float(half_period)

    def residual(p):
        if fixed_c:
            return _shoot(p, _ydot_on_level(p, C, mu, sign), mu, SEARCH_FACTOR * half, crossing, config)
        return _shoot(x0, p, mu, SEARCH_FACTOR * half, crossing, config)

    res, t_cross, traj = residual(param)
    for _ in range(max_iter):
        if abs(res) <= tol:
            break
        half = t_cross
        rp = residual(param + FD_STEP)[0]
        rm = residual(param - FD_STEP)[0]
        slope = (rp - rm) / (2.0 * FD_STEP)
        if slope == 0.0 or not math.isfinite(slope):
            raise ConvergenceError("singular shooting derivative")
        param -= res / slope
        res, t_cross, traj = residual(param)
    if not abs(res) <= ACCEPT_RESIDUAL:
        raise ConvergenceError(f"shooting residual {abs(res):.3e} after {max_iter} iterations")
    xs = param if fixed_c else float(x0)
    yd = _ydot_on_level(param, C, mu, sign) if fixed_c else param
    C_orbit = jacobi_constant(SynodicState(xs, 0.0, 0.0, yd), mu)
    miss, miss_distance = _miss(traj)
    orbit = PeriodicOrbit(
        x0=float(xs),
        ydot0=float(yd),
        period=2.0 * float(t_cross),
        jacobi_constant=C_orbit,
        residual=float(abs(res)),
        mu=mu,
        crossing=crossing,
        miss=None if miss is None else float(miss),
        miss_distance=float(miss_distance),
        min_distance_m1=float(traj.min_distance(1)),
    )
    if stability:
        orbit = replace(orbit, stability=monodromy_trace(orbit, config))
    return orbit


def _section_map(x, xdot, orbit: PeriodicOrbit, config):
    C = orbit.jacobi_constant
    mu = orbit.mu
    v2 = 2.0 * effective_potential(x, 0.0, mu) - C - xdot * xdot
    if v2 <= 0:
        raise DomainError("perturbed section point leaves the Hill region")
    ydot = math.copysign(math.sqrt(v2), orbit.ydot0)
    state = SynodicState(x, 0.0, xdot, ydot, 0.0)
    traj = integrate_with_regularization(
        state, C, SEARCH_FACTOR * orbit.period, mu, config, stop_at_crossing=2 * orbit.crossing
    )
    if traj.status != "crossing":
        raise NoCrossingError("section return not reached")
    s = traj.events_of(EventKind.X_AXIS_CROSSING)[-1].data["state"]
    return s[0], s[2]


def monodromy_trace(orbit: PeriodicOrbit, config: IntegratorConfig | None = None, step: float = MONODROMY_STEP) -> float:
    """Trace of the 2x2 section-map Jacobian in ``(x, xdot)`` on level C."""
    config = config or IntegratorConfig()
    xp = _section_map(orbit.x0 + step, 0.0, orbit, config)
    xm = _section_map(orbit.x0 - step, 0.0, orbit, config)
    vp = _section_map(orbit.x0, step, orbit, config)
    vm = _section_map(orbit.x0, -step, orbit, config)
    return (xp[0] - xm[0]) / (2 * step) + (vp[1] - vm[1]) / (2 * step)


def closure_error(orbit: PeriodicOrbit, config: IntegratorConfig | None = None) -> float:
    """Max-norm distance between the initial state and its image after T."""
    traj = integrate_with_regularization(orbit.initial_state(), orbit.jacobi_constant, orbit.period, orbit.mu, config)
    if traj.status != "horizon":
        raise IntegrationError(f"orbit integration ended with {traj.status}", traj)
    return float(max(abs(a - b) for a, b in zip(traj.states[-1], orbit.initial_state().as_array())))


# --------------------------------------------------------------------------
# continuation


def _bisect_collision(lo: PeriodicOrbit, hi: PeriodicOrbit, config) -> PeriodicOrbit | None:
    """Locate the member whose miss proxy vanishes between two orbits."""
    memo = {}

    def guess_x(C):
        s = (C - lo.jacobi_constant) / (hi.jacobi_constant - lo.jacobi_constant)
        return lo.x0 + s * (hi.x0 - lo.x0)

    def proxy(C):
        orbit = refine_symmetric_orbit(
            guess_x(C), lo.mu, lo.period / 2, ydot0=lo.ydot0, C=C, crossing=lo.crossing, config=config, stability=False
        )
        memo[C] = orbit
        return orbit.miss if orbit.miss is not None else math.nan

    try:
        C_star = brentq(proxy, lo.jacobi_constant, hi.jacobi_constant, xtol=1e-12, rtol=1e-14, maxiter=60)
    except (ValueError, ConvergenceError, NoCrossingError, DomainError):
        return None
    orbit = memo.get(C_star) or refine_symmetric_orbit(
        guess_x(C_star), lo.mu, lo.period / 2, ydot0=lo.ydot0, C=C_star, crossing=lo.crossing, config=config
    )
    if orbit.stability is None:
        try:
            orbit = replace(orbit, stability=monodromy_trace(orbit, config))
        except (NoCrossingError, DomainError):
            pass
    return orbit


def continue_family(
    seed: PeriodicOrbit,
    direction: int = 1,
    step: float = 1e-2,
    c_end: float | None = None,
    max_orbits: int = 500,
    period_factor: float = 50.0,
    min_step: float = 1e-6,
    max_step: float = 1e-2,
    stop_on_collision: bool = False,
    config: IntegratorConfig | None = None,
    stability: bool = False,
) -> FamilyRecord:
    """Natural-parameter continuation of a symmetric family in C.

    The step is halved after a failed refinement and grown by 1.3 after three
    successes, within ``[min_step, max_step]``.  A sign change of the miss
    proxy between consecutive members marks an ejection-collision orbit: it
    is located by bisection, inserted with the ``ejection_collision`` flag
    and starts a new phase.  Termination reasons are listed in
    ``TERMINATIONS``; ``period_blowup`` fires once the period exceeds
    ``period_factor`` times the seed's.
    """
    config = config or IntegratorConfig()
    direction = 1 if direction >= 0 else -1
    record = FamilyRecord([seed], [0], [{}])
    h = min(max(step, min_step), max_step)
    successes = 0
    phase = 0
    prev: PeriodicOrbit | None = None
    last = seed
    while True:
        if len(record.orbits) >= max_orbits:
            record.termination = "boundary"
            break
        C_next = last.jacobi_constant + direction * h
        at_end = False
        if c_end is not None and direction * (C_next - c_end) >= 0:
            if abs(last.jacobi_constant - c_end) < 1e-14:
                record.termination = "boundary"
                break
            C_next, at_end = c_end, True
        if prev is not None:
            slope = (last.x0 - prev.x0) / (last.jacobi_constant - prev.jacobi_constant)
            x_guess = last.x0 + slope * (C_next - last.jacobi_constant)
        else:
            x_guess = last.x0
        try:
            orbit = refine_symmetric_orbit(
                x_guess, seed.mu, last.period / 2, ydot0=last.ydot0, C=C_next,
                crossing=seed.crossing, config=config, stability=stability,
            )
            if abs(orbit.x0 - x_guess) > BRANCH_JUMP:
                raise ConvergenceError("jumped off the branch")
        except CollisionError as exc:
            if exc.index == 1:
                record.termination = "collision_m1"
                break
            raise
        except (ConvergenceError, NoCrossingError, DomainError, IntegrationError):
            h *= 0.5
            successes = 0
            if h < min_step:
                record.termination = "step_failure"
                break
            continue
        if (
            last.miss is not None
            and orbit.miss is not None
            and max(last.miss_distance, orbit.miss_distance) < config.collision_switch_radius
            and last.miss * orbit.miss < 0
        ):
            member = _bisect_collision(last, orbit, config)
            phase += 1
            if member is not None:
                record.orbits.append(member)
                record.phases.append(phase)
                record.flags.append({"ejection_collision": True, "miss_distance": member.miss_distance})
            if stop_on_collision:
                record.termination = "collision_m23"
                break
        record.orbits.append(orbit)
        record.phases.append(phase)
        record.flags.append({})
        prev, last = last, orbit
        if orbit.period > period_factor * seed.period:
            record.termination = "period_blowup"
            break
        if at_end:
            record.termination = "boundary"
            break
        successes += 1
        if successes >= 3:
            h = min(h * 1.3, max_step)
            successes = 0
    return record


# --------------------------------------------------------------------------
# ejection-collision orbits


def launch_momentum_angle(primary: int, launch_angle: float) -> float:
    """Direction of W at collision giving physical ejection along ``launch_angle``.

    Near ``w = u_i`` one has ``u - u_i ~ W^2 tau^2 / (2 u_i)``, so the
    physical direction is ``pi/2 + 2 arg W`` at m2 and ``-pi/2 + 2 arg W`` at
    m3.  For m3 the other root (``+ pi``) is chosen so that m3 data are the
    exact mirror image of m2 data.
    """
    if primary == 2:
        return 0.5 * (launch_angle - 0.5 * math.pi)
    if primary == 3:
        return 0.5 * (launch_angle + 0.5 * math.pi) + math.pi
    raise ValueError("primary must be 2 or 3")


def ejection_orbit(
    primary: int,
    C: float,
    launch_angle: float,
    horizon: float,
    mu: float,
    config: IntegratorConfig | None = None,
    dense: bool = False,
) -> EjectionCollisionOrbit:
    """Orbit ejected from m2 or m3, followed in the regularized chart.

    Starts exactly at ``w = u_i`` with ``|W|`` fixed by ``Hbar = 0``.
    ``horizon`` is a fictitious-time span; a negative value follows the
    orbit backwards (i.e. as a collision orbit).  Integration stops at the
    first return collision with m2 or m3, at m1, or on escape.
    """
    mu = check_mu(mu)
    if mu == 0.0:
        raise DomainError("ejection needs massive primaries m2, m3 (mu > 0)")
    start = collision_state(primary, C, mu, launch_momentum_angle(primary, launch_angle))
    traj = integrate_regularized(start, mu, horizon, config, stop_on_collision=True, dense=dense)
    collisions = [e for e in traj.events if e.kind in (EventKind.COLLISION_M2, EventKind.COLLISION_M3)]
    return EjectionCollisionOrbit(primary, launch_angle, C, mu, traj, collisions)


def detect_ejection_collision(orbit: PeriodicOrbit, config: IntegratorConfig | None = None) -> dict:
    """Flag primaries reached over one period ``[-T/2, T/2]``.

    m2/m3 are flagged when the closest approach is within ``collision_tol``
    (1e-9 by default), m1 when the run stops inside its stop radius.
    """
    config = config or IntegratorConfig()
    flags = {1: False, 2: False, 3: False}
    distances = {1: math.inf, 2: math.inf, 3: math.inf}
    state = orbit.initial_state()
    for horizon in (orbit.period / 2, -orbit.period / 2):
        traj = integrate_with_regularization(state, orbit.jacobi_constant, horizon, orbit.mu, config)
        if traj.status == "collision_m1":
            flags[1] = True
        for k in (1, 2, 3):
            distances[k] = min(distances[k], traj.min_distance(k))
    distances[1] = min(distances[1], orbit.min_distance_m1)
    flags[1] = flags[1] or distances[1] <= config.singularity_stop_radius
    for k in (2, 3):
        flags[k] = distances[k] <= config.collision_tol
    return {"flags": flags, "distances": distances}


def orbit_to_json(orbit: PeriodicOrbit) -> dict:
    return asdict(orbit)
