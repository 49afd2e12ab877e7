"""Adaptive integration with event location and collision chart switching.

Steps are taken by scipy's embedded Dormand-Prince 8(5,3) pair.  After every
accepted step the event functions are evaluated; a sign change is refined on
the step's dense output by Brent's method.  :func:`integrate_with_regularization`
runs the synodic equations and hops into the regularized chart whenever the
particle comes within ``collision_switch_radius`` of m2 or m3.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np
from scipy.integrate import DOP853, OdeSolution
from scipy.optimize import brentq

from .dynamics import U1, U2, U3, make_synodic_rhs, translation
from .errors import DomainError, IntegrationError, SingularityError
from .model import GUARD_RADIUS, SynodicState, check_mu, jacobi_constant_array, primary_distances, primary_positions
from .regularization import (
    RegularizedState,
    ZERO_DERIVATIVE_RADIUS,
    angular_momentum_about,
    make_regularized_rhs,
    to_regularized,
    to_synodic,
)

EVENT_TIME_TOL = 1e-13
TAU_LIMIT = 1e7


class EventKind(str, Enum):
    COLLISION_M1 = "collision_m1"
    COLLISION_M2 = "collision_m2"
    COLLISION_M3 = "collision_m3"
    X_AXIS_CROSSING = "x_axis_crossing"
    ESCAPE = "escape"
    CHART_SWITCH = "chart_switch"
    SINGULARITY_STOP = "singularity_stop"


COLLISION_KINDS = {1: EventKind.COLLISION_M1, 2: EventKind.COLLISION_M2, 3: EventKind.COLLISION_M3}


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-12
    abs_tol: float = 1e-12
    max_step: float = math.inf
    max_steps: int = 1_000_000
    collision_switch_radius: float = 0.05
    singularity_stop_radius: float = 1e-3
    escape_radius: float = 20.0
    collision_tol: float = 1e-9

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol"):
            value = getattr(self, name)
            if not (1e-14 <= value <= 1e-3):
                raise DomainError(f"{name}={value!r} outside [1e-14, 1e-3]")
        if not self.max_step > 0:
            raise DomainError("max_step must be positive")
        if self.max_steps < 1:
            raise DomainError("max_steps must be at least 1")
        if not (self.collision_switch_radius > self.singularity_stop_radius > 0):
            raise DomainError("need collision_switch_radius > singularity_stop_radius > 0")


@dataclass
class Event:
    t: float
    kind: EventKind
    data: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"t": self.t, "kind": self.kind.value, "data": _jsonable(self.data)}


@dataclass(frozen=True)
class EventSpec:
    """Scalar event function ``g(t, y)`` watched during integration.

    ``direction`` filters sign changes along the integration progression:
    +1 for rising, -1 for falling, 0 for both.  ``kind`` makes the hit show up
    in the trajectory's event log; ``on_hit`` can post-process ``(t, y)``
    into event data (returning None drops the event).
    """

    name: str
    fn: Callable[[float, np.ndarray], float]
    terminal: bool | Callable[[float, np.ndarray], bool] = False
    direction: int = 0
    kind: EventKind | None = None
    on_hit: Callable[[float, np.ndarray], dict | None] | None = None


@dataclass(frozen=True)
class Approach:
    """Local minimum of the distance to a primary."""

    index: int
    t: float
    distance: float
    angular_momentum: float
    chart: str


@dataclass
class Trajectory:
    """Time-ordered samples with chart tags and an event log.

    ``states`` holds synodic ``(x, y, xdot, ydot)`` rows (NaN velocities at an
    exact regularized collision).  ``regularized`` holds ``(Re w, Im w, Re W,
    Im W)`` for samples taken in the regularized chart and NaN otherwise.
    Chart switches appear as an exit and an entry sample sharing one time.
    """

    t: np.ndarray
    states: np.ndarray
    charts: list
    regularized: np.ndarray
    tau: np.ndarray
    events: list = field(default_factory=list)
    status: str = "horizon"
    mu: float | None = None
    C: float | None = None
    approaches: list = field(default_factory=list)
    sol: OdeSolution | None = None

    def __len__(self) -> int:
        return len(self.t)

    @property
    def final_state(self) -> SynodicState:
        return SynodicState.from_array(self.states[-1][:4], self.t[-1])

    def events_of(self, kind: EventKind) -> list:
        return [e for e in self.events if e.kind == kind]

    def min_distance(self, index: int) -> float:
        """Closest recorded approach to primary ``index`` (inf if none)."""
        best = math.inf
        if self.mu is not None and self.states.shape[1] == 4:
            zk = primary_positions(self.mu).positions[index - 1]
            d = np.hypot(self.states[:, 0] - zk.real, self.states[:, 1] - zk.imag)
            if len(d):
                best = float(np.nanmin(d))
        for a in self.approaches:
            if a.index == index:
                best = min(best, a.distance)
        return best

    def jacobi(self) -> np.ndarray:
        if self.mu is None:
            return np.full(len(self.t), np.nan)
        states = self.states[:, :4]
        # samples sitting on a primary (collision points) have no finite C
        r = np.stack(primary_distances(states[:, 0], states[:, 1], self.mu))
        masses = np.asarray(primary_positions(self.mu).masses)[:, None]
        ok = np.all((r >= GUARD_RADIUS) | (masses == 0.0), axis=0) & np.all(np.isfinite(states), axis=1)
        out = np.full(len(self.t), np.nan)
        if ok.any():
            with np.errstate(all="ignore"):
                out[ok] = jacobi_constant_array(states[ok], self.mu)
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "chart", "x", "y", "xdot", "ydot", "C_instant"])
        cvals = self.jacobi()
        for k in range(len(self.t)):
            row = [self.t[k], *self.states[k][:4], cvals[k]]
            writer.writerow([_fmt(row[0]), self.charts[k]] + [_fmt(v) for v in row[1:]])
        return buf.getvalue()

    def events_json(self) -> str:
        return json.dumps([e.to_json() for e in self.events], indent=1)


def _fmt(value) -> str:
    return format(float(value), ".17g")


def _jsonable(obj):
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def parse_trajectory_csv(text: str) -> dict:
    """Parse CSV produced by :meth:`Trajectory.to_csv` into column arrays."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    cols: dict[str, list] = {h: [] for h in header}
    for row in reader:
        for h, v in zip(header, row):
            cols[h].append(v if h == "chart" else float(v))
    return {h: (v if h == "chart" else np.array(v)) for h, v in cols.items()}


def emit_trajectory_csv(columns: dict) -> str:
    """Inverse of :func:`parse_trajectory_csv`."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["t", "chart", "x", "y", "xdot", "ydot", "C_instant"]
    writer.writerow(header)
    for k in range(len(columns["t"])):
        writer.writerow([columns[h][k] if h == "chart" else _fmt(columns[h][k]) for h in header])
    return buf.getvalue()


# --------------------------------------------------------------------------
# single-chart propagation


@dataclass
class _Hit:
    spec: EventSpec
    s: float
    y: np.ndarray


@dataclass
class _Segment:
    s: list
    y: list
    hits: list
    status: str
    interpolants: list


def _propagate(fun, s0, y0, s_end, config: IntegratorConfig, specs, steps_left, dense=False, resume=()) -> _Segment:
    """Integrate one chart from s0 towards s_end, stopping on terminal events.

    ``status`` is "end", "terminal", "singularity" or "max_steps".  Events
    named in ``resume`` start at exactly zero so that the root a previous
    segment stopped on is not found again.
    """
    y0 = np.asarray(y0, dtype=float)
    seg = _Segment([s0], [y0.copy()], [], "end", [])
    if s0 == s_end:
        return seg
    solver = DOP853(fun, s0, y0, s_end, rtol=config.rel_tol, atol=config.abs_tol, max_step=config.max_step)
    g_old = [0.0 if spec.name in resume else spec.fn(s0, y0) for spec in specs]
    sign = 1.0 if s_end > s0 else -1.0
    steps = 0
    while solver.status == "running":
        if steps >= steps_left:
            seg.status = "max_steps"
            return seg
        s_prev = solver.t
        try:
            solver.step()
        except SingularityError:
            seg.status = "singularity"
            return seg
        steps += 1
        if solver.status == "failed":
            seg.status = "singularity"
            return seg
        s_new, y_new = solver.t, solver.y.copy()
        try:
            g_new = [spec.fn(s_new, y_new) for spec in specs]
        except SingularityError:
            seg.status = "singularity"
            return seg
        dense_fn = None
        found = []
        for spec, ga, gb in zip(specs, g_old, g_new):
            if ga == 0.0 or not (ga * gb <= 0.0):
                continue
            rising = gb > ga
            if spec.direction > 0 and not rising or spec.direction < 0 and rising:
                continue
            if dense_fn is None:
                dense_fn = solver.dense_output()
            s_hit = s_new if gb == 0.0 else _locate(spec.fn, dense_fn, s_prev, s_new, ga, gb)
            found.append(_Hit(spec, s_hit, y_new.copy() if s_hit == s_new else dense_fn(s_hit)))
        found.sort(key=lambda h: sign * h.s)
        stop = None
        for hit in found:
            seg.hits.append(hit)
            term = hit.spec.terminal
            if term(hit.s, hit.y) if callable(term) else term:
                stop = hit
                break
        if dense:
            seg.interpolants.append(dense_fn if dense_fn is not None else solver.dense_output())
        if stop is not None:
            seg.s.append(stop.s)
            seg.y.append(np.asarray(stop.y, dtype=float))
            seg.status = "terminal"
            return seg
        seg.s.append(s_new)
        seg.y.append(y_new)
        g_old = g_new
    return seg


def _locate(fn, dense_fn, s_a, s_b, ga, gb) -> float:
    try:
        return brentq(lambda s: fn(s, dense_fn(s)), s_a, s_b, xtol=EVENT_TIME_TOL, rtol=4 * np.finfo(float).eps)
    except ValueError:
        # interpolant endpoint rounding hid the sign change
        return s_a if abs(ga) < abs(gb) else s_b


def integrate(rhs, y0, horizon: float, config: IntegratorConfig | None = None, events=(), t0: float = 0.0, dense: bool = False) -> Trajectory:
    """Integrate ``rhs(t, y)`` from ``t0`` over ``horizon`` (may be negative).

    Hitting an unregularized singularity (a SingularityError from ``rhs`` or
    step-size underflow) ends the run cleanly with a ``singularity_stop``
    event.  Exceeding ``config.max_steps`` raises IntegrationError carrying
    the partial trajectory.
    """
    config = config or IntegratorConfig()
    specs = list(events)
    seg = _propagate(rhs, t0, y0, t0 + horizon, config, specs, config.max_steps, dense=dense)
    ts = np.array(seg.s)
    ys = np.array(seg.y)
    traj = Trajectory(
        t=ts,
        states=ys,
        charts=["synodic"] * len(ts),
        regularized=np.full((len(ts), 4), np.nan),
        tau=np.full(len(ts), np.nan),
    )
    for hit in seg.hits:
        if hit.spec.kind is None:
            continue
        data = hit.spec.on_hit(hit.s, hit.y) if hit.spec.on_hit else {"state": list(hit.y)}
        if data is not None:
            traj.events.append(Event(float(hit.s), hit.spec.kind, data))
    if seg.status == "terminal":
        traj.status = "terminated"
    elif seg.status == "singularity":
        traj.status = "singularity_stop"
        traj.events.append(Event(float(ts[-1]), EventKind.SINGULARITY_STOP, {"state": list(ys[-1])}))
    elif seg.status == "max_steps":
        traj.status = "max_steps"
        raise IntegrationError("max_steps exceeded", traj)
    if dense and seg.interpolants:
        traj.sol = OdeSolution(np.array(seg.s[: len(seg.interpolants) + 1]), seg.interpolants)
    return traj


# --------------------------------------------------------------------------
# two-chart propagation


class _Builder:
    def __init__(self, mu, C):
        self.mu, self.C = mu, C
        self.t, self.states, self.charts, self.reg, self.tau = [], [], [], [], []
        self.events, self.approaches = [], []

    def add_synodic(self, t, y):
        self.t.append(float(t))
        self.states.append(np.asarray(y[:4], dtype=float))
        self.charts.append("synodic")
        self.reg.append(np.full(4, np.nan))
        self.tau.append(np.nan)

    def add_regularized(self, tau, y):
        rs = RegularizedState.from_array(y, tau, self.C)
        self.t.append(float(y[4]))
        self.states.append(_synodic_or_nan(rs, self.mu))
        self.charts.append("regularized")
        self.reg.append(np.asarray(y[:4], dtype=float))
        self.tau.append(float(tau))

    def build(self, status) -> Trajectory:
        return Trajectory(
            t=np.array(self.t),
            states=np.array(self.states).reshape(-1, 4),
            charts=self.charts,
            regularized=np.array(self.reg).reshape(-1, 4),
            tau=np.array(self.tau),
            events=self.events,
            status=status,
            mu=self.mu,
            C=self.C,
            approaches=self.approaches,
        )


def _synodic_or_nan(rs: RegularizedState, mu) -> np.ndarray:
    if min(abs(rs.w - U2), abs(rs.w - U3)) < ZERO_DERIVATIVE_RADIUS:
        z = (0.5 * (rs.w - 0.25 / rs.w)) + translation(mu)
        return np.array([z.real, z.imag, np.nan, np.nan])
    return to_synodic(rs, mu).as_array()


def _synodic_specs(mu, config, sign, crossing_spec, enter):
    cfg = primary_positions(mu)
    specs = []
    (x1, y1), (x2, y2), (x3, y3) = ((z.real, z.imag) for z in cfg.positions)
    if mu < 0.5:
        specs.append(EventSpec("m1", lambda t, y: math.hypot(y[0] - x1, y[1] - y1) - config.singularity_stop_radius, True, -1))
    if enter:
        R = config.collision_switch_radius
        specs.append(EventSpec("enter", lambda t, y: min(math.hypot(y[0] - x2, y[1] - y2), math.hypot(y[0] - x3, y[1] - y3)) - R, True, -1))
    specs.append(EventSpec("escape", lambda t, y: math.hypot(y[0], y[1]) - config.escape_radius, True, 1))
    specs.append(crossing_spec)
    for k, (xk, yk) in enumerate(((x1, y1), (x2, y2), (x3, y3)), start=1):
        specs.append(
            EventSpec(f"approach{k}", lambda t, y, xk=xk, yk=yk: sign * ((y[0] - xk) * y[2] + (y[1] - yk) * y[3]), False, 1)
        )
    return specs


def _regularized_specs(mu, config, sign, t_end, fun, crossing_spec):
    c = translation(mu)
    R = config.collision_switch_radius

    def f(y):
        w = complex(y[0], y[1])
        return 0.5 * (w - 0.25 / w)

    specs = [
        EventSpec("exit", lambda s, y: min(abs(f(y) - U2), abs(f(y) - U3)) - R, True, 1),
        EventSpec("horizon", lambda s, y: sign * (y[4] - t_end), True, 1),
        EventSpec("escape", lambda s, y: abs(f(y) + c) - config.escape_radius, True, 1),
        crossing_spec,
    ]
    if mu < 0.5:
        specs.append(EventSpec("m1", lambda s, y: abs(f(y) - U1) - config.singularity_stop_radius, True, -1))
    for k, uk in ((2, U2), (3, U3)):

        def g(s, y, uk=uk):
            d = fun(s, y)
            return sign * ((y[0] - uk.real) * d[0] + (y[1] - uk.imag) * d[1])

        specs.append(EventSpec(f"approach{k}", g, False, 1))
    return specs


def integrate_with_regularization(
    state: SynodicState,
    C: float,
    horizon: float,
    mu: float,
    config: IntegratorConfig | None = None,
    stop_at_crossing: int | None = None,
    branch: str = "positive",
    regularize: bool = True,
) -> Trajectory:
    """Integrate in the synodic chart, regularizing near m2 and m3.

    Inside ``collision_switch_radius`` of m2 or m3 the flow continues in the
    regularized chart (fictitious time, physical time as a quadrature
    variable) and returns to the synodic chart once outside again.  Approach
    to m1 within ``singularity_stop_radius`` ends the run with a
    ``collision_m1`` event; ``|z| > escape_radius`` ends it with ``escape``.
    With ``stop_at_crossing=k`` the run also stops at the k-th x-axis
    crossing.  When ``mu == 0`` the outer primaries are massless and no
    switching is done; ``regularize=False`` disables it too, so the run ends
    with ``singularity_stop`` on a close approach to m2 or m3.
    """
    config = config or IntegratorConfig()
    mu = check_mu(mu)
    if horizon == 0:
        raise DomainError("horizon must be non-zero")
    sign = 1.0 if horizon > 0 else -1.0
    t_start = state.t
    t_end = state.t + horizon
    out = _Builder(mu, C)
    regularize = regularize and mu > 0.0
    syn_fun = make_synodic_rhs(mu)
    reg_fun = make_regularized_rhs(mu, C)
    crossings = [0]
    steps_left = config.max_steps
    stop_radius = config.singularity_stop_radius
    cfg = primary_positions(mu)

    def crossing_hit(t_phys, y_syn, extra=None):
        crossings[0] += 1
        data = {"state": list(y_syn[:4]), "count": crossings[0]}
        if extra:
            data.update(extra)
        out.events.append(Event(t_phys, EventKind.X_AXIS_CROSSING, data))
        return stop_at_crossing is not None and crossings[0] >= stop_at_crossing

    def near_outer(z: complex) -> bool:
        return regularize and min(abs(z - cfg.z2), abs(z - cfg.z3)) < config.collision_switch_radius

    chart = "regularized" if near_outer(state.z) else "synodic"
    y_syn = state.as_array()
    y_reg = None
    s_reg = 0.0
    status = None
    resume: tuple = ()
    t_now = t_start
    if abs(state.z - cfg.z1) < stop_radius and mu < 0.5:
        out.add_synodic(t_now, y_syn)
        out.events.append(Event(t_now, EventKind.COLLISION_M1, {"distance": abs(state.z - cfg.z1)}))
        return out.build("collision_m1")

    while status is None:
        if chart == "synodic":
            xspec = EventSpec("xaxis", lambda t, y: y[1], stop_at_crossing is not None, 0)
            specs = _synodic_specs(mu, config, sign, xspec, regularize)
            seg = _propagate(syn_fun, t_now, y_syn, t_end, config, specs, steps_left, resume=resume)
            resume = ()
            steps_left -= len(seg.s) - 1
            start = 1 if out.t else 0
            for s, y in zip(seg.s[start:], seg.y[start:]):
                out.add_synodic(s, y)
            stopped_on_crossing = False
            for hit in seg.hits:
                name = hit.spec.name
                if name.startswith("approach"):
                    k = int(name[-1])
                    zk = cfg.positions[k - 1]
                    d = math.hypot(hit.y[0] - zk.real, hit.y[1] - zk.imag)
                    L = (hit.y[0] - zk.real) * hit.y[3] - (hit.y[1] - zk.imag) * hit.y[2]
                    out.approaches.append(Approach(k, float(hit.s), float(d), float(L), "synodic"))
                    if d <= config.collision_tol:
                        out.events.append(Event(float(hit.s), COLLISION_KINDS[k], {"distance": d, "chart": "synodic"}))
                elif name == "xaxis":
                    if crossing_hit(float(hit.s), hit.y):
                        stopped_on_crossing = True
                        break
            t_now = seg.s[-1]
            y_syn = seg.y[-1]
            if stopped_on_crossing:
                status = "crossing"
            elif seg.status == "end":
                status = "horizon"
            elif seg.status == "singularity":
                out.events.append(Event(t_now, EventKind.SINGULARITY_STOP, {"state": list(y_syn)}))
                status = "singularity_stop"
            elif seg.status == "max_steps":
                raise IntegrationError("max_steps exceeded", out.build("max_steps"))
            else:
                name = seg.hits[-1].spec.name
                if name == "m1":
                    d = abs(complex(y_syn[0], y_syn[1]) - cfg.z1)
                    out.events.append(Event(t_now, EventKind.COLLISION_M1, {"distance": d, "state": list(y_syn)}))
                    status = "collision_m1"
                elif name == "escape":
                    out.events.append(Event(t_now, EventKind.ESCAPE, {"state": list(y_syn)}))
                    status = "escape"
                elif name == "xaxis":
                    resume = ("xaxis",)
                elif name == "enter":
                    syn = SynodicState.from_array(y_syn, t_now)
                    rs = to_regularized(syn, C, mu, branch=branch)
                    y_reg = rs.as_array()
                    s_reg = 0.0
                    out.events.append(Event(t_now, EventKind.CHART_SWITCH, {"to": "regularized", "branch": branch, "w": rs.w}))
                    out.add_regularized(s_reg, y_reg)
                    chart = "regularized"
        else:
            if y_reg is None:
                rs = to_regularized(SynodicState.from_array(y_syn, t_now), C, mu, branch=branch)
                y_reg = rs.as_array()
                s_reg = 0.0
                out.add_regularized(s_reg, y_reg)
            xspec = EventSpec("xaxis", lambda s, y: (0.5 * (complex(y[0], y[1]) - 0.25 / complex(y[0], y[1]))).imag, stop_at_crossing is not None, 0)
            specs = _regularized_specs(mu, config, sign, t_end, reg_fun, xspec)
            seg = _propagate(reg_fun, s_reg, y_reg, s_reg + sign * TAU_LIMIT, config, specs, steps_left, resume=resume)
            resume = ()
            steps_left -= len(seg.s) - 1
            for s, y in zip(seg.s[1:], seg.y[1:]):
                out.add_regularized(s, y)
            stopped_on_crossing = False
            for hit in seg.hits:
                name = hit.spec.name
                if name.startswith("approach"):
                    k = int(name[-1])
                    uk = U2 if k == 2 else U3
                    w, W = complex(hit.y[0], hit.y[1]), complex(hit.y[2], hit.y[3])
                    d = abs(w - uk) ** 2 / (2.0 * abs(w))
                    L = angular_momentum_about(w, W, k, mu)
                    out.approaches.append(Approach(k, float(hit.y[4]), float(d), float(L), "regularized"))
                    if d <= config.collision_tol:
                        out.events.append(
                            Event(float(hit.y[4]), COLLISION_KINDS[k], {"distance": d, "chart": "regularized", "w": w, "W": W, "tau": float(hit.s)})
                        )
                elif name == "xaxis":
                    y_s = _synodic_or_nan(RegularizedState.from_array(hit.y, hit.s, C), mu)
                    if crossing_hit(float(hit.y[4]), y_s):
                        stopped_on_crossing = True
                        break
            s_reg, y_reg = seg.s[-1], seg.y[-1]
            t_now = float(y_reg[4])
            if stopped_on_crossing:
                status = "crossing"
            elif seg.status == "singularity":
                out.events.append(Event(t_now, EventKind.SINGULARITY_STOP, {"w": complex(y_reg[0], y_reg[1])}))
                status = "singularity_stop"
            elif seg.status == "max_steps":
                raise IntegrationError("max_steps exceeded", out.build("max_steps"))
            elif seg.status == "end":
                raise IntegrationError("fictitious-time limit reached", out.build("max_steps"))
            else:
                name = seg.hits[-1].spec.name
                if name == "horizon":
                    status = "horizon"
                elif name == "m1":
                    out.events.append(Event(t_now, EventKind.COLLISION_M1, {"w": complex(y_reg[0], y_reg[1])}))
                    status = "collision_m1"
                elif name == "escape":
                    out.events.append(Event(t_now, EventKind.ESCAPE, {"w": complex(y_reg[0], y_reg[1])}))
                    status = "escape"
                elif name == "xaxis":
                    resume = ("xaxis",)
                elif name == "exit":
                    rs = RegularizedState.from_array(y_reg, s_reg, C)
                    y_syn = to_synodic(rs, mu).as_array()
                    out.events.append(Event(t_now, EventKind.CHART_SWITCH, {"to": "synodic"}))
                    out.add_synodic(t_now, y_syn)
                    y_reg = None
                    chart = "synodic"
    return out.build(status)



def integrate_regularized(
    state: RegularizedState,
    mu: float,
    tau_horizon: float,
    config: IntegratorConfig | None = None,
    stop_on_collision: bool = False,
    dense: bool = False,
) -> Trajectory:
    """Integrate the regularized flow alone over a fictitious-time horizon.

    No chart switching takes place.  Minima of the distance to m2/m3 are
    logged as approaches and, below ``config.collision_tol``, as collision
    events (terminal with ``stop_on_collision``).  Approach to m1 and escape
    end the run as in :func:`integrate_with_regularization`.
    """
    config = config or IntegratorConfig()
    mu = check_mu(mu)
    C = state.C
    sign = 1.0 if tau_horizon > 0 else -1.0
    fun = make_regularized_rhs(mu, C)
    c = translation(mu)
    tol = config.collision_tol

    def f(y):
        w = complex(y[0], y[1])
        return 0.5 * (w - 0.25 / w)

    specs = [
        EventSpec("escape", lambda s, y: abs(f(y) + c) - config.escape_radius, True, 1),
        EventSpec("xaxis", lambda s, y: f(y).imag, False, 0),
    ]
    if mu < 0.5:
        specs.append(EventSpec("m1", lambda s, y: abs(f(y) - U1) - config.singularity_stop_radius, True, -1))
    for k, uk in ((2, U2), (3, U3)):

        def g(s, y, uk=uk):
            d = fun(s, y)
            return sign * ((y[0] - uk.real) * d[0] + (y[1] - uk.imag) * d[1])

        def collided(s, y, uk=uk):
            w = complex(y[0], y[1])
            return stop_on_collision and abs(w - uk) ** 2 / (2.0 * abs(w)) <= tol

        specs.append(EventSpec(f"approach{k}", g, collided, 1))
    seg = _propagate(fun, state.tau, state.as_array(), state.tau + tau_horizon, config, specs, config.max_steps, dense=dense)
    out = _Builder(mu, C)
    for s, y in zip(seg.s, seg.y):
        out.add_regularized(s, y)
    for hit in seg.hits:
        name = hit.spec.name
        w, W = complex(hit.y[0], hit.y[1]), complex(hit.y[2], hit.y[3])
        t_hit = float(hit.y[4])
        if name.startswith("approach"):
            k = int(name[-1])
            uk = U2 if k == 2 else U3
            d = abs(w - uk) ** 2 / (2.0 * abs(w))
            out.approaches.append(Approach(k, t_hit, float(d), float(angular_momentum_about(w, W, k, mu)), "regularized"))
            if d <= tol:
                out.events.append(Event(t_hit, COLLISION_KINDS[k], {"distance": d, "chart": "regularized", "w": w, "W": W, "tau": float(hit.s)}))
        elif name == "xaxis":
            y_s = _synodic_or_nan(RegularizedState.from_array(hit.y, hit.s, C), mu)
            out.events.append(Event(t_hit, EventKind.X_AXIS_CROSSING, {"state": list(y_s), "tau": float(hit.s)}))
    status = "horizon"
    if seg.status == "terminal":
        name = seg.hits[-1].spec.name
        y = seg.y[-1]
        w = complex(y[0], y[1])
        if name == "escape":
            out.events.append(Event(float(y[4]), EventKind.ESCAPE, {"w": w}))
            status = "escape"
        elif name == "m1":
            out.events.append(Event(float(y[4]), EventKind.COLLISION_M1, {"w": w}))
            status = "collision_m1"
        else:
            status = "collision"
    elif seg.status == "singularity":
        out.events.append(Event(float(seg.y[-1][4]), EventKind.SINGULARITY_STOP, {"w": complex(seg.y[-1][0], seg.y[-1][1])}))
        status = "singularity_stop"
    elif seg.status == "max_steps":
        raise IntegrationError("max_steps exceeded", out.build("max_steps"))
    traj = out.build(status)
    if dense and seg.interpolants:
        traj.sol = OdeSolution(np.array(seg.s[: len(seg.interpolants) + 1]), seg.interpolants)
    return traj
