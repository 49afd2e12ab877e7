"""Physical setup of the equilateral restricted four-body problem.

Three primaries sit at the vertices of a unit equilateral triangle in the
synodic (rotating) frame.  Masses are ``mu1 = 1 - 2 mu`` on the positive
x-axis and ``mu2 = mu3 = mu`` placed symmetrically about it, so every
quantity here is a function of the single mass parameter ``mu`` in
``[0, 1/2]``.

Functions accept plain floats or numpy arrays for coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, InvalidSystemError, SingularityError

SQRT3 = math.sqrt(3.0)

#: Evaluations closer than this to a massive primary raise SingularityError.
GUARD_RADIUS = 1e-13

KEPLER_RTOL = 1e-12


def check_mu(mu: float) -> float:
    mu = float(mu)
    if not (0.0 <= mu <= 0.5) or math.isnan(mu):
        raise DomainError(f"mass parameter mu={mu!r} outside [0, 1/2]")
    return mu


@dataclass(frozen=True)
class MassParameter:
    """Normalized masses ``(1 - 2 mu, mu, mu)``."""

    mu: float

    def __post_init__(self):
        object.__setattr__(self, "mu", check_mu(self.mu))

    @property
    def mu1(self) -> float:
        return 1.0 - 2.0 * self.mu

    @property
    def mu2(self) -> float:
        return self.mu

    @property
    def mu3(self) -> float:
        return self.mu

    @property
    def masses(self) -> tuple[float, float, float]:
        return (self.mu1, self.mu2, self.mu3)


@dataclass(frozen=True)
class DimensionalSystem:
    """Dimensional constants of the physical problem.

    The mean motion is tied to the other constants by Kepler's third law,
    ``k2 * (m1 + m2 + m3) = n**2 * L**3``; construction fails otherwise.
    Use :meth:`from_kepler` to have ``n`` computed for you.
    """

    gravitational_constant_k2: float
    m1: float
    m2: float
    m3: float
    triangle_side_L: float
    mean_motion_n: float

    def __post_init__(self):
        values = {
            "k2": self.gravitational_constant_k2,
            "m1": self.m1,
            "m2": self.m2,
            "m3": self.m3,
            "L": self.triangle_side_L,
            "n": self.mean_motion_n,
        }
        for name, value in values.items():
            if not (value > 0.0) or not math.isfinite(value):
                raise InvalidSystemError(f"{name} must be positive and finite, got {value!r}")
        lhs = self.gravitational_constant_k2 * self.total_mass
        rhs = self.mean_motion_n**2 * self.triangle_side_L**3
        if abs(lhs - rhs) > KEPLER_RTOL * max(abs(lhs), abs(rhs)):
            raise InvalidSystemError(
                f"Kepler's third law violated: k2*M={lhs!r} but n^2*L^3={rhs!r}"
            )

    @classmethod
    def from_kepler(cls, k2: float, masses, L: float) -> "DimensionalSystem":
        m1, m2, m3 = masses
        if not (k2 > 0 and L > 0 and min(masses) > 0):
            raise InvalidSystemError("k2, L and masses must be positive")
        n = math.sqrt(k2 * (m1 + m2 + m3) / L**3)
        return cls(k2, m1, m2, m3, L, n)

    @property
    def total_mass(self) -> float:
        return self.m1 + self.m2 + self.m3

    @property
    def mass_parameter(self) -> MassParameter:
        if not math.isclose(self.m2, self.m3, rel_tol=1e-12):
            raise DomainError("only configurations with m2 == m3 are modeled")
        return MassParameter(self.m2 / self.total_mass)


@dataclass(frozen=True)
class SynodicState:
    """Position and velocity of the massless body in the rotating frame."""

    x: float
    y: float
    xdot: float
    ydot: float
    t: float = 0.0

    @classmethod
    def from_array(cls, arr, t: float = 0.0) -> "SynodicState":
        x, y, xd, yd = (float(v) for v in arr)
        return cls(x, y, xd, yd, float(t))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.xdot, self.ydot])

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    @property
    def zdot(self) -> complex:
        return complex(self.xdot, self.ydot)

    def reflected(self) -> "SynodicState":
        """Image under the time-reversing symmetry (x, -y, -xdot, ydot, -t)."""
        return SynodicState(self.x, -self.y, -self.xdot, self.ydot, -self.t)


@dataclass(frozen=True)
class PrimaryConfiguration:
    mu: float
    z1: complex
    z2: complex
    z3: complex

    @property
    def masses(self) -> tuple[float, float, float]:
        return (1.0 - 2.0 * self.mu, self.mu, self.mu)

    @property
    def positions(self) -> tuple[complex, complex, complex]:
        return (self.z1, self.z2, self.z3)

    @property
    def points(self) -> np.ndarray:
        """Positions as a (3, 2) array of coordinate pairs."""
        return np.array([[z.real, z.imag] for z in self.positions])


@lru_cache(maxsize=64)
def primary_positions(mu: float) -> PrimaryConfiguration:
    mu = check_mu(mu)
    xs = -SQRT3 * (1.0 - 2.0 * mu) / 2.0
    return PrimaryConfiguration(
        mu=mu,
        z1=complex(SQRT3 * mu, 0.0),
        z2=complex(xs, -0.5),
        z3=complex(xs, 0.5),
    )


def nondimensionalize(sys: DimensionalSystem, position, velocity, time: float = 0.0):
    """Scale a dimensional state to synodic units.

    Lengths are divided by the triangle side, time is multiplied by the mean
    motion, so velocities are divided by ``n * L``.

    Returns
    -------
    (SynodicState, MassParameter)
    """
    L, n = sys.triangle_side_L, sys.mean_motion_n
    x, y = position
    vx, vy = velocity
    state = SynodicState(x / L, y / L, vx / (n * L), vy / (n * L), n * time)
    return state, sys.mass_parameter


def dimensionalize(sys: DimensionalSystem, state: SynodicState):
    """Inverse of :func:`nondimensionalize`; returns (position, velocity, time)."""
    L, n = sys.triangle_side_L, sys.mean_motion_n
    position = (state.x * L, state.y * L)
    velocity = (state.xdot * n * L, state.ydot * n * L)
    return position, velocity, state.t / n


def _distances(x, y, mu):
    cfg = primary_positions(mu)
    out = []
    for k, zk in enumerate(cfg.positions, start=1):
        r = np.hypot(x - zk.real, y - zk.imag)
        if cfg.masses[k - 1] > 0.0 and np.any(r < GUARD_RADIUS):
            raise SingularityError(f"evaluation at primary m{k}", index=k)
        out.append(r)
    return out


def primary_distances(x, y, mu):
    """Distances (r1, r2, r3) to the primaries; no guard is applied."""
    cfg = primary_positions(mu)
    return tuple(np.hypot(x - zk.real, y - zk.imag) for zk in cfg.positions)


def gravitational_potential(x, y, mu):
    """``U = sum mu_i / r_i``; zero-mass primaries contribute nothing."""
    mu = check_mu(mu)
    r1, r2, r3 = _distances(x, y, mu)
    with np.errstate(divide="ignore"):
        # mu2 == mu3, grouped so that U(x, -y) == U(x, y) bit for bit
        u = (1.0 - 2.0 * mu) / r1 if mu < 0.5 else 0.0 * r1
        if mu > 0.0:
            u = u + mu * (1.0 / r2 + 1.0 / r3)
    return u


def effective_potential(x, y, mu):
    """Effective potential ``(x^2 + y^2)/2 + sum mu_i / r_i``."""
    return 0.5 * (x * x + y * y) + gravitational_potential(x, y, mu)


def effective_potential_gradient(x, y, mu):
    """Analytic gradient ``(Omega_x, Omega_y)``."""
    mu = check_mu(mu)
    cfg = primary_positions(mu)
    rs = _distances(x, y, mu)
    gx, gy = x, y
    for m, zk, r in zip(cfg.masses, cfg.positions, rs):
        if m == 0.0:
            continue
        r3 = r**3
        gx = gx - m * (x - zk.real) / r3
        gy = gy - m * (y - zk.imag) / r3
    return gx, gy


def effective_potential_hessian(x, y, mu):
    """Second derivatives ``(Omega_xx, Omega_xy, Omega_yy)``."""
    mu = check_mu(mu)
    cfg = primary_positions(mu)
    rs = _distances(x, y, mu)
    hxx = 1.0 + 0.0 * x
    hyy = 1.0 + 0.0 * y
    hxy = 0.0 * x
    for m, zk, r in zip(cfg.masses, cfg.positions, rs):
        if m == 0.0:
            continue
        dx, dy = x - zk.real, y - zk.imag
        r3, r5 = r**3, r**5
        hxx = hxx + m * (3.0 * dx * dx / r5 - 1.0 / r3)
        hyy = hyy + m * (3.0 * dy * dy / r5 - 1.0 / r3)
        hxy = hxy + m * 3.0 * dx * dy / r5
    return hxx, hxy, hyy


def jacobi_constant(state: SynodicState, mu: float) -> float:
    """Jacobi integral ``C = 2 Omega - |v|^2``."""
    omega = effective_potential(state.x, state.y, mu)
    return float(2.0 * omega - (state.xdot**2 + state.ydot**2))


def jacobi_constant_array(y, mu):
    """Jacobi constant of one (4,) state or of rows of an (N, 4) array."""
    y = np.asarray(y, dtype=float)
    omega = effective_potential(y[..., 0], y[..., 1], mu)
    return 2.0 * omega - (y[..., 2] ** 2 + y[..., 3] ** 2)


def speed_for_jacobi(x, y, C, mu):
    """Speed ``sqrt(2 Omega - C)`` of a state at (x, y) on level C."""
    v2 = 2.0 * effective_potential(x, y, mu) - C
    if v2 < 0.0:
        raise DomainError(f"({x}, {y}) is outside the Hill region of C={C}")
    return math.sqrt(v2)
