"""Unregularized vector field and Hamiltonians.

The Hamiltonian in synodic coordinates is

    H = |P|^2 / 2 + Im(z conj(P)) - U(z),

with momenta ``p_x = xdot - y`` and ``p_y = ydot + x``; with this bridge
``H = -C / 2``.  Translating by ``z = u + c`` with ``c = sqrt(3) mu - sqrt(3)/2``
moves the primaries to ``u1 = sqrt(3)/2``, ``u2 = -i/2``, ``u3 = i/2``
without touching the momenta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import SingularityError
from .model import (
    GUARD_RADIUS,
    SQRT3,
    SynodicState,
    check_mu,
    effective_potential_gradient,
    gravitational_potential,
    primary_positions,
)

U1 = complex(SQRT3 / 2.0, 0.0)
U2 = complex(0.0, -0.5)
U3 = complex(0.0, 0.5)
U_PRIMARIES = (U1, U2, U3)


@lru_cache(maxsize=64)
def translation(mu: float) -> float:
    """Offset ``c`` with ``z = u + c``; computed once per mu."""
    return SQRT3 * check_mu(mu) - SQRT3 / 2.0


@dataclass(frozen=True)
class PhaseState:
    """Synodic position ``z`` and conjugate momentum ``P = p_x + i p_y``."""

    z: complex
    P: complex


@dataclass(frozen=True)
class UState:
    """Translated position ``u`` and its momentum ``U`` (equal to ``P``)."""

    u: complex
    U: complex


def to_phase(state: SynodicState) -> PhaseState:
    z = complex(state.x, state.y)
    # P = zdot + i z
    return PhaseState(z, complex(state.xdot - state.y, state.ydot + state.x))


def from_phase(phase: PhaseState, t: float = 0.0) -> SynodicState:
    z, P = phase.z, phase.P
    return SynodicState(z.real, z.imag, P.real + z.imag, P.imag - z.real, t)


def to_u(phase: PhaseState, mu: float) -> UState:
    return UState(phase.z - translation(mu), phase.P)


def from_u(ustate: UState, mu: float) -> PhaseState:
    return PhaseState(ustate.u + translation(mu), ustate.U)


def synodic_rhs(state: SynodicState, mu: float) -> np.ndarray:
    """Time derivative ``(xdot, ydot, Omega_x + 2 ydot, Omega_y - 2 xdot)``."""
    return make_synodic_rhs(mu)(state.t, state.as_array())


def make_synodic_rhs(mu: float):
    """Return ``fun(t, y)`` for the first-order synodic system.

    Scalar ``math`` code; this is the hot path of every integration.
    """
    mu = check_mu(mu)
    cfg = primary_positions(mu)
    terms = [
        (m, zk.real, zk.imag, k)
        for k, (m, zk) in enumerate(zip(cfg.masses, cfg.positions), start=1)
        if m > 0.0
    ]
    guard2 = GUARD_RADIUS**2

    def fun(t, y):
        x, yy, vx, vy = y
        ax = x + 2.0 * vy
        ay = yy - 2.0 * vx
        for m, px, py, k in terms:
            dx = x - px
            dy = yy - py
            r2 = dx * dx + dy * dy
            if r2 < guard2:
                raise SingularityError(f"collision with m{k}", index=k)
            inv3 = m / (r2 * math.sqrt(r2))
            ax -= dx * inv3
            ay -= dy * inv3
        return np.array([vx, vy, ax, ay])

    return fun


def hamiltonian(state: PhaseState, mu: float) -> float:
    z, P = state.z, state.P
    pot = gravitational_potential(z.real, z.imag, mu)
    return float(0.5 * abs(P) ** 2 + (z * P.conjugate()).imag - pot)


def hamiltonian_u(state: UState, mu: float) -> float:
    u, U = state.u, state.U
    z = u + translation(mu)
    return float(0.5 * abs(U) ** 2 + (z * U.conjugate()).imag - translated_potential(u, mu))


def translated_potential(u: complex, mu: float) -> float:
    """``V(u) = sum mu_i / |u - u_i|`` with the primaries at u1, u2, u3."""
    mu = check_mu(mu)
    masses = (1.0 - 2.0 * mu, mu, mu)
    r = [abs(u - uk) for uk in U_PRIMARIES]
    for k, (m, rk) in enumerate(zip(masses, r), start=1):
        if m > 0.0 and rk < GUARD_RADIUS:
            raise SingularityError(f"evaluation at primary m{k}", index=k)
    value = masses[0] / r[0] if masses[0] > 0.0 else 0.0
    if mu > 0.0:
        value += mu * (1.0 / r[1] + 1.0 / r[2])
    return value


def hamilton_equations(state: PhaseState, mu: float) -> tuple[complex, complex]:
    """``(dz/dt, dP/dt)`` derived from H.

    ``dz/dt = P - i z`` and ``dP/dt = -i P + grad U`` where the gradient is
    written as the complex number ``U_x + i U_y``.
    """
    z, P = state.z, state.P
    gx, gy = effective_potential_gradient(z.real, z.imag, mu)
    grad_u = complex(gx - z.real, gy - z.imag)
    return P - 1j * z, -1j * P + grad_u
