"""Simultaneous regularization of collisions with m2 and m3.

The point map ``u = f(w) = (w - 1/(4w)) / 2`` fixes both symmetric primaries
``u2 = -i/2`` and ``u3 = i/2`` and its derivative vanishes there.  It is
completed to a canonical map with ``U = W / conj(f'(w))`` and time is
rescaled by ``dt/dtau = |f'(w)|^2``.  On the energy level ``H = -C/2`` the
new Hamiltonian

    Hbar = |W|^2/2 + Im((f(w) + c) conj(f'(w) W)) - |f'|^2 V + |f'|^2 C/2

is regular at ``w = u2, u3``.  The m1 singularity reappears at the two
pre-images ``a1 = 1 + sqrt(3)/2`` and ``a2 = -1 + sqrt(3)/2`` of ``u1``, and
``w = 0`` is the image of infinity.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .dynamics import U1, U2, U3, UState, from_phase, from_u, to_phase, to_u, translation
from .errors import BranchError, PoleError, SingularityError, ZeroDerivativeError
from .model import GUARD_RADIUS, SQRT3, SynodicState, check_mu

A1 = 1.0 + SQRT3 / 2.0
A2 = -1.0 + SQRT3 / 2.0

#: Below this distance from u2/u3 the momentum map cannot be inverted.
ZERO_DERIVATIVE_RADIUS = 1e-12

#: Discriminant magnitude below which a pre-image is reported as double.
DOUBLE_ROOT_TOL = 1e-14

BRANCHES = ("positive", "negative")


@dataclass(frozen=True)
class RegularizedState:
    """Point of the regularized phase space on the level ``Hbar = 0``."""

    w: complex
    W: complex
    tau: float = 0.0
    t_physical: float = 0.0
    C: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.w.real, self.w.imag, self.W.real, self.W.imag, self.t_physical])

    @classmethod
    def from_array(cls, arr, tau: float, C: float) -> "RegularizedState":
        return cls(complex(arr[0], arr[1]), complex(arr[2], arr[3]), float(tau), float(arr[4]), C)


@dataclass(frozen=True)
class ChartTag:
    chart: str  # "synodic" or "regularized"
    branch: str | None = None


class Preimage(NamedTuple):
    root: complex
    multiplicity: int


def _check_pole(w: complex) -> None:
    if abs(w) < GUARD_RADIUS:
        raise PoleError("w = 0 is mapped to infinity")


def birkhoff_map(w: complex) -> complex:
    w = complex(w)
    _check_pole(w)
    return 0.5 * (w - 0.25 / w)


def birkhoff_derivative(w: complex) -> complex:
    """Factored derivative ``(w - u2)(w - u3) / (2 w^2)``."""
    w = complex(w)
    _check_pole(w)
    return (w - U2) * (w - U3) / (2.0 * w * w)


def birkhoff_derivative_direct(w: complex) -> complex:
    """Derivative in the unfactored form ``(1 + 1/(4 w^2)) / 2``."""
    w = complex(w)
    _check_pole(w)
    return 0.5 * (1.0 + 0.25 / (w * w))


def birkhoff_second_derivative(w: complex) -> complex:
    w = complex(w)
    _check_pole(w)
    return -0.25 / (w * w * w)


def momentum_transform(W: complex, w: complex) -> complex:
    """Synodic momentum ``U = W / conj(f'(w))``."""
    fs = birkhoff_derivative(w)
    if min(abs(w - U2), abs(w - U3)) < ZERO_DERIVATIVE_RADIUS or fs == 0:
        raise ZeroDerivativeError("f'(w) vanishes at a regularized collision")
    return complex(W) / fs.conjugate()


def inverse_momentum_transform(U: complex, w: complex) -> complex:
    """Regularized momentum ``W = conj(f'(w)) U``."""
    return birkhoff_derivative(w).conjugate() * complex(U)


def branch_label(w: complex, u: complex) -> str:
    """Label a pre-image by the sign of Re(w - u), ties by Im(w - u)."""
    d = complex(w) - complex(u)
    if d.real > 0 or (d.real == 0 and d.imag > 0):
        return "positive"
    return "negative"


def preimages(u: complex) -> list[Preimage]:
    """Roots of ``w^2 - 2 u w - 1/4``, i.e. all w with f(w) = u.

    Uses the cancellation-free form: the larger root first, the other from
    the product ``-1/4``.  Returns one double root when ``u`` is (within
    rounding) u2 or u3, otherwise two simple roots ordered
    ``positive``, ``negative`` per :func:`branch_label`.
    """
    u = complex(u)
    disc = u * u + 0.25
    if abs(disc) < DOUBLE_ROOT_TOL:
        # nearest of u2, u3; they are the only double roots
        return [Preimage(U2 if abs(u - U2) < abs(u - U3) else U3, 2)]
    s = cmath.sqrt(disc)
    if (u.conjugate() * s).real < 0:
        s = -s
    big = u + s
    small = -0.25 / big
    s_label = "positive" if (s.real > 0 or (s.real == 0 and s.imag > 0)) else "negative"
    if s_label == "positive":
        return [Preimage(big, 1), Preimage(small, 1)]
    return [Preimage(small, 1), Preimage(big, 1)]


def select_preimage(u: complex, branch: str = "positive", previous: complex | None = None) -> complex:
    """Pick one pre-image of ``u``.

    ``branch`` is ``"positive"``, ``"negative"`` or ``"continuous"``; the
    last selects the root nearest ``previous``.
    """
    roots = preimages(u)
    if len(roots) == 1:
        if branch not in BRANCHES + ("continuous",):
            raise BranchError(f"unknown branch {branch!r}")
        return roots[0].root
    if branch == "continuous":
        if previous is None:
            raise BranchError("continuous branch selection needs a previous w")
        return min((r.root for r in roots), key=lambda r: abs(r - previous))
    if branch == "positive":
        return roots[0].root
    if branch == "negative":
        return roots[1].root
    raise BranchError(f"unknown branch {branch!r}")


def _check_regular(w: complex, mu: float) -> None:
    _check_pole(w)
    if mu < 0.5 and (abs(w - A1) < GUARD_RADIUS or abs(w - A2) < GUARD_RADIUS):
        raise SingularityError("w is a pre-image of the primary m1", index=1)


def regularized_potential_term(w: complex, mu: float) -> float:
    """``|f'(w)|^2 V(f(w))`` in the closed form that is smooth at u2, u3."""
    mu = check_mu(mu)
    w = complex(w)
    _check_regular(w, mu)
    q2 = abs(w - U2) ** 2
    q3 = abs(w - U3) ** 2
    bracket = mu * (q2 + q3)
    if mu < 0.5:
        bracket += (1.0 - 2.0 * mu) * q2 * q3 / (abs(w - A1) * abs(w - A2))
    return bracket / (2.0 * abs(w) ** 3)


def _potential_term_and_gradient(w: complex, mu: float) -> tuple[float, complex]:
    """Closed-form term G and its gradient ``G_x + i G_y``.

    With ``s = 1/(2|w|^3)``, ``q_k = |w - u_k|^2``, ``R = 1/(|w-a1||w-a2|)``
    and ``B = (1-2mu) q2 q3 R + mu (q2 + q3)`` we have ``G = s B`` and, using
    ``grad |w - a|^p = p |w - a|^(p-2) (w - a)``:

        grad s  = -3/2 |w|^-5 w
        grad qk = 2 (w - uk)
        grad R  = -R ((w - a1)/|w - a1|^2 + (w - a2)/|w - a2|^2)
    """
    d2 = w - U2
    d3 = w - U3
    q2 = d2.real * d2.real + d2.imag * d2.imag
    q3 = d3.real * d3.real + d3.imag * d3.imag
    aw = abs(w)
    s = 0.5 / aw**3
    grad_s = -1.5 * w / aw**5
    b = mu * (q2 + q3)
    grad_b = mu * 2.0 * (d2 + d3)
    m1 = 1.0 - 2.0 * mu
    if m1 > 0.0:
        e1 = w - A1
        e2 = w - A2
        n1 = e1.real * e1.real + e1.imag * e1.imag
        n2 = e2.real * e2.real + e2.imag * e2.imag
        R = 1.0 / math.sqrt(n1 * n2)
        grad_r = -R * (e1 / n1 + e2 / n2)
        b += m1 * q2 * q3 * R
        grad_b += m1 * (2.0 * d2 * q3 * R + 2.0 * d3 * q2 * R + q2 * q3 * grad_r)
    return s * b, grad_s * b + s * grad_b


def regularized_hamiltonian(state: RegularizedState, mu: float) -> float:
    mu = check_mu(mu)
    w, W = complex(state.w), complex(state.W)
    _check_regular(w, mu)
    f = 0.5 * (w - 0.25 / w)
    fs = birkhoff_derivative(w)
    fs2 = abs(fs) ** 2
    coupling = ((f + translation(mu)) * (fs * W).conjugate()).imag
    return float(
        0.5 * abs(W) ** 2 + coupling - regularized_potential_term(w, mu) + 0.5 * state.C * fs2
    )


def _vector_field(w: complex, W: complex, mu: float, C: float, c: float):
    """Hamilton's equations of Hbar in complex form.

    dw/dtau = 2 dHbar/dconj(W) = W - i g,  g = (f + c) conj(f')
    dW/dtau = -2 dHbar/dconj(w)
            = i (conj(W) (f + c) conj(f'') - W |f'|^2) + grad G - C f' conj(f'')
    """
    inv = 1.0 / w
    f = 0.5 * (w - 0.25 * inv)
    fs = 0.5 * (1.0 + 0.25 * inv * inv)
    fss = -0.25 * inv * inv * inv
    fs2 = fs.real * fs.real + fs.imag * fs.imag
    fc = f + c
    fs_c = fs.conjugate()
    fss_c = fss.conjugate()
    _, grad_g = _potential_term_and_gradient(w, mu)
    dw = W - 1j * fc * fs_c
    dW = 1j * (W.conjugate() * fc * fss_c - W * fs2) + grad_g - C * fs * fss_c
    return dw, dW, fs2


def regularized_rhs(state: RegularizedState, mu: float) -> tuple[complex, complex, float]:
    """``(dw/dtau, dW/dtau, dt/dtau)`` at a regular point."""
    mu = check_mu(mu)
    w = complex(state.w)
    _check_regular(w, mu)
    return _vector_field(w, complex(state.W), mu, state.C, translation(mu))


def make_regularized_rhs(mu: float, C: float):
    """Return ``fun(tau, y)`` for ``y = (Re w, Im w, Re W, Im W, t)``."""
    mu = check_mu(mu)
    c = translation(mu)
    guard_a = mu < 0.5

    def fun(tau, y):
        w = complex(y[0], y[1])
        if abs(w) < GUARD_RADIUS:
            raise PoleError("regularized trajectory reached w = 0")
        if guard_a and (abs(w - A1) < GUARD_RADIUS or abs(w - A2) < GUARD_RADIUS):
            raise SingularityError("regularized trajectory reached m1", index=1)
        dw, dW, dt = _vector_field(w, complex(y[2], y[3]), mu, C, c)
        return np.array([dw.real, dw.imag, dW.real, dW.imag, dt])

    return fun


def to_regularized(
    state: SynodicState,
    C: float,
    mu: float,
    branch: str = "positive",
    previous: complex | None = None,
) -> RegularizedState:
    """Map a synodic state to the regularized chart on level ``C``."""
    mu = check_mu(mu)
    phase = to_phase(state)
    us = to_u(phase, mu)
    if abs(us.u - U1) < GUARD_RADIUS:
        raise SingularityError("both pre-images of u1 are singular", index=1)
    for k, uk in ((2, U2), (3, U3)):
        if abs(us.u - uk) < GUARD_RADIUS:
            raise SingularityError(f"state is at collision with m{k}", index=k)
    w = select_preimage(us.u, branch, previous)
    W = inverse_momentum_transform(us.U, w)
    return RegularizedState(w, W, 0.0, state.t, C)


def to_synodic(state: RegularizedState, mu: float) -> SynodicState:
    """Map back to the synodic chart; physical time is carried over."""
    mu = check_mu(mu)
    w = complex(state.w)
    u = birkhoff_map(w)
    U = momentum_transform(state.W, w)
    return from_phase(from_u(UState(u, U), mu), state.t_physical)


def synodic_position(w: complex, mu: float) -> complex:
    return birkhoff_map(w) + translation(mu)


def collision_state(index: int, C: float, mu: float, angle: float = 0.0, t: float = 0.0) -> RegularizedState:
    """State at ``w = u_index`` with the momentum fixed by ``Hbar = 0``.

    At a collision point f' vanishes, so only ``|W|^2/2 - G(u_i)`` survives
    and ``|W| = sqrt(2 G(u_i))``; ``angle`` is the direction of W.
    """
    if index not in (2, 3):
        raise ValueError("only collisions with m2 or m3 are regularized")
    w = U2 if index == 2 else U3
    modulus = math.sqrt(2.0 * regularized_potential_term(w, mu))
    return RegularizedState(w, cmath.rect(modulus, angle), 0.0, t, C)


def angular_momentum_about(w: complex, W: complex, index: int, mu: float) -> float:
    """Angular momentum ``Im(conj(u - u_i) zdot)`` about m2 or m3.

    Uses ``conj(u - u_i) U = conj((w - u_i) w / (w - u_j)) W`` so the result
    stays finite through the collision.
    """
    ui, uj = (U2, U3) if index == 2 else (U3, U2)
    u = birkhoff_map(w)
    z = u + translation(mu)
    k = (w - ui) * w / (w - uj)
    return (k.conjugate() * W).imag - ((u - ui).conjugate() * z).real


def with_time(state: RegularizedState, tau: float, t_physical: float) -> RegularizedState:
    return replace(state, tau=tau, t_physical=t_physical)
