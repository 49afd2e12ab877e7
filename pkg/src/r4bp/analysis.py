"""Equilibria, Hill regions in u- and w-space, and the Routh mass bound."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .dynamics import U1, U2, U3, translation
from .errors import DegenerateCaseError, DomainError
from .model import check_mu, effective_potential, primary_positions
from .regularization import A1, A2

FORBIDDEN, SINGULAR, ADMISSIBLE = 0, 1, 2
SINGULAR_RADIUS = 1e-6

#: Damped-Newton settings for the equilibrium search.
SEED_BOX = 2.0
MAX_NEWTON = 100
MAX_HALVINGS = 50
EQUILIBRIUM_TOL = 1e-10
DEDUP_TOL = 1e-8


@dataclass(frozen=True)
class Equilibrium:
    x: float
    y: float
    jacobi_constant: float
    gradient_norm: float

    def to_json(self) -> dict:
        return {"x": self.x, "y": self.y, "C": self.jacobi_constant, "gradient_norm": self.gradient_norm}


def _grad_hess(x, y, mu):
    cfg = primary_positions(mu)
    gx, gy = x.copy(), y.copy()
    hxx = np.ones_like(x)
    hyy = np.ones_like(x)
    hxy = np.zeros_like(x)
    for m, zk in zip(cfg.masses, cfg.positions):
        if m == 0.0:
            continue
        dx, dy = x - zk.real, y - zk.imag
        r2 = dx * dx + dy * dy
        r3 = r2 * np.sqrt(r2)
        r5 = r3 * r2
        gx -= m * dx / r3
        gy -= m * dy / r3
        hxx += m * (3.0 * dx * dx / r5 - 1.0 / r3)
        hyy += m * (3.0 * dy * dy / r5 - 1.0 / r3)
        hxy += m * 3.0 * dx * dy / r5
    return gx, gy, hxx, hxy, hyy


def _newton_step(x, y, mu):
    gx, gy, hxx, hxy, hyy = _grad_hess(x, y, mu)
    det = hxx * hyy - hxy * hxy
    sx = -(hyy * gx - hxy * gy) / det
    sy = -(-hxy * gx + hxx * gy) / det
    return np.hypot(gx, gy), sx, sy


def find_equilibria(mu: float, seed_density: int = 50) -> list[Equilibrium]:
    """Critical points of the effective potential, sorted by C descending.

    Damped Newton iteration on the gradient from a ``seed_density`` square
    grid over [-2, 2]^2; the step is halved (at most 50 times) until the
    gradient norm decreases.
    """
    mu = check_mu(mu)
    if mu == 0.0:
        raise DegenerateCaseError("mu = 0: the critical set is the unit circle")
    grid = np.linspace(-SEED_BOX, SEED_BOX, seed_density)
    x, y = (a.ravel().copy() for a in np.meshgrid(grid, grid))
    active = np.ones(x.size, dtype=bool)
    with np.errstate(all="ignore"):
        for _ in range(MAX_NEWTON):
            idx = np.flatnonzero(active)
            if idx.size == 0:
                break
            xa, ya = x[idx], y[idx]
            g, sx, sy = _newton_step(xa, ya, mu)
            lam = np.ones(idx.size)
            pending = np.isfinite(sx) & np.isfinite(sy) & (g > 1e-14)
            for _ in range(MAX_HALVINGS):
                if not pending.any():
                    break
                gn = _newton_step(xa + lam * sx, ya + lam * sy, mu)[0]
                ok = np.isfinite(gn) & (gn < g)
                pending &= ~ok
                lam[pending] *= 0.5
            moved = np.isfinite(sx) & np.isfinite(sy) & ~pending
            x[idx[moved]] += lam[moved] * sx[moved]
            y[idx[moved]] += lam[moved] * sy[moved]
            # a seed stops when it has converged or can no longer descend
            active[idx[~moved | (g <= 1e-14)]] = False
        g = _newton_step(x, y, mu)[0]
    found: list[Equilibrium] = []
    for xi, yi, gi in zip(x, y, g):
        if not (np.isfinite(gi) and gi <= EQUILIBRIUM_TOL and max(abs(xi), abs(yi)) < 10.0):
            continue
        if any(math.hypot(xi - e.x, yi - e.y) < DEDUP_TOL for e in found):
            continue
        C = 2.0 * float(effective_potential(xi, yi, mu))
        found.append(Equilibrium(float(xi), float(yi), C, float(gi)))
    found.sort(key=lambda e: (-e.jacobi_constant, e.x, e.y))
    return found


def shared_levels(equilibria, tol: float = 1e-6) -> list[tuple[float, int]]:
    """Group equilibria by Jacobi constant; returns (level, count) pairs."""
    groups: list[list[float]] = []
    for e in equilibria:
        for grp in groups:
            if abs(grp[0] - e.jacobi_constant) <= tol:
                grp.append(e.jacobi_constant)
                break
        else:
            groups.append([e.jacobi_constant])
    return [(float(np.mean(g)), len(g)) for g in groups]


# --------------------------------------------------------------------------
# Hill regions


def hill_function_u(x, y, C, mu):
    """``2 Omega - C`` at translated coordinates ``u = x + i y`` (array-safe)."""
    mu = check_mu(mu)
    c = translation(mu)
    with np.errstate(divide="ignore"):
        return 2.0 * _omega_unguarded(np.asarray(x, dtype=float) + c, np.asarray(y, dtype=float), mu) - C


def _omega_unguarded(x, y, mu):
    cfg = primary_positions(mu)
    r1, r2, r3 = (np.hypot(x - z.real, y - z.imag) for z in cfg.positions)
    value = 0.5 * (x * x + y * y)
    if mu < 0.5:
        value = value + (1.0 - 2.0 * mu) / r1
    if mu > 0.0:
        value = value + mu * (1.0 / r2 + 1.0 / r3)
    return value


def _potential_term_array(w, mu):
    q2 = np.abs(w - U2) ** 2
    q3 = np.abs(w - U3) ** 2
    bracket = mu * (q2 + q3)
    if mu < 0.5:
        bracket = bracket + (1.0 - 2.0 * mu) * q2 * q3 / (np.abs(w - A1) * np.abs(w - A2))
    return bracket / (2.0 * np.abs(w) ** 3)


def hill_function_w(w, C, mu):
    """Left-hand side of the regularized Hill inequality (array-safe).

    ``|f'|^2 |f(w) + c|^2 / 2 + |f'|^2 V - |f'|^2 C / 2``, which equals
    ``|f'(w)|^2 (Omega - C/2)`` at the image point.
    """
    mu = check_mu(mu)
    w = np.asarray(w, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        f = 0.5 * (w - 0.25 / w)
        fs2 = np.abs(0.5 * (1.0 + 0.25 / (w * w))) ** 2
        z = f + translation(mu)
        return 0.5 * fs2 * np.abs(z) ** 2 + _potential_term_array(w, mu) - 0.5 * fs2 * C


def _u_singular(u):
    return min(abs(u - U1), abs(u - U2), abs(u - U3)) < SINGULAR_RADIUS


def _w_singular(w):
    return min(abs(w), abs(w - A1), abs(w - A2)) < SINGULAR_RADIUS


def hill_admissible_u(x, y, C, mu) -> bool:
    """Whether ``2 Omega(u) >= C``; primaries count as admissible."""
    if _u_singular(complex(x, y)):
        return True
    return bool(hill_function_u(x, y, C, mu) >= 0.0)


def hill_admissible_w(w, C, mu) -> bool:
    """Regularized Hill test; the artificial singularities count as admissible."""
    w = complex(w)
    if _w_singular(w):
        return True
    return bool(hill_function_w(w, C, mu) >= 0.0)


@dataclass
class HillRaster:
    """Cell-centre classification of a window.

    ``bitmap[j, i]`` uses image orientation: row 0 is the top (``ymax``).
    """

    bounds: tuple[float, float, float, float]
    resolution: tuple[int, int]
    space: str
    C: float
    mu: float
    bitmap: np.ndarray

    @property
    def admissible(self) -> np.ndarray:
        return self.bitmap == ADMISSIBLE

    def component_count(self) -> int:
        """Connected components of the accessible set (4-connectivity).

        Singular cells join the admissible cells around them; a component
        made of singular marker cells only is not counted.
        """
        labels, n = ndimage.label(self.bitmap != FORBIDDEN)
        if n == 0:
            return 0
        has_admissible = ndimage.maximum(self.bitmap == ADMISSIBLE, labels, np.arange(1, n + 1))
        return int(np.count_nonzero(has_admissible))

    def to_pgm(self) -> str:
        ny, nx = self.bitmap.shape
        lines = ["P2", f"{nx} {ny}", "2"]
        lines += [" ".join(str(int(v)) for v in row) for row in self.bitmap]
        return "\n".join(lines) + "\n"

    def sidecar(self) -> dict:
        return {
            "bounds": list(self.bounds),
            "resolution": list(self.resolution),
            "space": self.space,
            "C": self.C,
            "mu": self.mu,
            "values": {"0": "forbidden", "1": "singular", "2": "admissible"},
            "orientation": "row 0 is ymax",
        }

    def sidecar_json(self) -> str:
        return json.dumps(self.sidecar(), indent=1)


def read_pgm(text: str) -> np.ndarray:
    tokens = [t for line in text.splitlines() if not line.startswith("#") for t in line.split()]
    if tokens[0] != "P2":
        raise ValueError("not a plain PGM file")
    nx, ny = int(tokens[1]), int(tokens[2])
    return np.array([int(t) for t in tokens[4:]], dtype=np.uint8).reshape(ny, nx)


def cell_centers(lo: float, hi: float, n: int) -> np.ndarray:
    # (2k + 1 - n) is antisymmetric in k, so symmetric windows give exactly
    # mirrored centres
    k = np.arange(n)
    return (2.0 * k + 1.0 - n) / (2.0 * n) * (hi - lo) + 0.5 * (lo + hi)


def raster_hill(space: str, bounds, resolution, C: float, mu: float) -> HillRaster:
    """Classify every cell of a window as forbidden, singular or admissible.

    Cells are tested at their centres; a cell containing a primary (u-space)
    or one of 0, a1, a2 (w-space) is tagged singular.
    """
    mu = check_mu(mu)
    if space not in ("u", "w"):
        raise DomainError(f"space must be 'u' or 'w', got {space!r}")
    xmin, xmax, ymin, ymax = (float(b) for b in bounds)
    if not (xmin < xmax and ymin < ymax) or not all(map(math.isfinite, (xmin, xmax, ymin, ymax))):
        raise DomainError(f"invalid bounds {bounds!r}")
    nx, ny = (int(r) for r in resolution)
    if nx < 2 or ny < 2:
        raise DomainError("resolution must be at least 2 x 2")
    xs = cell_centers(xmin, xmax, nx)
    ys = cell_centers(ymin, ymax, ny)[::-1]
    X, Y = np.meshgrid(xs, ys)
    P = X + 1j * Y
    if space == "u":
        value = hill_function_u(X, Y, C, mu)
        singular_pts = (U1, U2, U3)
    else:
        value = hill_function_w(P, C, mu)
        singular_pts = (0.0, A1, A2)
    singular = np.zeros(P.shape, dtype=bool)
    hx = 0.5 * (xmax - xmin) / nx
    hy = 0.5 * (ymax - ymin) / ny
    for s in singular_pts:
        s = complex(s)
        # every cell whose closed extent holds the point (up to 4 on an edge)
        singular |= (np.abs(X - s.real) <= hx) & (np.abs(Y - s.imag) <= hy)
    bitmap = np.where(value >= 0.0, ADMISSIBLE, FORBIDDEN).astype(np.uint8)
    bitmap[singular] = SINGULAR
    return HillRaster((xmin, xmax, ymin, ymax), (nx, ny), space, float(C), mu, bitmap)


# --------------------------------------------------------------------------
# Routh criterion


def routh_expression(mu: float) -> float:
    """``(m1 m2 + m2 m3 + m3 m1) / (m1 + m2 + m3)`` with masses (1-2mu, mu, mu)."""
    m1 = 1.0 - 2.0 * mu
    return m1 * mu + mu * mu + mu * m1


def routh_interval() -> float:
    """Upper end of the mass interval ``[0, mu_c)`` satisfying Routh's criterion.

    Smaller root of ``3 mu^2 - 2 mu + 1/27 = 0``.
    """
    return (1.0 - 2.0 * math.sqrt(2.0) / 3.0) / 3.0
