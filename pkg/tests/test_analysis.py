import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from r4bp.analysis import (
    ADMISSIBLE,
    FORBIDDEN,
    SINGULAR,
    cell_centers,
    find_equilibria,
    hill_admissible_u,
    hill_admissible_w,
    hill_function_u,
    hill_function_w,
    raster_hill,
    read_pgm,
    routh_expression,
    routh_interval,
    shared_levels,
)
from r4bp.dynamics import U1, U2, U3, synodic_rhs, translation
from r4bp.errors import DegenerateCaseError, DomainError
from r4bp.model import SynodicState
from r4bp.regularization import A1, A2, birkhoff_map

C1 = 3.35804


@pytest.fixture(scope="module")
def equilibria_third():
    return find_equilibria(1 / 3)


def test_shared_level(equilibria_third):
    near = [e for e in equilibria_third if abs(e.jacobi_constant - C1) <= 1e-3]
    assert len(near) >= 3
    assert any(n >= 3 and abs(c - C1) <= 1e-3 for c, n in shared_levels(equilibria_third))


def test_equilibria_reflection_symmetric(equilibria_third):
    pts = {(round(e.x, 8), round(e.y, 8)) for e in equilibria_third}
    assert {(x, round(-y, 8) + 0.0) for x, y in pts} == {(x, y + 0.0) for x, y in pts}


def test_equilibria_are_fixed_points(equilibria_third):
    for e in equilibria_third:
        assert np.max(np.abs(synodic_rhs(SynodicState(e.x, e.y, 0, 0), 1 / 3))) < 1e-9


def test_equilibria_sorted_and_counted(equilibria_third):
    Cs = [e.jacobi_constant for e in equilibria_third]
    assert Cs == sorted(Cs, reverse=True)
    assert len(equilibria_third) == 10
    assert len(find_equilibria(0.5)) == 5


def test_equilibria_degenerate_at_zero():
    with pytest.raises(DegenerateCaseError):
        find_equilibria(0.0)


def test_hill_u_limits():
    c = translation(0.2)
    for u in (U1, U2, U3):
        assert hill_admissible_u(u.real, u.imag, 100.0, 0.2)
        assert hill_admissible_u(u.real + 1e-8, u.imag, 100.0, 0.2)
    assert hill_admissible_u(50.0 - c, 0.0, 100.0, 0.2)


def test_hill_u_boundary_at_equilibrium(equilibria_third):
    c = translation(1 / 3)
    for e in equilibria_third:
        value = hill_function_u(e.x - c, e.y, e.jacobi_constant, 1 / 3)
        assert abs(value) < 1e-12


def test_hill_w_at_collision_point():
    for mu in (0.1, 1 / 3):
        for C in (0.0, 3.5, 100.0):
            assert hill_admissible_w(U2, C, mu)
            # |f'|^2 vanishes, leaving the regularized potential term 4 mu
            assert float(hill_function_w(U2, C, mu)) == pytest.approx(4 * mu, abs=1e-12)


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(2.5, 4.0))
def test_pushforward_consistency(x, y, C):
    w = complex(x, y)
    if min(abs(w), abs(w - A1), abs(w - A2), abs(w - U2), abs(w - U3)) < 1e-3:
        return
    u = birkhoff_map(w)
    hw = float(hill_function_w(w, C, 1 / 3))
    hu = float(hill_function_u(u.real, u.imag, C, 1 / 3))
    if abs(hu) < 1e-9:
        return
    assert (hw >= 0) == (hu >= 0)


def test_component_counts():
    box = (-2, 2, -2, 2)
    assert raster_hill("u", box, (512, 512), C1 + 0.2, 1 / 3).component_count() >= 2
    assert raster_hill("u", box, (512, 512), C1 - 0.2, 1 / 3).component_count() == 1


def test_raster_reflection_symmetry():
    r = raster_hill("u", (-2, 2, -1.5, 1.5), (101, 77), 3.2, 0.25)
    assert np.array_equal(r.bitmap, r.bitmap[::-1])


def test_w_raster_marks_singular_cells():
    r = raster_hill("w", (-2, 2, -2, 2), (512, 512), C1, 1 / 3)
    ys, xs = np.nonzero(r.bitmap == SINGULAR)
    xc = cell_centers(-2, 2, 512)
    yc = cell_centers(-2, 2, 512)[::-1]
    pts = [complex(xc[i], yc[j]) for j, i in zip(ys, xs)]
    for s in (0.0, A1, A2):
        assert min(abs(p - s) for p in pts) <= 4 / 512
    # a singular-only speck is not a region of its own
    assert r.component_count() == 3


def test_u_raster_marks_primaries():
    r = raster_hill("u", (-2, 2, -2, 2), (64, 64), 3.0, 0.2)
    assert np.count_nonzero(r.bitmap == SINGULAR) >= 3


def test_invalid_bounds_and_space():
    with pytest.raises(DomainError):
        raster_hill("u", (1, 0, 0, 1), (8, 8), 3.0, 0.2)
    with pytest.raises(DomainError):
        raster_hill("v", (0, 1, 0, 1), (8, 8), 3.0, 0.2)
    with pytest.raises(DomainError):
        raster_hill("u", (0, 1, 0, 1), (1, 8), 3.0, 0.2)


def test_pgm_round_trip_and_sidecar():
    r = raster_hill("w", (-1, 1, -1, 1), (2, 2), 3.0, 0.2)
    text = r.to_pgm()
    assert text.startswith("P2\n2 2\n2\n")
    assert np.array_equal(read_pgm(text), r.bitmap)
    side = json.loads(r.sidecar_json())
    assert side["resolution"] == [2, 2] and side["space"] == "w"
    assert set(np.unique(r.bitmap)) <= {FORBIDDEN, SINGULAR, ADMISSIBLE}


def test_cell_centers_symmetric():
    c = cell_centers(-2.0, 2.0, 512)
    assert np.array_equal(c, -c[::-1])
    assert c[0] == pytest.approx(-2 + 2 / 512)


def test_routh():
    mu_c = routh_interval()
    assert mu_c == pytest.approx(0.0190636, abs=1e-6)
    assert mu_c == pytest.approx((1 - 2 * math.sqrt(2) / 3) / 3, rel=1e-15)
    assert 3 * mu_c**2 - 2 * mu_c + 1 / 27 == pytest.approx(0.0, abs=1e-16)
    assert routh_expression(mu_c * 0.999) < 1 / 27 < routh_expression(mu_c * 1.001)
