import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levinson2d import potential as pot
from levinson2d import radial, scattering
from levinson2d.errors import DomainError
from levinson2d.radial import ExpansionCoefficients

import oracles

PI = math.pi


def test_exterior_examples():
    assert scattering.exterior_log_derivative(2.0, 0.0, 1.0) == -1.5
    assert scattering.exterior_log_derivative(0.0, 0.0, 1.0) == 0.5
    v = scattering.exterior_log_derivative(1.0, -25.0, 1.0)
    assert v == pytest.approx(oracles.exterior_log_derivative(1.0, -25.0), rel=1e-12)
    assert abs(v + 5.0) < 0.2  # -kappa up to O(1/kappa)
    with pytest.raises(DomainError):
        scattering.exterior_log_derivative(1.0, 1.0, 1.0)


@pytest.mark.parametrize("nu", [0.0, 1.0, 2.0, 1.5])
def test_exterior_increasing_in_energy(nu):
    E = -np.geomspace(1e-4, 50.0, 60)[::-1]
    vals = [scattering.exterior_log_derivative(nu, e, 1.3) for e in E]
    assert np.all(np.diff(vals) > 0)


@pytest.mark.parametrize("nu", [0.0, 1.0, 2.0, 0.5])
def test_free_value_gives_zero_tangent(nu):
    for k in (1e-3, 0.3, 2.0):
        A_free = oracles.square_well_interior_A(0.0, nu, k * k)
        assert abs(scattering.tan_phase(A_free, k, 1.0, nu)) < 1e-12


@pytest.mark.parametrize("x0,nu", [(3.0, 0.0), (3.0, 1.0), (1.5, 2.0), (5.0, 3.0), (2.0, 1.118)])
def test_tan_phase_matches_square_well_oracle(x0, nu):
    k = 0.5
    A = oracles.square_well_interior_A(x0, nu, k * k)
    ref = oracles.square_well_tan_phase(x0, nu, k)
    assert scattering.tan_phase(A, k, 1.0, nu) == pytest.approx(ref, rel=1e-9)


def test_tan_phase_pole_is_signed_infinity():
    J, zJ, Y, zY = (float(v) for v in scattering.specfun.j_y_pair(1.0, 0.5))
    A_pole = (zY / Y + 0.5)  # denominator vanishes
    t = scattering.tan_phase(A_pole, 0.5, 1.0, 1.0)
    assert abs(t) > 1e12 or math.isinf(t)
    below = scattering.tan_phase(A_pole - 1e-6, 0.5, 1.0, 1.0)
    above = scattering.tan_phase(A_pole + 1e-6, 0.5, 1.0, 1.0)
    assert below * above < 0  # quadrant flips across the pole
    assert scattering.tan_phase(math.inf, 0.5, 1.0, 1.0) == pytest.approx(J / Y)
    with pytest.raises(DomainError):
        scattering.tan_phase(0.0, 0.0, 1.0, 1.0)


@pytest.mark.parametrize("m", [0, 1, 2, 3])
@pytest.mark.parametrize("x0", [1.0, 3.0, 4.5])
def test_phase_matches_oracle_mod_pi(m, x0):
    eta = scattering.phase_by_lambda_continuation(pot.SquareWell.from_x0(x0), m, 0.5)
    ref = math.atan(oracles.square_well_tan_phase(x0, m, 0.5))
    diff = (eta - ref + PI / 2) % PI - PI / 2
    assert abs(diff) < 1e-6


def test_zero_potential_gives_zero_phase():
    p = pot.square_well(4.0, coupling=0.0)
    for m in range(4):
        for k in (1e-3, 0.2, 3.0):
            assert scattering.phase_by_lambda_continuation(p, m, k) == 0.0


def test_phase_examples():
    assert scattering.phase_by_lambda_continuation(pot.SquareWell.from_x0(3.0), 1, 0.01) == pytest.approx(PI, abs=0.01)
    assert scattering.phase_by_lambda_continuation(pot.SquareWell.from_x0(1.0), 2, 0.01) == pytest.approx(0.0, abs=1e-3)


def test_lambda_trace_adjacent_steps():
    p = pot.SquareWell.from_x0(6.0)
    for k in (0.3, 1.0, 2.0):
        _, tr = scattering.phase_with_trace(p, 1, k)
        assert tr.lambdas[0] == 0.0 and tr.lambdas[-1] == 1.0
        assert tr.phases[0] == 0.0
        assert np.max(np.abs(np.diff(tr.phases))) < PI / 2


@pytest.mark.parametrize("m", [0, 1, 2])
def test_phase_non_decreasing_in_lambda(m):
    p = pot.SquareWell.from_x0(5.0)
    _, tr = scattering.phase_with_trace(p, m, 0.4)
    assert np.all(np.diff(tr.phases) >= -1e-9)


def test_phase_curve_csv():
    curve = scattering.phase_curve(pot.SquareWell.from_x0(3.0), 1, [0.01, 0.5, 2.0])
    text = curve.to_csv()
    lines = text.splitlines()
    assert lines[0] == "k,eta_rad,eta_over_pi,lambda_steps"
    assert len(lines) == 4 and text.endswith("\n")
    k, eta, over_pi, steps = lines[1].split(",")
    assert float(eta) / PI == pytest.approx(float(over_pi))
    assert int(steps) >= 16
    with pytest.raises(DomainError):
        scattering.phase_curve(pot.SquareWell.from_x0(3.0), 1, [0.5, 0.1])


def test_tail_offset():
    assert scattering.tail_offset(1, 1.0) == 0.0
    assert scattering.tail_offset(1, 2.0) == pytest.approx(-PI / 2)


# -- small-k forms ------------------------------------------------------------


@pytest.mark.parametrize("nu", [0.0, 1.0, 2.0, 0.5, 1.5])
def test_asymptotic_free_value_vanishes(nu):
    c = ExpansionCoefficients(A0=nu + 0.5, c2=0.0, radius=1.0)
    # only terms of relative order (k r0)^2 survive
    assert abs(scattering.asymptotic_tan_phase(c, 1e-3, 1.0, nu)) < 1e-5


def test_asymptotic_s_wave_logarithmic():
    c = ExpansionCoefficients(A0=-3.0, c2=0.2, radius=1.0)
    t = scattering.asymptotic_tan_phase(c, 1e-4, 1.0, 0.0)
    assert t < 0
    assert t == pytest.approx(PI / (2 * math.log(1e-4)), rel=0.15)


def test_asymptotic_real_form_domain():
    c = ExpansionCoefficients(A0=-1.0, c2=0.2, radius=1.0)
    with pytest.raises(DomainError):
        scattering.asymptotic_tan_phase(c, 1e-3, 1.0, 1.0, form="real")
    with pytest.raises(DomainError):
        scattering.asymptotic_tan_phase(c, 0.0, 1.0, 2.0)


def test_asymptotic_agrees_with_matching_m2():
    p = pot.SquareWell.from_x0(3.0)
    coeffs = radial.expansion_at_zero(p, 2.0)
    k = 1e-3
    exact = scattering.tan_phase(radial.integrate_interior(p, 2.0, k * k).A, k, 1.0, 2.0)
    approx = scattering.asymptotic_tan_phase(coeffs, k, 1.0, 2.0)
    assert approx == pytest.approx(exact, rel=0.05)


@pytest.mark.parametrize("x0,nu", [(3.0, 2.0), (3.0, 1.0), (2.0, 0.0), (1.0, 0.5), (2.0, 1.5)])
def test_asymptotic_error_shrinks(x0, nu):
    p = pot.SquareWell.from_x0(x0)
    coeffs = radial.expansion_at_zero(p, nu)

    def err(k):
        exact = scattering.tan_phase(radial.integrate_interior(p, nu, k * k).A, k, 1.0, nu)
        approx = scattering.asymptotic_tan_phase(coeffs, k, 1.0, nu)
        return abs(exact - approx) / abs(exact)

    e1, e2 = err(1e-2), err(1e-4)
    assert e2 < e1


# -- zero-momentum limit ------------------------------------------------------


@pytest.mark.parametrize("m", [0, 1, 2, 3])
def test_free_zero_momentum_phase(m):
    assert scattering.zero_momentum_phase(pot.square_well(1.0, coupling=0.0), m) == 0.0


def test_zero_momentum_examples():
    assert scattering.zero_momentum_phase(pot.SquareWell.from_x0(3.0), 1) == pytest.approx(PI)
    assert scattering.zero_momentum_phase(pot.SquareWell.from_x0(4.0), 0) == pytest.approx(2 * PI)


@pytest.mark.parametrize("x0", [0.5, 1.5, 2.0, 3.0, 3.5, 4.5, 5.0, 6.0])
@pytest.mark.parametrize("m", [0, 1, 2, 3])
def test_zero_momentum_integer_branch(x0, m):
    lim = scattering.zero_momentum_limit(pot.SquareWell.from_x0(x0), m)
    assert lim.snapped and not lim.critical
    assert lim.eta0 / PI == pytest.approx(oracles.square_well_count(x0, m))


def test_critical_p_wave_limit():
    lim = scattering.zero_momentum_limit(pot.SquareWell.from_x0(oracles.J01), 1)
    assert lim.critical
    assert lim.eta0 == pytest.approx(PI)


def test_weak_s_wave_binding_jump():
    # bound state at exponentially small energy; the jump happens far below k = 1e-5
    lim = scattering.zero_momentum_limit(pot.SquareWell.from_x0(0.05), 0)
    assert lim.eta0 == pytest.approx(PI)
    assert lim.tail_jump > 0.5 * PI
