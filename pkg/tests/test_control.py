import numpy as np
import pytest

from ucfas.control import (
    ControllerGains,
    TrackingController,
    altitude_law,
    control_step,
    lateral_chain,
    lateral_law,
    yaw_law,
)
from ucfas.errors import NearSingularError
from ucfas.fas_model import G_X, Box, InputConstraintSet, VirtualInputs, euler_matrix, g_X, virtual_to_physical
from ucfas.plant import ActuatorLimits, PlantState, QuadrotorParams, simulate
from ucfas.synthesis import ParametricDesign
from ucfas.trajectory import ConstantReference, SpiralSpec, constant_reference, spiral_reference

from conftest import random_interior_states

P = QuadrotorParams()
GAINS = ControllerGains.default()
A0 = np.array([20.0, 9.0])
A2 = np.array([1680.0, 1066.0, 251.0, 26.0])


def test_default_gains():
    np.testing.assert_allclose(GAINS.A0, A0, atol=1e-9)
    np.testing.assert_allclose(GAINS.A1, A0, atol=1e-9)
    np.testing.assert_allclose(GAINS.A2x, A2, atol=1e-9)
    np.testing.assert_allclose(GAINS.A2y, A2, atol=1e-9)


def test_gains_validation():
    with pytest.raises(ValueError):
        ControllerGains(A0=[1, 2, 3], A1=A0, A2x=A2, A2y=A2)
    with pytest.raises(ValueError):
        ControllerGains(A0=[np.nan, 1], A1=A0, A2x=A2, A2y=A2)


def test_altitude_law_examples():
    assert altitude_law(0.0, 0.0, constant_reference(), A0) == (9.8, 0.0, 0.0)
    u0, u0d, u0dd = altitude_law(0.0, 0.0, constant_reference(z=1.0), A0)
    assert (u0, u0d, u0dd) == pytest.approx((29.8, -180.0, 1220.0))


def test_altitude_law_zero_error_tracking_feedforward():
    ref = spiral_reference(3.0, SpiralSpec(climb_rate=0.5))
    u0, u0d, u0dd = altitude_law(ref.zref[0], ref.zref[1], ref, A0)
    assert u0 == pytest.approx(9.8 + ref.zref[2])
    assert u0d == pytest.approx(ref.zref[3], abs=1e-12)


def test_yaw_law_examples():
    ref0 = constant_reference()
    assert yaw_law(0.1, 0.0, ref0, A0) == pytest.approx(-2.0)
    assert yaw_law(0.0, 1.0, ref0, A0) == pytest.approx(-9.0)
    ref = constant_reference()
    ref.psiref[2] = 0.5
    assert yaw_law(0.0, 0.0, ref, A0) == 0.5


def test_lateral_law_examples():
    ref = constant_reference()
    chain = lateral_chain((0, 0), (0, 0), (0, 0, 0), (0, 0, 0), 9.8, 0.0)
    np.testing.assert_array_equal(lateral_law(chain, (0, 0, 0), (0, 0, 0), (9.8, 0, 0), 0.0, ref, A2, A2), [0, 0])
    chain = np.zeros((4, 2))
    chain[0, 0] = 1.0
    u2 = lateral_law(chain, (0, 0, 0), (0, 0, 0), (9.8, 0, 0), 0.0, ref, A2, A2)
    np.testing.assert_allclose(u2, [0.0, -1680 / 9.8], atol=1e-12)
    assert u2[1] == pytest.approx(-171.43, abs=5e-3)


def test_lateral_law_closes_the_loop(rng):
    ref = spiral_reference(2.0)
    for s in random_interior_states(rng, 100):
        u0c = altitude_law(s[2], s[5], ref, A0)
        ang = s[6:9]
        rates = euler_matrix(s[6], s[7]) @ s[9:12]
        u1 = yaw_law(s[8], rates[2], ref, A0)
        chain = lateral_chain(s[:2], s[3:5], ang, rates, u0c[0], u0c[1])
        u2 = lateral_law(chain, ang, rates, u0c, u1, ref, A2, A2)
        G, _ = G_X(ang, u0c[0])
        X4 = g_X(ang, rates, *u0c, u1) + G @ u2
        err = chain - ref.Xref[:4]
        residual = (X4 - ref.Xref[4]) + np.array([A2 @ err[:, 0], A2 @ err[:, 1]])
        scale = max(1.0, np.abs(X4).max())
        assert np.abs(residual).max() < 1e-8 * scale


def _modular(s, ref, gains):
    u0c = altitude_law(s[2], s[5], ref, gains.A0, P.g)
    ang = s[6:9]
    rates = euler_matrix(s[6], s[7]) @ s[9:12]
    u1 = yaw_law(s[8], rates[2], ref, gains.A1)
    chain = lateral_chain(s[:2], s[3:5], ang, rates, u0c[0], u0c[1])
    u2 = lateral_law(chain, ang, rates, u0c, u1, ref, gains.A2x, gains.A2y)
    v = VirtualInputs(*u0c, u1, (float(u2[0]), float(u2[1])))
    return virtual_to_physical(v, s, P), v


def test_fused_step_matches_modular_composition(rng):
    for k, s in enumerate(random_interior_states(rng, 300)):
        ref = spiral_reference(0.1 * k)
        phys, virt = control_step(s, ref, GAINS, P)
        mphys, mvirt = _modular(s, ref, GAINS)
        np.testing.assert_allclose(virt.as_array(), mvirt.as_array(), rtol=1e-10,
                                   atol=1e-10 * max(1.0, np.abs(mvirt.as_array()).max()))
        np.testing.assert_allclose(phys.as_array(), mphys.as_array(), rtol=1e-9,
                                   atol=1e-12 * max(1.0, np.abs(mphys.as_array()).max()))


def test_control_step_examples():
    phys, _ = control_step(PlantState(), constant_reference(), GAINS, P)
    assert phys.T == pytest.approx(6.125)
    np.testing.assert_allclose([phys.tau_phi, phys.tau_theta, phys.tau_psi], 0.0, atol=1e-15)
    phys, virt = control_step(PlantState(), constant_reference(z=1.0), GAINS, P)
    assert phys.T == pytest.approx(18.625)
    assert virt.u0 == pytest.approx(29.8)


def test_control_step_zero_thrust_is_near_singular():
    s = PlantState(z=9.8 / 20.0)
    with pytest.raises(NearSingularError):
        control_step(s, constant_reference(), GAINS, P)


def test_control_step_saturates_when_given_limits():
    phys, _ = control_step(PlantState(), constant_reference(z=10.0), GAINS, P, ActuatorLimits(T_max=20.0))
    assert phys.T == 20.0


def test_tracking_controller_hold_mode():
    ctl = TrackingController(ConstantReference(), GAINS, P, on_singular="hold")
    first = ctl(PlantState().as_array(), 0.0)
    held = ctl(PlantState(z=9.8 / 20.0).as_array(), 0.001)
    assert held.violations == ("infeasible",)
    np.testing.assert_array_equal(held.physical, first.physical)
    raising = TrackingController(ConstantReference(), GAINS, P)
    with pytest.raises(NearSingularError):
        raising(PlantState(z=9.8 / 20.0).as_array(), 0.0)


def test_tracking_controller_records_violations():
    tight = InputConstraintSet(u1=Box(-0.5, 0.5))
    ctl = TrackingController(ConstantReference(), GAINS, P, constraints=tight)
    cmd = ctl(PlantState(psi=1.0).as_array(), 0.0)
    assert "u1" in cmd.violations
    assert cmd.errors[1] == pytest.approx(1.0)


def test_u0_derivative_chain_matches_simulation():
    s0 = PlantState(z=-0.2, vz=0.1, x=0.1)
    ctl = TrackingController(ConstantReference(), GAINS, P)
    dt = 1e-3
    log = simulate(s0, ctl, ActuatorLimits(), P, 1.0, dt, hold="stage")
    u0, u0d, u0dd = log.virtual[:, 0], log.virtual[:, 1], log.virtual[:, 2]
    fd = (u0[2:] - u0[:-2]) / (2 * dt)
    # central-difference truncation is dt^2/6 times the third derivative
    third = np.abs(np.diff(u0dd) / dt).max()
    assert np.abs(fd - u0d[1:-1]).max() < dt**2 * third
    fd2 = (u0d[2:] - u0d[:-2]) / (2 * dt)
    assert np.abs(fd2 - u0dd[1:-1]).max() < 1e-2 * np.abs(u0dd).max()


def test_enlarging_actuator_box_does_not_change_interior_commands():
    ctl = TrackingController(lambda t: spiral_reference(t), GAINS, P)
    s0 = PlantState(x=0.5)
    a = simulate(s0, ctl, ActuatorLimits(), P, 1.0, 1e-3)
    b = simulate(s0, ctl, ActuatorLimits(-1e6, 1e6, -1e6, 1e6), P, 1.0, 1e-3)
    assert not a.saturated.any()
    np.testing.assert_array_equal(a.states, b.states)
    np.testing.assert_array_equal(a.inputs, b.inputs)


def test_from_designs_reproduces_default_rows():
    two = ParametricDesign.diagonal([1, 1], [-4, -5])
    four = ParametricDesign.diagonal([1, 1, 1, 1], [-5, -6, -7, -8])
    g = ControllerGains.from_designs(two, two, four, four)
    np.testing.assert_allclose(g.A2x, A2, atol=1e-9)
    np.testing.assert_allclose(g.A0, A0, atol=1e-9)
