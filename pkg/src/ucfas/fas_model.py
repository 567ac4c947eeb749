"""Exact input transformations that turn the quadrotor into a chain of fully actuated subsystems.

Altitude becomes ``z'' = u0 - g``, yaw ``psi'' = u1`` and the horizontal
position ``X = (x, y)`` a fourth-order system
``X'''' = g_X(...) + G_X(...) u2``. Everything here is closed-form scalar
trigonometry; the finite-difference checks live in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import NearSingularError
from .plant import PhysicalInput, QuadrotorParams, check_interior

# |det G_X| below this is treated as loss of full actuation.
DET_G_TOL = 1e-9


@dataclass(frozen=True)
class VirtualInputs:
    u0: float
    u0_dot: float
    u0_ddot: float
    u1: float
    u2: tuple[float, float]

    def as_array(self) -> NDArray[np.float64]:
        return np.array([self.u0, self.u0_dot, self.u0_ddot, self.u1, self.u2[0], self.u2[1]])

    @property
    def u_bar(self) -> NDArray[np.float64]:
        """The attitude-acceleration input ``[u2_1, u2_2, u1]``."""
        return np.array([self.u2[0], self.u2[1], self.u1])


@dataclass(frozen=True)
class GammaRows:
    x: NDArray[np.float64]
    y: NDArray[np.float64]


@dataclass(frozen=True)
class Box:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"box lower bound {self.lo} must be < upper bound {self.hi}")

    def margin(self, v: float) -> float:
        """Signed distance to the nearest edge; negative means outside."""
        return min(v - self.lo, self.hi - v)


@dataclass(frozen=True)
class InputConstraintSet:
    """Boxes on the virtual inputs. ``u0`` must also stay away from zero."""

    u0: Box = Box(0.1, 160.0)
    u0_dot: Box = Box(-1000.0, 1000.0)
    u0_ddot: Box = Box(-20000.0, 20000.0)
    u1: Box = Box(-130.0, 130.0)
    u2: Box = Box(-250.0, 250.0)

    def __post_init__(self):
        if self.u0.lo <= 0.0 <= self.u0.hi:
            raise ValueError("u0 box must exclude 0 (full actuation needs u0 != 0)")

    def margins(self, virt) -> dict[str, float]:
        v = virt.as_array() if isinstance(virt, VirtualInputs) else np.asarray(virt, dtype=float)
        return {
            "u0": self.u0.margin(v[0]),
            "u0_dot": self.u0_dot.margin(v[1]),
            "u0_ddot": self.u0_ddot.margin(v[2]),
            "u1": self.u1.margin(v[3]),
            "u2_1": self.u2.margin(v[4]),
            "u2_2": self.u2.margin(v[5]),
        }

    def violated(self, virt) -> tuple[str, ...]:
        v = virt.as_array() if isinstance(virt, VirtualInputs) else virt
        out = []
        for name, box, val in (
            ("u0", self.u0, v[0]), ("u0_dot", self.u0_dot, v[1]), ("u0_ddot", self.u0_ddot, v[2]),
            ("u1", self.u1, v[3]), ("u2_1", self.u2, v[4]), ("u2_2", self.u2, v[5]),
        ):
            if not box.lo <= val <= box.hi:
                out.append(name)
        return tuple(out)


def euler_matrix(phi: float, theta: float) -> NDArray[np.float64]:
    """M(phi, theta) with Phi_dot = M @ [p, q, r]."""
    check_interior(0.0, theta, what="pitch")
    sphi, cphi = math.sin(phi), math.cos(phi)
    cth = math.cos(theta)
    tth = math.tan(theta)
    return np.array(
        [
            [1.0, sphi * tth, -cphi * tth],
            [0.0, cphi, sphi],
            [0.0, -sphi / cth, cphi / cth],
        ]
    )


def euler_matrix_inv(phi: float, theta: float) -> NDArray[np.float64]:
    check_interior(0.0, theta, what="pitch")
    sphi, cphi = math.sin(phi), math.cos(phi)
    sth, cth = math.sin(theta), math.cos(theta)
    return np.array(
        [
            [1.0, 0.0, sth],
            [0.0, cphi, -sphi * cth],
            [0.0, sphi, cphi * cth],
        ]
    )


def euler_matrix_dot(phi: float, theta: float, phi_dot: float, theta_dot: float) -> NDArray[np.float64]:
    check_interior(0.0, theta, what="pitch")
    sphi, cphi = math.sin(phi), math.cos(phi)
    cth = math.cos(theta)
    tth = math.tan(theta)
    sec = 1.0 / cth
    return np.array(
        [
            [0.0, phi_dot * cphi * tth + theta_dot * sphi * sec * sec,
             phi_dot * sphi * tth - theta_dot * cphi * sec * sec],
            [0.0, -phi_dot * sphi, phi_dot * cphi],
            [0.0, -phi_dot * cphi * sec - theta_dot * sphi * sec * tth,
             -phi_dot * sphi * sec + theta_dot * cphi * sec * tth],
        ]
    )


def thrust_direction(phi: float, theta: float, psi: float) -> tuple[float, float]:
    """(f_x, f_y): horizontal acceleration per unit u0."""
    check_interior(phi, theta, what="angles")
    tphi, tth = math.tan(phi), math.tan(theta)
    sth = 1.0 / math.cos(theta)
    spsi, cpsi = math.sin(psi), math.cos(psi)
    return (tth * cpsi + tphi * sth * spsi, tth * spsi - tphi * sth * cpsi)


def gamma_scalars(phi: float, theta: float, psi: float) -> tuple[float, ...]:
    """``(Gx1, Gx2, Gx3, Gy1, Gy2, Gy3)`` without array allocation."""
    check_interior(phi, theta, what="angles")
    tphi, tth = math.tan(phi), math.tan(theta)
    sphi2 = 1.0 / math.cos(phi) ** 2
    sth = 1.0 / math.cos(theta)
    spsi, cpsi = math.sin(psi), math.cos(psi)
    return (
        sphi2 * sth * spsi,
        sth * sth * cpsi + tphi * sth * tth * spsi,
        -tth * spsi + tphi * sth * cpsi,
        -sphi2 * sth * cpsi,
        sth * sth * spsi - tphi * sth * tth * cpsi,
        tth * cpsi + tphi * sth * spsi,
    )


def gamma(phi: float, theta: float, psi: float) -> GammaRows:
    """Gradient rows of f_x and f_y with respect to (phi, theta, psi)."""
    g = gamma_scalars(phi, theta, psi)
    return GammaRows(np.array(g[:3]), np.array(g[3:]))


def gamma_dot_scalars(
    phi: float, theta: float, psi: float, phi_dot: float, theta_dot: float, psi_dot: float
) -> tuple[float, ...]:
    check_interior(phi, theta, what="angles")
    tphi, tth = math.tan(phi), math.tan(theta)
    sphi = 1.0 / math.cos(phi)
    sth = 1.0 / math.cos(theta)
    s, c = math.sin(psi), math.cos(psi)
    dp, dt, ds = phi_dot, theta_dot, psi_dot
    sphi2, sth2, sth3 = sphi * sphi, sth * sth, sth * sth * sth

    gx1 = (
        2 * dp * sphi2 * tphi * sth * s
        + dt * sphi2 * sth * tth * s
        + ds * sphi2 * sth * c
    )
    gx2 = (
        2 * dt * sth2 * tth * c
        - ds * sth2 * s
        + dp * sphi2 * sth * tth * s
        + dt * tphi * sth * tth * tth * s
        + dt * tphi * sth3 * s
        + ds * tphi * sth * tth * c
    )
    gx3 = (
        -dt * sth2 * s
        - ds * tth * c
        + dp * sphi2 * sth * c
        + dt * tphi * sth * tth * c
        - ds * tphi * sth * s
    )
    gy1 = (
        -2 * dp * sphi2 * tphi * sth * c
        - dt * sphi2 * sth * tth * c
        + ds * sphi2 * sth * s
    )
    gy2 = (
        2 * dt * sth2 * tth * s
        + ds * sth2 * c
        - dp * sphi2 * sth * tth * c
        - dt * tphi * sth * tth * tth * c
        - dt * tphi * sth3 * c
        + ds * tphi * sth * tth * s
    )
    gy3 = (
        dt * sth2 * c
        - ds * tth * s
        + dp * sphi2 * sth * s
        + dt * tphi * sth * tth * s
        + ds * tphi * sth * c
    )
    return gx1, gx2, gx3, gy1, gy2, gy3


def gamma_dot(
    phi: float, theta: float, psi: float, phi_dot: float, theta_dot: float, psi_dot: float
) -> GammaRows:
    """Time derivatives of the gamma rows along an angle trajectory."""
    g = gamma_dot_scalars(phi, theta, psi, phi_dot, theta_dot, psi_dot)
    return GammaRows(np.array(g[:3]), np.array(g[3:]))


def g_X(angles, angle_rates, u0: float, u0_dot: float, u0_ddot: float, u1: float) -> NDArray[np.float64]:
    """Drift term of the fourth-order horizontal dynamics.

    ``angle_rates`` are Euler-angle rates (Phi_dot), not body rates.
    """
    phi, theta, psi = angles
    rates = np.asarray(angle_rates, dtype=float)
    f = thrust_direction(phi, theta, psi)
    gm = gamma(phi, theta, psi)
    gd = gamma_dot(phi, theta, psi, *rates)
    return drift_from_terms(f, gm, gd, rates, u0, u0_dot, u0_ddot, u1)


def drift_from_terms(f, gm: GammaRows, gd: GammaRows, rates, u0, u0_dot, u0_ddot, u1) -> NDArray[np.float64]:
    """``g_X`` from precomputed thrust direction and gamma rows."""
    gx = u0_ddot * f[0] + (2 * u0_dot * gm.x + u0 * gd.x) @ rates + u0 * gm.x[2] * u1
    gy = u0_ddot * f[1] + (2 * u0_dot * gm.y + u0 * gd.y) @ rates + u0 * gm.y[2] * u1
    return np.array([gx, gy])


def solve_G_X(gm: GammaRows, u0: float, rhs, *, tol: float = DET_G_TOL) -> NDArray[np.float64]:
    """``G_X^-1 rhs`` by the 2x2 adjugate."""
    a, b = u0 * gm.x[0], u0 * gm.x[1]
    c, d = u0 * gm.y[0], u0 * gm.y[1]
    det = a * d - b * c
    if abs(det) < tol:
        raise NearSingularError(f"G_X near-singular: det={det!r} (u0={u0!r})", det)
    return np.array([d * rhs[0] - b * rhs[1], a * rhs[1] - c * rhs[0]]) / det


def det_G_X_closed_form(phi: float, theta: float, u0: float) -> float:
    """Closed-form det G_X. G_X scales both rows by u0, hence the square."""
    return u0 * u0 / (math.cos(theta) ** 3 * math.cos(phi) ** 2)


def G_X(angles, u0: float, *, tol: float = DET_G_TOL) -> tuple[NDArray[np.float64], float]:
    """Input matrix of the horizontal subsystem and its cofactor determinant.

    Raises :class:`NearSingularError` when ``|det| < tol`` or when the
    cofactor and closed-form determinants disagree.
    """
    phi, theta, psi = angles
    gm = gamma(phi, theta, psi)
    G = u0 * np.array([[gm.x[0], gm.x[1]], [gm.y[0], gm.y[1]]])
    det = G[0, 0] * G[1, 1] - G[0, 1] * G[1, 0]
    closed = det_G_X_closed_form(phi, theta, u0)
    if abs(det) < tol:
        raise NearSingularError(f"G_X near-singular: det={det!r} (u0={u0!r})", det)
    if not math.isclose(det, closed, rel_tol=1e-9):
        raise ArithmeticError(f"det G_X mismatch: cofactor {det!r} vs closed form {closed!r}")
    return G, det


def body_rate_coupling(state, params: QuadrotorParams) -> NDArray[np.float64]:
    """Gyroscopic part of the body-rate dynamics, per unit inertia."""
    p, q, r = state[9], state[10], state[11]
    Jx, Jy, Jz = params.Jx, params.Jy, params.Jz
    return np.array([(Jy - Jz) / Jx * q * r, (Jz - Jx) / Jy * p * r, (Jx - Jy) / Jz * p * q])


def _state_array(state) -> NDArray[np.float64]:
    if hasattr(state, "as_array"):
        return state.as_array()
    return np.asarray(state, dtype=float)


def virtual_to_physical(virt: VirtualInputs, state, params: QuadrotorParams) -> PhysicalInput:
    """Thrust and torques that realise ``u0`` and ``u_bar = [u2, u1]`` at ``state``."""
    s = _state_array(state)
    phi, theta = s[6], s[7]
    check_interior(phi, theta, state=s)
    rates = s[9:12]
    M = euler_matrix(phi, theta)
    angle_rates = M @ rates
    Md = euler_matrix_dot(phi, theta, angle_rates[0], angle_rates[1])
    rhs = virt.u_bar - Md @ rates
    u_ring = euler_matrix_inv(phi, theta) @ rhs - body_rate_coupling(s, params)
    T = params.m * virt.u0 / (math.cos(phi) * math.cos(theta))
    return PhysicalInput(
        T=float(T),
        tau_phi=float(params.Jx * u_ring[0]),
        tau_theta=float(params.Jy * u_ring[1]),
        tau_psi=float(params.Jz * u_ring[2]),
    )


def physical_to_virtual(u: PhysicalInput, state, params: QuadrotorParams) -> tuple[float, NDArray[np.float64]]:
    """Returns ``(u0, u_bar)`` produced by thrust/torques ``u`` at ``state``."""
    s = _state_array(state)
    phi, theta = s[6], s[7]
    check_interior(phi, theta, state=s)
    rates = s[9:12]
    M = euler_matrix(phi, theta)
    angle_rates = M @ rates
    Md = euler_matrix_dot(phi, theta, angle_rates[0], angle_rates[1])
    u_ring = np.array([u.tau_phi / params.Jx, u.tau_theta / params.Jy, u.tau_psi / params.Jz])
    u_bar = Md @ rates + M @ (body_rate_coupling(s, params) + u_ring)
    u0 = u.T / params.m * math.cos(phi) * math.cos(theta)
    return float(u0), u_bar
