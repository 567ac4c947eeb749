"""Cascaded tracking law: altitude -> yaw -> horizontal position.

Each stage cancels the transformed dynamics exactly and imposes a linear
error equation with a gain row from :mod:`ucfas.synthesis`. The derivatives
of ``u0`` come from substituting the altitude closed loop back into itself,
so nothing is differentiated numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.typing import NDArray

from .fas_model import (
    G_X,
    GammaRows,
    InputConstraintSet,
    VirtualInputs,
    drift_from_terms,
    euler_matrix,
    g_X,
    gamma,
    gamma_dot_scalars,
    gamma_scalars,
    solve_G_X,
    thrust_direction,
    virtual_to_physical,
)
from .errors import NearSingularError
from .plant import ActuatorLimits, Command, PhysicalInput, QuadrotorParams, check_interior, saturate
from .synthesis import ParametricDesign, synthesize_gains, verify_spectrum
from .trajectory import ReferenceSample

REFERENCE_LOG_FIELDS = ("x_ref", "y_ref", "z_ref", "psi_ref", "z_ref_dot", "psi_ref_dot")
VIRTUAL_LOG_FIELDS = ("u0", "u0_dot", "u0_ddot", "u1", "u2_1", "u2_2")
ERROR_LOG_FIELDS = ("pos_err", "psi_err")


@dataclass(frozen=True)
class ControllerGains:
    A0: NDArray[np.float64]
    A1: NDArray[np.float64]
    A2x: NDArray[np.float64]
    A2y: NDArray[np.float64]

    def __post_init__(self):
        for name, n in (("A0", 2), ("A1", 2), ("A2x", 4), ("A2y", 4)):
            v = np.asarray(getattr(self, name), dtype=float).ravel()
            if v.shape != (n,) or not np.all(np.isfinite(v)):
                raise ValueError(f"{name} must be {n} finite numbers, got {v}")
            object.__setattr__(self, name, v)

    @classmethod
    def from_designs(cls, z: ParametricDesign, psi: ParametricDesign, x: ParametricDesign,
                     y: ParametricDesign, tol: float = 1e-6) -> "ControllerGains":
        rows = {}
        for name, d in (("A0", z), ("A1", psi), ("A2x", x), ("A2y", y)):
            g = synthesize_gains(d)
            mismatch = verify_spectrum(g, d.F)
            if mismatch > tol * max(1.0, float(np.max(np.abs(np.diag(d.F))))):
                raise ValueError(f"{name}: assigned spectrum off by {mismatch:.3g}")
            rows[name] = g.A
        return cls(**rows)

    @classmethod
    def default(cls) -> "ControllerGains":
        """Rows [20 9] for altitude and yaw, [1680 1066 251 26] for x and y."""
        two = ParametricDesign.diagonal([1, 1], [-4, -5])
        four = ParametricDesign.diagonal([1, 1, 1, 1], [-5, -6, -7, -8])
        return cls.from_designs(two, two, four, four)


def altitude_law(z: float, vz: float, ref: ReferenceSample, A0, g: float = 9.8) -> tuple[float, float, float]:
    """``u0`` and its first two time derivatives along the altitude closed loop."""
    a0, a1 = A0
    zr = ref.zref
    e0, e1 = z - zr[0], vz - zr[1]
    u0 = -(a0 * e0 + a1 * e1) + g + zr[2]
    e2 = u0 - g - zr[2]
    u0_dot = -(a0 * e1 + a1 * e2) + zr[3]
    e3 = u0_dot - zr[3]
    u0_ddot = -(a0 * e2 + a1 * e3) + zr[4]
    return u0, u0_dot, u0_ddot


def yaw_law(psi: float, psi_rate: float, ref: ReferenceSample, A1) -> float:
    pr = ref.psiref
    return -(A1[0] * (psi - pr[0]) + A1[1] * (psi_rate - pr[1])) + pr[2]


def _chain_from_terms(pos, vel, f, gm, rates, u0, u0_dot) -> NDArray[np.float64]:
    return np.array(
        [
            [pos[0], pos[1]],
            [vel[0], vel[1]],
            [u0 * f[0], u0 * f[1]],
            [u0_dot * f[0] + u0 * (gm.x @ rates), u0_dot * f[1] + u0 * (gm.y @ rates)],
        ]
    )


def lateral_chain(pos, vel, angles, angle_rates, u0: float, u0_dot: float) -> NDArray[np.float64]:
    """``X^(0..3)`` as a 4x2 array, orders 2 and 3 rebuilt from the model."""
    phi, theta, psi = angles
    rates = np.asarray(angle_rates, dtype=float)
    return _chain_from_terms(pos, vel, thrust_direction(phi, theta, psi), gamma(phi, theta, psi),
                             rates, u0, u0_dot)


def _feedback(A2x, A2y, X_chain, ref: ReferenceSample) -> NDArray[np.float64]:
    err = X_chain - ref.Xref[:4]
    return np.array([np.dot(A2x, err[:, 0]), np.dot(A2y, err[:, 1])])


def lateral_law(X_chain, angles, angle_rates, u0_chain, u1: float, ref: ReferenceSample, A2x, A2y) -> NDArray[np.float64]:
    """``u2`` solving ``G_X u2 = -(A2 Xbar + g_X - X*^(4))``."""
    u0, u0_dot, u0_ddot = u0_chain
    fb = _feedback(A2x, A2y, np.asarray(X_chain, dtype=float), ref)
    drift = g_X(angles, angle_rates, u0, u0_dot, u0_ddot, u1)
    G, _ = G_X(angles, u0)
    return -np.linalg.solve(G, fb + drift - ref.Xref[4])


def control_step(state, ref: ReferenceSample, gains: ControllerGains, params: QuadrotorParams,
                 limits: ActuatorLimits | None = None) -> tuple[PhysicalInput, VirtualInputs]:
    """One evaluation of the full cascade.

    Order: altitude law, yaw law, Euler rates from body rates, model-based
    ``X^(0..3)``, lateral law, inverse input map, optional saturation.
    Returns the physical command and the virtual inputs behind it.

    This is the same arithmetic as chaining :func:`altitude_law`,
    :func:`yaw_law`, :func:`lateral_chain`, :func:`lateral_law` and
    :func:`~ucfas.fas_model.virtual_to_physical`, written out in scalars
    because it runs on every simulation step.
    """
    s = state.as_array() if hasattr(state, "as_array") else state
    x, y, z, vx, vy, vz, phi, theta, psi, p, q, r = (float(v) for v in s)
    check_interior(phi, theta, state=s)
    sphi, cphi = math.sin(phi), math.cos(phi)
    sth, cth = math.sin(theta), math.cos(theta)
    tth = sth / cth

    u0, u0_dot, u0_ddot = altitude_law(z, vz, ref, gains.A0, params.g)
    dphi = p + q * sphi * tth - r * cphi * tth
    dth = q * cphi + r * sphi
    dpsi = (-q * sphi + r * cphi) / cth
    u1 = yaw_law(psi, dpsi, ref, gains.A1)

    fx, fy = thrust_direction(phi, theta, psi)
    gx1, gx2, gx3, gy1, gy2, gy3 = gamma_scalars(phi, theta, psi)
    hx1, hx2, hx3, hy1, hy2, hy3 = gamma_dot_scalars(phi, theta, psi, dphi, dth, dpsi)
    gxr = gx1 * dphi + gx2 * dth + gx3 * dpsi
    gyr = gy1 * dphi + gy2 * dth + gy3 * dpsi
    hxr = hx1 * dphi + hx2 * dth + hx3 * dpsi
    hyr = hy1 * dphi + hy2 * dth + hy3 * dpsi

    Xr = ref.Xref
    ax, ay = gains.A2x, gains.A2y
    fb_x = (ax[0] * (x - Xr[0, 0]) + ax[1] * (vx - Xr[1, 0]) + ax[2] * (u0 * fx - Xr[2, 0])
            + ax[3] * (u0_dot * fx + u0 * gxr - Xr[3, 0]))
    fb_y = (ay[0] * (y - Xr[0, 1]) + ay[1] * (vy - Xr[1, 1]) + ay[2] * (u0 * fy - Xr[2, 1])
            + ay[3] * (u0_dot * fy + u0 * gyr - Xr[3, 1]))
    drift_x = u0_ddot * fx + 2 * u0_dot * gxr + u0 * hxr + u0 * gx3 * u1
    drift_y = u0_ddot * fy + 2 * u0_dot * gyr + u0 * hyr + u0 * gy3 * u1
    u2 = -solve_G_X(GammaRows((gx1, gx2, gx3), (gy1, gy2, gy3)), u0,
                    (fb_x + drift_x - Xr[4, 0], fb_y + drift_y - Xr[4, 1]))
    u2a, u2b = float(u2[0]), float(u2[1])

    # u_ring = M^-1 (u_bar - M_dot Lambda) - gyroscopic coupling
    sec = 1.0 / cth
    md_q = (dphi * cphi * tth + dth * sphi * sec * sec, -dphi * sphi,
            -dphi * cphi * sec - dth * sphi * sec * tth)
    md_r = (dphi * sphi * tth - dth * cphi * sec * sec, dphi * cphi,
            -dphi * sphi * sec + dth * cphi * sec * tth)
    w0 = u2a - (md_q[0] * q + md_r[0] * r)
    w1 = u2b - (md_q[1] * q + md_r[1] * r)
    w2 = u1 - (md_q[2] * q + md_r[2] * r)
    Jx, Jy, Jz = params.Jx, params.Jy, params.Jz
    ur0 = w0 + sth * w2 - (Jy - Jz) / Jx * q * r
    ur1 = cphi * w1 - sphi * cth * w2 - (Jz - Jx) / Jy * p * r
    ur2 = sphi * w1 + cphi * cth * w2 - (Jx - Jy) / Jz * p * q

    phys = PhysicalInput(params.m * u0 / (cphi * cth), Jx * ur0, Jy * ur1, Jz * ur2)
    virt = VirtualInputs(u0, u0_dot, u0_ddot, u1, (u2a, u2b))
    if limits is not None:
        phys = saturate(phys, limits)
    return phys, virt


@dataclass
class TrackingController:
    """Stateless closed-loop wrapper for :func:`ucfas.plant.simulate`.

    ``on_singular="hold"`` repeats the last good command when G_X is
    near-singular and records an ``infeasible`` violation; ``"raise"``
    propagates :class:`NearSingularError`.
    """

    reference: Callable[[float], ReferenceSample]
    gains: ControllerGains
    params: QuadrotorParams
    constraints: InputConstraintSet | None = None
    on_singular: str = "raise"
    _last: Command | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if self.on_singular not in ("raise", "hold"):
            raise ValueError(f"on_singular must be 'raise' or 'hold', got {self.on_singular!r}")

    def __call__(self, state, t: float) -> Command:
        ref = self.reference(t)
        ref_row = ref.log_row()
        s = np.asarray(state, dtype=float)
        errors = np.array(
            [math.hypot(s[0] - ref_row[0], s[1] - ref_row[1], s[2] - ref_row[2]), abs(s[8] - ref_row[3])]
        )
        try:
            phys, virt = control_step(s, ref, self.gains, self.params)
        except NearSingularError:
            if self.on_singular == "raise" or self._last is None:
                raise
            return Command(
                physical=self._last.physical,
                virtual=np.full(6, np.nan),
                reference=ref_row,
                violations=("infeasible",),
                errors=errors,
            )
        v = (virt.u0, virt.u0_dot, virt.u0_ddot, virt.u1, virt.u2[0], virt.u2[1])
        violations = self.constraints.violated(v) if self.constraints is not None else ()
        cmd = Command(physical=phys.as_array(), virtual=np.array(v), reference=ref_row,
                      violations=violations, errors=errors)
        self._last = cmd
        return cmd
