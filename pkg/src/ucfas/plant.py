"""Six-DOF quadrotor plant: rigid-body equations, actuator saturation, RK4 stepping.

States are carried as length-12 float arrays in the order
``x, y, z, vx, vy, vz, phi, theta, psi, p, q, r`` and physical inputs as
length-4 arrays ``T, tau_phi, tau_theta, tau_psi``. The dataclasses below are
thin named views over those arrays.
"""

from __future__ import annotations

import math
from dataclasses import astuple, dataclass, field
from typing import Callable

import numpy as np
from numpy.typing import NDArray

from .errors import FeasibilityError, SingularKinematicsError

STATE_FIELDS = ("x", "y", "z", "vx", "vy", "vz", "phi", "theta", "psi", "p", "q", "r")
INPUT_FIELDS = ("T", "tau_phi", "tau_theta", "tau_psi")

# Angles closer than this to +-pi/2 are treated as singular.
ANGLE_MARGIN = 1e-6
HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class QuadrotorParams:
    m: float = 0.625
    g: float = 9.8
    Jx: float = 0.0019005
    Jy: float = 0.0019536
    Jz: float = 0.0036894

    def __post_init__(self):
        for name in ("m", "g", "Jx", "Jy", "Jz"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"QuadrotorParams.{name} must be positive and finite, got {v!r}")


@dataclass(frozen=True)
class ActuatorLimits:
    T_min: float = -100.0
    T_max: float = 100.0
    tau_min: float = -0.5
    tau_max: float = 0.5

    def __post_init__(self):
        if not self.T_min < self.T_max:
            raise ValueError(f"ActuatorLimits: T_min ({self.T_min}) must be < T_max ({self.T_max})")
        if not self.tau_min < self.tau_max:
            raise ValueError(
                f"ActuatorLimits: tau_min ({self.tau_min}) must be < tau_max ({self.tau_max})"
            )

    @property
    def lower(self) -> NDArray[np.float64]:
        return np.array([self.T_min, self.tau_min, self.tau_min, self.tau_min])

    @property
    def upper(self) -> NDArray[np.float64]:
        return np.array([self.T_max, self.tau_max, self.tau_max, self.tau_max])


@dataclass(frozen=True)
class PlantState:
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    vx: float = 0.0
    vy: float = 0.0
    vz: float = 0.0
    phi: float = 0.0
    theta: float = 0.0
    psi: float = 0.0
    p: float = 0.0
    q: float = 0.0
    r: float = 0.0

    def as_array(self) -> NDArray[np.float64]:
        return np.array(astuple(self), dtype=float)

    @classmethod
    def from_array(cls, arr) -> "PlantState":
        arr = np.asarray(arr, dtype=float)
        if arr.shape != (12,):
            raise ValueError(f"plant state must have 12 entries, got shape {arr.shape}")
        return cls(*map(float, arr))

    @property
    def interior(self) -> bool:
        return is_interior(self.phi, self.theta)


@dataclass(frozen=True)
class PhysicalInput:
    T: float = 0.0
    tau_phi: float = 0.0
    tau_theta: float = 0.0
    tau_psi: float = 0.0

    def as_array(self) -> NDArray[np.float64]:
        return np.array([self.T, self.tau_phi, self.tau_theta, self.tau_psi])

    @classmethod
    def from_array(cls, arr) -> "PhysicalInput":
        arr = np.asarray(arr, dtype=float)
        if arr.shape != (4,):
            raise ValueError(f"physical input must have 4 entries, got shape {arr.shape}")
        return cls(*map(float, arr))


def is_interior(phi: float, theta: float, margin: float = ANGLE_MARGIN) -> bool:
    lim = HALF_PI - margin
    return abs(phi) < lim and abs(theta) < lim


def check_interior(phi: float, theta: float, state=None, what: str = "state") -> None:
    if not is_interior(phi, theta):
        raise SingularKinematicsError(
            f"{what} outside interior region: phi={phi!r}, theta={theta!r}", state=state
        )


def _as_state_array(state) -> NDArray[np.float64]:
    if isinstance(state, PlantState):
        return state.as_array()
    return np.asarray(state, dtype=float)


def _as_input_array(u) -> NDArray[np.float64]:
    if isinstance(u, PhysicalInput):
        return u.as_array()
    return np.asarray(u, dtype=float)


def _field(s, T, tau_phi, tau_theta, tau_psi, params: QuadrotorParams) -> list[float]:
    _, _, _, vx, vy, vz, phi, theta, psi, p, q, r = s
    lim = HALF_PI - ANGLE_MARGIN
    if not (abs(phi) < lim and abs(theta) < lim):
        check_interior(phi, theta, state=s)

    sphi, cphi = math.sin(phi), math.cos(phi)
    sth, cth = math.sin(theta), math.cos(theta)
    spsi, cpsi = math.sin(psi), math.cos(psi)
    tth = sth / cth
    a = T / params.m
    Jx, Jy, Jz = params.Jx, params.Jy, params.Jz
    return [
        vx,
        vy,
        vz,
        a * (cphi * sth * cpsi + sphi * spsi),
        a * (cphi * sth * spsi - sphi * cpsi),
        a * cphi * cth - params.g,
        p + q * sphi * tth - r * cphi * tth,
        q * cphi + r * sphi,
        -q * sphi / cth + r * cphi / cth,
        (Jy - Jz) / Jx * q * r + tau_phi / Jx,
        (Jz - Jx) / Jy * p * r + tau_theta / Jy,
        (Jx - Jy) / Jz * p * q + tau_psi / Jz,
    ]


def plant_derivative(state, u, params: QuadrotorParams) -> NDArray[np.float64]:
    """Time derivative of the 12-state under physical input ``u``.

    The Euler-rate kinematics use the sign pattern of the source model
    (``-r cos(phi) tan(theta)`` in the roll rate and ``-q sin(phi)/cos(theta)``
    in the yaw rate), not the textbook ZYX convention.
    """
    s = _as_state_array(state)
    T, tau_phi, tau_theta, tau_psi = _as_input_array(u)
    return np.array(_field(s.tolist(), T, tau_phi, tau_theta, tau_psi, params))


def saturate(u, limits: ActuatorLimits):
    """Clamp thrust and each torque to its box. Returns the same type it was given."""
    if isinstance(u, PhysicalInput):
        return PhysicalInput(
            T=min(max(u.T, limits.T_min), limits.T_max),
            tau_phi=min(max(u.tau_phi, limits.tau_min), limits.tau_max),
            tau_theta=min(max(u.tau_theta, limits.tau_min), limits.tau_max),
            tau_psi=min(max(u.tau_psi, limits.tau_min), limits.tau_max),
        )
    return np.clip(np.asarray(u, dtype=float), limits.lower, limits.upper)


def rk4(f: Callable, y: NDArray[np.float64], dt: float) -> NDArray[np.float64]:
    """One classical Runge-Kutta step of the autonomous field ``f``."""
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _rk4_held(y: list[float], u, params: QuadrotorParams, dt: float) -> list[float]:
    T, tp, tt, ts = u
    h2 = 0.5 * dt
    k1 = _field(y, T, tp, tt, ts, params)
    k2 = _field([a + h2 * b for a, b in zip(y, k1)], T, tp, tt, ts, params)
    k3 = _field([a + h2 * b for a, b in zip(y, k2)], T, tp, tt, ts, params)
    k4 = _field([a + dt * b for a, b in zip(y, k3)], T, tp, tt, ts, params)
    h6 = dt / 6.0
    return [a + h6 * (b1 + 2.0 * b2 + 2.0 * b3 + b4) for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4)]


def step_rk4(state, u, params: QuadrotorParams, dt: float) -> NDArray[np.float64]:
    """Advance the plant by ``dt`` with ``u`` held constant over the step."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    y = _as_state_array(state).tolist()
    return np.array(_rk4_held(y, _as_input_array(u).tolist(), params, dt))


@dataclass
class Command:
    """What a controller hands back to :func:`simulate` each sample.

    Only ``physical`` is required; the rest is carried into the log.
    ``virtual`` is ``u0, u0_dot, u0_ddot, u1, u2_1, u2_2`` and ``reference``
    is the flattened reference row (see ``ucfas.control.REFERENCE_LOG_FIELDS``).
    """

    physical: NDArray[np.float64]
    virtual: NDArray[np.float64] | None = None
    reference: NDArray[np.float64] | None = None
    violations: tuple[str, ...] = ()
    errors: NDArray[np.float64] | None = None


N_VIRTUAL = 6
N_REFERENCE = 6
N_ERRORS = 2


@dataclass
class TrajectoryLog:
    t: NDArray[np.float64]
    states: NDArray[np.float64]
    raw_inputs: NDArray[np.float64]
    inputs: NDArray[np.float64]
    virtual: NDArray[np.float64]
    reference: NDArray[np.float64]
    errors: NDArray[np.float64]
    saturated: NDArray[np.bool_]
    violations: list[tuple[str, ...]] = field(default_factory=list)
    aborted: FeasibilityError | None = None

    def __len__(self) -> int:
        return len(self.t)

    @property
    def violation_flags(self) -> NDArray[np.bool_]:
        return np.array([bool(v) for v in self.violations], dtype=bool)

    def truncated(self, n: int) -> "TrajectoryLog":
        return TrajectoryLog(
            t=self.t[:n],
            states=self.states[:n],
            raw_inputs=self.raw_inputs[:n],
            inputs=self.inputs[:n],
            virtual=self.virtual[:n],
            reference=self.reference[:n],
            errors=self.errors[:n],
            saturated=self.saturated[:n],
            violations=self.violations[:n],
            aborted=self.aborted,
        )


def _to_command(out) -> Command:
    if isinstance(out, Command):
        return out
    return Command(physical=_as_input_array(out))


def simulate(
    initial,
    controller: Callable[[NDArray[np.float64], float], object],
    limits: ActuatorLimits,
    params: QuadrotorParams,
    horizon: float,
    dt: float,
    *,
    hold: str = "zoh",
    truncate_on_error: bool = False,
) -> TrajectoryLog:
    """Closed-loop simulation on a uniform grid of ``floor(horizon/dt) + 1`` samples.

    ``controller(state, t)`` returns a :class:`PhysicalInput`, an array, or a
    :class:`Command`. Its output is saturated before it reaches the plant and
    both versions are logged.

    ``hold="zoh"`` evaluates the controller once per step and holds the
    saturated command across it. ``hold="stage"`` re-evaluates the controller
    at every RK4 stage, which integrates the continuous-time closed loop.
    The logged command is always the one evaluated at the sample instant.

    A :class:`~ucfas.errors.FeasibilityError` (singular kinematics or loss of
    full actuation) is re-raised with its timestamp, or,
    with ``truncate_on_error``, the log up to the last good sample is returned
    with ``aborted`` set.
    """
    if not horizon > 0:
        raise ValueError(f"horizon must be positive, got {horizon!r}")
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    if hold not in ("zoh", "stage"):
        raise ValueError(f"hold must be 'zoh' or 'stage', got {hold!r}")

    n_steps = int(math.floor(horizon / dt + 1e-9))
    n = n_steps + 1
    t = np.arange(n) * dt
    states = np.empty((n, 12))
    raw = np.empty((n, 4))
    sat = np.empty((n, 4))
    virt = np.full((n, N_VIRTUAL), np.nan)
    ref = np.full((n, N_REFERENCE), np.nan)
    errs = np.full((n, N_ERRORS), np.nan)
    saturated = np.zeros(n, dtype=bool)
    violations: list[tuple[str, ...]] = []
    lo, hi = limits.lower, limits.upper

    def applied(y, tk):
        return np.clip(_to_command(controller(y, tk)).physical, lo, hi)

    y = _as_state_array(initial).copy()
    k = 0
    try:
        for k in range(n):
            tk = float(t[k])
            cmd = _to_command(controller(y, tk))
            u_raw = np.asarray(cmd.physical, dtype=float)
            u_sat = np.minimum(np.maximum(u_raw, lo), hi)
            states[k] = y
            raw[k] = u_raw
            sat[k] = u_sat
            saturated[k] = bool(np.any(u_sat != u_raw))
            if cmd.virtual is not None:
                virt[k] = cmd.virtual
            if cmd.reference is not None:
                ref[k] = cmd.reference
            if cmd.errors is not None:
                errs[k] = cmd.errors
            violations.append(tuple(cmd.violations))
            if k == n_steps:
                break
            if hold == "zoh":
                y = np.array(_rk4_held(y.tolist(), u_sat.tolist(), params, dt))
            else:
                y = _rk4_stage_hold(y, tk, dt, u_sat, applied, params)
    except FeasibilityError as exc:
        exc.time = float(t[k])
        if not truncate_on_error:
            raise
        log = TrajectoryLog(t, states, raw, sat, virt, ref, errs, saturated, violations)
        # Sample k was not fully recorded when the controller itself raised.
        good = len(violations)
        log = log.truncated(good)
        log.aborted = exc
        return log

    return TrajectoryLog(t, states, raw, sat, virt, ref, errs, saturated, violations)


def _rk4_stage_hold(y, tk, dt, u0_sat, applied, params):
    k1 = plant_derivative(y, u0_sat, params)
    y2 = y + 0.5 * dt * k1
    k2 = plant_derivative(y2, applied(y2, tk + 0.5 * dt), params)
    y3 = y + 0.5 * dt * k2
    k3 = plant_derivative(y3, applied(y3, tk + 0.5 * dt), params)
    y4 = y + dt * k3
    k4 = plant_derivative(y4, applied(y4, tk + dt), params)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
