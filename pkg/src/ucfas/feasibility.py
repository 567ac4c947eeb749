"""Sampled feasibility and region-of-attraction checks for the three closed loops.

The altitude and yaw loops are linear after cancellation, so their responses
come from RK4 on ``x' = companion(A) x`` and the commands are read off the
path. The horizontal loop's commands depend on attitude and thrust history,
so it is checked by simulating the full plant.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from .control import ControllerGains, TrackingController
from .fas_model import InputConstraintSet
from .plant import ActuatorLimits, QuadrotorParams, simulate
from .synthesis import companion
from .trajectory import ConstantReference

MARGINAL_BAND = 1e-6
SUBSYSTEMS = ("z", "psi", "X")


def rk4_transition(U: NDArray[np.float64], dt: float) -> NDArray[np.float64]:
    """The matrix one RK4 step applies to a linear system ``x' = U x``."""
    n = U.shape[0]
    hU = dt * U
    P = np.eye(n)
    term = np.eye(n)
    for k in range(1, 5):
        term = term @ hU / k
        P = P + term
    return P


def linear_response(U, x0, horizon: float, dt: float) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """RK4 samples of ``x' = U x``; ``x0`` may be a vector or a (n, S) batch.

    Returns ``(t, path)`` with ``path`` shaped ``(len(t), n)`` or
    ``(len(t), n, S)``. Global error is O(dt^4).
    """
    if not (horizon > 0 and dt > 0):
        raise ValueError("horizon and dt must be positive")
    U = np.asarray(U, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    n_steps = int(math.floor(horizon / dt + 1e-9))
    P = rk4_transition(U, dt)
    path = np.empty((n_steps + 1,) + x0.shape)
    path[0] = x0
    for k in range(n_steps):
        path[k + 1] = P @ path[k]
    return np.arange(n_steps + 1) * dt, path


@dataclass
class MembershipResult:
    x0: NDArray[np.float64]
    status: str  # "member" | "non-member" | "marginal"
    worst_margin: float
    first_violation: tuple[float, str] | None = None

    @property
    def member(self) -> bool:
        return self.status == "member"


@dataclass
class FeasibilityReport:
    subsystem: str
    samples: NDArray[np.float64]
    results: list[MembershipResult] = field(default_factory=list)

    @property
    def member(self) -> NDArray[np.bool_]:
        return np.array([r.member for r in self.results], dtype=bool)

    @property
    def status(self) -> list[str]:
        return [r.status for r in self.results]

    @property
    def member_fraction(self) -> float:
        return float(self.member.mean()) if self.results else float("nan")

    def member_bounds(self) -> tuple[NDArray[np.float64], NDArray[np.float64]] | None:
        m = self.member
        if not m.any():
            return None
        pts = self.samples[m]
        return pts.min(axis=0), pts.max(axis=0)

    def summary(self) -> dict:
        bounds = self.member_bounds()
        counts = {s: self.status.count(s) for s in ("member", "non-member", "marginal")}
        return {
            "subsystem": self.subsystem,
            "samples": len(self.results),
            "member_fraction": self.member_fraction,
            "counts": counts,
            "member_box": None if bounds is None else [bounds[0].tolist(), bounds[1].tolist()],
        }


def _classify(x0, margins: dict[str, NDArray[np.float64]], t: NDArray[np.float64]) -> MembershipResult:
    worst = math.inf
    first: tuple[float, str] | None = None
    for name, m in margins.items():
        worst = min(worst, float(m.min()))
        bad = np.flatnonzero(m < 0)
        if bad.size and (first is None or t[bad[0]] < first[0]):
            first = (float(t[bad[0]]), name)
    if abs(worst) <= MARGINAL_BAND:
        status = "marginal"
    elif worst < 0:
        status = "non-member"
    else:
        status = "member"
    return MembershipResult(np.asarray(x0, dtype=float), status, worst, first)


def _box_margin(box, v):
    return np.minimum(v - box.lo, box.hi - v)


def _linear_margins(subsystem: str, A, path, constraints: InputConstraintSet, g: float):
    """Command margins along a batch of linear paths shaped (T, 2, S)."""
    A = np.asarray(A, dtype=float).ravel()
    if subsystem == "psi":
        u1 = -np.einsum("i,tis->ts", A, path)
        return {"u1": _box_margin(constraints.u1, u1)}
    U = companion(A)
    d1 = np.einsum("ij,tjs->tis", U, path)
    d2 = np.einsum("ij,tjs->tis", U, d1)
    u0 = -np.einsum("i,tis->ts", A, path) + g
    u0d = -np.einsum("i,tis->ts", A, d1)
    u0dd = -np.einsum("i,tis->ts", A, d2)
    return {
        "u0": _box_margin(constraints.u0, u0),
        "u0_dot": _box_margin(constraints.u0_dot, u0d),
        "u0_ddot": _box_margin(constraints.u0_ddot, u0dd),
    }


def _check_linear_batch(subsystem, A, X0, constraints, horizon, dt, g) -> list[MembershipResult]:
    X0 = np.atleast_2d(np.asarray(X0, dtype=float))
    t, path = linear_response(companion(A), X0.T, horizon, dt)
    margins = _linear_margins(subsystem, A, path, constraints, g)
    return [_classify(X0[s], {k: v[:, s] for k, v in margins.items()}, t) for s in range(X0.shape[0])]


def _check_lateral(x0, gains: ControllerGains, constraints: InputConstraintSet, horizon: float,
                   dt: float, params: QuadrotorParams, limits: ActuatorLimits | None) -> MembershipResult:
    ctl = TrackingController(ConstantReference(), gains, params)
    lim = limits if limits is not None else ActuatorLimits(-1e12, 1e12, -1e12, 1e12)
    log = simulate(x0, ctl, lim, params, horizon, dt, truncate_on_error=True)
    n = len(log)
    if n == 0:
        return MembershipResult(np.asarray(x0, dtype=float), "non-member", -math.inf, (0.0, "singular"))
    margins = {
        "u2_1": _box_margin(constraints.u2, log.virtual[:, 4]),
        "u2_2": _box_margin(constraints.u2, log.virtual[:, 5]),
    }
    res = _classify(x0, margins, log.t[:n])
    if log.aborted is not None:
        t_err = log.aborted.time if log.aborted.time is not None else float(log.t[n - 1])
        if res.first_violation is None or t_err < res.first_violation[0]:
            res.first_violation = (t_err, "singular")
        res.status = "non-member"
        res.worst_margin = -math.inf
    return res


def _gain_row(subsystem: str, gains) -> NDArray[np.float64]:
    if isinstance(gains, ControllerGains):
        return gains.A0 if subsystem == "z" else gains.A1
    return np.asarray(getattr(gains, "A", gains), dtype=float).ravel()


def check_membership(
    subsystem: str,
    x0,
    gains,
    constraints: InputConstraintSet,
    horizon: float = 10.0,
    dt: float = 1e-3,
    *,
    params: QuadrotorParams = QuadrotorParams(),
    limits: ActuatorLimits | None = None,
) -> MembershipResult:
    """Is ``x0`` in the sampled region of attraction of one subsystem?

    For ``"z"`` and ``"psi"``, ``x0`` is ``(e, e')`` and ``gains`` a 2-gain row
    (or a :class:`ControllerGains`). For ``"X"``, ``x0`` is a full 12-state
    and ``gains`` a :class:`ControllerGains`; the check covers the ``u2`` box
    plus loss of full actuation.
    """
    if subsystem not in SUBSYSTEMS:
        raise ValueError(f"subsystem must be one of {SUBSYSTEMS}, got {subsystem!r}")
    if subsystem == "X":
        if not isinstance(gains, ControllerGains):
            raise TypeError("the X subsystem needs a full ControllerGains")
        return _check_lateral(np.asarray(x0, dtype=float), gains, constraints, horizon, dt, params, limits)
    A = _gain_row(subsystem, gains)
    return _check_linear_batch(subsystem, A, [x0], constraints, horizon, dt, params.g)[0]


def check_joint(
    state,
    gains: ControllerGains,
    constraints: InputConstraintSet,
    horizon: float = 10.0,
    dt: float = 1e-3,
    *,
    params: QuadrotorParams = QuadrotorParams(),
    limits: ActuatorLimits | None = None,
) -> tuple[bool, dict[str, MembershipResult]]:
    """Per-subsystem membership of a full 12-state about the origin setpoint.

    The state is feasible overall iff every subsystem is a member.
    """
    s = np.asarray(state.as_array() if hasattr(state, "as_array") else state, dtype=float)
    psi_rate = (-s[10] * math.sin(s[6]) + s[11] * math.cos(s[6])) / math.cos(s[7])
    results = {
        "z": check_membership("z", (s[2], s[5]), gains, constraints, horizon, dt, params=params),
        "psi": check_membership("psi", (s[8], psi_rate), gains, constraints, horizon, dt, params=params),
        "X": check_membership("X", s, gains, constraints, horizon, dt, params=params, limits=limits),
    }
    return all(r.member for r in results.values()), results


@dataclass(frozen=True)
class GridSampling:
    lower: Sequence[float]
    upper: Sequence[float]
    points: int | Sequence[int] = 21

    def samples(self) -> NDArray[np.float64]:
        lo, hi = np.asarray(self.lower, float), np.asarray(self.upper, float)
        pts = np.broadcast_to(np.asarray(self.points), lo.shape)
        axes = [np.linspace(a, b, int(n)) for a, b, n in zip(lo, hi, pts)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.column_stack([m.ravel() for m in mesh])


@dataclass(frozen=True)
class UniformSampling:
    lower: Sequence[float]
    upper: Sequence[float]
    n: int = 256
    seed: int = 0

    def samples(self) -> NDArray[np.float64]:
        rng = np.random.default_rng(self.seed)
        lo, hi = np.asarray(self.lower, float), np.asarray(self.upper, float)
        return rng.uniform(lo, hi, size=(self.n, lo.size))


def _lateral_worker(args):
    return _check_lateral(*args)


def estimate_roea(
    subsystem: str,
    gains,
    constraints: InputConstraintSet,
    sampling,
    horizon: float = 10.0,
    dt: float = 1e-3,
    *,
    params: QuadrotorParams = QuadrotorParams(),
    limits: ActuatorLimits | None = None,
    base_state=None,
    axes: Sequence[int] | None = None,
    workers: int = 1,
) -> FeasibilityReport:
    """Membership over a set of initial conditions.

    ``sampling`` is a :class:`GridSampling`, :class:`UniformSampling` or an
    explicit (S, d) array. For the X subsystem each sample overwrites the
    ``axes`` entries of ``base_state`` (default: x, y, vx, vy).
    Results are in sample order regardless of ``workers``.
    """
    if subsystem not in SUBSYSTEMS:
        raise ValueError(f"subsystem must be one of {SUBSYSTEMS}, got {subsystem!r}")
    samples = sampling.samples() if hasattr(sampling, "samples") else np.atleast_2d(np.asarray(sampling, float))
    report = FeasibilityReport(subsystem, samples)
    if subsystem != "X":
        report.results = _check_linear_batch(subsystem, _gain_row(subsystem, gains), samples,
                                             constraints, horizon, dt, params.g)
        return report

    if not isinstance(gains, ControllerGains):
        raise TypeError("the X subsystem needs a full ControllerGains")
    axes = list(axes) if axes is not None else [0, 1, 3, 4]
    base = np.zeros(12) if base_state is None else np.asarray(base_state, dtype=float)
    states = []
    for smp in samples:
        s = base.copy()
        s[axes] = smp
        states.append(s)
    jobs = [(s, gains, constraints, horizon, dt, params, limits) for s in states]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_lateral_worker, jobs))
    else:
        results = [_lateral_worker(j) for j in jobs]
    for smp, res in zip(samples, results):
        res.x0 = smp
    report.results = results
    return report
