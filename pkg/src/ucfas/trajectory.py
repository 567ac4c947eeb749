"""Reference signals with closed-form derivatives."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray


@dataclass(frozen=True)
class ReferenceSample:
    """Reference derivatives: ``zref[k] = z*^(k)`` for k=0..4, ``psiref`` k=0..2,
    ``Xref[k] = (x*^(k), y*^(k))`` for k=0..4."""

    zref: NDArray[np.float64]
    psiref: NDArray[np.float64]
    Xref: NDArray[np.float64]

    def __post_init__(self):
        if type(self.zref) is np.ndarray and type(self.psiref) is np.ndarray and type(self.Xref) is np.ndarray \
                and self.zref.shape == (5,) and self.psiref.shape == (3,) and self.Xref.shape == (5, 2):
            return
        z = np.asarray(self.zref, dtype=float)
        ps = np.asarray(self.psiref, dtype=float)
        X = np.asarray(self.Xref, dtype=float)
        if z.shape != (5,) or ps.shape != (3,) or X.shape != (5, 2):
            raise ValueError(
                f"ReferenceSample shapes must be (5,), (3,), (5, 2); got {z.shape}, {ps.shape}, {X.shape}"
            )
        object.__setattr__(self, "zref", z)
        object.__setattr__(self, "psiref", ps)
        object.__setattr__(self, "Xref", X)

    def log_row(self) -> NDArray[np.float64]:
        """``x*, y*, z*, psi*, z*', psi*'``."""
        return np.array(
            [self.Xref[0, 0], self.Xref[0, 1], self.zref[0], self.psiref[0], self.zref[1], self.psiref[1]]
        )


@dataclass(frozen=True)
class SpiralSpec:
    radius: float = 1.0
    omega: float = 0.2
    climb_rate: float = 0.05
    center: tuple[float, float, float] = (0.0, 0.0, 0.0)
    yaw_amplitude: float = 0.3
    yaw_rate: float = 0.1

    def __post_init__(self):
        if not self.radius >= 0:
            raise ValueError(f"radius must be >= 0, got {self.radius!r}")
        vals = (self.radius, self.omega, self.climb_rate, self.yaw_amplitude, self.yaw_rate, *self.center)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("spiral parameters must be finite")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))


def _harmonic(amplitude: float, w: float, t: float, phase: float, orders: int) -> list[float]:
    """Derivatives 0..orders-1 of ``amplitude * cos(w t + phase)``."""
    c = math.cos(w * t + phase)
    s = math.sin(w * t + phase)
    # d/dt cycles cos -> -sin -> -cos -> sin
    cycle = (c, -s, -c, s)
    out = []
    scale = amplitude
    for k in range(orders):
        out.append(scale * cycle[k % 4])
        scale *= w
    return out


def spiral_reference(t: float, spec: SpiralSpec = SpiralSpec()) -> ReferenceSample:
    """Circle in the horizontal plane, constant climb, sinusoidal yaw."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t!r}")
    cx, cy, cz = spec.center
    xr = _harmonic(spec.radius, spec.omega, t, 0.0, 5)
    yr = _harmonic(spec.radius, spec.omega, t, -math.pi / 2, 5)
    xr[0] += cx
    yr[0] += cy
    zr = np.array([cz + spec.climb_rate * t, spec.climb_rate, 0.0, 0.0, 0.0])
    psir = np.array(_harmonic(spec.yaw_amplitude, spec.yaw_rate, t, -math.pi / 2, 3))
    return ReferenceSample(zref=zr, psiref=psir, Xref=np.array([xr, yr]).T.copy())


@dataclass(frozen=True)
class ConstantReference:
    """Time-independent setpoint; used for sub-stabilization."""

    z: float = 0.0
    psi: float = 0.0
    X: tuple[float, float] = (0.0, 0.0)
    _sample: ReferenceSample = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_sample", constant_reference(self.z, self.psi, self.X))

    def __call__(self, t: float) -> ReferenceSample:
        return self._sample


def constant_reference(z: float = 0.0, psi: float = 0.0, X=(0.0, 0.0)) -> ReferenceSample:
    zr = np.zeros(5)
    zr[0] = z
    psir = np.zeros(3)
    psir[0] = psi
    Xr = np.zeros((5, 2))
    Xr[0] = X
    return ReferenceSample(zref=zr, psiref=psir, Xref=Xr)
