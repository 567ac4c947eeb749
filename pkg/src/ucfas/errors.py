"""Exceptions raised when the transformed model leaves its valid region."""

from __future__ import annotations

import numpy as np


class FeasibilityError(ArithmeticError):
    """Base class; ``time`` is filled in by the simulator when known."""

    time: float | None = None


class SingularKinematicsError(FeasibilityError):
    """Roll or pitch left the open interval (-pi/2, pi/2)."""

    def __init__(self, message: str, state=None, time: float | None = None):
        super().__init__(message)
        self.state = None if state is None else np.array(state, dtype=float)
        self.time = time


class NearSingularError(FeasibilityError):
    """G_X is (numerically) singular, typically because u0 is ~0."""

    def __init__(self, message: str, det: float):
        super().__init__(message)
        self.det = det
        self.time = None
