"""Quadrotor trajectory tracking through a unidirectionally connected fully actuated model."""

from .control import ControllerGains, TrackingController, control_step
from .errors import FeasibilityError, NearSingularError, SingularKinematicsError
from .fas_model import (
    InputConstraintSet,
    VirtualInputs,
    det_G_X_closed_form,
    G_X,
    physical_to_virtual,
    virtual_to_physical,
)
from .feasibility import GridSampling, UniformSampling, check_joint, check_membership, estimate_roea
from .plant import ActuatorLimits, PhysicalInput, PlantState, QuadrotorParams, simulate
from .synthesis import ParametricDesign, companion, synthesize_gains, verify_spectrum
from .trajectory import ConstantReference, SpiralSpec, spiral_reference

__all__ = [
    "ActuatorLimits", "ConstantReference", "ControllerGains", "FeasibilityError", "G_X", "GridSampling",
    "InputConstraintSet", "NearSingularError", "ParametricDesign", "PhysicalInput", "PlantState",
    "QuadrotorParams", "SingularKinematicsError", "SpiralSpec", "TrackingController", "UniformSampling",
    "VirtualInputs", "check_joint", "check_membership", "companion", "control_step", "det_G_X_closed_form",
    "estimate_roea", "physical_to_virtual", "simulate", "spiral_reference", "synthesize_gains",
    "verify_spectrum", "virtual_to_physical",
]
