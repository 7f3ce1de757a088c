"""Learning/forgetting dynamics: simulation and lesson-plan optimization."""

from learnsim._backend import BACKEND
from learnsim.engine import SimConfig, Trajectory, simulate, simulate_pr1
from learnsim.models import OneCompParams, TwoCompT1Params, TwoCompT2Params

__all__ = [
    "BACKEND",
    "OneCompParams",
    "SimConfig",
    "Trajectory",
    "TwoCompT1Params",
    "TwoCompT2Params",
    "simulate",
    "simulate_pr1",
]
__version__ = "0.1.0"
