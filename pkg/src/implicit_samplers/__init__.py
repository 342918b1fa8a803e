"""Implicit weighted samplers (linear and random maps, with symmetrization) and small-noise quality predictions."""

from .asymptotics import TaylorMoments, estimate_taylor_moments, predict_q, randomwalk_closed_form
from .optimize import OptimizeOptions, minimize
from .problems import Lorenz63Problem, RandomWalkProblem, generate_lorenz_instance, lorenz_target, randomwalk_target
from .quality import QualityReport, estimate_q, fit_slope
from .samplers import METHODS, LambdaOptions, WeightedSample, draw_ensemble, log_weights
from .target import ModeInfo, TargetDensity

__all__ = [
    "METHODS", "LambdaOptions", "Lorenz63Problem", "ModeInfo", "OptimizeOptions", "QualityReport",
    "RandomWalkProblem", "TargetDensity", "TaylorMoments", "WeightedSample", "draw_ensemble", "estimate_q",
    "estimate_taylor_moments", "fit_slope", "generate_lorenz_instance", "log_weights", "lorenz_target", "minimize",
    "predict_q", "randomwalk_closed_form", "randomwalk_target",
]
