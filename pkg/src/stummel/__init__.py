"""Stummel-class moduli and Morrey/Lorentz norms for singular test functions."""
from .catalog import TestFunction, eval_function, radial_profile
from .inclusion import (
    TheoremId,
    check_theorem,
    fit_envelope,
    predict_and_check_morrey,
    verify_paper,
    verify_quantitative_bound,
)
from .modulus import MembershipVerdict, ModulusCurve, classify, eta, modulus_curve
from .quad import DIVERGENT, integrate_ball_mc, integrate_radial
from .scale import ScaleFunction, check_conditions
from .spaces import (
    SpaceSpec,
    decreasing_rearrangement,
    distribution_function,
    layer_cake,
    lorentz_norm,
    morrey_norm,
    norm,
    weak_morrey_norm,
)

__all__ = [
    "DIVERGENT", "MembershipVerdict", "ModulusCurve", "ScaleFunction", "SpaceSpec", "TestFunction",
    "TheoremId", "check_conditions", "check_theorem", "classify", "decreasing_rearrangement",
    "distribution_function", "eta", "eval_function", "fit_envelope", "integrate_ball_mc",
    "integrate_radial", "layer_cake", "lorentz_norm", "modulus_curve", "morrey_norm", "norm",
    "predict_and_check_morrey", "radial_profile", "verify_paper", "verify_quantitative_bound",
    "weak_morrey_norm",
]
