"""Triadic counterexample weights, Hilbert transforms and Orlicz maximal operators."""

from wtlab._core import (
    CapacityError,
    ParamError,
    Rational3,
    Side,
    SingularityError,
    StepFunction,
    TailRefusal,
    TriadicInterval,
    YoungFunction,
    build_weight,
    exact_total_mass,
    growth_factor,
    hilbert,
    hilbert_convention,
    luxemburg_norm,
    maximal,
    mphi_mr_bound_constant,
    orientation_search,
    orlicz_maximal,
    r_k,
    run_experiment,
    superlevel_weight,
    truncation_tail,
)

__all__ = [
    "CapacityError",
    "ParamError",
    "Rational3",
    "Side",
    "SingularityError",
    "StepFunction",
    "TailRefusal",
    "TriadicInterval",
    "YoungFunction",
    "build_weight",
    "exact_total_mass",
    "growth_factor",
    "hilbert",
    "hilbert_convention",
    "luxemburg_norm",
    "maximal",
    "mphi_mr_bound_constant",
    "orientation_search",
    "orlicz_maximal",
    "r_k",
    "run_experiment",
    "superlevel_weight",
    "truncation_tail",
]
