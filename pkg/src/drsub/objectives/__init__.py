from .setfunctions import (
    MAX_ENUMERATION_N,
    CallableSetFunction,
    Coverage,
    ListFamily,
    Mixture,
    Modular,
    RatingsFamily,
    RatingsMatrix,
    SetFunction,
    SetFunctionFamily,
    all_masks,
    as_family,
    as_mask,
    concave_over_modular,
    coverage_from_sets,
    facility_location,
    modular,
)
from .continuous import (
    ContinuousObjective,
    FunctionObjective,
    MultilinearObjective,
    multilinear_eval_exact,
    multilinear_eval_sampled,
    multilinear_grad_estimate,
    multilinear_grad_exact,
    multilinear_objective,
    sample_sets,
    stochastic_objective,
)
from .checks import check_dr_crossderiv, check_submodular_bruteforce, estimate_gamma, smoothness_bound_l1
