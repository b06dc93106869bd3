"""Shape of small cells in stationary Poisson line/hyperplane tessellations.

Thin Python face of the C++ core: model construction, reproducible
typical-cell sampling, the analytic small-cell laws, and the study drivers.
"""

from ._core import (
    Model,
    NumericError,
    bessel_k1,
    cdf_half_perimeter,
    cond_sigma_given_area,
    cond_sigma_given_perimeter,
    cond_tau_given_area,
    convergence_csv,
    edge_rates,
    exp_integral_e1,
    joint_sigma_perimeter,
    model_from_string,
    model_to_string,
    numerator_sigma_area,
    prob_area_less,
    sample_cells,
    select_k_smallest,
    sigma,
    standard_model_2d,
    standard_model_3d,
    study_report_json,
    tau,
    tessellate_window,
)

__all__ = [
    "Model",
    "NumericError",
    "bessel_k1",
    "cdf_half_perimeter",
    "cond_sigma_given_area",
    "cond_sigma_given_perimeter",
    "cond_tau_given_area",
    "convergence_csv",
    "edge_rates",
    "exp_integral_e1",
    "joint_sigma_perimeter",
    "model_from_string",
    "model_to_string",
    "numerator_sigma_area",
    "prob_area_less",
    "sample_cells",
    "select_k_smallest",
    "sigma",
    "standard_model_2d",
    "standard_model_3d",
    "study_report_json",
    "tau",
    "tessellate_window",
]
