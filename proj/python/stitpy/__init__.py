"""Python bindings for the STIT tessellation engine."""

from ._stitpy import (
    AssumptionFailed,
    BoundInputs,
    ConfigError,
    DomainError,
    EstimationError,
    Measure,
    Simulation,
    beta_from_table,
    beta_hat,
    birth_chain_moment,
    birth_chain_tail,
    encapsulation_lower_bound,
    render_svg,
    run_battery,
    sample_zeta,
    simplified_bound,
    simulate,
    theorem2_bound,
    zeta_threshold,
)

__all__ = [
    "AssumptionFailed",
    "BoundInputs",
    "ConfigError",
    "DomainError",
    "EstimationError",
    "Measure",
    "Simulation",
    "beta_from_table",
    "beta_hat",
    "birth_chain_moment",
    "birth_chain_tail",
    "encapsulation_lower_bound",
    "render_svg",
    "run_battery",
    "sample_zeta",
    "simplified_bound",
    "simulate",
    "theorem2_bound",
    "zeta_threshold",
]
