"""Numerical laboratory for a free-boundary vector-host epidemic model.

Simulates the two-front moving-boundary reaction-diffusion system,
computes reproduction-number thresholds on fixed and moving domains,
classifies spreading versus vanishing outcomes, and estimates traveling
and free-boundary front speeds.
"""
from .analysis import (
    AnalysisError,
    Classification,
    ClassifyThresholds,
    MuBracket,
    SpeedEstimate,
    audit_lower_solution,
    audit_upper_solution,
    build_lower_solution,
    build_upper_solution,
    classify,
    classify_logistic,
    estimate_speed,
    lower_never_crossed,
    mass_functional,
    upper_dominates,
    vanishing_flux_consistent,
    vanishing_mu_bracket,
)
from .frontsolver import (
    FrontState,
    InitialData,
    LogisticInitial,
    SimulationTrace,
    SolverConfig,
    SolverError,
    bump_initial,
    c1_speed_bound,
    cosine_initial,
    front_flux,
    logistic_cosine_initial,
    run,
    run_logistic,
    step,
    tabulated_initial,
)
from .model import (
    EndemicEquilibrium,
    EpidemicParams,
    OdeState2,
    OdeState4,
    ParameterError,
    endemic_equilibrium,
    integrate_ode2,
    integrate_ode4,
    reproduction_number_r0,
    validate_params,
)
from .runner import run_scenario, run_sweep
from .scenario import (
    Scenario,
    ScenarioParseError,
    parse_scenario,
    serialize_scenario,
)
from .thresholds import (
    DomainInterval,
    EigenConstruction,
    ThresholdReport,
    lambda_star,
    mu1_of_r,
    r0_dirichlet,
    r0_dirichlet_oracle,
    r0_free,
    threshold_report,
)
from .wavespeed import (
    WaveSpeedResult,
    WavespeedError,
    c_min,
    c_min_logistic,
    dispersion_point,
    k0_logistic,
    k0_wnv,
    semi_wavefront_logistic,
    semi_wavefront_wnv,
)

__version__ = "0.1.0"
