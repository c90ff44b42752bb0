"""Blow-up time bounds for coupled semilinear SPDEs.

The library brackets the random explosion time of a coupled pair of
stochastically forced reaction-diffusion equations between explicit
first-crossing times of exponential functionals of the driving Brownian
motion, integrates the associated comparison ODE system to an empirical
blow-up time, and evaluates the closed-form gamma-law probabilities of the
never-crossing events.
"""

from .spectral import DomainSpec, SpectralData, InitialMass, solve_eigenpair, eval_psi, initial_mass
from .model import (
    ModelParams,
    ModelParams2D,
    CaseTag,
    classify_case,
    check_rho_conditions,
    check_rho_conditions_2d,
    check_epsilon_conditions,
    young_constant,
)
from .paths import SimGrid, BrownianPath, sample_path
from .functionals import (
    Term,
    FunctionalSpec,
    ExpFunctional,
    StoppingOutcome,
    accumulate,
    first_crossing,
    multi_crossing,
)
from .bounds import (
    UpperBoundUnavailable,
    ThresholdSet,
    lower_thresholds,
    upper_threshold,
    lower_thresholds_2d,
    upper_threshold_2d,
    threshold_set,
    global_solution_check,
)
from .ode import OdeSystemKind, BlowupResult, SandwichReport, integrate, sandwich_check
from .dist import (
    GammaParams,
    reg_gamma_lower,
    reg_gamma_upper,
    inv_gamma_density,
    blowup_probability_closed_form,
    blowup_probability_mc,
    yor_oracle,
    ks_distance,
    compare_noise_predicate,
    noise_comparison_inputs,
)
from .config import RunConfig, ConfigError, parse_config, load_config

__version__ = "0.1.0"
