"""Explicit finite-difference solver for coupled KdV systems.

The package couples a two-step midpoint integrator over five-point spatial
stencils with a step-size gate derived from the scheme's conditional
stability, the exact Hirota-Satsuma one-soliton as an accuracy oracle, and
conservation and refinement diagnostics.
"""

from .analytic import (
    BoxIC,
    CustomIC,
    HsSolitonIC,
    InitialCondition,
    ScaledSolitonIC,
    SingularityError,
    SolitonParams,
    TriangleIC,
    decay_integral,
    hs_one_soliton,
    hs_pde_residual,
    sample_ic,
)
from .config import (
    ConfigError,
    RunConfig,
    amplitude_to_m,
    analytic_oracle,
    load_config,
    scenario_presets,
)
from .diagnostics import (
    ConvergenceRow,
    DiagnosticSample,
    convergence_study,
    count_solitons,
    find_peaks,
    hs_conserved,
    l2_norm,
    percent_error,
)
from .model import (
    Boundary,
    CoupledSystem,
    Grid,
    SchemeCoefficients,
    WaveState,
    effective_dispersion,
    hs_integrable_system,
    hs_nonintegrable_system,
    single_kdv_system,
)
from .scheme import (
    DivergenceError,
    IntegrationResult,
    SequencingError,
    Simulation,
    central_d1,
    central_d3,
    full_step,
    half_step,
    integrate,
    rhs,
)
from .stability import (
    MonitorStatus,
    StabilityError,
    StabilityReport,
    Verdict,
    check_relation,
    growth_exponent,
    monitor,
    stability_report,
    suggest_timestep,
)

__version__ = "0.1.0"
