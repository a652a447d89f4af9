"""specgal: spectral-Galerkin toolkit for damped hyperbolic and heat SPDEs.

Capabilities: block spectral calculus with exact eigen charts,
controllability Gramians and steering controls, exact sampling of
stochastic convolutions, Holder drift functionals, mild-solution schemes,
backward Kolmogorov solves with Gaussian smoothing bounds, maximal
regularity ratios, and exact-rational admissibility checks.
"""

from .admissibility import (  # noqa: F401
    CHECKLISTS,
    STATEMENTS,
    AdmissibilityReport,
    Verdict,
    check,
    theta_threshold,
)
from .config import (  # noqa: F401
    ExperimentConfig,
    config_hash,
    from_dict,
    load_config,
    preset,
    preset_names,
    save_config,
)
from .control import (  # noqa: F401
    ControlSignal,
    GammaIntegralReport,
    GammaReport,
    GramianSet,
    default_profile_degree,
    gamma_integral,
    gamma_norm,
    gramian,
    minimal_energy,
    synthesize_control,
    verify_steering,
    worst_case_energy,
)
from .drift import (  # noqa: F401
    Drift,
    DriftSpec,
    apply_drift,
    counterexample_operator,
    counterexample_pointwise,
    holder_seminorm_estimate,
    per_mode_holder_norms,
)
from .errors import *  # noqa: F401,F403
from .kolmogorov import (  # noqa: F401
    ConstantsLedger,
    KolmogorovField,
    OUGradientReport,
    OUKernel,
    constants_ledger,
    drift_field_data,
    k_profile,
    ou_apply,
    ou_gradient,
    solve_backward,
)
from .noise import (  # noqa: F401
    NoisePath,
    NoiseSpec,
    SeriesReport,
    TraceReport,
    holder_series_condition,
    sample_convolution,
    weighted_trace_test,
)
from .regularity import (  # noqa: F401
    MaxRegReport,
    ResolventScan,
    maxreg_ratio,
    resolvent_line_scan,
)
from .reports import (  # noqa: F401
    csv_text,
    environment_versions,
    manifest_dict,
    write_csv,
    write_manifest,
)
from .simulate import (  # noqa: F401
    GalerkinReport,
    ItoTanakaReport,
    PathPair,
    SimGrid,
    UniquenessReport,
    counterexample_residual,
    counterexample_trajectory,
    galerkin_convergence,
    ito_tanaka_residual,
    simulate_mild,
    uniqueness_experiment,
)
from .spectral import (  # noqa: F401
    AsymptoticsReport,
    BaseMode,
    OperatorSpec,
    SpectralBlock,
    SpectralField,
    Spectrum,
    build_spectrum,
    fit_asymptotics,
    fractional_power_apply,
    mode_values,
    resolvent_apply,
    semigroup_apply,
)

__version__ = "0.1.0"
