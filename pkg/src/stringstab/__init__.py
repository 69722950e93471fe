"""String-stability analysis and simulation of asymmetric bidirectional
vehicle chains: flow transfer functions, H-infinity estimates, closed-form
chain responses and time-domain (L2,l2) norms.
"""

from .errors import (
    ConfigError,
    DegeneratePointError,
    DivergenceError,
    EvaluationError,
    InvalidGainsError,
    SingularMatrixError,
    StringStabError,
)
from .tf_core import (
    AffineTerm,
    ControllerGains,
    eval_affine,
    eval_c1,
    eval_c2,
    eval_m,
    quadratic_residuals,
)
from .freq_analysis import (
    DEFAULT_GRID,
    ONE_TOLERANCE,
    FrequencyGrid,
    LemmaReport,
    NormEstimate,
    TuneResult,
    check_lemma1,
    check_lemma2_product,
    gains_for_ratio,
    hinf_norm,
    tune_alpha,
)
from .chain_closedform import (
    BoundaryEntries,
    ChainResponse,
    DenominatorMinima,
    assemble_S,
    boundary_entries,
    check_denominator_conditions,
    closedform_chain_response,
    flow_vectors,
    solve_direct,
    transfer_at,
    verify_msq,
)
from .sim_time import (
    WAVEFORMS,
    DisturbanceSpec,
    PlatoonState,
    SimConfig,
    SimResult,
    assemble_closed_loop,
    default_dt,
    default_t_end,
    error_dynamics_matrix,
    integrate,
    l2l2_norm,
    spectral_abscissa,
    step_guard_limit,
    sweep_N,
)

REFERENCE_GAINS = ControllerGains.from_gains(1.0, 1.0, 10.0, 100.0)
"""Reference tuning used by the CLI defaults and the test suite."""

__version__ = "0.1.0"
