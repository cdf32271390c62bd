"""Geometric shaping of asymmetric QAM for fluid-antenna SWIPT receivers."""

from .channel import (
    ChannelEnsemble,
    CorrelationSpec,
    PortStrategy,
    bessel_j0,
    build_correlation_matrix,
    gain_moments,
    load_ensemble,
    psd_factor,
    sample_ensemble,
    save_ensemble,
    select_ports,
)
from .constellation import (
    Constellation,
    ConstellationRecord,
    RecordParseError,
    load_record,
    make_apsk,
    make_square_qam,
    normalize,
    save_record,
    validate,
)
from .energy import (
    EhParams,
    average_harvested_current,
    epsilon_max,
    harvested_current,
    moment2,
    moment4,
    papr,
)
from .info import (
    MiEstimate,
    SnrSpec,
    average_dimi,
    dimi_given_channel,
    dimi_lower_bound,
    ml_detect,
    ssr,
)
from .optimizer import (
    InfeasibleError,
    ParetoFront,
    SolveConfig,
    SolveResult,
    feasible_init,
    pareto_sweep,
    solve_p2,
)

__version__ = "0.1.0"
