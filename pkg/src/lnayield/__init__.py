"""Statistical yield analysis for traditional and programmable low-noise
amplifiers: receiver budget math, variability models, Monte Carlo populations,
digital mode selection, design-space exploration, and reporting."""

__version__ = "0.1.0"

from .budget import (
    ComplianceFlags,
    LnaSpecCorner,
    ReceiverTargets,
    RfQuantities,
    StageTwoLimits,
    cascade_iip3,
    cascade_noise,
    classify_receiver,
    db_to_linear,
    dbm_to_mw,
    derive_stage2_limits,
    linear_to_db,
    mw_to_dbm,
)
from .designs import (
    BuiltinDataset,
    PlnaDesign,
    PlnaMode,
    PlnaModeSpec,
    TraditionalDesign,
    builtin_designs,
    equivalent_operating_point,
    mode_from_controls,
    mode_power_mw,
    parse_config,
    parse_config_file,
)
from .montecarlo import (
    DiePopulation,
    SummaryStats,
    generate_population,
    summarize,
    violation_rates,
)
from .selection import (
    BestGain,
    BestReceiver,
    FixedMode,
    SelectionReport,
    apply_strategy,
    dynamic_range_score,
    select_best_gain,
    select_best_receiver,
)
from .statmodel import (
    CrossCouplings,
    DieSample,
    LatentDieModel,
    MarginalSpec,
    calibrate,
    fit_mean_sigma_from_tails,
    fit_sigma_from_quantile,
    fit_sigma_two_tails,
    inverse_normal_cdf,
    sample_die,
)

__all__ = [name for name in dir() if not name.startswith("_")]
