"""Sequential wealth-process tests, confidence sequences, and audit sampling.

A unit starting wealth is multiplied by a nonnegative betting factor per
observation; under the null the wealth is a supermartingale, so crossing
1/alpha at any time is a level-alpha rejection, valid at any stopping rule.
"""

from .core import (
    Decision,
    Direction,
    DomainError,
    Fixed,
    HypothesisSpec,
    IntegratedGrid,
    ParamPolicy,
    Schedule,
    TwoSidedProcess,
    WealthState,
    combine_two_sided,
    decision,
    effective_c,
    factor_lower,
    factor_upper,
    update,
)
from .performance import (
    Bernoulli,
    BetaDist,
    Empirical,
    GrowthReport,
    NoGrowthError,
    PointMass,
    ScaledBernoulli,
    TwoPoint,
    WorstCase,
    c_max,
    c_opt,
    lambda_derivatives,
    lambda_of_c,
    log_factor_moments,
    sample_size_report,
    type1_band,
    worst_case,
)
from .confidence import (
    ConfidenceState,
    FamilyDirection,
    FamilyGrid,
    IntervalResult,
    SwitchUnsafeError,
    confidence_interval,
    family_update,
    lower_bound,
    switch_from_test,
    upper_bound,
)
from .audit import (
    AcceptancePlan,
    AuditItem,
    AuditPopulation,
    NotYetDecidable,
    NullSatisfiedWarning,
    StratifiedTest,
    WithoutReplacementState,
    acceptance_plan,
    aicpa_sample_size,
    pps_draw,
    residual_mean,
    wr_update,
)
from .factors import (
    bernoulli_lr_factor,
    binomial_tail_martingale_step,
    hoeffding_upper_bound,
    poisson_factor,
    subgaussian_factor,
)

__version__ = "0.1.0"
