"""Monte Carlo simulator for opportunistic relay selection in interfering
two-way relay networks: distributed min-interference selection, closed-form
AF/DF/lattice-CF rates, and scaling-law experiments."""

__version__ = "0.1.0"

from .model import (  # noqa: E402,F401
    ChannelRealization,
    NetworkConfig,
    Protocol,
    Selector,
    ValidationOutcome,
    db_to_linear,
    linear_to_db,
    validate_config,
)
from .channels import TrialRng, gain_power, generate_channels  # noqa: F401
from .selection import (  # noqa: F401
    SelectionResult,
    TilMatrix,
    compute_til,
    select_max_min_snr,
    select_ors,
    select_random,
)
from .rates import (  # noqa: F401
    InterferenceProfile,
    RateReport,
    af_gamma,
    compute_rates,
    interference_profile,
    rate_af,
    rate_df,
    rate_lccf,
)
from .analysis import (  # noqa: F401
    DecouplingEstimate,
    TilDistribution,
    decoupling_probability,
    dof_slope,
    til_cdf,
    til_cdf_bounds,
)
from .experiments import (  # noqa: F401
    SweepKind,
    SweepResult,
    SweepRow,
    SweepSpec,
    WorkBudgetError,
    crossover_snr,
    no_interference_bound,
    run_sweep,
)
