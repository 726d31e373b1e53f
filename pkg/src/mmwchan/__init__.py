"""Statistical 60 GHz industrial channel synthesis and trace analysis.

Forward direction: scenario profiles (distribution specs calibrated against
published per-scenario quartile tables) generate synthetic channel impulse
responses as cluster tap-delay lines.  Inverse direction: tap traces are
partitioned into time clusters, model parameters extracted, and distribution
families fitted and selected by goodness of fit.
"""

__version__ = "0.1.0"

from .distributions import (
    DistributionSpec,
    Family,
    FitError,
    SelectionError,
    cdf,
    fit_mle,
    gamma,
    gev,
    gpd,
    inverse_gaussian,
    ks_statistic,
    pdf,
    point_mass,
    quantile,
    sample,
    select_family,
)
from .channel import (
    AngularInfo,
    BeamPattern,
    ChannelRealization,
    Cluster,
    EmptyChannelError,
    GenerationError,
    PathTap,
    apply_beam_filter,
    draw_parameters,
    generate_realization,
    realization_to_taps,
)
from .profiles import (
    CalibrationError,
    CalibrationResult,
    QuartileTarget,
    Scenario,
    ScenarioProfile,
    builtin_profiles,
    builtin_targets,
    calibrate,
    calibrate_profile,
    profile_by_id,
    simulate_profile_quartiles,
    validate_profile,
)
from .trace import (
    EmptySeriesError,
    FitReport,
    ParameterSamples,
    TapSeries,
    extract_parameters,
    fit_report,
    partition_clusters,
    threshold_taps,
)
from .metrics import (
    FrequencyResponse,
    coherence_bandwidth,
    frequency_response,
    peak_to_average,
    rms_delay_spread,
)
