"""Segmentation of multivariate time series into recurrent hidden phases.

The pipeline marks subarea-specific extreme events, tracks the gaps between
their recurrences, fits region-wise geometric rates through an exhaustive
two-level threshold search, and clusters time points on the stacked rate
features with iterative feature weighting.
"""

from .ballgen import BallSet, FeatureMatrix, extract_features, generate_balls, kmeans
from .errors import (
    DegenerateInputError,
    ParameterError,
    ParseError,
    RegimeSegError,
    SizeError,
    ValidationError,
)
from .evaluation import (
    AccuracyReport,
    HeavyTailReport,
    decoding_accuracy,
    gaussian_kde,
    heavy_tailedness,
    replicate_experiment,
    replicate_table,
    run_replication,
    toy_sigma_replication,
)
from .excursion import (
    ExcursionSequence,
    RecurrenceTimes,
    ball_encode,
    recurrence_times,
    tail_encode,
    threshold_encode,
)
from .hfs import (
    FitReport,
    HfsParams,
    HfsResult,
    Segmentation,
    geometric_mle,
    hfs_decode,
    hfs_search,
    pp_plot_data,
    segmentation_loss,
)
from .simgen import (
    LabeledSeries,
    ScenarioSpec,
    gen_ar,
    gen_bivariate_gaussian,
    gen_sigma_switch,
    gen_switching_periods,
    simulate,
)
from .timeseries import (
    MultiSeries,
    Permutation,
    block_permute,
    embed_lags,
    from_array,
    load_csv,
    save_csv,
    standardize,
)
from .weighting import (
    DecodeConfig,
    DecodeResult,
    decode,
    delta_target,
    entropy_target,
    fwsa_target,
    nmi_target,
    update_weights,
    weighted_kmeans,
)

__version__ = "0.1.0"
