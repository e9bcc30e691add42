"""Clustering fluctuations and attractor-ruin strength in globally coupled logistic maps."""

__version__ = "0.1.0"

from gcm_ot.analysis import (
    RuinStatistics,
    classify_phase,
    ed_series,
    ensemble_average,
    ot_series,
    ruin_strength,
    run_ensemble,
    shannon_entropy,
    time_average,
)
from gcm_ot.clustering import (
    ClusterDistribution,
    ClusteringPattern,
    cluster_distribution,
    cluster_pattern,
    effective_dimension,
    quantize,
)
from gcm_ot.dynamics import (
    GcmParams,
    SystemState,
    Trajectory,
    logistic,
    make_initial,
    noise_vector,
    simulate,
    step,
)
from gcm_ot.transport import CostMatrix, TransportPlan, default_cost, ot_lp, w1_1d
