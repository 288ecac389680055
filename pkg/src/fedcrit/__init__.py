"""Federated deep learning simulator for critically imbalanced outlier detection."""

from .aggregation import (
    AggregationSpec,
    FedAdpState,
    easgd_aggregate,
    fed_avg,
    fedadp_aggregate,
    fedadp_angle,
    fedadp_smooth,
    fedadp_weight_map,
    ss_fed_avg,
)
from .data import Dataset, load_csv, minmax_normalize, stratified_split, synth_imbalanced, write_csv
from .errors import (
    ConfigError,
    ContractError,
    DegenerateGradientError,
    FedCritError,
    IngestionError,
    ShapeError,
    UndefinedMetricError,
)
from .federation import FederationConfig, FederationState, evaluate_round, run_pretraining, run_retraining
from .losses import (
    ImbalanceProfile,
    LossSpec,
    adaptive_focal_loss,
    adaptive_rho,
    crude_imbalance_ratio,
    focal_loss,
    mse_loss,
)
from .metrics import confusion, detection_rate, f_score, g_mean, roc_auc
from .nn import (
    Network,
    NetworkSpec,
    TrainConfig,
    init_from_autoencoder,
    init_params,
    loss_gradient,
    pretrain_autoencoder,
    train_local,
)
from .partition import PartitionSet, homogeneity, kmeans_partition, partition_stats, verify_theorem1

__version__ = "0.1.0"
