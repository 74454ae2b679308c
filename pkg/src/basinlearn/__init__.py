"""Sample-efficient basin-of-attraction estimation with hybrid active learning."""

from .domain import (
    SamplePool,
    StateDomain,
    denormalize,
    make_grid_pool,
    nearest_labeled_distance,
    normalize,
)
from .dynamics import (
    Attractor,
    MagnetSystemParams,
    OracleInterface,
    SimConfig,
    SimulatedOracle,
    Trajectory,
    accel,
    find_attractors,
    find_equilibria,
    magnet_force,
    simulate,
)
from .trajectory_sampling import LabeledSample, subsample
from .svm import SvmModel, decision_value, predict, svm_fit
from .gp import GpModel, gp_fit, predict_mean
from .campaign import (
    CampaignState,
    HalConfig,
    bootstrap,
    new_campaign,
    replay_events,
    run_campaign,
    run_episode,
    select_al,
    select_dbs,
)
from .evaluation import (
    F1Report,
    GroundTruthGrid,
    f1_score,
    ground_truth,
    knn_export,
    labels_to_f1_table,
    uniform_baseline,
)

__version__ = "0.1.0"
