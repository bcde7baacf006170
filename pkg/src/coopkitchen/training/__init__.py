from .bc import (
    BcResult,
    EmptyAfterFilter,
    SingleClassDegenerate,
    TrajectoryDataset,
    import_raw_trajectories,
    paired_score,
    record_trajectories,
    train_bc,
)
from .config import BadTrainingConfig, TrainingConfig, load_training_config, save_training_config
from .envs import (
    BanditEnv,
    ManagerEnv,
    MaskedActionChosen,
    NoFeasibleSubTask,
    PairedKitchenEnv,
    SelfPlayEnv,
    SubTaskUsageCounter,
    WorkerEnv,
    WorkerEnvConfig,
    counter_steps_saved,
    pot_bonus_applies,
    sample_subtask,
)
from .ppo import (
    DivergedValueFunction,
    LearningCurve,
    NanLoss,
    PpoConfig,
    RolloutEnv,
    compute_gae,
    ppo_loss,
    ppo_train,
)
from .selfplay import (
    BaseAgentSpec,
    SelfPlayResult,
    build_population,
    default_population_specs,
    selfplay_score,
    train_base_agent,
)
from .variants import (
    MixturePolicy,
    VARIANTS,
    VariantResult,
    train_flat_variant,
    train_hierarchical_variant,
    train_manager,
    train_variant,
    train_worker,
)
