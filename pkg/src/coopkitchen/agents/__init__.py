from .policies import (
    Actor,
    EncoderMismatch,
    Policy,
    RandomPolicy,
    ScriptedGreedyPolicy,
    StayPolicy,
    act,
)
from .neural import (
    ActorCriticNet,
    HierarchicalPolicy,
    NetworkSpec,
    NeuralPolicy,
    act_hierarchical,
    masked_log_probs,
    sample_action,
)
from .checkpoint import (
    CorruptCheckpoint,
    Population,
    PopulationEntry,
    VersionMismatch,
    load_checkpoint,
    load_population_manifest,
    params_hash,
    save_checkpoint,
    save_population_manifest,
)
