"""Layerwise QAOA state-preparation laboratory."""

__version__ = "0.1.0"

from .symcore import (  # noqa: F401
    LayerAngles,
    MixerGenerator,
    SymmetricState,
    apply_mixer,
    apply_phase_separator,
    gamma_eliminated_curve,
    gamma_eliminated_overlap,
    mixer,
    overlap,
    plus_state,
    random_symmetric_state,
    run_schedule,
    saturation_derivatives,
)
from .densecore import (  # noqa: F401
    DenseState,
    NoiseConfig,
    ResourceCapError,
    lift,
    overlap_dense,
    project_symmetric,
    run_schedule_dense,
)
from .training import (  # noqa: F401
    OptimizerSettings,
    TrainingTrace,
    train_cutoff,
    train_global,
    train_layerwise,
    train_layerwise_noisy,
)
from .analysis import (  # noqa: F401
    BetaScheduleStats,
    ConditionCheck,
    SaturationReport,
    beta_schedule_stats,
    check_conditions,
    detect_saturation,
    effective_beta,
    make_nontrainable_state,
    trainability_probe,
)
