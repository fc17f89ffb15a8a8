"""Desk-scale simulation and analysis lab for dynamic-target proof-of-work."""

__version__ = "0.1.0"

from .core_model import (  # noqa: F401
    InfiniteDifficultyError,
    MinerSpec,
    NormalizedTarget,
    ProtocolParams,
    pit_transform,
    reward,
    sample_block_time,
    sub_difficulty,
    subtarget,
    tuning_constant,
    variance_ratio,
)
from .daa import ChainState, bitcoin_adjust, radium_adjust, record_block  # noqa: F401
from .analysis import (  # noqa: F401
    AttackBound,
    attacker_expected_time,
    bobtail_equivalent_j,
    equilibrium_tau,
    future_mine_bound,
)
from .sim_engine import (  # noqa: F401
    ExperimentConfig,
    SummaryStats,
    TrialRecord,
    run_daa_experiment,
    run_defacto_future_mine,
    run_doublespend,
    run_future_mine_attack,
    run_orphan_experiment,
    run_switch_mine,
)
