"""Multimodal MCMC via down-up proposals, with tempering baselines.

The core kernel proposes by forcing a move downhill in density, then
uphill, so that proposals land near other modes; a companion draw makes
the acceptance probability computable.  The package also provides plain
Metropolis, parallel tempering, tempered transitions, block-Gibbs
composition, exact discrete-chain verification, and an experiment runner.
"""

from .diagnostics import (
    ChainSummary,
    autocorrelation,
    evaluation_accounting,
    frequency_error_rate,
    modes_discovered,
    mse_ratio,
    nearest_mode_frequencies,
)
from .gibbs import BlockSpec, GibbsState, conditional_log_target, gibbs_sweep
from .kernels import (
    DownUpState,
    StepReport,
    down_up_step,
    forced_downhill,
    forced_uphill,
    initial_state,
    joint_log_acceptance,
    log_density_ratio,
    metropolis_step,
)
from .proposals import GaussianProposal, adapt_from_sample
from .targets import (
    EvalCounter,
    GaussianMixtureTarget,
    LogTarget,
    SensorNetworkTarget,
    cube_mixture,
    eval_log_density,
    simulate_sensor_data,
    twenty_mode_mixture,
)
from .tempering import PtEnsemble, TemperatureLadder, pt_step, tempered_transition_step

__all__ = [
    "BlockSpec",
    "ChainSummary",
    "DownUpState",
    "EvalCounter",
    "GaussianMixtureTarget",
    "GaussianProposal",
    "GibbsState",
    "LogTarget",
    "PtEnsemble",
    "SensorNetworkTarget",
    "StepReport",
    "TemperatureLadder",
    "adapt_from_sample",
    "autocorrelation",
    "conditional_log_target",
    "cube_mixture",
    "down_up_step",
    "eval_log_density",
    "evaluation_accounting",
    "forced_downhill",
    "forced_uphill",
    "frequency_error_rate",
    "gibbs_sweep",
    "initial_state",
    "joint_log_acceptance",
    "log_density_ratio",
    "metropolis_step",
    "modes_discovered",
    "mse_ratio",
    "nearest_mode_frequencies",
    "pt_step",
    "simulate_sensor_data",
    "tempered_transition_step",
    "twenty_mode_mixture",
]

__version__ = "0.1.0"
