"""Block-wise Gibbs composition of the sampling kernels.

Each block owns a kernel (down-up, Metropolis, or tempered transitions)
that targets the conditional density of its coordinates given the rest.
Down-up blocks carry their companion point across sweeps: the companion
is used only to draw the block's next value, never to update other
blocks.

Caching across sweeps uses dirty flags: a block's stored conditional
log-densities (of its point and, for down-up blocks, its companion) are
re-evaluated, and counted, at the start of its update whenever another
block has changed since, because the conditional itself has moved and
the old values are stale.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .kernels import DownUpState, StepReport, down_up_step, metropolis_step
from .proposals import GaussianProposal
from .targets import LogTarget, eval_log_density
from .tempering import TemperatureLadder, tempered_transition_step

KERNEL_CHOICES = ("downup", "metropolis", "tempered")


@dataclass(frozen=True)
class BlockSpec:
    """One Gibbs block: a named coordinate set and its kernel configuration."""

    name: str
    indices: tuple
    kernel: str
    proposal: GaussianProposal | None = None
    ladder: TemperatureLadder | None = None

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
        if self.kernel not in KERNEL_CHOICES:
            raise ValueError(f"kernel must be one of {KERNEL_CHOICES}")
        if self.kernel in ("downup", "metropolis") and self.proposal is None:
            raise ValueError(f"block {self.name!r} needs a proposal")
        if self.kernel == "tempered" and self.ladder is None:
            raise ValueError(f"block {self.name!r} needs a temperature ladder")


def validate_blocks(blocks, dim: int) -> None:
    """Blocks must partition the coordinate indices 0..dim-1 exactly."""
    seen = [i for b in blocks for i in b.indices]
    if sorted(seen) != list(range(dim)):
        raise ValueError(
            f"block index sets must partition 0..{dim - 1}, got {sorted(seen)}")


def conditional_log_target(joint_target: LogTarget, indices, frozen_full) -> LogTarget:
    """The joint log-density as a function of one block, others frozen.

    The returned target evaluates the full joint with the block's
    coordinates substituted, so one conditional evaluation costs one
    joint evaluation.
    """
    base = np.array(frozen_full, dtype=float)
    idx = np.asarray(indices, dtype=int)

    def log_density(v):
        point = base.copy()
        point[idx] = v
        return joint_target.log_density(point)

    return LogTarget(len(idx), log_density)


class BlockUpdate(NamedTuple):
    accepted: bool
    step: StepReport | None


@dataclass
class GibbsState:
    """Full chain vector plus per-block companions and cached conditionals."""

    x: np.ndarray
    aux: dict = field(default_factory=dict)
    logp: dict = field(default_factory=dict)
    logp_aux: dict = field(default_factory=dict)
    dirty: dict = field(default_factory=dict)


def init_gibbs_state(x0, blocks, joint_target: LogTarget, counters) -> GibbsState:
    """Evaluate every block's conditional once; companions start at the block values."""
    validate_blocks(blocks, joint_target.dim)
    x0 = np.asarray(x0, dtype=float)
    state = GibbsState(x=x0.copy())
    for block in blocks:
        idx = np.asarray(block.indices)
        cond = conditional_log_target(joint_target, idx, state.x)
        logp = eval_log_density(cond, state.x[idx], counters[block.name], "other")
        state.logp[block.name] = logp
        state.dirty[block.name] = False
        if block.kernel == "downup":
            state.aux[block.name] = state.x[idx].copy()
            state.logp_aux[block.name] = logp
    return state


def gibbs_sweep(state: GibbsState, blocks, joint_target: LogTarget, rng,
                counters, max_tries: int = 10 ** 6):
    """One systematic-scan sweep over the blocks, in their listed order.

    Returns:
        Tuple ``(state, updates)`` where ``updates`` maps block name to a
        :class:`BlockUpdate` for this sweep.
    """
    updates = {}
    for block in blocks:
        name = block.name
        idx = np.asarray(block.indices)
        counter = counters[name]
        cond = conditional_log_target(joint_target, idx, state.x)

        if state.dirty[name]:
            state.logp[name] = eval_log_density(cond, state.x[idx], counter, "other")
            if block.kernel == "downup":
                state.logp_aux[name] = eval_log_density(
                    cond, state.aux[name], counter, "other")
            state.dirty[name] = False

        if block.kernel == "downup":
            block_state = DownUpState(state.x[idx].copy(), state.aux[name],
                                      state.logp[name], state.logp_aux[name])
            block_state, report = down_up_step(block_state, block.proposal, cond,
                                               rng, counter, max_tries)
            changed = report.accepted
            if changed:
                state.x[idx] = block_state.x
                state.aux[name] = block_state.z
                state.logp[name] = block_state.logp_x
                state.logp_aux[name] = block_state.logp_z
            updates[name] = BlockUpdate(changed, report)
        elif block.kernel == "metropolis":
            point, logp, changed = metropolis_step(
                state.x[idx].copy(), state.logp[name], block.proposal, cond,
                rng, counter)
            if changed:
                state.x[idx] = point
                state.logp[name] = logp
            updates[name] = BlockUpdate(changed, None)
        else:
            report = tempered_transition_step(
                state.x[idx].copy(), cond, block.ladder, rng, counter,
                logp_x=state.logp[name])
            changed = report.accepted
            if changed:
                state.x[idx] = report.x
                state.logp[name] = report.logp
            updates[name] = BlockUpdate(changed, None)

        if changed:
            for other in blocks:
                if other.name != name:
                    state.dirty[other.name] = True
    return state, updates
