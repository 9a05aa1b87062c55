"""Parallel tempering and tempered transitions baselines.

Both samplers flatten the target with a temperature ladder.  Parallel
tempering runs one chain per rung and mixes them with state swaps;
tempered transitions make a single chain excursion up and back down the
ladder, accepting the returned candidate with a telescoping ratio.

Evaluation accounting follows the caching policy used throughout the
package: rung updates cache the tempered log-density of their current
state, so each costs one fresh evaluation, while a swap re-evaluates the
raw target at both partners (two evaluations) because only tempered
values are cached per rung.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .kernels import log_density_ratio
from .targets import EvalCounter, LogTarget, eval_log_density


@dataclass(frozen=True)
class TemperatureLadder:
    """Strictly increasing temperatures with a proposal per rung.

    ``temps[0]`` must be 1 (the untempered target).  For tempered
    transitions the rung proposals ``proposals[1:]`` are used on the way
    up and down; parallel tempering uses one proposal per rung including
    the base.
    """

    temps: tuple
    proposals: tuple

    def __post_init__(self):
        temps = tuple(float(t) for t in self.temps)
        if temps[0] != 1.0:
            raise ValueError("temperature ladder must start at 1")
        if any(b <= a for a, b in zip(temps, temps[1:])):
            raise ValueError("temperatures must be strictly increasing")
        if len(self.proposals) != len(temps):
            raise ValueError("need one proposal per rung")
        object.__setattr__(self, "temps", temps)
        object.__setattr__(self, "proposals", tuple(self.proposals))

    @property
    def n_rungs(self) -> int:
        return len(self.temps)


@dataclass
class PtEnsemble:
    """One state per rung with cached tempered log-densities.

    ``tempered_logp[j]`` always equals log pi(states[j]) / temps[j].
    """

    states: list
    tempered_logp: list
    counters: list

    @classmethod
    def initialize(cls, x0, ladder: TemperatureLadder, target: LogTarget):
        counters = [EvalCounter() for _ in ladder.temps]
        x0 = np.asarray(x0, dtype=float)
        states = [x0.copy() for _ in ladder.temps]
        tempered = [
            eval_log_density(target, states[j], counters[j], "other") / ladder.temps[j]
            for j in range(len(ladder.temps))
        ]
        return cls(states, tempered, counters)


class PtStepReport(NamedTuple):
    rung_accepted: tuple
    swap_pair: int
    swap_accepted: bool


def pt_step(ensemble: PtEnsemble, ladder: TemperatureLadder, target: LogTarget,
            rng):
    """One sweep: a Metropolis update per rung, then one adjacent swap proposal.

    The swap pair (j, j+1) is chosen uniformly and accepted with
    min{1, exp[(log pi(x_{j+1}) - log pi(x_j)) (1/T_j - 1/T_{j+1})]},
    which preserves the product of the tempered targets.  Evaluation
    cost per sweep is one per rung plus two for the swap.

    Returns:
        Tuple ``(ensemble, report)``.
    """
    temps = ladder.temps
    rung_accepted = []
    for j in range(ladder.n_rungs):
        cand = ladder.proposals[j].draw(ensemble.states[j], rng)
        logp_cand = eval_log_density(target, cand, ensemble.counters[j], "other")
        tempered_cand = logp_cand / temps[j]
        log_alpha = min(0.0, log_density_ratio(tempered_cand,
                                               ensemble.tempered_logp[j]))
        ok = rng.random() < np.exp(log_alpha)
        if ok:
            ensemble.states[j] = cand
            ensemble.tempered_logp[j] = tempered_cand
        rung_accepted.append(bool(ok))

    j = int(rng.random() * (ladder.n_rungs - 1))
    raw_lo = eval_log_density(target, ensemble.states[j], ensemble.counters[j], "other")
    raw_hi = eval_log_density(target, ensemble.states[j + 1],
                              ensemble.counters[j + 1], "other")
    delta = log_density_ratio(raw_hi, raw_lo) * (1.0 / temps[j] - 1.0 / temps[j + 1])
    swapped = rng.random() < np.exp(min(0.0, delta))
    if swapped:
        ensemble.states[j], ensemble.states[j + 1] = (ensemble.states[j + 1],
                                                      ensemble.states[j])
        ensemble.tempered_logp[j] = raw_hi / temps[j]
        ensemble.tempered_logp[j + 1] = raw_lo / temps[j + 1]
    return ensemble, PtStepReport(tuple(rung_accepted), j, bool(swapped))


class TtStepReport(NamedTuple):
    x: np.ndarray
    logp: float
    accepted: bool
    evals: int
    final_log_accept: float


def tempered_transition_step(x, target: LogTarget, ladder: TemperatureLadder,
                             rng, counter: EvalCounter,
                             logp_x: float | None = None) -> TtStepReport:
    """One up-and-down ladder excursion with a telescoping final acceptance.

    Ascending rung j proposes from that rung's jumping rule and accepts
    with the tempered ratio at temperature T_j; the descent applies the
    mirrored kernels in reverse order.  If every intra-rung proposal is
    rejected the telescoping product cancels pairwise and the final
    candidate (the starting point) is accepted with probability one.

    Args:
        logp_x: Cached raw log-density at ``x``; evaluated (and counted)
            if not supplied.

    Returns:
        :class:`TtStepReport`; ``evals`` counts fresh evaluations, which
        is twice the number of rungs when ``logp_x`` is supplied.
    """
    x = np.asarray(x, dtype=float)
    if logp_x is None:
        logp_x = eval_log_density(target, x, counter, "other")
    if logp_x == -np.inf:
        raise ValueError("tempered transitions require a positive-density start")
    temps = ladder.temps
    J = ladder.n_rungs - 1
    if J < 1:
        raise ValueError("tempered transitions need at least one rung above the base")
    inv_t = [1.0 / t for t in temps]
    evals = 0

    log_accept = 0.0
    cur, logp_cur = x, logp_x
    for j in range(1, J + 1):
        log_accept += logp_cur * (inv_t[j] - inv_t[j - 1])
        cand = ladder.proposals[j].draw(cur, rng)
        logp_cand = eval_log_density(target, cand, counter, "other")
        evals += 1
        log_alpha = min(0.0, log_density_ratio(logp_cand, logp_cur) * inv_t[j])
        if rng.random() < np.exp(log_alpha):
            cur, logp_cur = cand, logp_cand

    # The descent at rung j mirrors the ascent: same proposal scale and the
    # same tempered level in its acceptance ratio.  The kernel sequence is
    # then a palindrome, which is what makes the telescoping acceptance
    # below exact.
    for j in range(J, 0, -1):
        cand = ladder.proposals[j].draw(cur, rng)
        logp_cand = eval_log_density(target, cand, counter, "other")
        evals += 1
        log_alpha = min(0.0, log_density_ratio(logp_cand, logp_cur) * inv_t[j])
        if rng.random() < np.exp(log_alpha):
            cur, logp_cur = cand, logp_cand
        log_accept += logp_cur * (inv_t[j - 1] - inv_t[j])

    final_log_accept = min(0.0, log_accept)
    accepted = rng.random() < np.exp(final_log_accept)
    if accepted:
        return TtStepReport(cur, logp_cur, True, evals, final_log_accept)
    return TtStepReport(x, logp_x, False, evals, final_log_accept)
