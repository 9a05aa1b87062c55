"""Down-up Metropolis kernel and the plain Metropolis baseline.

The down-up kernel proposes by chaining three forced Metropolis
transitions: a downhill move (reciprocal density ratio, so low-density
points are favored), an uphill move (standard ratio), and a second
downhill move that generates a companion point.  The companion makes the
overall acceptance probability computable: the intractable normalizing
constants of the forced transitions cancel, so no such constant is ever
evaluated here.

"Forced" means the transition retries until a proposal is accepted; it
has no stay-put branch.  Density ratios are regularized for near-zero
densities via :func:`log_density_ratio`; acceptance tests use the strict
form ``u < alpha``.

All kernels draw randomness from a generator exposing ``random()`` and
``standard_normal(n)``, which lets tests substitute scripted generators
to force specific paths.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .targets import EvalCounter, LogTarget, eval_log_density

DEFAULT_MAX_TRIES = 10 ** 6

NEG_INF = float("-inf")
POS_INF = float("inf")


def log_density_ratio(logp_a: float, logp_b: float) -> float:
    """log of the regularized density ratio (pi(a) + eps) / (pi(b) + eps).

    The regularizer eps is a tiny constant (conceptually the smallest
    positive double) that keeps ratios defined in zero-density valleys.
    Working in log space, its effect reduces to three cases:

      * both log-densities finite -> plain difference,
      * both ``-inf`` (both densities at eps scale) -> ratio 1,
      * exactly one ``-inf`` -> ratio 0 or +inf accordingly.
    """
    a_zero = logp_a == NEG_INF
    b_zero = logp_b == NEG_INF
    if a_zero and b_zero:
        return 0.0
    if a_zero:
        return NEG_INF
    if b_zero:
        return POS_INF
    return logp_a - logp_b


def metropolis_log_acceptance(logp_prop: float, logp_cur: float) -> float:
    """log min{1, pi(proposal) / pi(current)}."""
    return min(0.0, log_density_ratio(logp_prop, logp_cur))


def joint_log_acceptance(logp_x: float, logp_z: float,
                         logp_xs: float, logp_zs: float) -> float:
    """Log acceptance probability of the joint proposal (x*, z*).

    Computes log min{1, pi(x*) min{1, r(x, z)} / (pi(x) min{1, r(x*, z*)})}
    with r the regularized ratio.  Whenever the companion points sit at or
    below their partners in density (r >= 1 on both sides), this reduces
    bit-for-bit to the Metropolis log-acceptance of x* given x.
    """
    r_out = log_density_ratio(logp_xs, logp_x)
    if r_out == POS_INF:
        return 0.0
    if r_out == NEG_INF:
        return NEG_INF
    r_cur = min(0.0, log_density_ratio(logp_x, logp_z))
    r_prop = min(0.0, log_density_ratio(logp_xs, logp_zs))
    if r_cur == NEG_INF and r_prop == NEG_INF:
        return min(0.0, r_out)
    if r_prop == NEG_INF:
        return 0.0
    if r_cur == NEG_INF:
        return NEG_INF
    return min(0.0, r_out + r_cur - r_prop)


class DownUpState(NamedTuple):
    """Joint chain state: main point, companion point, cached log-densities."""

    x: np.ndarray
    z: np.ndarray
    logp_x: float
    logp_z: float


class StepReport(NamedTuple):
    """Per-step accounting for one down-up transition.

    ``evals`` counts fresh target evaluations; with caching this is
    exactly ``n_down + n_up + n_aux`` because the current state's density
    is never re-evaluated.
    """

    accepted: bool
    n_down: int
    n_up: int
    n_aux: int
    evals: int


def initial_state(x0, target: LogTarget, counter: EvalCounter) -> DownUpState:
    """Start the joint chain with the companion equal to the initial point."""
    x0 = np.asarray(x0, dtype=float)
    logp = eval_log_density(target, x0, counter, "other")
    return DownUpState(x0, x0, logp, logp)


def forced_downhill(x, logp_x: float, proposal, target: LogTarget, rng,
                    counter: EvalCounter, max_tries: int = DEFAULT_MAX_TRIES,
                    phase: str = "downhill"):
    """Retry proposals until one passes u < min{1, r(current, candidate)}.

    Candidates with lower density than the current point are accepted with
    probability one, so the move prefers descending the density surface.

    Returns:
        Tuple ``(point, logp, tries)``.

    Raises:
        RuntimeError: If ``max_tries`` proposals are all rejected, which
            indicates a pathologically mismatched proposal scale.
    """
    tries = 0
    while tries < max_tries:
        tries += 1
        cand = proposal.draw(x, rng)
        logp_cand = eval_log_density(target, cand, counter, phase)
        alpha = math.exp(min(0.0, log_density_ratio(logp_x, logp_cand)))
        if rng.random() < alpha:
            return cand, logp_cand, tries
    raise RuntimeError(f"forced downhill transition exceeded {max_tries} tries")


def forced_uphill(x, logp_x: float, proposal, target: LogTarget, rng,
                  counter: EvalCounter, max_tries: int = DEFAULT_MAX_TRIES,
                  phase: str = "uphill"):
    """Mirror of :func:`forced_downhill` with the standard Metropolis ratio.

    Accepts a candidate when u < min{1, r(candidate, current)}, restoring
    the pull toward high density.
    """
    tries = 0
    while tries < max_tries:
        tries += 1
        cand = proposal.draw(x, rng)
        logp_cand = eval_log_density(target, cand, counter, phase)
        alpha = math.exp(min(0.0, log_density_ratio(logp_cand, logp_x)))
        if rng.random() < alpha:
            return cand, logp_cand, tries
    raise RuntimeError(f"forced uphill transition exceeded {max_tries} tries")


def down_up_step(state: DownUpState, proposal, target: LogTarget, rng,
                 counter: EvalCounter, max_tries: int = DEFAULT_MAX_TRIES):
    """One transition of the down-up kernel.

    Runs downhill from x to x', uphill from x' to x*, downhill from x* to
    the companion z*, then accepts (x*, z*) jointly.  On rejection the
    state is returned unchanged.
    """
    x_mid, logp_mid, n_down = forced_downhill(
        state.x, state.logp_x, proposal, target, rng, counter, max_tries)
    x_star, logp_star, n_up = forced_uphill(
        x_mid, logp_mid, proposal, target, rng, counter, max_tries)
    z_star, logp_z_star, n_aux = forced_downhill(
        x_star, logp_star, proposal, target, rng, counter, max_tries,
        phase="aux_downhill")

    log_alpha = joint_log_acceptance(state.logp_x, state.logp_z,
                                     logp_star, logp_z_star)
    accepted = rng.random() < math.exp(log_alpha)
    if accepted:
        state = DownUpState(x_star, z_star, logp_star, logp_z_star)
    report = StepReport(accepted, n_down, n_up, n_aux, n_down + n_up + n_aux)
    return state, report


def metropolis_step(x, logp_x: float, proposal, target: LogTarget, rng,
                    counter: EvalCounter, phase: str = "other"):
    """One random-walk Metropolis transition; exactly one fresh evaluation.

    Returns:
        Tuple ``(point, logp, accepted)``.
    """
    cand = proposal.draw(x, rng)
    logp_cand = eval_log_density(target, cand, counter, phase)
    alpha = math.exp(metropolis_log_acceptance(logp_cand, logp_x))
    if rng.random() < alpha:
        return cand, logp_cand, True
    return x, logp_x, False
