"""Exact transition matrices for small discrete state spaces.

Every kernel in this package has a discrete analogue whose transition
probabilities can be enumerated in closed form: the forced transitions
become their acceptance-weighted proposal laws normalized by the exact
per-state constants, and the retry loop disappears.  Building these
matrices lets invariance and detailed balance be checked to near machine
precision, and gives an exact reference law for simulation tests.

The acceptance probabilities reuse the same scalar functions as the
continuous kernels, so a defect in either the acceptance formula or the
proposal composition shows up as a stationarity or detailed-balance
residual here.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .kernels import joint_log_acceptance, log_density_ratio

ROW_SUM_TOL = 1e-12


@dataclass
class DiscreteKernelMatrix:
    """A row-stochastic transition matrix over an explicit state list."""

    states: list
    matrix: np.ndarray

    def __post_init__(self):
        P = self.matrix
        if P.shape != (len(self.states), len(self.states)):
            raise ValueError("matrix shape does not match state list")
        if np.any(P < -ROW_SUM_TOL) or np.any(P > 1 + ROW_SUM_TOL):
            raise ValueError("transition probabilities must lie in [0, 1]")
        if np.max(np.abs(P.sum(axis=1) - 1.0)) > ROW_SUM_TOL:
            raise ValueError("rows must sum to 1")


def _as_log_pi(pi) -> np.ndarray:
    pi = np.asarray(pi, dtype=float)
    if np.any(pi < 0):
        raise ValueError("target weights must be non-negative")
    if np.count_nonzero(pi) < 2:
        raise ValueError("target must be positive on at least two states")
    with np.errstate(divide="ignore"):
        return np.log(pi)


def _check_symmetric_stochastic(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if not np.allclose(q, q.T, atol=1e-14):
        raise ValueError("proposal matrix must be symmetric")
    if np.max(np.abs(q.sum(axis=1) - 1.0)) > 1e-12 or np.any(q < 0):
        raise ValueError("proposal matrix must be row-stochastic")
    return q


def forced_law(log_pi: np.ndarray, q: np.ndarray, direction: str):
    """Exact law of a forced transition: q * alpha, normalized per row.

    Args:
        direction: "down" uses the reciprocal ratio (current over
            candidate), "up" the standard ratio (candidate over current).

    Returns:
        Tuple ``(law, normalizer)``: the retry loop's landing distribution
        per start state and the per-state probability mass that a single
        unforced proposal would be accepted.
    """
    n = len(log_pi)
    alpha = np.zeros((n, n))
    for a in range(n):
        for b in range(n):
            if direction == "down":
                r = log_density_ratio(log_pi[a], log_pi[b])
            else:
                r = log_density_ratio(log_pi[b], log_pi[a])
            alpha[a, b] = np.exp(min(0.0, r))
    weighted = q * alpha
    normalizer = weighted.sum(axis=1)
    if np.any(normalizer <= 0.0):
        raise AssertionError(
            "forced transition impossible from some state (all acceptance "
            "probabilities are zero)")
    return weighted / normalizer[:, None], normalizer


def build_down_up_joint_matrix(pi, q) -> DiscreteKernelMatrix:
    """Enumerate the joint (x, z) transition matrix of the down-up kernel.

    The proposal law composes forced downhill, forced uphill, and a second
    forced downhill draw for the companion; the joint acceptance is then
    applied and rejection mass is placed on the diagonal.  Joint states
    are all ordered pairs, including zero-probability ones.
    """
    log_pi = _as_log_pi(pi)
    q = _check_symmetric_stochastic(q)
    n = len(log_pi)
    down, _ = forced_law(log_pi, q, "down")
    up, _ = forced_law(log_pi, q, "up")
    down_up = down @ up

    states = [(x, z) for x in range(n) for z in range(n)]
    P = np.zeros((n * n, n * n))
    for idx, (x, z) in enumerate(states):
        stay = 0.0
        for xs in range(n):
            move_mass = down_up[x, xs]
            if move_mass == 0.0:
                continue
            for zs in range(n):
                prop = move_mass * down[xs, zs]
                if prop == 0.0:
                    continue
                alpha = np.exp(joint_log_acceptance(
                    log_pi[x], log_pi[z], log_pi[xs], log_pi[zs]))
                P[idx, xs * n + zs] += prop * alpha
                stay += prop * (1.0 - alpha)
        P[idx, idx] += stay
    return DiscreteKernelMatrix(states, P)


def metropolis_matrix(log_pi: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Plain Metropolis transition matrix for a (possibly tempered) log target."""
    n = len(log_pi)
    P = np.zeros((n, n))
    for a in range(n):
        for b in range(n):
            alpha = np.exp(min(0.0, log_density_ratio(log_pi[b], log_pi[a])))
            P[a, b] = q[a, b] * alpha
        P[a, a] += 1.0 - P[a].sum()
    return P


def build_metropolis_matrix(pi, q) -> DiscreteKernelMatrix:
    log_pi = _as_log_pi(pi)
    q = _check_symmetric_stochastic(q)
    return DiscreteKernelMatrix(list(range(len(log_pi))),
                                metropolis_matrix(log_pi, q))


def build_pt_matrix(pi, q, temps) -> DiscreteKernelMatrix:
    """Exact ensemble matrix: one Metropolis update per rung, then one swap.

    The swap partner pair is chosen uniformly among adjacent rungs and
    accepted with the exchange ratio that preserves the product of the
    tempered targets.
    """
    log_pi = _as_log_pi(pi)
    q = _check_symmetric_stochastic(q)
    temps = list(temps)
    n, R = len(log_pi), len(temps)
    ensembles = list(itertools.product(range(n), repeat=R))
    index = {s: k for k, s in enumerate(ensembles)}
    m = len(ensembles)

    P = np.eye(m)
    for j in range(R):
        rung = metropolis_matrix(log_pi / temps[j], q)
        M = np.zeros((m, m))
        for s in ensembles:
            row = index[s]
            for b in range(n):
                t = list(s)
                t[j] = b
                M[row, index[tuple(t)]] += rung[s[j], b]
        P = P @ M

    W = np.zeros((m, m))
    pair_prob = 1.0 / (R - 1)
    for s in ensembles:
        row = index[s]
        for k in range(R - 1):
            delta = (log_pi[s[k + 1]] - log_pi[s[k]]) * (1.0 / temps[k] - 1.0 / temps[k + 1])
            alpha = np.exp(min(0.0, delta))
            t = list(s)
            t[k], t[k + 1] = t[k + 1], t[k]
            W[row, index[tuple(t)]] += pair_prob * alpha
            W[row, row] += pair_prob * (1.0 - alpha)
    return DiscreteKernelMatrix(ensembles, P @ W)


def build_tt_matrix(pi, q, temps) -> DiscreteKernelMatrix:
    """Exact matrix of one tempered-transitions step by full path enumeration.

    ``temps`` is the whole ladder including the base temperature 1; the
    ascent uses the tempered target at each rung, the descent the target
    one rung below, and the final candidate is accepted with the
    telescoping ratio over the visited path.
    """
    log_pi = _as_log_pi(pi)
    if np.any(log_pi == -np.inf):
        raise ValueError("tempered-transitions enumeration requires positive weights")
    q = _check_symmetric_stochastic(q)
    temps = list(temps)
    if temps[0] != 1:
        raise ValueError("ladder must start at temperature 1")
    n, J = len(log_pi), len(temps) - 1

    # The descent at rung j reuses the rung-j kernel (invariant to the same
    # tempered level), making the kernel sequence a palindrome; that is what
    # makes the telescoping acceptance exact.
    up_kernels = [metropolis_matrix(log_pi / temps[j], q) for j in range(1, J + 1)]
    down_kernels = up_kernels
    inv_t = [1.0 / t for t in temps]

    P = np.zeros((n, n))
    for x in range(n):
        for up_path in itertools.product(range(n), repeat=J):
            p_up = 1.0
            prev = x
            log_ratio = 0.0
            for j, a in enumerate(up_path, start=1):
                p_up *= up_kernels[j - 1][prev, a]
                log_ratio += log_pi[prev] * (inv_t[j] - inv_t[j - 1])
                prev = a
            if p_up == 0.0:
                continue
            for down_path in itertools.product(range(n), repeat=J):
                # down_path[i] is the state after the descent move at rung J - i
                p_down = 1.0
                cur = up_path[-1]
                log_ratio_down = 0.0
                for i, b in enumerate(down_path):
                    j = J - i
                    p_down *= down_kernels[j - 1][cur, b]
                    log_ratio_down += log_pi[b] * (inv_t[j - 1] - inv_t[j])
                    cur = b
                if p_down == 0.0:
                    continue
                alpha = np.exp(min(0.0, log_ratio + log_ratio_down))
                mass = p_up * p_down
                P[x, cur] += mass * alpha
                P[x, x] += mass * (1.0 - alpha)
    return DiscreteKernelMatrix(list(range(n)), P)


def build_two_block_gibbs_matrix(pi_joint, q1, q2) -> DiscreteKernelMatrix:
    """Sweep matrix of a two-block sampler with a down-up kernel per block.

    The state is (x1, x2, z1, z2) where z_k is block k's companion point.
    Block 1 updates (x1, z1) against the conditional target at the current
    x2, then block 2 updates (x2, z2) against the conditional at the new
    x1.  The augmented invariant measure is
    pi(x1, x2) * q1(z1 | x1) * q2(z2 | x2).
    """
    pi_joint = np.asarray(pi_joint, dtype=float)
    q1 = _check_symmetric_stochastic(q1)
    q2 = _check_symmetric_stochastic(q2)
    n1, n2 = pi_joint.shape
    with np.errstate(divide="ignore"):
        log_joint = np.log(pi_joint)

    states = list(itertools.product(range(n1), range(n2), range(n1), range(n2)))
    index = {s: k for k, s in enumerate(states)}
    m = len(states)

    def block_update(which: int) -> np.ndarray:
        M = np.zeros((m, m))
        laws = {}
        for s in states:
            x1, x2, z1, z2 = s
            row = index[s]
            if which == 1:
                cond = log_joint[:, x2]
                q, cur, comp = q1, x1, z1
            else:
                cond = log_joint[x1, :]
                q, cur, comp = q2, x2, z2
            key = (which, x2 if which == 1 else x1)
            if key not in laws:
                down, _ = forced_law(cond, q, "down")
                up, _ = forced_law(cond, q, "up")
                laws[key] = (down, down @ up)
            down, down_up = laws[key]
            stay = 0.0
            for xs in range(len(cond)):
                for zs in range(len(cond)):
                    prop = down_up[cur, xs] * down[xs, zs]
                    if prop == 0.0:
                        continue
                    alpha = np.exp(joint_log_acceptance(
                        cond[cur], cond[comp], cond[xs], cond[zs]))
                    t = (xs, x2, zs, z2) if which == 1 else (x1, xs, z1, zs)
                    M[row, index[t]] += prop * alpha
                    stay += prop * (1.0 - alpha)
            M[row, row] += stay
        return M

    sweep = block_update(1) @ block_update(2)
    return DiscreteKernelMatrix(states, sweep)


def two_block_augmented_target(pi_joint, q1, q2) -> np.ndarray:
    """Invariant vector of :func:`build_two_block_gibbs_matrix`, normalized."""
    pi_joint = np.asarray(pi_joint, dtype=float)
    n1, n2 = pi_joint.shape
    v = np.array([
        pi_joint[x1, x2] * q1[x1][z1] * q2[x2][z2]
        for x1, x2, z1, z2 in itertools.product(range(n1), range(n2),
                                                range(n1), range(n2))
    ])
    return v / v.sum()


def expected_joint_acceptance(pi, q):
    """Exact per-joint-state and stationary acceptance rate of the down-up step.

    The per-state value integrates the composed proposal law against the
    joint acceptance probability; the scalar weights it by the joint
    target, giving the long-run fraction of accepted steps.
    """
    log_pi = _as_log_pi(pi)
    q = _check_symmetric_stochastic(q)
    n = len(log_pi)
    down, _ = forced_law(log_pi, q, "down")
    up, _ = forced_law(log_pi, q, "up")
    down_up = down @ up
    per_state = np.zeros(n * n)
    for idx, (x, z) in enumerate((x, z) for x in range(n) for z in range(n)):
        acc = 0.0
        for xs in range(n):
            for zs in range(n):
                prop = down_up[x, xs] * down[xs, zs]
                if prop == 0.0:
                    continue
                acc += prop * np.exp(joint_log_acceptance(
                    log_pi[x], log_pi[z], log_pi[xs], log_pi[zs]))
        per_state[idx] = acc
    weights = joint_target_vector(pi, q)
    return per_state, float(per_state @ weights)


# ---------------------------------------------------------------------------
# Target vectors and checks
# ---------------------------------------------------------------------------

def joint_target_vector(pi, q) -> np.ndarray:
    """Normalized joint target pi(x) q(z | x) over the ordered pairs (x, z)."""
    pi = np.asarray(pi, dtype=float)
    pi = pi / pi.sum()
    q = np.asarray(q, dtype=float)
    n = len(pi)
    return np.array([pi[x] * q[x, z] for x in range(n) for z in range(n)])


def product_target_vector(pi, temps) -> np.ndarray:
    """Normalized product of the tempered targets over ensemble states."""
    pi = np.asarray(pi, dtype=float)
    parts = []
    for t in temps:
        p = pi ** (1.0 / t)
        parts.append(p / p.sum())
    n, R = len(pi), len(temps)
    return np.array([
        np.prod([parts[j][s[j]] for j in range(R)])
        for s in itertools.product(range(n), repeat=R)
    ])


def check_stationarity(kernel: DiscreteKernelMatrix, target) -> float:
    """max-abs entry of target' P - target'."""
    target = np.asarray(target, dtype=float)
    if len(target) != len(kernel.states):
        raise ValueError("target vector length does not match state space")
    return float(np.max(np.abs(target @ kernel.matrix - target)))


def check_detailed_balance(kernel: DiscreteKernelMatrix, target) -> float:
    """max over ordered pairs of |pi_a P_ab - pi_b P_ba|."""
    target = np.asarray(target, dtype=float)
    flux = target[:, None] * kernel.matrix
    return float(np.max(np.abs(flux - flux.T)))


def stationary_distribution(kernel: DiscreteKernelMatrix) -> np.ndarray:
    """Solve for the stationary row vector of the enumerated matrix."""
    P = kernel.matrix
    m = P.shape[0]
    A = np.vstack([P.T - np.eye(m), np.ones(m)])
    b = np.zeros(m + 1)
    b[-1] = 1.0
    v, *_ = np.linalg.lstsq(A, b, rcond=None)
    return v


# ---------------------------------------------------------------------------
# Bundled verification suite
# ---------------------------------------------------------------------------

def verification_report() -> list:
    """Run the standard battery of exact checks; one record per check.

    Each record carries the residual (or comparison value), its bound,
    and a pass flag.  Used by the command-line ``verify`` subcommand.
    """
    uniform3 = (np.ones((3, 3)) - np.eye(3)) / 2.0
    neighbor5 = np.array([
        [0.5, 0.5, 0.0, 0.0, 0.0],
        [0.5, 0.0, 0.5, 0.0, 0.0],
        [0.0, 0.5, 0.0, 0.5, 0.0],
        [0.0, 0.0, 0.5, 0.0, 0.5],
        [0.0, 0.0, 0.0, 0.5, 0.5],
    ])
    pi3 = np.array([1.0, 2.0, 4.0])
    pi5 = np.array([4.0, 1.0, 0.01, 1.0, 4.0])
    records = []

    def add(name, value, bound, larger_is_better=False):
        passed = value > bound if larger_is_better else value < bound
        records.append({"check": name, "value": float(value),
                        "bound": float(bound), "passed": bool(passed),
                        "direction": ">" if larger_is_better else "<"})

    for label, pi, q in (("3state", pi3, uniform3), ("5state_bimodal", pi5, neighbor5)):
        kernel = build_down_up_joint_matrix(pi, q)
        target = joint_target_vector(pi, q)
        add(f"down_up_joint_{label}.stationarity", check_stationarity(kernel, target), 1e-10)
        add(f"down_up_joint_{label}.detailed_balance",
            check_detailed_balance(kernel, target), 1e-10)
        v = stationary_distribution(kernel)
        marginal = v.reshape(len(pi), len(pi)).sum(axis=1)
        add(f"down_up_joint_{label}.x_marginal_error",
            np.max(np.abs(marginal - pi / pi.sum())), 1e-10)

    met = build_metropolis_matrix(pi3, uniform3)
    add("metropolis_3state.stationarity", check_stationarity(met, pi3 / pi3.sum()), 1e-10)

    pt = build_pt_matrix(pi3, uniform3, (1.0, 2.0, 4.0))
    add("pt_3rung_3state.stationarity",
        check_stationarity(pt, product_target_vector(pi3, (1.0, 2.0, 4.0))), 1e-10)

    tt = build_tt_matrix(pi5, neighbor5, (1.0, 2.0, 4.0, 8.0))
    add("tt_3rung_5state.stationarity", check_stationarity(tt, pi5 / pi5.sum()), 1e-10)

    du5 = build_down_up_joint_matrix(pi5, neighbor5)
    met5 = build_metropolis_matrix(pi5, neighbor5)
    joint5 = joint_target_vector(pi5, neighbor5)
    pi5n = pi5 / pi5.sum()
    du_flux = sum(joint5[a] * du5.matrix[a, b]
                  for a, (x, _) in enumerate(du5.states) if x <= 1
                  for b, (xs, _) in enumerate(du5.states) if xs >= 3)
    met_flux = sum(pi5n[x] * met5.matrix[x, xs] for x in (0, 1) for xs in (3, 4))
    add("cross_valley_flux.down_up_minus_metropolis", du_flux - met_flux, 0.0,
        larger_is_better=True)

    pi_joint = np.array([[4.0, 1.0, 0.5], [1.0, 0.2, 1.0], [0.5, 1.0, 4.0]])
    sweep = build_two_block_gibbs_matrix(pi_joint, uniform3, uniform3)
    add("two_block_gibbs.stationarity",
        check_stationarity(sweep, two_block_augmented_target(pi_joint, uniform3, uniform3)),
        1e-10)
    return records
