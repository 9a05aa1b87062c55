"""Quantitative chain diagnostics and the evaluation-budget calculator.

Pure post-processing over immutable sample arrays: mode-occupancy
frequencies and their error rate, mode-discovery counts, autocorrelation,
mean-squared-error ratios between methods, and closed-form expected
evaluation costs for the baseline samplers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def nearest_mode_assignments(samples, modes) -> np.ndarray:
    """Index of the Euclidean-nearest mode for each sample; ties -> lowest index."""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    modes = np.atleast_2d(np.asarray(modes, dtype=float))
    if modes.shape[0] == 0:
        raise ValueError("need at least one mode")
    if samples.shape[1] != modes.shape[1]:
        raise ValueError("sample and mode dimensions differ")
    d2 = ((samples[:, None, :] - modes[None, :, :]) ** 2).sum(axis=2)
    return np.argmin(d2, axis=1)


def nearest_mode_frequencies(samples, modes) -> np.ndarray:
    """Proportion of samples assigned to each mode (sums to 1)."""
    assign = nearest_mode_assignments(samples, modes)
    counts = np.bincount(assign, minlength=len(np.atleast_2d(modes)))
    return counts / len(assign)


def frequency_error_rate(freqs, target_props) -> float:
    """Mean absolute deviation of occupancy proportions from their targets.

    Args:
        freqs: Per-chain mode frequencies, shape ``(chains, modes)``.
        target_props: Intended proportions, shape ``(modes,)``.
    """
    freqs = np.atleast_2d(np.asarray(freqs, dtype=float))
    target_props = np.asarray(target_props, dtype=float)
    if freqs.shape[1] != len(target_props):
        raise ValueError("frequency and target-proportion lengths differ")
    return float(np.abs(freqs - target_props).sum() / freqs.size)


def modes_discovered(samples, unknown_modes, all_modes) -> int:
    """Number of the unknown modes that are nearest to at least one sample."""
    all_modes = np.atleast_2d(np.asarray(all_modes, dtype=float))
    unknown_modes = np.atleast_2d(np.asarray(unknown_modes, dtype=float))
    unknown_idx = []
    for mode in unknown_modes:
        hits = np.where((np.abs(all_modes - mode) < 1e-12).all(axis=1))[0]
        if len(hits) == 0:
            raise ValueError("unknown modes must be a subset of all modes")
        unknown_idx.append(hits[0])
    if len(np.atleast_2d(samples)) == 0 or np.asarray(samples).size == 0:
        return 0
    visited = set(nearest_mode_assignments(samples, all_modes))
    return sum(1 for i in unknown_idx if i in visited)


def autocorrelation(series, max_lag: int) -> np.ndarray:
    """Standard biased autocorrelation estimate at lags 0..max_lag."""
    series = np.asarray(series, dtype=float)
    n = len(series)
    if n <= max_lag:
        raise ValueError("series must be longer than max_lag")
    centered = series - series.mean()
    denom = float(centered @ centered)
    if denom == 0.0:
        raise ValueError("series is constant; autocorrelation undefined")
    acf = np.empty(max_lag + 1)
    acf[0] = 1.0
    for lag in range(1, max_lag + 1):
        acf[lag] = float(centered[:-lag] @ centered[lag:]) / denom
    return acf


def mse_from_summary(mean: float, sd: float, truth: float) -> float:
    """MSE reconstructed from a replicate mean and standard deviation."""
    return sd ** 2 + (mean - truth) ** 2


def mse_ratio(estimates_by_method: dict, truth: float, reference: str) -> dict:
    """MSE of each method relative to the reference method.

    Per-method MSE over replicate estimates uses the n-1 variance plus
    squared bias, matching :func:`mse_from_summary`.

    Args:
        estimates_by_method: Maps method name to an array of replicate
            estimates (at least two per method).
    """
    if reference not in estimates_by_method:
        raise ValueError(f"reference method {reference!r} missing")
    mses = {}
    for name, est in estimates_by_method.items():
        est = np.asarray(est, dtype=float)
        if est.size < 2:
            raise ValueError(f"method {name!r} needs at least two replicates")
        mses[name] = mse_from_summary(est.mean(), est.std(ddof=1), truth)
    if mses[reference] == 0.0:
        raise ValueError("reference method has zero MSE")
    return {name: m / mses[reference] for name, m in mses.items()}


def count_sample_clusters(samples, cell: float = 0.2,
                          min_fraction: float = 0.005) -> int:
    """Number of well-separated sample clusters, via occupied-grid components.

    Samples are binned on a square grid of side ``cell``; cells holding at
    least ``min_fraction`` of the samples are occupied, and 8-connected
    occupied cells form one cluster.  Deterministic given the samples.
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    if samples.size == 0:
        return 0
    cells = np.floor(samples / cell).astype(int)
    keys, counts = np.unique(cells, axis=0, return_counts=True)
    occupied = {tuple(k) for k, c in zip(keys, counts)
                if c >= min_fraction * len(samples)}
    clusters = 0
    while occupied:
        clusters += 1
        stack = [occupied.pop()]
        while stack:
            ci, cj = stack.pop()
            for di in (-1, 0, 1):
                for dj in (-1, 0, 1):
                    nb = (ci + di, cj + dj)
                    if nb in occupied:
                        occupied.remove(nb)
                        stack.append(nb)
    return clusters


# ---------------------------------------------------------------------------
# Evaluation accounting
# ---------------------------------------------------------------------------

def metropolis_evals_per_iteration() -> float:
    """With the current state's density cached: one evaluation (the proposal)."""
    return 1.0


def pt_evals_per_iteration(n_rungs: int, swaps_per_iteration: int = 1,
                           swap_probability: float = 1.0) -> float:
    """One per rung update plus two per proposed swap.

    Swaps cost two because each rung caches only its tempered value, so
    the raw target must be re-evaluated at both partners.
    """
    return n_rungs + 2.0 * swaps_per_iteration * swap_probability


def tt_evals_per_step(n_rungs: int) -> float:
    """Two fresh evaluations per rung: one ascending, one descending."""
    return 2.0 * n_rungs


def staged_ensemble_evals_per_iteration(n_stages: int = 5,
                                        jump_probability: float = 0.1,
                                        jump_cost: int = 2) -> float:
    """Expected per-iteration cost of a staged multi-temperature ensemble.

    Stage k (of K, hottest first) starts only after stage k-1 finishes and
    all earlier stages keep running, so stage k accumulates K - k + 1
    segments of iterations.  The first stage uses plain transitions (one
    evaluation each); later stages substitute a two-evaluation jump move
    with the given probability.  The total is normalized by one segment
    length, i.e. by the final stage's iteration count.
    """
    later = (n_stages - 1) * n_stages / 2
    per_iter_later = 1.0 + jump_probability * (jump_cost - 1)
    return n_stages + later * per_iter_later


def evaluation_accounting(config: dict) -> float:
    """Closed-form expected target evaluations per iteration for a sampler.

    The ``sampler`` key selects the formula: "metropolis", "pt", "tt"
    (``n_blocks`` multiplies the per-block cost), or "staged_ensemble".
    The down-up kernel has no closed form; its cost is measured from runs.
    """
    kind = config["sampler"]
    if kind == "metropolis":
        return metropolis_evals_per_iteration()
    if kind == "pt":
        return pt_evals_per_iteration(
            config["n_rungs"],
            config.get("swaps_per_iteration", 1),
            config.get("swap_probability", 1.0))
    if kind == "tt":
        return tt_evals_per_step(config["n_rungs"]) * config.get("n_blocks", 1)
    if kind == "staged_ensemble":
        return staged_ensemble_evals_per_iteration(
            config.get("n_stages", 5),
            config.get("jump_probability", 0.1),
            config.get("jump_cost", 2))
    raise ValueError(f"unknown sampler kind {kind!r}")


# ---------------------------------------------------------------------------
# Chain summaries
# ---------------------------------------------------------------------------

@dataclass
class ChainSummary:
    """Diagnostics bundle for one chain."""

    n_kept: int
    acceptance_rate: float
    means: np.ndarray
    raw_second_moments: np.ndarray
    eval_counts: dict
    evals_per_iteration: float
    acf: np.ndarray | None = None
    mode_frequencies: np.ndarray | None = None
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "n_kept": self.n_kept,
            "acceptance_rate": self.acceptance_rate,
            "means": list(map(float, self.means)),
            "raw_second_moments": list(map(float, self.raw_second_moments)),
            "eval_counts": dict(self.eval_counts),
            "evals_per_iteration": self.evals_per_iteration,
        }
        if self.acf is not None:
            out["acf"] = list(map(float, self.acf))
        if self.mode_frequencies is not None:
            out["mode_frequencies"] = list(map(float, self.mode_frequencies))
        out.update(self.extras)
        return out


def summarize_samples(kept, acceptance_rate: float, counter, n_iterations: int,
                      max_lag: int = 50, modes=None) -> ChainSummary:
    """Build a :class:`ChainSummary` from kept samples and run accounting.

    ``evals_per_iteration`` divides all counted evaluations (burn-in
    included) by the chain length.
    """
    kept = np.atleast_2d(np.asarray(kept, dtype=float))
    if kept.shape[0] == 0:
        raise ValueError("no kept samples; check length and burn-in")
    acf = None
    if kept.shape[0] > max_lag:
        try:
            acf = autocorrelation(kept[:, 0], max_lag)
        except ValueError:
            acf = None
    freqs = nearest_mode_frequencies(kept, modes) if modes is not None else None
    return ChainSummary(
        n_kept=kept.shape[0],
        acceptance_rate=acceptance_rate,
        means=kept.mean(axis=0),
        raw_second_moments=(kept ** 2).mean(axis=0),
        eval_counts={"total": counter.total, **counter.per_phase},
        evals_per_iteration=counter.total / n_iterations,
        acf=acf,
        mode_frequencies=freqs,
    )
