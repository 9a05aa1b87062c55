"""Experiment runner: benchmark targets, matched budgets, persistence.

Three desk-scale studies are wired up, selectable by number in the
config: (1) the 20-mode bivariate mixture at fixed isotropic proposal
scale, (2) the 8-mode cube mixture with two-phase proposal adaptation
and evaluation-matched baselines, (3) the sensor-localization posterior
sampled block-wise within Gibbs.  Runs are reproducible: chains draw
from per-replicate PCG64 streams seeded by (seed, replicate), and sample
files round-trip bit-exactly through their CSV representation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .diagnostics import (
    ChainSummary,
    autocorrelation,
    modes_discovered,
    nearest_mode_frequencies,
    pt_evals_per_iteration,
    summarize_samples,
)
from .gibbs import BlockSpec, gibbs_sweep, init_gibbs_state
from .kernels import down_up_step, initial_state, metropolis_step
from .proposals import GaussianProposal, adapt_from_sample
from .targets import (
    CUBE_KNOWN_MODES,
    EvalCounter,
    TRUE_SENSOR_LOCATIONS,
    cube_mixture,
    eval_log_density,
    simulate_sensor_data,
    twenty_mode_mixture,
)
from .tempering import PtEnsemble, TemperatureLadder, pt_step

RNG_ALGORITHM = "pcg64-seedseq"
DEFAULT_SENSOR_DATA_SEED = 23


def chain_rng(seed: int, stream: int) -> np.random.Generator:
    """Independent per-chain generator derived from (seed, stream index)."""
    return np.random.default_rng((int(seed), int(stream)))


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    """Declarative description of one experiment run."""

    example: int
    length: int
    burnin: int
    kernel: str = "downup"
    case: str = "a"
    d: int = 3
    sigma: float | None = None
    proposal_matrix: list | None = None
    replicates: int = 1
    seed: int = 0
    matched_budget: str = "none"
    budget_npi: float | None = None
    data_seed: int = DEFAULT_SENSOR_DATA_SEED
    pt_temps: tuple = (1.0, 2.0, 4.0, 8.0, 16.0)
    tt_temps: tuple = (1.0, 2.0, 4.0, 8.0)
    tt_scale_base: float = 0.9
    tt_scale_factor: float = 1.2
    pre_chain_length: int = 5000
    max_lag: int = 50

    def __post_init__(self):
        if self.example not in (1, 2, 3):
            raise ValueError("example must be 1, 2, or 3")
        if not 0 <= self.burnin < self.length:
            raise ValueError("need 0 <= burnin < length (no kept samples otherwise)")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.matched_budget not in ("none", "by_evals"):
            raise ValueError("matched_budget must be 'none' or 'by_evals'")
        if self.matched_budget == "by_evals" and self.kernel != "downup" \
                and self.budget_npi is None:
            raise ValueError("matched_budget='by_evals' needs budget_npi "
                             "(the down-up chain's measured evals per iteration)")

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**raw)
        return cfg

    def echo(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["pt_temps"] = list(self.pt_temps)
        out["tt_temps"] = list(self.tt_temps)
        out["rng"] = RNG_ALGORITHM
        out["package_version"] = __version__
        return out


@dataclass
class RunArtifact:
    """Everything one chain produced: kept samples, summary, config echo."""

    name: str
    samples: np.ndarray
    summary: ChainSummary
    config: dict
    paths: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

def write_samples_csv(path, samples, header) -> None:
    """Comma-separated samples with a one-line header.

    Floats are written with ``repr`` so the file parses back bit-exactly
    and identical runs produce byte-identical files.
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in samples:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_samples_csv(path) -> np.ndarray:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data


def write_json(path, obj) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def persist_artifact(artifact: RunArtifact, outdir, header) -> RunArtifact:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    samples_path = outdir / f"samples_{artifact.name}.csv"
    summary_path = outdir / f"summary_{artifact.name}.json"
    write_samples_csv(samples_path, artifact.samples, header)
    write_json(summary_path, artifact.summary.to_dict())
    artifact.paths = {"samples": str(samples_path), "summary": str(summary_path)}
    return artifact


# ---------------------------------------------------------------------------
# Chain segment runners
# ---------------------------------------------------------------------------

def _down_up_segment(state, proposal, target, rng, counter, n_steps):
    samples = np.empty((n_steps, target.dim))
    accepted = 0
    for i in range(n_steps):
        state, report = down_up_step(state, proposal, target, rng, counter)
        samples[i] = state.x
        accepted += report.accepted
    return state, samples, accepted


def _metropolis_segment(x, logp, proposal, target, rng, counter, n_steps):
    samples = np.empty((n_steps, target.dim))
    accepted = 0
    for i in range(n_steps):
        x, logp, ok = metropolis_step(x, logp, proposal, target, rng, counter)
        samples[i] = x
        accepted += ok
    return (x, logp), samples, accepted


def _pt_segment(ensemble, ladder, target, rng, n_steps):
    samples = np.empty((n_steps, target.dim))
    accepted = 0
    for i in range(n_steps):
        ensemble, report = pt_step(ensemble, ladder, target, rng)
        samples[i] = ensemble.states[0]
        accepted += report.rung_accepted[0]
    return ensemble, samples, accepted


# ---------------------------------------------------------------------------
# Study 1: 20-mode bivariate mixture
# ---------------------------------------------------------------------------

def run_example1(case: str, sigma: float, length: int, burnin: int,
                 replicates: int, seed: int,
                 proposal: GaussianProposal | None = None) -> list:
    """Down-up chains on the 20-mode mixture at a fixed proposal scale.

    Chains start (with their companion) at a uniform point in the unit
    square.  Per-replicate summaries carry the moment estimates, the
    acceptance rate, the evaluation breakdown per phase, and the count of
    modes visited by the kept samples.
    """
    mixture = twenty_mode_mixture(case)
    target = mixture.as_log_target()
    if proposal is None:
        proposal = GaussianProposal.isotropic(2, sigma)
    artifacts = []
    for rep in range(replicates):
        rng = chain_rng(seed, rep)
        counter = EvalCounter()
        x0 = rng.uniform(0.0, 1.0, size=2)
        state = initial_state(x0, target, counter)
        state, samples, accepted = _down_up_segment(
            state, proposal, target, rng, counter, length)
        kept = samples[burnin:]
        summary = summarize_samples(kept, accepted / length, counter, length,
                                    modes=mixture.means)
        summary.extras.update(_phase_rates(counter, length))
        summary.extras["modes_visited"] = int(
            modes_discovered(kept, mixture.means, mixture.means))
        artifacts.append(RunArtifact(
            name=f"rep{rep}",
            samples=kept,
            summary=summary,
            config={"example": 1, "case": case, "sigma": sigma, "length": length,
                    "burnin": burnin, "seed": seed, "replicate": rep},
        ))
    return artifacts


def _phase_rates(counter: EvalCounter, length: int) -> dict:
    return {
        "n_down_per_iter": counter.per_phase["downhill"] / length,
        "n_up_per_iter": counter.per_phase["uphill"] / length,
        "n_aux_per_iter": counter.per_phase["aux_downhill"] / length,
    }


# ---------------------------------------------------------------------------
# Study 2: 8-mode cube mixture with one-time adaptation
# ---------------------------------------------------------------------------

def _pre_chain_proposal(target, modes, d, pre_len, rng):
    """Two Metropolis pre-chains from the known modes; pooled covariance."""
    preset = GaussianProposal.rw_default(d)
    pooled = []
    for mode_idx in CUBE_KNOWN_MODES:
        counter = EvalCounter()
        x = np.asarray(modes[mode_idx], dtype=float)
        logp = eval_log_density(target, x, counter, "other")
        _, samples, _ = _metropolis_segment(x, logp, preset, target, rng,
                                            counter, pre_len)
        pooled.append(samples)
    return adapt_from_sample(np.vstack(pooled))


def run_example2(d: int, kernel: str, length: int, burnin: int,
                 replicates: int, seed: int, budget_npi: float | None = None,
                 pre_chain_length: int = 5000,
                 pt_temps=(1.0, 2.0, 4.0, 8.0, 16.0)) -> list:
    """Cube-mixture study with two-phase tuning and one-time adaptation.

    Every replicate first runs two Metropolis pre-chains from the known
    modes to pool an initial covariance, then its main chain; at the end
    of burn-in the proposal covariance is reset once to the burn-in
    sample covariance.  For the Metropolis and parallel-tempering
    baselines, ``budget_npi`` (the down-up chain's measured evaluations
    per iteration) rescales the chain length and burn-in so total
    evaluation budgets match.
    """
    if d < 3:
        raise ValueError("this study needs d >= 3")
    if burnin <= d:
        raise ValueError("burn-in must exceed d; the one-time adaptation "
                         "needs a usable burn-in sample covariance")
    if kernel not in ("downup", "metropolis", "pt"):
        raise ValueError(f"unsupported kernel {kernel!r}")
    mixture = cube_mixture(d)
    target = mixture.as_log_target()
    modes = mixture.means
    unknown = np.delete(modes, CUBE_KNOWN_MODES, axis=0)

    if kernel != "downup" and budget_npi is not None:
        per_iter = 1.0 if kernel == "metropolis" else pt_evals_per_iteration(
            len(pt_temps))
        length = int(round(length * budget_npi / per_iter))
        burnin = int(round(burnin * budget_npi / per_iter))

    artifacts = []
    for rep in range(replicates):
        rng = chain_rng(seed, rep)
        proposal = _pre_chain_proposal(target, modes, d, pre_chain_length, rng)
        x0 = np.asarray(modes[0], dtype=float)
        counter = EvalCounter()

        if kernel == "downup":
            state = initial_state(x0, target, counter)
            state, warm, acc1 = _down_up_segment(state, proposal, target, rng,
                                                 counter, burnin)
            adapted = adapt_from_sample(warm)
            state, kept, acc2 = _down_up_segment(state, adapted, target, rng,
                                                 counter, length - burnin)
        elif kernel == "metropolis":
            logp = eval_log_density(target, x0, counter, "other")
            (x, logp), warm, acc1 = _metropolis_segment(
                x0, logp, proposal, target, rng, counter, burnin)
            adapted = adapt_from_sample(warm)
            (x, logp), kept, acc2 = _metropolis_segment(
                x, logp, adapted, target, rng, counter, length - burnin)
        else:
            ladder = TemperatureLadder(
                tuple(pt_temps), tuple(proposal for _ in pt_temps))
            ensemble = PtEnsemble.initialize(x0, ladder, target)
            ensemble, warm, acc1 = _pt_segment(ensemble, ladder, target, rng,
                                               burnin)
            adapted = adapt_from_sample(warm)
            adapted_ladder = TemperatureLadder(
                tuple(pt_temps), tuple(adapted for _ in pt_temps))
            ensemble, kept, acc2 = _pt_segment(ensemble, adapted_ladder, target,
                                               rng, length - burnin)
            counter = EvalCounter.merged(ensemble.counters)

        freqs = nearest_mode_frequencies(kept, modes)
        summary = summarize_samples(
            kept, (acc1 + acc2) / length, counter, length, modes=modes)
        summary.extras.update(_phase_rates(counter, length))
        summary.extras["n_discovered"] = int(modes_discovered(kept, unknown, modes))
        summary.extras["frequency_abs_error"] = float(
            np.abs(freqs - 1.0 / len(modes)).sum() / len(modes))
        summary.extras["length"] = length
        summary.extras["burnin"] = burnin
        artifacts.append(RunArtifact(
            name=f"rep{rep}",
            samples=kept,
            summary=summary,
            config={"example": 2, "d": d, "kernel": kernel, "length": length,
                    "burnin": burnin, "seed": seed, "replicate": rep,
                    "budget_npi": budget_npi},
        ))
    return artifacts


# ---------------------------------------------------------------------------
# Study 3: sensor network localization within Gibbs
# ---------------------------------------------------------------------------

def sensor_blocks(kernel: str, sigma: float = 1.08,
                  tt_temps=(1.0, 2.0, 4.0, 8.0), tt_scale_base: float = 0.9,
                  tt_scale_factor: float = 1.2,
                  proposal: GaussianProposal | None = None) -> list:
    """Four bivariate blocks, one per unknown sensor location."""
    if kernel == "tempered":
        proposals = [GaussianProposal.isotropic(
            2, tt_scale_base * tt_scale_factor ** max(j - 1, 0))
            for j in range(len(tt_temps))]
        ladder = TemperatureLadder(tuple(tt_temps), tuple(proposals))
        extra = {"ladder": ladder}
    else:
        if proposal is None:
            proposal = GaussianProposal.isotropic(2, sigma)
        extra = {"proposal": proposal}
    return [BlockSpec(f"x{k + 1}", (2 * k, 2 * k + 1), kernel, **extra)
            for k in range(4)]


def run_example3(kernel: str, length: int, burnin: int, seed: int,
                 data_seed: int = DEFAULT_SENSOR_DATA_SEED, sigma: float = 1.08,
                 tt_temps=(1.0, 2.0, 4.0, 8.0), tt_scale_base: float = 0.9,
                 tt_scale_factor: float = 1.2,
                 proposal: GaussianProposal | None = None) -> RunArtifact:
    """Block-Gibbs run on a regenerated sensor-localization posterior.

    The dataset is simulated fresh from the fixed true locations under
    ``data_seed``, so different kernels compared under the same
    ``data_seed`` see the identical posterior.  Unknown locations start
    uniform in the unit square.
    """
    dataset = simulate_sensor_data(TRUE_SENSOR_LOCATIONS, data_seed)
    joint = dataset.as_log_target()
    blocks = sensor_blocks(kernel, sigma=sigma, tt_temps=tt_temps,
                           tt_scale_base=tt_scale_base,
                           tt_scale_factor=tt_scale_factor, proposal=proposal)
    counters = {b.name: EvalCounter() for b in blocks}
    rng = chain_rng(seed, 0)
    x0 = rng.uniform(0.0, 1.0, size=8)
    state = init_gibbs_state(x0, blocks, joint, counters)

    samples = np.empty((length, 8))
    accepted = {b.name: 0 for b in blocks}
    for i in range(length):
        state, updates = gibbs_sweep(state, blocks, joint, rng, counters)
        samples[i] = state.x
        for name, update in updates.items():
            accepted[name] += update.accepted

    kept = samples[burnin:]
    merged = EvalCounter.merged(counters.values())
    per_block = {}
    for b in blocks:
        c = counters[b.name]
        per_block[b.name] = {
            "acceptance_rate": accepted[b.name] / length,
            "evals_per_iteration": c.total / length,
            **_phase_rates(c, length),
        }
    mean_acceptance = float(np.mean([accepted[b.name] for b in blocks])) / length
    summary = summarize_samples(kept, mean_acceptance, merged, length)
    summary.extras["per_block"] = per_block
    summary.extras["data_seed"] = data_seed
    return RunArtifact(
        name=f"{kernel}",
        samples=kept,
        summary=summary,
        config={"example": 3, "kernel": kernel, "length": length,
                "burnin": burnin, "seed": seed, "data_seed": data_seed,
                "sigma": sigma},
    )


# ---------------------------------------------------------------------------
# Proposal-scale tuning
# ---------------------------------------------------------------------------

@dataclass
class TuneResult:
    sigma: float
    all_modes_visited: bool
    table: list


def tune_sigma(case: str, grid, length: int, burnin: int, seed: int,
               max_lag: int = 50) -> TuneResult:
    """Pick a proposal scale from pilot chains on the 20-mode mixture.

    Among grid values whose pilot chain visits every mode, the winner
    minimizes the summed absolute first-coordinate autocorrelation over
    lags 1..max_lag.  If no pilot visits all modes the most-covering
    scale is returned with ``all_modes_visited`` False.
    """
    grid = list(grid)
    if not grid:
        raise ValueError("sigma grid must be non-empty")
    mixture = twenty_mode_mixture(case)
    rows = []
    for k, sigma in enumerate(grid):
        artifact = run_example1(case, float(sigma), length, burnin,
                                replicates=1, seed=seed + k)
        summary = artifact[0].summary
        kept = artifact[0].samples
        visited = int(modes_discovered(kept, mixture.means, mixture.means))
        try:
            score = float(np.abs(autocorrelation(kept[:, 0], max_lag)[1:]).sum())
        except ValueError:
            score = float("inf")
        rows.append({"sigma": float(sigma), "modes_visited": visited,
                     "acf_score": score})
    complete = [r for r in rows if r["modes_visited"] == len(mixture.means)]
    if complete:
        best = min(complete, key=lambda r: r["acf_score"])
        return TuneResult(best["sigma"], True, rows)
    best = max(rows, key=lambda r: r["modes_visited"])
    return TuneResult(best["sigma"], False, rows)


# ---------------------------------------------------------------------------
# Config dispatch
# ---------------------------------------------------------------------------

SAMPLE_HEADERS = {
    1: ("x1", "x2"),
    3: ("x1_1", "x1_2", "x2_1", "x2_2", "x3_1", "x3_2", "x4_1", "x4_2"),
}


def sample_header(config: ExperimentConfig) -> tuple:
    if config.example == 2:
        return tuple(f"x{i + 1}" for i in range(config.d))
    return SAMPLE_HEADERS[config.example]


def _configured_proposal(config: ExperimentConfig, dim: int):
    """Scalar sigma or a row-major matrix from the config, if either is set."""
    if config.proposal_matrix is not None:
        return GaussianProposal.from_config(dim, config.proposal_matrix)
    if config.sigma is not None:
        return GaussianProposal.isotropic(dim, config.sigma)
    return None


def run_experiment(config: ExperimentConfig) -> list:
    """Dispatch a config to its study runner; returns one artifact per chain."""
    if config.example == 1:
        if config.kernel != "downup":
            raise ValueError("study 1 is defined for the down-up kernel")
        sigma = 4.0 if config.sigma is None else config.sigma
        return run_example1(config.case, sigma, config.length, config.burnin,
                            config.replicates, config.seed,
                            proposal=_configured_proposal(config, 2))
    if config.example == 2:
        if config.proposal_matrix is not None:
            raise ValueError("study 2 derives its proposal by adaptation; "
                             "proposal_matrix is not configurable there")
        budget = config.budget_npi if config.matched_budget == "by_evals" else None
        return run_example2(config.d, config.kernel, config.length,
                            config.burnin, config.replicates, config.seed,
                            budget_npi=budget,
                            pre_chain_length=config.pre_chain_length,
                            pt_temps=config.pt_temps)
    kernel = config.kernel
    if kernel not in ("downup", "metropolis", "tempered"):
        raise ValueError("study 3 supports downup, metropolis, tempered")
    sigma = 1.08 if config.sigma is None else config.sigma
    return [run_example3(kernel, config.length, config.burnin, config.seed,
                         data_seed=config.data_seed, sigma=sigma,
                         tt_temps=config.tt_temps,
                         tt_scale_base=config.tt_scale_base,
                         tt_scale_factor=config.tt_scale_factor,
                         proposal=_configured_proposal(config, 2))]
