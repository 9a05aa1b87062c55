"""Command-line entry points: run experiments, verify kernels, tune scales.

``run`` executes a config file and writes a run directory holding the
config echo, per-chain CSV sample files, JSON summaries, and diagnostic
figures.  ``verify`` runs the exact discrete-chain checks and reports
one line per check.  ``tune`` grid-searches an isotropic proposal scale.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .exact import verification_report
from .experiments import (
    ExperimentConfig,
    persist_artifact,
    run_experiment,
    sample_header,
    tune_sigma,
    write_json,
)


def _load_config(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _default_outdir(config: ExperimentConfig) -> str:
    return f"runs/example{config.example}-{config.kernel}-seed{config.seed}"


def cmd_run(args) -> int:
    config = ExperimentConfig.from_dict(_load_config(args.config))
    outdir = Path(args.outdir or _default_outdir(config))
    outdir.mkdir(parents=True, exist_ok=True)
    write_json(outdir / "config.json", config.echo())

    artifacts = run_experiment(config)
    header = sample_header(config)
    aggregate = {}
    for artifact in artifacts:
        persist_artifact(artifact, outdir, header)
        aggregate[artifact.name] = artifact.summary.to_dict()
        if not args.no_plots:
            from .plots import render_run_figures
            render_run_figures(artifact.samples, outdir, artifact.name,
                               acf=artifact.summary.acf)
        s = artifact.summary
        print(f"{artifact.name}: kept={s.n_kept} acceptance={s.acceptance_rate:.4f} "
              f"evals/iter={s.evals_per_iteration:.3f}")
    write_json(outdir / "summary.json", aggregate)
    print(f"run directory: {outdir}")
    return 0


def cmd_verify(args) -> int:
    records = verification_report()
    width = max(len(r["check"]) for r in records)
    failures = 0
    for r in records:
        status = "PASS" if r["passed"] else "FAIL"
        print(f"{r['check']:<{width}}  {r['value']:.3e} {r['direction']} "
              f"{r['bound']:.0e}  {status}")
        failures += not r["passed"]
    print(f"{len(records) - failures}/{len(records)} checks passed")
    return 1 if failures else 0


def cmd_tune(args) -> int:
    raw = _load_config(args.config)
    result = tune_sigma(
        case=raw.get("case", "a"),
        grid=raw["grid"],
        length=raw["length"],
        burnin=raw["burnin"],
        seed=raw.get("seed", 0),
        max_lag=raw.get("max_lag", 50),
    )
    for row in result.table:
        print(f"sigma={row['sigma']:<6g} modes={row['modes_visited']:<3d} "
              f"acf_score={row['acf_score']:.3f}")
    flag = "" if result.all_modes_visited else "  (no scale visited every mode)"
    print(f"chosen sigma: {result.sigma}{flag}")
    if args.out:
        write_json(args.out, {"sigma": result.sigma,
                              "all_modes_visited": result.all_modes_visited,
                              "table": result.table})
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="downup",
        description="Multimodal MCMC experiments with the down-up kernel")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute an experiment config")
    run_p.add_argument("--config", required=True, help="JSON config file")
    run_p.add_argument("--outdir", default=None, help="run directory")
    run_p.add_argument("--no-plots", action="store_true",
                       help="skip figure rendering")
    run_p.set_defaults(func=cmd_run)

    verify_p = sub.add_parser("verify", help="exact kernel verification suite")
    verify_p.set_defaults(func=cmd_verify)

    tune_p = sub.add_parser("tune", help="grid-search the proposal scale")
    tune_p.add_argument("--config", required=True, help="JSON config file")
    tune_p.add_argument("--out", default=None, help="write result JSON here")
    tune_p.set_defaults(func=cmd_tune)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
