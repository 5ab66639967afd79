"""Command-line front end for the experiment harness.

Subcommands map one-to-one onto the run_* functions in ``experiments``.
A JSON config file can prefill any option; explicit flags win.  The
exit code is 0 only when every acceptance verdict in the run's manifest
passed.
"""

from __future__ import annotations

import argparse
import json
import sys

from .experiments import (
    ExperimentConfig,
    RunManifest,
    analytic_entropic_time,
    run_annealed_experiment,
    run_generate,
    run_profile_experiment,
    run_proxy_experiment,
    run_qsd_experiment,
)
from .graph import DbmParams

_DEFAULT_BETAS = {
    "subcritical": "0.5,1.5",
    "critical": "0.5,2,3",
    "supercritical": "0.5,1,2,5",
}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file prefilling any of the options below")
    p.add_argument("--n", type=int, help="vertices per community")
    p.add_argument("--m", type=int, help="number of communities")
    p.add_argument("--lambda", dest="lam", type=float, help="edge density multiplier")
    p.add_argument("--alpha", type=float, help="rewiring probability")
    p.add_argument(
        "--regime",
        choices=("subcritical", "critical", "supercritical"),
        help="coupling regime; critical derives alpha from --C",
    )
    p.add_argument("--C", dest="c", type=float, help="critical-regime constant")
    p.add_argument("--betas", help="comma-separated scaled times")
    p.add_argument(
        "--timescale",
        choices=("entropic", "inverse_alpha"),
        help="how betas translate to step counts",
    )
    p.add_argument("--seeds", help="comma-separated seeds (default 1,2,3)")
    p.add_argument(
        "--starts",
        help="start policy: 'exhaustive' or a sample size (default 64)",
    )
    p.add_argument("--threads", type=int, help="worker threads across seeds")
    p.add_argument("--out", help="output directory (default out/<command>)")
    p.add_argument(
        "--deterministic",
        action="store_true",
        help="record the determinism pledge in the manifest",
    )


def _build_config(args: argparse.Namespace, command: str) -> ExperimentConfig:
    raw: dict = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            raw = json.load(fh)

    def pick(flag, key, default=None):
        return flag if flag is not None else raw.get(key, default)

    n = pick(args.n, "n", 4000)
    m = pick(args.m, "m", 2)
    lam = pick(args.lam, "lambda", 2.0)
    regime = pick(args.regime, "regime", "supercritical")
    c = pick(args.c, "c")
    alpha = pick(args.alpha, "alpha")
    seeds = pick(args.seeds, "seeds", "1,2,3")
    if isinstance(seeds, str):
        seeds = tuple(int(s) for s in seeds.split(","))
    else:
        seeds = tuple(int(s) for s in seeds)
    betas = pick(args.betas, "beta_grid", _DEFAULT_BETAS[regime])
    if isinstance(betas, str):
        betas = tuple(float(b) for b in betas.split(","))
    else:
        betas = tuple(float(b) for b in betas)
    timescale = pick(args.timescale, "timescale", "entropic")
    starts = pick(args.starts, "start_policy", "64")
    if str(starts) == "exhaustive":
        start_policy, sample_starts = "exhaustive", 0
    else:
        start_policy, sample_starts = "sampled", int(starts)
    out_dir = pick(args.out, "out_dir", f"out/{command}")
    threads = pick(args.threads, "threads", 1)

    if regime == "critical":
        if c is None:
            raise SystemExit("critical regime needs --C")
        probe = DbmParams(n=n, m=m, lam=lam, alpha=0.0, seed=0)
        alpha = 1.0 / (c * analytic_entropic_time(probe))
    if alpha is None:
        raise SystemExit("need --alpha (or --regime critical with --C)")
    params = DbmParams(n=n, m=m, lam=lam, alpha=alpha, seed=seeds[0])
    return ExperimentConfig(
        params=params,
        regime=regime,
        beta_grid=betas,
        timescale=timescale,
        c=c,
        start_policy=start_policy,
        sample_starts=sample_starts or 64,
        seeds=seeds,
        out_dir=out_dir,
        threads=int(threads),
        deterministic=bool(args.deterministic or raw.get("deterministic", False)),
    )


def _finish(manifest: RunManifest) -> int:
    for v in manifest.verdicts:
        mark = "pass" if v.passed else "FAIL"
        print(f"[{mark}] {v.name}: value {v.value:.6g}, tolerance {v.tolerance}")
    print(f"artifacts: {', '.join(manifest.files)}")
    return 0 if manifest.all_passed else 1


def main(argv: list[str] | None = None) -> int:
    top = argparse.ArgumentParser(
        prog="dbmwalk",
        description="simulation harness for random walks on the directed block model",
    )
    sub = top.add_subparsers(dest="command", required=True)
    for name, blurb in (
        ("generate", "generate graphs and a degree summary"),
        ("profile", "empirical mixing profile vs the limiting curve"),
        ("qsd", "per-community escape pipeline and jump statistics"),
        ("annealed", "revealed-walk community law and jump survival"),
        ("proxy", "two-scale surrogate measures"),
        ("report", "print the manifest of a finished run"),
    ):
        p = sub.add_parser(name, help=blurb)
        if name == "report":
            p.add_argument("out_dir", help="run directory holding manifest.json")
        else:
            _add_common(p)

    args = top.parse_args(argv)
    if args.command == "report":
        with open(f"{args.out_dir}/manifest.json", encoding="utf-8") as fh:
            manifest = json.load(fh)
        print(json.dumps(manifest, indent=2, sort_keys=True))
        return 0 if all(v["passed"] for v in manifest["verdicts"]) else 1

    try:
        config = _build_config(args, args.command)
    except ValueError as exc:
        raise SystemExit(f"invalid configuration: {exc}") from exc
    runner = {
        "generate": run_generate,
        "profile": run_profile_experiment,
        "qsd": run_qsd_experiment,
        "annealed": run_annealed_experiment,
        "proxy": run_proxy_experiment,
    }[args.command]
    return _finish(runner(config))


if __name__ == "__main__":
    sys.exit(main())
