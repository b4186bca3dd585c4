"""Command line entry points.

    heatinfer synth --config cfg.json --out DIR [--seed N]
    heatinfer run   --config cfg.json --out DIR [--seed N] [--steps N]
    heatinfer grid  --config cfg.json --out DIR [--report report.json]
    heatinfer fit   --config cfg.json --samples samples.csv --out DIR

Exit code 0 on success. Failures print a single machine-parsable line
`error: <message>` on standard error and exit nonzero. All progress and
diagnostics go to standard error; result files land in --out.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import harness
from .bayes import heaters_from, pack
from .field import field_grid
from .harness import ConfigError, load_config


def _load(args):
    seed = getattr(args, "seed", None)
    steps = getattr(args, "steps", None)
    if seed is None and steps is None:
        return load_config(args.config)
    try:
        with open(args.config) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"config file {args.config}: {e}")
    if seed is not None:
        raw["seed"] = seed
    if steps is not None:
        raw["schedule"] = dict(raw.get("schedule", {}))
        raw["schedule"]["phase2_steps"] = steps
    return harness.parse_config(raw)


def _cmd_synth(args) -> int:
    config = _load(args)
    obs = harness.synthesize(config)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "observation.json")
    with open(path, "w") as fh:
        json.dump({"values": obs.values.tolist(), "noise_sigma": obs.noise_sigma,
                   "seed": config.seed}, fh, indent=1)
    print(path)
    return 0


def _cmd_run(args) -> int:
    config = _load(args)
    report = harness.run_experiment(config, out_dir=args.out, progress=sys.stderr)
    print(os.path.join(args.out, "report.json"))
    best = np.array2string(report.best_mean, precision=4)
    print(f"best component {report.best_index}: mean {best}", file=sys.stderr)
    return 0


def _cmd_grid(args) -> int:
    config = _load(args)
    if config.grid is None:
        raise ConfigError("grid: config has no grid section")
    if args.report:
        with open(args.report) as fh:
            doc = json.load(fh)
        harness.validate_report(doc)
        states = np.asarray(doc["best_mean"], dtype=float)
        tag = "best"
    else:
        states = pack(config.truth)
        tag = "truth"
    g = field_grid(heaters_from(states, config.spec.n_heaters),
                   config.grid.region, config.grid.resolution,
                   config.sensors.wall, config.quad_n)
    os.makedirs(args.out, exist_ok=True)
    for path in harness.write_grid(g, os.path.join(args.out, f"{tag}_grid.csv")):
        print(path)
    return 0


def _cmd_fit(args) -> int:
    config = _load(args)
    samples = harness.read_samples(args.samples)
    report = harness.fit_samples(config, samples)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "report.json")
    harness.write_report(report, path)
    print(path)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heatinfer",
        description="Locate, size, and weigh uniform heat sources from "
                    "steady-state temperature sensors.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, steps=False):
        p.add_argument("--config", required=True, help="experiment config (JSON)")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        if steps:
            p.add_argument("--steps", type=int, default=None,
                           help="override phase-2 step count")

    p = sub.add_parser("synth", help="write the synthetic observation only")
    common(p)
    p.set_defaults(fn=_cmd_synth)

    p = sub.add_parser("run", help="full twin experiment")
    common(p, steps=True)
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("grid", help="export a temperature field grid")
    common(p)
    p.add_argument("--report", default=None,
                   help="report.json; grid the best estimate instead of the truth")
    p.set_defaults(fn=_cmd_grid)

    p = sub.add_parser("fit", help="GMM + PCA of an existing samples.csv")
    common(p)
    p.add_argument("--samples", required=True, help="samples.csv from a run")
    p.set_defaults(fn=_cmd_fit)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
