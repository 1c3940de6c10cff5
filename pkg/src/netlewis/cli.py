"""Command line entry point: ``netlewis run``, ``netlewis report``, ``netlewis degrees``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import graphs
from .experiment import ExperimentConfig, read_records, run_experiment

# CLI flag -> ExperimentConfig field
FLAG_FIELDS = {
    "topology": "topology",
    "centrality": "centrality",
    "nodes": "n_agents",
    "edges": "n_edges",
    "schedule_size": "schedule_size",
    "games_per_pairing": "games_per_pairing",
    "eval_games": "eval_games",
    "eval_pairs": "eval_pairs",
    "minibatch_size": "minibatch_size",
    "seeds": "seeds",
    "lr": "lr",
}
TUPLE_FIELDS = {"seeds", "cardinalities"}


def _convert(field: str, raw: str):
    types = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}
    if field not in types:
        raise ValueError(f"unknown config key {field!r}")
    if field in TUPLE_FIELDS:
        return tuple(int(x) for x in raw.replace(",", " ").split())
    default = getattr(ExperimentConfig(), field)
    if isinstance(default, bool):
        return raw.lower() in ("1", "true", "yes")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw


def read_config_file(path: str | Path) -> dict:
    """Parse ``key = value`` lines; keys may be CLI flag names or config field names."""
    out = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{n}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key == "seed":
            key = "seeds"
        if key == "out_dir":
            out["out_dir"] = value
            continue
        field = FLAG_FIELDS.get(key, key)
        out[field] = _convert(field, value)
    return out


def config_from_args(args) -> tuple[ExperimentConfig, str | None]:
    values = read_config_file(args.config) if args.config else {}
    out_dir = values.pop("out_dir", None)
    for flag, field in FLAG_FIELDS.items():
        v = getattr(args, flag, None)
        if v is not None:
            values[field] = tuple(v) if field == "seeds" else v
    if args.out_dir is not None:
        out_dir = args.out_dir
    return ExperimentConfig(**values), out_dir


def cmd_run(args) -> int:
    config, out_dir = config_from_args(args)
    if out_dir is None:
        raise SystemExit("run: --out-dir is required (on the command line or in the config file)")
    run_experiment(config, out_dir, evaluate=not args.no_eval, checkpoints=args.checkpoints)
    print(f"wrote {Path(out_dir) / 'records.csv'} and {Path(out_dir) / 'manifest.json'}")
    return 0


def cmd_report(args) -> int:
    from . import plotting, report

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    text = []
    by_phase: dict[str, dict] = {"train": {}, "eval": {}}
    for run_dir in map(Path, args.runs):
        records = read_records(run_dir / "records.csv")
        manifest = json.loads((run_dir / "manifest.json").read_text())
        cfg = manifest["config"]
        label = args.label_prefix + (f"{cfg['topology']}-{cfg['centrality']}"
                                     if cfg["topology"] != "random" else "random")
        for phase in ("train", "eval"):
            if not any(r.phase == phase for r in records):
                continue
            s = report.summarize(records, args.window, phase)
            by_phase[phase][label] = s
            report.write_curve_csv(s, out / f"{label}_{phase}_curve.csv")
            text.append(report.format_summary(label, phase, s))
        scores = {e["seed"]: np.array(e["centrality_scores"]) for e in manifest["seeds"]}
        trajs = report.agent_trajectories(records, scores, args.window)
        report.write_trajectory_csv(trajs, out / f"{label}_agents.csv")
        plotting.agent_trajectories(trajs, out / f"{label}_agents.png", title=label)
        for rank, t in trajs.items():
            if t.empty:
                text.append(f"  [{label}] {rank}-centrality agent played no games in seeds {t.empty}")
    for phase, summaries in by_phase.items():
        if summaries:
            plotting.reward_curves(summaries, out / f"rewards_{phase}.png", title=f"{phase} reward",
                                   chance=None)
    summary = "\n".join(text) + "\n"
    (out / "summary.txt").write_text(summary)
    sys.stdout.write(summary)
    return 0


def cmd_degrees(args) -> int:
    from . import plotting

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dists = {}
    rng_root = np.random.SeedSequence(args.seed)
    for kind, ss in zip(("er", "ws", "ba"), rng_root.spawn(3)):
        params = graphs.resolve_params(kind, args.nodes, args.edges, args.p_rewire)
        g = graphs.generate(kind, params, np.random.default_rng(ss))
        dists[kind.upper()] = graphs.degree_distribution(g)
        if args.dump:
            graphs.dump_graph(g, out / f"{kind}_graph.txt")
        with open(out / f"{kind}_degrees.csv", "w") as fh:
            fh.write("degree,count\n")
            fh.writelines(f"{d},{c}\n" for d, c in dists[kind.upper()].items())
        print(f"{kind}: {g.num_edges} edges, max degree {max(dists[kind.upper()])}")
        for w in params.warnings:
            print(f"  warning: {w}")
    plotting.degree_histogram(dists, out / "degree_distributions.png")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="netlewis", description=__doc__)
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="train and evaluate a population")
    r.add_argument("--topology", choices=[k.value for k in graphs.TopologyKind])
    r.add_argument("--centrality", choices=["degree", "betweenness", "pagerank", "uniform"])
    r.add_argument("--nodes", type=int)
    r.add_argument("--edges", type=int)
    r.add_argument("--schedule-size", type=int)
    r.add_argument("--games-per-pairing", type=int)
    r.add_argument("--eval-games", type=int)
    r.add_argument("--eval-pairs", type=int)
    r.add_argument("--minibatch-size", type=int)
    r.add_argument("--lr", type=float)
    r.add_argument("--seed", "--seeds", dest="seeds", type=int, nargs="+")
    r.add_argument("--out-dir")
    r.add_argument("--config", help="key = value file; command line flags take precedence")
    r.add_argument("--no-eval", action="store_true", help="skip the evaluation phase")
    r.add_argument("--checkpoints", action="store_true", help="save trained agent parameters")
    r.set_defaults(func=cmd_run)

    rep = sub.add_parser("report", help="curve CSVs, figures and a text summary from run directories")
    rep.add_argument("runs", nargs="+", help="run directories holding records.csv and manifest.json")
    rep.add_argument("--out", required=True)
    rep.add_argument("--window", type=int, default=100)
    rep.add_argument("--label-prefix", default="")
    rep.set_defaults(func=cmd_report)

    d = sub.add_parser("degrees", help="degree distributions of ER/WS/BA graphs")
    d.add_argument("--nodes", type=int, default=1000)
    d.add_argument("--edges", type=int, default=2000)
    d.add_argument("--p-rewire", type=float, default=0.1)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--out", required=True)
    d.add_argument("--dump", action="store_true", help="also write each graph as an edge list")
    d.set_defaults(func=cmd_degrees)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
