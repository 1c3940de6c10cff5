"""Population training and evaluation on a graph-constrained pairing schedule."""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import __version__
from . import centrality as cent
from . import graphs
from .agents import Agent, AgentConfig, OptimizerConfig, apply_update, play
from .sampling import random_baseline_schedule, sample_schedule
from .world import Dataset, WorldConfig, generate_dataset, sample_games

log = logging.getLogger(__name__)

RECORD_HEADER = ("seed", "phase", "game_index", "pair_id", "sender_id", "receiver_id", "reward")


@dataclass
class ExperimentConfig:
    topology: str = "ba"
    centrality: str = "degree"
    n_agents: int = 16
    n_edges: int = 32
    schedule_size: int = 32
    games_per_pairing: int = 2048
    minibatch_size: int = 32
    x_size: int = 4
    vocab: int = 20
    max_len: int = 5
    embed_dim: int = 32
    hidden: int = 64
    n_train: int = 4000
    n_test: int = 1000
    cardinalities: tuple[int, int, int] = (5, 8, 5)
    eval_pairs: int = 10
    eval_games: int = 10_000
    seeds: tuple[int, ...] = (0, 1, 2)
    lr: float = 1.0
    clip_norm: float = 5.0
    init_scale: float = 0.5
    entropy_switch_steps: int = 1_000_000
    p_rewire_ws: float = 0.1
    pagerank_damping: float = 0.85
    pagerank_tol: float = 1e-10
    pagerank_max_iter: int = 10_000

    def __post_init__(self):
        self.topology = graphs.TopologyKind(self.topology).value
        self.centrality = cent.CentralityKind(self.centrality).value
        self.cardinalities = tuple(int(c) for c in self.cardinalities)
        self.seeds = tuple(int(s) for s in self.seeds)
        counts = ("n_agents", "schedule_size", "games_per_pairing", "minibatch_size", "x_size", "vocab",
                  "max_len", "n_train", "n_test", "eval_pairs", "eval_games")
        for name in counts:
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.n_agents < 2:
            raise ValueError("a population needs at least 2 agents")
        if self.games_per_pairing % self.minibatch_size:
            raise ValueError(f"minibatch_size {self.minibatch_size} must divide "
                             f"games_per_pairing={self.games_per_pairing}")
        if not self.seeds:
            raise ValueError("at least one seed is required")

    @property
    def agent_config(self) -> AgentConfig:
        return AgentConfig(vocab=self.vocab, max_len=self.max_len, embed_dim=self.embed_dim,
                           hidden=self.hidden, encoder_hidden=self.hidden,
                           cardinalities=self.cardinalities, init_scale=self.init_scale)

    @property
    def optimizer(self) -> OptimizerConfig:
        return OptimizerConfig(lr=self.lr, clip_norm=self.clip_norm,
                               entropy_switch_steps=self.entropy_switch_steps)

    @property
    def world(self) -> WorldConfig:
        return WorldConfig(self.n_train, self.n_test, self.cardinalities)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["cardinalities"] = list(self.cardinalities)
        d["seeds"] = list(self.seeds)
        return d


class RunRecord(NamedTuple):
    seed: int
    phase: str
    game_index: int
    pair_id: int
    sender_id: int
    receiver_id: int
    reward: int


@dataclass
class TrainedPopulation:
    seed: int
    agents: list[Agent]
    graph: graphs.Graph | None
    scores: np.ndarray
    schedule: list[tuple[int, int]]
    dataset: Dataset
    warnings: list[str] = field(default_factory=list)


class _Streams:
    """Independent random streams for each stochastic component of one seed."""

    NAMES = ("graph", "schedule", "dataset", "init", "train", "eval")

    def __init__(self, seed: int):
        children = np.random.SeedSequence(seed).spawn(len(self.NAMES))
        for name, ss in zip(self.NAMES, children):
            setattr(self, name, np.random.default_rng(ss))


def build_population_structure(config: ExperimentConfig, seed: int, streams: _Streams | None = None):
    """Graph, centrality scores, schedule and parameter warnings for one seed."""
    streams = streams or _Streams(seed)
    n = config.n_agents
    if config.topology == graphs.TopologyKind.RANDOM.value:
        scores = cent.uniform_scores(n)
        schedule = random_baseline_schedule(n, config.schedule_size, streams.schedule)
        return None, scores, schedule, []
    params = graphs.resolve_params(config.topology, n, config.n_edges, config.p_rewire_ws)
    g = graphs.generate(config.topology, params, streams.graph)
    scores = cent.compute(config.centrality, g, config.pagerank_damping, config.pagerank_tol,
                          config.pagerank_max_iter)
    schedule = sample_schedule(g, scores, config.schedule_size, streams.schedule)
    return g, scores, schedule, list(params.warnings)


def balanced_roles(n_batches: int, rng: np.random.Generator) -> np.ndarray:
    """Random 0/1 role flags with as close to half of each as possible."""
    roles = np.zeros(n_batches, dtype=np.int64)
    roles[: n_batches // 2] = 1
    if n_batches % 2:
        roles[-1] = rng.integers(2)
    return rng.permutation(roles)


def _train_pair(a: Agent, b: Agent, ids: tuple[int, int], n_games: int, split: str, dataset: Dataset,
                config: ExperimentConfig, rng: np.random.Generator, emit) -> None:
    cfg, opt = config.agent_config, config.optimizer
    mb = config.minibatch_size
    # a trailing partial minibatch covers game counts that mb does not divide
    sizes = [mb] * (n_games // mb) + ([n_games % mb] if n_games % mb else [])
    for size, role in zip(sizes, balanced_roles(len(sizes), rng)):
        (s, s_id), (r, r_id) = ((a, ids[0]), (b, ids[1])) if role == 0 else ((b, ids[1]), (a, ids[0]))
        games = sample_games(dataset, split, size, config.x_size, rng)
        rollout = play(s, r, games, cfg, rng, switch_steps=opt.entropy_switch_steps)
        apply_update(s, r, rollout, cfg, opt)
        for rew in rollout.rewards:
            emit(s_id, r_id, int(rew))


def run_training(config: ExperimentConfig, seed: int, records: list[RunRecord] | None = None):
    """Continual pair-based training over the sampled schedule.

    Records are appended to ``records`` as games are played, so a caller
    holding the list keeps the partial log if training aborts.
    Returns ``(population, records)``.
    """
    records = [] if records is None else records
    streams = _Streams(seed)
    g, scores, schedule, warnings = build_population_structure(config, seed, streams)
    dataset = generate_dataset(config.world, streams.dataset)
    agents = [Agent.create(config.agent_config, streams.init) for _ in range(config.n_agents)]
    for w in warnings:
        log.warning(w)

    counter = [0]
    for pair_id, (u, v) in enumerate(schedule):
        def emit(s_id, r_id, rew, pair_id=pair_id):
            records.append(RunRecord(seed, "train", counter[0], pair_id, s_id, r_id, rew))
            counter[0] += 1
        _train_pair(agents[u], agents[v], (u, v), config.games_per_pairing, "train", dataset, config,
                    streams.train, emit)
        log.debug("seed %d pair %d (%d, %d) done", seed, pair_id, u, v)
    pop = TrainedPopulation(seed, agents, g, scores, schedule, dataset, warnings)
    return pop, records


def run_eval(population: TrainedPopulation, config: ExperimentConfig, seed: int | None = None,
             records: list[RunRecord] | None = None):
    """Fine-tune random pairs of trained agents on held-out objects.

    Every pair starts from copies of the post-training parameters, so an
    agent drawn twice is reset before its second pair.
    Returns ``(eval_pairs, records)``.
    """
    seed = population.seed if seed is None else seed
    records = [] if records is None else records
    rng = _Streams(seed).eval
    pairs = random_baseline_schedule(config.n_agents, config.eval_pairs, rng)
    counter = [0]
    for pair_id, (u, v) in enumerate(pairs):
        a, b = population.agents[u].copy(), population.agents[v].copy()

        def emit(s_id, r_id, rew, pair_id=pair_id):
            records.append(RunRecord(seed, "eval", counter[0], pair_id, s_id, r_id, rew))
            counter[0] += 1
        _train_pair(a, b, (u, v), config.eval_games, "test", population.dataset, config, rng, emit)
    return pairs, records


# -- files ------------------------------------------------------------------

def write_records(records, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RECORD_HEADER)
        w.writerows(records)


def read_records(path: str | Path) -> list[RunRecord]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != RECORD_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        return [RunRecord(int(s), ph, int(gi), int(p), int(si), int(ri), int(rw))
                for s, ph, gi, p, si, ri, rw in reader]


def seed_manifest(pop: TrainedPopulation, eval_pairs=None) -> dict:
    g = pop.graph
    entry = {
        "seed": pop.seed,
        "graph": None if g is None else {
            "n": g.n,
            "n_edges": g.num_edges,
            "edges": [list(e) for e in g.edges()],
            "degree_distribution": {str(k): v for k, v in graphs.degree_distribution(g).items()},
        },
        "centrality_scores": [float(x) for x in pop.scores],
        "schedule": [list(p) for p in pop.schedule],
        "parameter_warnings": pop.warnings,
    }
    if eval_pairs is not None:
        entry["eval_pairs"] = [list(p) for p in eval_pairs]
    return entry


def build_manifest(config: ExperimentConfig, seed_entries: list[dict]) -> dict:
    return {
        "tool": "netlewis",
        "version": __version__,
        "config": config.to_dict(),
        "seeds": seed_entries,
    }


def write_manifest(manifest: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def run_experiment(config: ExperimentConfig, out_dir: str | Path, evaluate: bool = True,
                   checkpoints: bool = False) -> dict:
    """Train (and evaluate) every seed, writing records.csv and manifest.json."""
    from .agents import save_params

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records: list[RunRecord] = []
    entries = []
    try:
        for seed in config.seeds:
            log.info("seed %d: training %s/%s", seed, config.topology, config.centrality)
            pop, _ = run_training(config, seed, records)
            pairs = None
            if evaluate:
                log.info("seed %d: evaluating %d pairs", seed, config.eval_pairs)
                pairs, _ = run_eval(pop, config, seed, records)
            entries.append(seed_manifest(pop, pairs))
            if checkpoints:
                ckpt = out / "checkpoints"
                ckpt.mkdir(exist_ok=True)
                for i, agent in enumerate(pop.agents):
                    save_params(agent.params, ckpt / f"seed{seed}_agent{i}.npz")
    finally:
        write_records(records, out / "records.csv")
    manifest = build_manifest(config, entries)
    write_manifest(manifest, out / "manifest.json")
    return manifest
