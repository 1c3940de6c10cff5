"""Reward curves and summary statistics from run records."""

from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

FIRST_GAMES = 1000
FINAL_FRACTION = 0.1


def windowed_mean(rewards, window: int) -> np.ndarray:
    """Trailing mean over the last ``window`` games; shorter at the start."""
    if window < 1:
        raise ValueError("window must be >= 1")
    r = np.asarray(rewards, dtype=float)
    c = np.concatenate([[0.0], np.cumsum(r)])
    idx = np.arange(1, r.size + 1)
    lo = np.maximum(idx - window, 0)
    return (c[idx] - c[lo]) / (idx - lo)


def _by_seed(records, phase: str | None):
    out: dict[int, list] = defaultdict(list)
    for r in records:
        if phase is None or r.phase == phase:
            out[r.seed].append(r)
    for rows in out.values():
        rows.sort(key=lambda r: r.game_index)
    return dict(sorted(out.items()))


def _stack_truncated(curves: list[np.ndarray]) -> np.ndarray:
    n = min(len(c) for c in curves)
    return np.stack([c[:n] for c in curves])


@dataclass
class Summary:
    window: int
    seed_curves: dict[int, np.ndarray]
    mean: np.ndarray
    std: np.ndarray
    peak: dict[int, float]
    first_mean: dict[int, float]
    final_mean: dict[int, float]

    @property
    def seeds(self) -> list[int]:
        return list(self.seed_curves)


def summarize(records, window: int = 100, phase: str | None = "train") -> Summary:
    """Windowed reward curve per seed plus the across-seed mean and std band."""
    if window < 1:
        raise ValueError("window must be >= 1")
    grouped = _by_seed(records, phase)
    if not grouped:
        raise ValueError(f"no records for phase {phase!r}")
    curves, peak, first, final = {}, {}, {}, {}
    for seed, rows in grouped.items():
        rew = np.array([r.reward for r in rows], dtype=float)
        curves[seed] = windowed_mean(rew, window)
        peak[seed] = float(curves[seed].max())
        first[seed] = float(rew[:FIRST_GAMES].mean())
        tail = max(1, int(round(FINAL_FRACTION * rew.size)))
        final[seed] = float(rew[-tail:].mean())
    stacked = _stack_truncated(list(curves.values()))
    return Summary(window, curves, stacked.mean(axis=0), stacked.std(axis=0), peak, first, final)


@dataclass
class Trajectory:
    rank: str
    agents: dict[int, int]  # seed -> agent id
    seed_curves: dict[int, np.ndarray]
    mean: np.ndarray
    std: np.ndarray
    empty: list[int] = field(default_factory=list)  # seeds where the agent never played


def rank_agents(scores) -> dict[str, int]:
    """Min, median and max agents by centrality; ties go to the lower index."""
    scores = np.asarray(scores)
    order = np.lexsort((np.arange(scores.size), scores))
    return {"min": int(order[0]), "median": int(order[scores.size // 2]), "max": int(order[-1])}


def agent_trajectories(records, scores, window: int = 100) -> dict[str, Trajectory]:
    """Reward curves of the min/median/max-centrality agents over training.

    ``scores`` is one vector shared by all seeds or a mapping seed -> vector.
    An agent's curve covers every game it played in either role. Across
    seeds, curves are cut to the shortest non-empty one before averaging.
    """
    grouped = _by_seed(records, "train")
    out = {}
    for rank in ("min", "median", "max"):
        agents, curves, empty = {}, {}, []
        for seed, rows in grouped.items():
            s = scores[seed] if isinstance(scores, dict) else scores
            agent = rank_agents(s)[rank]
            agents[seed] = agent
            rew = np.array([r.reward for r in rows if agent in (r.sender_id, r.receiver_id)], dtype=float)
            if rew.size == 0:
                empty.append(seed)
                continue
            curves[seed] = windowed_mean(rew, window)
        if curves:
            stacked = _stack_truncated(list(curves.values()))
            mean, std = stacked.mean(axis=0), stacked.std(axis=0)
        else:
            mean = std = np.zeros(0)
        out[rank] = Trajectory(rank, agents, curves, mean, std, empty)
    return out


def role_fractions(records, n_agents: int, phase: str = "train") -> dict[int, np.ndarray]:
    """Per-seed fraction of each agent's games played as sender (nan if unused)."""
    grouped = _by_seed(records, phase)
    out = {}
    for seed, rows in grouped.items():
        sent = np.zeros(n_agents)
        total = np.zeros(n_agents)
        for r in rows:
            sent[r.sender_id] += 1
            total[r.sender_id] += 1
            total[r.receiver_id] += 1
        with np.errstate(invalid="ignore"):
            out[seed] = sent / total
    return out


# -- output -----------------------------------------------------------------

def write_curve_csv(summary: Summary, path: str | Path) -> None:
    seeds = summary.seeds
    n = len(summary.mean)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["game_index", "mean", "std"] + [f"seed_{s}" for s in seeds])
        for i in range(n):
            w.writerow([i, f"{summary.mean[i]:.6f}", f"{summary.std[i]:.6f}"]
                       + [f"{summary.seed_curves[s][i]:.6f}" for s in seeds])


def write_trajectory_csv(trajs: dict[str, Trajectory], path: str | Path) -> None:
    n = max((len(t.mean) for t in trajs.values()), default=0)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        cols = [c for r in trajs for c in (f"{r}_mean", f"{r}_std")]
        w.writerow(["agent_game_index"] + cols)
        for i in range(n):
            row = [i]
            for t in trajs.values():
                row += [f"{t.mean[i]:.6f}", f"{t.std[i]:.6f}"] if i < len(t.mean) else ["", ""]
            w.writerow(row)


def format_summary(label: str, phase: str, s: Summary) -> str:
    lines = [f"[{label}] phase={phase} window={s.window}"]
    for seed in s.seeds:
        lines.append(f"  seed {seed}: games={len(s.seed_curves[seed])} peak={s.peak[seed]:.4f} "
                     f"first{FIRST_GAMES}={s.first_mean[seed]:.4f} final10%={s.final_mean[seed]:.4f}")
    lines.append(f"  mean: peak={np.mean(list(s.peak.values())):.4f} "
                 f"first{FIRST_GAMES}={np.mean(list(s.first_mean.values())):.4f} "
                 f"final10%={np.mean(list(s.final_mean.values())):.4f}")
    return "\n".join(lines)
