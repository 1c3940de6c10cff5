"""Symbolic objects and referential game construction.

Objects are triples of categorical factors (shape, object colour, floor
colour). Datasets are stored as integer arrays of shape ``(N, 3)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

SPLITS = ("train", "test")
MAX_REDRAWS = 1000


class ObjectSpec(NamedTuple):
    shape: int
    object_color: int
    floor_color: int


@dataclass(frozen=True)
class WorldConfig:
    n_train: int = 4000
    n_test: int = 1000
    cardinalities: tuple[int, int, int] = (5, 8, 5)


@dataclass(frozen=True)
class Dataset:
    train: np.ndarray
    test: np.ndarray
    cardinalities: tuple[int, int, int]

    def split(self, name: str) -> np.ndarray:
        if name not in SPLITS:
            raise KeyError(f"unknown split {name!r}")
        return self.train if name == "train" else self.test


@dataclass
class GameInstance:
    candidates: np.ndarray  # (x_size, 3)
    target_index: int

    @property
    def target(self) -> ObjectSpec:
        return ObjectSpec(*(int(x) for x in self.candidates[self.target_index]))


@dataclass
class GameBatch:
    candidates: np.ndarray  # (batch, x_size, 3)
    target_index: np.ndarray  # (batch,)

    @property
    def targets(self) -> np.ndarray:
        return self.candidates[np.arange(len(self.target_index)), self.target_index]

    def __len__(self) -> int:
        return len(self.target_index)

    def __getitem__(self, i: int) -> GameInstance:
        return GameInstance(self.candidates[i], int(self.target_index[i]))


def generate_dataset(config: WorldConfig, rng: np.random.Generator) -> Dataset:
    card = tuple(int(c) for c in config.cardinalities)
    if len(card) != 3 or min(card) < 2:
        raise ValueError(f"need three factor cardinalities >= 2, got {card}")
    high = np.array(card)
    train = rng.integers(0, high, size=(config.n_train, 3))
    test = rng.integers(0, high, size=(config.n_test, 3))
    return Dataset(train, test, card)


def sample_games(dataset: Dataset, split: str, batch: int, x_size: int,
                 rng: np.random.Generator) -> GameBatch:
    """Draw ``batch`` games of ``x_size`` candidates from one split.

    Distractors identical to the target in every factor are redrawn; the
    target is then placed at a uniform position.
    """
    pool = dataset.split(split)
    if len(pool) == 0:
        raise ValueError(f"split {split!r} is empty")
    if x_size < 2:
        raise ValueError("a game needs at least 2 candidates")
    idx = rng.integers(len(pool), size=(batch, x_size))
    objs = pool[idx]
    # slot 0 holds the target until shuffled into place
    clash = np.all(objs[:, 1:] == objs[:, :1], axis=-1)
    attempts = 0
    while clash.any():
        attempts += 1
        if attempts > MAX_REDRAWS:
            raise ValueError(f"could not find distractors distinct from the target in {MAX_REDRAWS} redraws")
        rows, cols = np.nonzero(clash)
        objs[rows, cols + 1] = pool[rng.integers(len(pool), size=rows.size)]
        clash = np.all(objs[:, 1:] == objs[:, :1], axis=-1)
    target_index = rng.integers(x_size, size=batch)
    cand = np.empty_like(objs)
    for b in range(batch):
        t = target_index[b]
        cand[b, t] = objs[b, 0]
        cand[b, np.arange(x_size) != t] = objs[b, 1:]
    return GameBatch(cand, target_index)


def sample_game(dataset: Dataset, x_size: int, rng: np.random.Generator, split: str = "train") -> GameInstance:
    return sample_games(dataset, split, 1, x_size, rng)[0]


def reward(predicted, target):
    """1 where the prediction hits the target, else 0 (elementwise for arrays)."""
    if np.ndim(predicted) == 0 and np.ndim(target) == 0:
        return int(predicted == target)
    return (np.asarray(predicted) == np.asarray(target)).astype(np.int64)


def dump_dataset(dataset: Dataset, path: str | Path) -> None:
    lines = [f"{name} {s} {c} {f}" for name in SPLITS for s, c, f in dataset.split(name)]
    Path(path).write_text("\n".join(lines) + "\n")


def load_dataset(path: str | Path, cardinalities=(5, 8, 5)) -> Dataset:
    rows: dict[str, list[list[int]]] = {name: [] for name in SPLITS}
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        name, *vals = line.split()
        rows[name].append([int(v) for v in vals])
    arrays = {name: np.array(r, dtype=np.int64).reshape(-1, 3) for name, r in rows.items()}
    return Dataset(arrays["train"], arrays["test"], tuple(cardinalities))
