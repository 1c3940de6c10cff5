import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netlewis import world
from netlewis.world import Dataset, WorldConfig


@pytest.fixture(scope="module")
def dataset():
    return world.generate_dataset(WorldConfig(), np.random.default_rng(0))


def test_dataset_defaults(dataset):
    assert dataset.train.shape == (4000, 3) and dataset.test.shape == (1000, 3)
    for arr in (dataset.train, dataset.test):
        assert np.all(arr >= 0) and np.all(arr < np.array([5, 8, 5]))


def test_dataset_deterministic(dataset):
    again = world.generate_dataset(WorldConfig(), np.random.default_rng(0))
    assert np.array_equal(again.train, dataset.train) and np.array_equal(again.test, dataset.test)


def test_dataset_rejects_degenerate_factors():
    with pytest.raises(ValueError):
        world.generate_dataset(WorldConfig(cardinalities=(1, 8, 5)), np.random.default_rng(0))


def test_sample_game_shape(dataset, rng):
    g = world.sample_game(dataset, 4, rng)
    assert g.candidates.shape == (4, 3) and 0 <= g.target_index < 4
    assert isinstance(g.target, world.ObjectSpec)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31), st.integers(2, 8), st.sampled_from(world.SPLITS))
def test_target_distinct_from_distractors(seed, x, split):
    ds = world.generate_dataset(WorldConfig(200, 50, (2, 2, 2)), np.random.default_rng(seed))
    batch = world.sample_games(ds, split, 64, x, np.random.default_rng(seed + 1))
    for i in range(len(batch)):
        g = batch[i]
        t = g.candidates[g.target_index]
        others = np.delete(g.candidates, g.target_index, axis=0)
        assert not np.any(np.all(others == t, axis=1))


def test_two_distinct_specs_both_present():
    ds = Dataset(np.array([[0, 0, 0], [1, 1, 1]]), np.zeros((0, 3), dtype=np.int64), (2, 2, 2))
    batch = world.sample_games(ds, "train", 200, 2, np.random.default_rng(0))
    for c in batch.candidates:
        assert sorted(map(tuple, c)) == [(0, 0, 0), (1, 1, 1)]


def test_redraw_limit():
    ds = Dataset(np.array([[0, 0, 0]] * 5), np.zeros((0, 3), dtype=np.int64), (2, 2, 2))
    with pytest.raises(ValueError, match="1000"):
        world.sample_games(ds, "train", 1, 2, np.random.default_rng(0))
    with pytest.raises(ValueError):
        world.sample_games(ds, "test", 1, 2, np.random.default_rng(0))
    with pytest.raises(ValueError):
        world.sample_games(ds, "train", 1, 1, np.random.default_rng(0))


def test_target_index_uniform(dataset):
    batch = world.sample_games(dataset, "train", 100_000, 4, np.random.default_rng(5))
    freq = np.bincount(batch.target_index, minlength=4) / 1e5
    assert np.all(np.abs(freq - 0.25) < 0.01)


def test_reward():
    assert world.reward(2, 2) == 1 and world.reward(0, 2) == 0
    assert world.reward(np.array([1, 2]), np.array([1, 3])).tolist() == [1, 0]


def test_random_predictor_is_at_chance(dataset):
    rng = np.random.default_rng(6)
    batch = world.sample_games(dataset, "test", 100_000, 4, rng)
    r = world.reward(rng.integers(4, size=100_000), batch.target_index)
    assert abs(r.mean() - 0.25) < 0.01


def test_dataset_dump_roundtrip(tmp_path):
    ds = world.generate_dataset(WorldConfig(30, 10), np.random.default_rng(2))
    p = tmp_path / "d.txt"
    world.dump_dataset(ds, p)
    lines = p.read_text().splitlines()
    assert lines[0].startswith("train ") and lines[-1].startswith("test ") and len(lines) == 40
    back = world.load_dataset(p)
    assert np.array_equal(back.train, ds.train) and np.array_equal(back.test, ds.test)
