from __future__ import annotations

from pathlib import Path

import pytest

from occulstm.config import RunConfig, child_seed, load_config_file
from occulstm.errors import UsageError


def test_defaults():
    config = RunConfig().validate()
    assert (config.window_len, config.stride, config.hidden_dim) == (12, 1, 64)
    assert (config.epochs, config.batch_size, config.learning_rate, config.seed) == (60, 32, None, 0)
    assert (config.n_train, config.n_val, config.n_test) == (7, 2, 2)
    assert config.mode == "classifier"
    assert config.clip_norm is None


def test_child_seeds_are_stable_and_distinct():
    assert child_seed(0, "train.init") == child_seed(0, "train.init")
    assert child_seed(0, "train.init") != child_seed(0, "train.shuffle")
    assert child_seed(0, "train.init") != child_seed(1, "train.init")
    assert 0 <= child_seed(123, "synth.schedule") < 2**64


def test_load_config_file(tmp_path):
    path = tmp_path / "run.conf"
    path.write_text(
        "# a training run\n"
        "mode = regressor\n"
        "hidden-dim = 16   # narrow\n"
        "learning_rate = 0.01\n"
        "data = days.csv\n"
        "clip_norm = 5\n"
    )
    values = load_config_file(path)
    assert values == {
        "mode": "regressor",
        "hidden_dim": 16,
        "learning_rate": 0.01,
        "data": Path("days.csv"),
        "clip_norm": 5.0,
    }


def test_flags_override_file(tmp_path):
    path = tmp_path / "run.conf"
    path.write_text("epochs = 5\nseed = 9\n")
    config = RunConfig().merged(load_config_file(path)).merged({"seed": 3, "mode": None})
    assert (config.epochs, config.seed, config.mode) == (5, 3, "classifier")


@pytest.mark.parametrize(
    "text",
    ["epochs = many\n", "colour = blue\n", "[section]\nepochs = 3\n", "epochs\n"],
)
def test_bad_config_files(tmp_path, text):
    path = tmp_path / "run.conf"
    path.write_text(text)
    with pytest.raises(UsageError):
        load_config_file(path)


def test_missing_config_file(tmp_path):
    with pytest.raises(UsageError):
        load_config_file(tmp_path / "nope.conf")


def test_config_file_encoding(tmp_path):
    path = tmp_path / "run.conf"
    path.write_bytes(b"\xef\xbb\xbfepochs = 3\n")
    assert load_config_file(path) == {"epochs": 3}
    path.write_bytes(b"epochs = \xff\n")
    with pytest.raises(UsageError):
        load_config_file(path)


@pytest.mark.parametrize(
    "overrides",
    [
        {"mode": "ranker"},
        {"hidden_dim": 0},
        {"n_test": 0},
        {"epochs": -1},
        {"learning_rate": 0.0},
        {"learning_rate": -1e-3},
        {"clip_norm": -1.0},
    ],
)
def test_validation(overrides):
    with pytest.raises(UsageError):
        RunConfig().merged(overrides).validate()


def test_unknown_override():
    with pytest.raises(UsageError):
        RunConfig().merged({"depth": 2})
