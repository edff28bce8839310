from __future__ import annotations

import numpy as np
import pytest

from occulstm.data.readings import NormStats
from occulstm.errors import CheckpointFormatError
from occulstm.nn.checkpoint import MAGIC, Checkpoint, dumps, load_checkpoint, loads, save_checkpoint
from occulstm.nn.model import LstmModel, ModelConfig


@pytest.fixture
def checkpoint(rng) -> Checkpoint:
    model = LstmModel.initialize(ModelConfig(hidden_dim=3, window_len=4), seed=2)
    for array in model.arrays().values():
        array += rng.normal(0.0, 1e-3, size=array.shape)
    stats = NormStats(mean=rng.normal(size=5) * 100, std=rng.uniform(0.1, 50.0, size=5))
    return Checkpoint(model=model, stats=stats)


def test_layout(checkpoint):
    lines = dumps(checkpoint).splitlines()
    assert lines[0] == MAGIC
    assert lines[1:4] == ["mode = classifier", "hidden_dim = 3", "window_len = 4"]
    assert lines[4].startswith("norm_mean = ")
    assert lines[6] == "array W_f 3 5"
    assert lines[10] == "array U_f 3 3"
    assert lines[14] == "array b_f 3"
    assert lines[-1] == "end"


def test_round_trip_is_bit_exact(checkpoint, tmp_path):
    path = tmp_path / "model.ckpt"
    save_checkpoint(checkpoint, path)
    loaded = load_checkpoint(path)

    assert loaded.model.config == checkpoint.model.config
    np.testing.assert_array_equal(loaded.stats.mean, checkpoint.stats.mean)
    np.testing.assert_array_equal(loaded.stats.std, checkpoint.stats.std)
    for name, array in checkpoint.model.arrays().items():
        np.testing.assert_array_equal(loaded.model.arrays()[name], array)
    assert dumps(loaded) == path.read_text()


def test_regressor_head_recorded():
    model = LstmModel.initialize(ModelConfig(hidden_dim=2, window_len=3, mode="regressor"), seed=0)
    text = dumps(Checkpoint(model=model, stats=NormStats(np.zeros(5), np.ones(5))))
    assert "mode = regressor" in text
    assert "array W_out 1 2" in text
    assert loads(text).model.head.num_outputs == 1


@pytest.mark.parametrize(
    "mangle",
    [
        lambda t: t.replace(MAGIC, "OCCULSTM v2"),
        lambda t: t.replace("hidden_dim = 3", "hidden = 3"),
        lambda t: t.replace("mode = classifier", "mode = ranker"),
        lambda t: t.replace("array W_f 3 5", "array W_f 3 4"),
        lambda t: t.replace("array U_i 3 3", "array U_x 3 3"),
        lambda t: t.replace("\nend\n", "\n"),
        lambda t: "\n".join(t.splitlines()[:20]),
        lambda t: t.replace("norm_std = ", "norm_std = nan "),
        lambda t: t.replace("array b_out 16\n", "array b_out 16\nx "),
    ],
)
def test_rejects_damaged_files(checkpoint, mangle):
    text = dumps(checkpoint)
    damaged = mangle(text)
    assert damaged != text
    with pytest.raises(CheckpointFormatError):
        loads(damaged)


def test_missing_file(tmp_path):
    with pytest.raises(CheckpointFormatError):
        load_checkpoint(tmp_path / "absent.ckpt")


def test_undecodable_file(tmp_path):
    path = tmp_path / "garbled.ckpt"
    path.write_bytes(MAGIC.encode() + b"\n\xff\xfe\n")
    with pytest.raises(CheckpointFormatError):
        load_checkpoint(path)
