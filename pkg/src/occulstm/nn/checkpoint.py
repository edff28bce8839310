"""The ``OCCULSTM v1`` text checkpoint: config, normalization stats, and every parameter array.

Layout::

    OCCULSTM v1
    mode = classifier
    hidden_dim = 64
    window_len = 12
    norm_mean = <5 values>
    norm_std = <5 values>
    array W_f 64 5
    <one line of space-separated values per row>
    ...
    end

Values are written with 17 significant digits, which round-trips float64 exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from occulstm.data.readings import FEATURES, NormStats
from occulstm.errors import CheckpointFormatError
from occulstm.nn.model import HeadParams, LstmModel, LstmParams, ModelConfig

MAGIC = "OCCULSTM v1"
FIELDS = ("mode", "hidden_dim", "window_len", "norm_mean", "norm_std")


@dataclass
class Checkpoint:
    model: LstmModel
    stats: NormStats


def _fmt(values: np.ndarray) -> str:
    return " ".join(f"{float(v):.17g}" for v in np.ravel(values))


def dumps(checkpoint: Checkpoint) -> str:
    model, stats = checkpoint.model, checkpoint.stats
    lines = [
        MAGIC,
        f"mode = {model.config.mode}",
        f"hidden_dim = {model.config.hidden_dim}",
        f"window_len = {model.config.window_len}",
        f"norm_mean = {_fmt(stats.mean)}",
        f"norm_std = {_fmt(stats.std)}",
    ]
    for name, array in model.arrays().items():
        lines.append(f"array {name} {' '.join(str(n) for n in array.shape)}")
        rows = array.reshape(array.shape[0], -1) if array.ndim == 2 else array.reshape(1, -1)
        lines.extend(_fmt(row) for row in rows)
    lines.append("end")
    return "\n".join(lines) + "\n"


def _floats(text: str, expected: int, what: str) -> np.ndarray:
    try:
        values = np.array([float(v) for v in text.split()], dtype=np.float64)
    except ValueError:
        raise CheckpointFormatError(f"{what}: non-numeric value") from None
    if values.size != expected:
        raise CheckpointFormatError(f"{what}: expected {expected} values, got {values.size}")
    if not np.all(np.isfinite(values)):
        raise CheckpointFormatError(f"{what}: non-finite value")
    return values


def loads(text: str) -> Checkpoint:
    """Parse a checkpoint, validating names and dimensions against the recorded config."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != MAGIC:
        raise CheckpointFormatError(f"missing {MAGIC!r} header")
    if len(lines) < 1 + len(FIELDS):
        raise CheckpointFormatError("truncated header")

    header: dict[str, str] = {}
    for expected, line in zip(FIELDS, lines[1 : 1 + len(FIELDS)]):
        key, sep, value = line.partition("=")
        if not sep or key.strip() != expected:
            raise CheckpointFormatError(f"expected field {expected!r}, got {line!r}")
        header[expected] = value.strip()
    try:
        config = ModelConfig(
            hidden_dim=int(header["hidden_dim"]),
            window_len=int(header["window_len"]),
            mode=header["mode"],
        )
    except ValueError as e:
        raise CheckpointFormatError(f"invalid config: {e}") from e
    stats = NormStats(
        mean=_floats(header["norm_mean"], len(FEATURES), "norm_mean"),
        std=_floats(header["norm_std"], len(FEATURES), "norm_std"),
    )

    expected_shapes = {
        **{n: a.shape for n, a in LstmParams.zeros(config.hidden_dim, config.input_dim).arrays().items()},
        **{n: a.shape for n, a in HeadParams.zeros(config.hidden_dim, config.num_outputs).arrays().items()},
    }
    arrays: dict[str, np.ndarray] = {}
    pos = 1 + len(FIELDS)
    for name, shape in expected_shapes.items():
        if pos >= len(lines):
            raise CheckpointFormatError(f"truncated before array {name}")
        tag = lines[pos].split()
        dims = tuple(int(n) for n in tag[2:]) if all(n.isdigit() for n in tag[2:]) else None
        if tag[:2] != ["array", name] or dims != shape:
            raise CheckpointFormatError(f"expected 'array {name} {' '.join(map(str, shape))}', got {lines[pos]!r}")
        n_rows = shape[0] if len(shape) == 2 else 1
        row_len = shape[1] if len(shape) == 2 else shape[0]
        body = lines[pos + 1 : pos + 1 + n_rows]
        if len(body) != n_rows:
            raise CheckpointFormatError(f"array {name}: truncated")
        rows = [_floats(row, row_len, f"array {name}") for row in body]
        arrays[name] = np.vstack(rows).reshape(shape)
        pos += 1 + n_rows
    if pos >= len(lines) or lines[pos].strip() != "end":
        raise CheckpointFormatError("missing 'end' marker")

    params = LstmParams(**{n: arrays[n] for n in LstmParams.NAMES})
    head = HeadParams(**{n: arrays[n] for n in HeadParams.NAMES})
    return Checkpoint(model=LstmModel(config, params, head), stats=stats)


def save_checkpoint(checkpoint: Checkpoint, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(checkpoint), encoding="utf-8")


def load_checkpoint(path: Path) -> Checkpoint:
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise CheckpointFormatError(f"cannot read checkpoint {path}: {e}") from e
    return loads(text)
