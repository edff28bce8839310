"""Run configuration: built-in defaults, ``key = value`` files, and seed derivation."""

from __future__ import annotations

import configparser
import hashlib
import logging
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, ClassVar

from occulstm.errors import UsageError

logger = logging.getLogger(__name__)

MODES = ("classifier", "regressor")


def child_seed(seed: int, label: str) -> int:
    """Derive an independent 64-bit seed for the stage named ``label``."""
    digest = hashlib.blake2b(f"{seed}:{label}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


@dataclass(frozen=True)
class RunConfig:
    """Every setting a command can take from a flag or a config file."""

    data: Path | None = None
    checkpoint: Path | None = None
    out_dir: Path = Path(".")

    mode: str = "classifier"
    hidden_dim: int = 64
    window_len: int = 12
    stride: int = 1

    epochs: int = 60
    batch_size: int = 32
    # None picks the per-head default: 1e-2 for the classifier, 1e-3 for the regressor
    learning_rate: float | None = None
    seed: int = 0
    clip_norm: float | None = None
    threads: int = 1

    n_train: int = 7
    n_val: int = 2
    n_test: int = 2

    POSITIVE: ClassVar[tuple[str, ...]] = (
        "hidden_dim",
        "window_len",
        "stride",
        "batch_size",
        "threads",
        "n_train",
        "n_val",
        "n_test",
    )

    def validate(self) -> RunConfig:
        """Check value ranges, returning ``self`` so calls can be chained."""
        if self.mode not in MODES:
            raise UsageError(f"mode must be one of {', '.join(MODES)}, got {self.mode!r}")
        for name in self.POSITIVE:
            if getattr(self, name) < 1:
                raise UsageError(f"{name} must be positive, got {getattr(self, name)}")
        if self.epochs < 0:
            raise UsageError(f"epochs must be non-negative, got {self.epochs}")
        if self.learning_rate is not None and self.learning_rate <= 0:
            raise UsageError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.clip_norm is not None and self.clip_norm <= 0:
            raise UsageError(f"clip_norm must be positive, got {self.clip_norm}")
        return self

    def merged(self, overrides: dict[str, Any]) -> RunConfig:
        """Return a copy with every non-``None`` override applied."""
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


def _coerce(name: str, raw: str) -> Any:
    """Convert a config-file string to the type of the ``RunConfig`` field."""
    kinds = {f.name: f.type for f in fields(RunConfig)}
    kind = str(kinds[name])
    try:
        if "Path" in kind:
            return Path(raw)
        if "int" in kind:
            return int(raw)
        if "float" in kind:
            return float(raw)
    except ValueError:
        raise UsageError(f"config key {name!r}: cannot parse {raw!r}") from None
    return raw


def load_config_file(path: Path) -> dict[str, Any]:
    """Read ``key = value`` lines with ``#`` comments into typed overrides."""
    parser = configparser.ConfigParser(comment_prefixes=("#",), inline_comment_prefixes=("#",), interpolation=None)
    try:
        text = path.read_text(encoding="utf-8-sig")
    except (OSError, UnicodeDecodeError) as e:
        raise UsageError(f"cannot read config file {path}: {e}") from e
    try:
        parser.read_string("[run]\n" + text, source=str(path))
    except configparser.Error as e:
        raise UsageError(f"malformed config file {path}: {e}") from e
    if parser.sections() != ["run"]:
        raise UsageError(f"{path}: section headers are not supported, use plain key = value lines")

    known = {f.name for f in fields(RunConfig)}
    values: dict[str, Any] = {}
    for key, raw in parser["run"].items():
        name = key.replace("-", "_")
        if name not in known:
            raise UsageError(f"{path}: unknown config key {key!r}")
        values[name] = _coerce(name, raw)
    logger.debug("loaded %d settings from %s", len(values), path)
    return values
