"""Command-line interface for occulstm."""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from rich.console import Console
from rich.logging import RichHandler

from occulstm import __version__
from occulstm.config import RunConfig, load_config_file
from occulstm.data.readings import (
    co2_alerts,
    group_by_day,
    make_windows,
    parse_sensor_csv,
    split_by_days,
    write_sensor_csv,
)
from occulstm.errors import ConfigMismatch, DataError, EmptyDataset, OcculstmError, UsageError

logger = logging.getLogger("occulstm")

RUN_FIELDS = (
    "data",
    "checkpoint",
    "out_dir",
    "mode",
    "hidden_dim",
    "window_len",
    "stride",
    "epochs",
    "batch_size",
    "learning_rate",
    "seed",
    "clip_norm",
    "threads",
    "n_train",
    "n_val",
    "n_test",
)


def positive_int(raw: str) -> int:
    value = int(raw)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {raw}")
    return value


def non_negative_int(raw: str) -> int:
    value = int(raw)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be a non-negative integer, got {raw}")
    return value


def configure_logging(verbose: bool, quiet: bool) -> None:
    """Send log records to stderr through rich, keeping stdout for results."""
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def _overrides(args: argparse.Namespace) -> dict[str, Any]:
    """Config-file values overlaid with the flags the user actually passed."""
    values: dict[str, Any] = load_config_file(args.config) if args.config else {}
    for name in RUN_FIELDS:
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    return values


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Built-in defaults < config file < command-line flags."""
    return RunConfig().merged(_overrides(args)).validate()


def _require(path: Path | None, flag: str) -> Path:
    if path is None:
        raise UsageError(f"{flag} is required")
    return path


def _read_text(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8-sig")
    except (OSError, UnicodeDecodeError) as e:
        raise DataError(f"cannot read {path}: {e}") from e


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _load_readings(path: Path, *, labeled: bool, last_days: int | None = None):
    readings = parse_sensor_csv(_read_text(path), labeled=labeled)
    if last_days is not None:
        days = group_by_day(readings)
        readings = [r for group in days[-last_days:] for r in group]
    return readings


def cmd_synth(args: argparse.Namespace) -> int:
    """Write a synthetic labeled sensor CSV and its ground-truth schedule."""
    from occulstm.data.synth import RoomParams, gen_readings, gen_schedule, write_schedule_csv

    config = resolve_config(args)
    out = args.out or config.out_dir / "synthetic.csv"
    schedule_out = args.schedule_out or out.with_suffix(".schedule.csv")
    params = RoomParams()
    schedule = gen_schedule(args.days, config.seed, params.step_minutes)
    readings = gen_readings(schedule, params, config.seed)
    _write_text(out, write_sensor_csv(readings))
    _write_text(schedule_out, write_schedule_csv(schedule))
    logger.info("wrote %d readings over %d days to %s", len(readings), args.days, out)
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    """Train a classifier or regressor on the train/val days of a labeled CSV."""
    from occulstm.nn.checkpoint import Checkpoint, save_checkpoint
    from occulstm.nn.model import ModelConfig
    from occulstm.nn.train import TrainHyper, fit

    config = resolve_config(args)
    data = _require(config.data, "--data")
    checkpoint = _require(config.checkpoint, "--checkpoint")
    history_out = args.history or config.out_dir / "history.csv"

    readings = _load_readings(data, labeled=True)
    split = split_by_days(readings, config.n_train, config.n_val, config.n_test)
    model_config = ModelConfig(hidden_dim=config.hidden_dim, window_len=config.window_len, mode=config.mode)
    hyper = TrainHyper(
        epochs=config.epochs,
        batch_size=config.batch_size,
        learning_rate=config.learning_rate,
        seed=config.seed,
        clip_norm=config.clip_norm,
        threads=config.threads,
    )
    result = fit(model_config, split, hyper, stride=config.stride)
    save_checkpoint(Checkpoint(model=result.model, stats=result.stats), checkpoint)
    _write_text(history_out, result.history.to_csv())

    if result.best_epoch:
        best = result.history.epochs[result.best_epoch - 1]
        print(f"best epoch {best.epoch}: val micro-F1 {best.val_f1:.4f}, val loss {best.val_loss:.6f}")
    else:
        print("no epochs run: saved initial parameters")
    return 0


def _test_windows(args: argparse.Namespace, checkpoint_path: Path, data: Path, *, labeled: bool):
    from occulstm.nn.checkpoint import load_checkpoint

    ckpt = load_checkpoint(checkpoint_path)
    overrides = _overrides(args)
    window_len = overrides.get("window_len")
    if window_len is not None and window_len != ckpt.model.config.window_len:
        raise ConfigMismatch(f"window_len {window_len} does not match checkpoint window_len {ckpt.model.config.window_len}")
    readings = _load_readings(data, labeled=labeled, last_days=args.last_days)
    stride = overrides.get("stride", 1)
    windows = make_windows(group_by_day(readings), ckpt.stats, ckpt.model.config.window_len, stride)
    return ckpt, windows


def _evaluate(args: argparse.Namespace, checkpoint_path: Path, data: Path, threads: int = 1):
    from occulstm.evaluation import evaluate_model

    ckpt, windows = _test_windows(args, checkpoint_path, data, labeled=True)
    if len(windows) == 0:
        raise EmptyDataset(f"{data} yields no windows of length {ckpt.model.config.window_len}")
    return ckpt, evaluate_model(ckpt.model, windows, threads=threads)


def cmd_evaluate(args: argparse.Namespace) -> int:
    """Score a checkpoint on labeled data; write metrics and the prediction series."""
    config = resolve_config(args)
    data = _require(config.data, "--data")
    checkpoint = _require(config.checkpoint, "--checkpoint")
    ckpt, result = _evaluate(args, checkpoint, data, config.threads)

    metrics_out = args.metrics_out or config.out_dir / "metrics.csv"
    series_out = args.series_out or config.out_dir / "series.csv"
    report_out = args.report_out or config.out_dir / "metrics.txt"
    _write_text(metrics_out, result.report.to_csv())
    _write_text(series_out, result.series.to_csv())
    _write_text(report_out, result.report.to_text())
    Console().print(result.report.to_table(title=f"{ckpt.model.config.mode} on {data.name}"))
    print(f"micro-F1 {result.report.micro_f1:.4f} over {result.report.samples} windows")
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    """Evaluate two checkpoints on the same labeled data, side by side."""
    from rich.table import Table

    config = resolve_config(args)
    data = _require(config.data, "--data")
    rows = []
    for path in (args.first, args.second):
        ckpt, result = _evaluate(args, path, data, config.threads)
        rows.append((path.name, ckpt.model.config.mode, result.report))

    table = Table(title=f"Model comparison on {data.name}")
    for name in ("checkpoint", "mode", "precision", "recall", "micro-F1", "windows"):
        table.add_column(name, justify="right" if name not in ("checkpoint", "mode") else "left")
    for name, mode, report in rows:
        table.add_row(
            name,
            mode,
            f"{report.micro_precision:.4f}",
            f"{report.micro_recall:.4f}",
            f"{report.micro_f1:.4f}",
            str(report.samples),
        )
    Console().print(table)
    (a_name, _, a), (b_name, _, b) = rows
    winner = a_name if a.micro_f1 >= b.micro_f1 else b_name
    print(f"{a_name} micro-F1 {a.micro_f1:.4f} vs {b_name} micro-F1 {b.micro_f1:.4f}: {winner} ranks first")
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    """Print one ``timestamp,count`` line per window of an unlabeled CSV."""
    from occulstm.evaluation import predict_labels

    config = resolve_config(args)
    data = _require(config.data, "--data")
    checkpoint = _require(config.checkpoint, "--checkpoint")
    ckpt, windows = _test_windows(args, checkpoint, data, labeled=False)
    if args.probs and not ckpt.model.config.classifier:
        raise UsageError("--probs needs a classifier checkpoint")
    if len(windows) == 0:
        raise DataError(f"{data} has fewer rows than one window of {ckpt.model.config.window_len} in any day")

    outputs = ckpt.model.forward(windows.windows, threads=config.threads)
    labels = predict_labels(ckpt.model, outputs)
    alerts = co2_alerts(windows.last_co2, args.co2_alert) if args.co2_alert is not None else None
    lines = []
    for n, (ts, label) in enumerate(zip(windows.timestamps.tolist(), labels.tolist())):
        fields = [str(ts), str(label)]
        if args.probs:
            fields.extend(repr(float(p)) for p in outputs[n])
        if alerts is not None:
            fields.append("1" if alerts[n] else "0")
        lines.append(",".join(fields))
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def cmd_plot(args: argparse.Namespace) -> int:
    """Render a series CSV from ``evaluate`` as an SVG timeline."""
    from occulstm.evaluation import read_series_csv
    from occulstm.plot import render_series_svg

    try:
        text = args.series.read_text(encoding="utf-8-sig")
    except (OSError, UnicodeDecodeError) as e:
        raise UsageError(f"cannot read series CSV {args.series}: {e}") from e
    series = read_series_csv(text)
    _write_text(args.out, render_series_svg(series))
    logger.info("wrote %s", args.out)
    return 0


def cmd_view(args: argparse.Namespace) -> int:
    """Browse a metrics CSV and series CSV in the terminal."""
    from occulstm.app import ReportApp
    from occulstm.screens import ReportSource

    app = ReportApp(ReportSource(metrics=args.metrics, series=args.series))
    app.run()
    return 0


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=("classifier", "regressor"), help="output head (default classifier)")
    p.add_argument("--hidden-dim", type=positive_int, help="LSTM width (default 64)")
    p.add_argument("--window-len", type=positive_int, help="steps per window (default 12)")
    p.add_argument("--stride", type=positive_int, help="steps between window starts (default 1)")


def _add_threads_flag(p: argparse.ArgumentParser, text: str = "worker threads for forward passes (default 1)") -> None:
    p.add_argument("--threads", type=positive_int, help=text)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key = value settings file; flags take precedence")
    common.add_argument("--seed", type=non_negative_int, help="root seed for every random stream (default 0)")
    common.add_argument("--out-dir", type=Path, help="directory for default output files (default .)")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")

    parser = argparse.ArgumentParser(prog="occulstm", description="Room occupancy counting with an LSTM.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic classroom dataset")
    p.add_argument("--days", type=positive_int, default=11, help="days to simulate (default 11)")
    p.add_argument("--out", type=Path, help="sensor CSV path (default OUT_DIR/synthetic.csv)")
    p.add_argument("--schedule-out", type=Path, help="schedule CSV path (default next to --out)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", parents=[common], help="train a model on labeled sensor data")
    p.add_argument("--data", type=Path, help="labeled sensor CSV")
    p.add_argument("--checkpoint", type=Path, help="where to write the checkpoint")
    p.add_argument("--history", type=Path, help="history CSV path (default OUT_DIR/history.csv)")
    _add_model_flags(p)
    p.add_argument("--epochs", type=non_negative_int, help="training epochs (default 60)")
    p.add_argument("--batch-size", type=positive_int, help="windows per mini-batch (default 32)")
    p.add_argument("--learning-rate", type=float, help="Adam step size (default 1e-2 classifier, 1e-3 regressor)")
    p.add_argument("--clip-norm", type=float, help="global gradient norm limit (default off)")
    _add_threads_flag(p, "worker threads for backward passes and validation (default 1)")
    p.add_argument("--n-train", type=positive_int, help="training days (default 7)")
    p.add_argument("--n-val", type=positive_int, help="validation days (default 2)")
    p.add_argument("--n-test", type=positive_int, help="test days (default 2)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", parents=[common], help="score a checkpoint on labeled data")
    p.add_argument("--data", type=Path, help="labeled sensor CSV")
    p.add_argument("--checkpoint", type=Path, help="checkpoint to evaluate")
    p.add_argument("--last-days", type=positive_int, help="only use the final N days of the CSV")
    p.add_argument("--window-len", type=positive_int, help="expected window length; must match the checkpoint")
    p.add_argument("--stride", type=positive_int, help="steps between window starts (default 1)")
    p.add_argument("--metrics-out", type=Path, help="metrics CSV path (default OUT_DIR/metrics.csv)")
    p.add_argument("--series-out", type=Path, help="series CSV path (default OUT_DIR/series.csv)")
    p.add_argument("--report-out", type=Path, help="plain-text metrics table path (default OUT_DIR/metrics.txt)")
    _add_threads_flag(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", parents=[common], help="evaluate two checkpoints on the same data")
    p.add_argument("first", type=Path, help="first checkpoint, usually the one-hot classifier")
    p.add_argument("second", type=Path, help="second checkpoint, usually the regression baseline")
    p.add_argument("--data", type=Path, help="labeled sensor CSV")
    p.add_argument("--last-days", type=positive_int, help="only use the final N days of the CSV")
    p.add_argument("--stride", type=positive_int, help="steps between window starts (default 1)")
    _add_threads_flag(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("predict", parents=[common], help="print per-window occupancy predictions")
    p.add_argument("--data", type=Path, help="sensor CSV, labels optional")
    p.add_argument("--checkpoint", type=Path, help="checkpoint to run")
    p.add_argument("--last-days", type=positive_int, help="only use the final N days of the CSV")
    p.add_argument("--window-len", type=positive_int, help="expected window length; must match the checkpoint")
    p.add_argument("--stride", type=positive_int, help="steps between window starts (default 1)")
    p.add_argument("--probs", action="store_true", help="append the 16 class probabilities")
    p.add_argument("--co2-alert", type=float, metavar="PPM", help="append a CO2 alert flag for readings at or above PPM")
    _add_threads_flag(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("plot", parents=[common], help="render a series CSV as SVG")
    p.add_argument("--series", type=Path, required=True, help="series CSV from evaluate")
    p.add_argument("--out", type=Path, required=True, help="SVG output path")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("view", parents=[common], help="browse an evaluation report in the terminal")
    p.add_argument("--metrics", type=Path, required=True, help="metrics CSV from evaluate")
    p.add_argument("--series", type=Path, help="series CSV from evaluate")
    p.set_defaults(func=cmd_view)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Main entry point for the occulstm CLI."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    configure_logging(args.verbose, args.quiet)
    try:
        return args.func(args)
    except OcculstmError as e:
        logger.error("%s", e)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
