"""Confusion counting, precision/recall/F1, and model evaluation over test windows."""

from __future__ import annotations

import csv
import io
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from rich.table import Table

from occulstm.data.readings import WindowedDataset
from occulstm.errors import DataError, EmptyDataset, EmptyInput, LengthMismatch, UsageError
from occulstm.nn.encoding import MAX_COUNT, NUM_CLASSES, clamp_counts, decode_batch
from occulstm.nn.model import LstmModel

logger = logging.getLogger(__name__)

METRICS_HEADER = ("class", "precision", "recall", "f1", "tp", "fp", "fn")
SERIES_HEADER = ("timestamp", "truth", "prediction")


@dataclass(frozen=True)
class ConfusionCounts:
    """Per-class true positive, false positive and false negative tallies."""

    tp: np.ndarray
    fp: np.ndarray
    fn: np.ndarray


def confusion(preds: Sequence[int] | np.ndarray, truths: Sequence[int] | np.ndarray) -> ConfusionCounts:
    """Tally each sample as a hit for its class, or a false positive/false negative pair."""
    preds = np.asarray(preds, dtype=np.int64)
    truths = np.asarray(truths, dtype=np.int64)
    if preds.shape != truths.shape:
        raise LengthMismatch(f"{preds.size} predictions for {truths.size} truths")
    if preds.size == 0:
        raise EmptyInput("confusion counts need at least one sample")
    for name, labels in (("prediction", preds), ("truth", truths)):
        if labels.min() < 0 or labels.max() > MAX_COUNT:
            raise DataError(f"{name} labels must lie in [0, {MAX_COUNT}]")

    hit = preds == truths
    return ConfusionCounts(
        tp=np.bincount(truths[hit], minlength=NUM_CLASSES),
        fp=np.bincount(preds[~hit], minlength=NUM_CLASSES),
        fn=np.bincount(truths[~hit], minlength=NUM_CLASSES),
    )


def _ratio(num: float, den: float) -> float:
    return float(num) / float(den) if den else 0.0


def precision_recall(counts: ConfusionCounts, k: int) -> tuple[float, float]:
    """Precision and recall of class ``k``; zero where a denominator is zero."""
    tp, fp, fn = int(counts.tp[k]), int(counts.fp[k]), int(counts.fn[k])
    return _ratio(tp, tp + fp), _ratio(tp, tp + fn)


def f1(precision: float, recall: float) -> float:
    """Harmonic mean of precision and recall, 0 when both are 0."""
    return _ratio(2.0 * precision * recall, precision + recall)


def round_to_class(pred: float) -> int:
    """Round half away from zero, then clamp to a valid class label."""
    magnitude = abs(float(pred))
    rounded = math.floor(magnitude)
    # magnitude + 0.5 rounds up to 1.0 for the largest double below one half
    if magnitude - rounded >= 0.5:
        rounded += 1
    rounded = -rounded if pred < 0 else rounded
    return min(max(rounded, 0), MAX_COUNT)


def round_to_classes(preds: np.ndarray) -> np.ndarray:
    preds = np.asarray(preds, dtype=np.float64)
    magnitude = np.abs(preds)
    rounded = np.floor(magnitude)
    rounded = np.sign(preds) * (rounded + (magnitude - rounded >= 0.5))
    return np.clip(rounded, 0, MAX_COUNT).astype(np.int64)


@dataclass(frozen=True)
class MetricsReport:
    """Per-class and micro-averaged precision, recall and F1."""

    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    counts: ConfusionCounts
    micro_precision: float
    micro_recall: float
    micro_f1: float
    samples: int

    @classmethod
    def from_counts(cls, counts: ConfusionCounts) -> MetricsReport:
        pr = [precision_recall(counts, k) for k in range(NUM_CLASSES)]
        tp, fp, fn = int(counts.tp.sum()), int(counts.fp.sum()), int(counts.fn.sum())
        micro_p, micro_r = _ratio(tp, tp + fp), _ratio(tp, tp + fn)
        return cls(
            precision=np.array([p for p, _ in pr]),
            recall=np.array([r for _, r in pr]),
            f1=np.array([f1(p, r) for p, r in pr]),
            counts=counts,
            micro_precision=micro_p,
            micro_recall=micro_r,
            micro_f1=f1(micro_p, micro_r),
            samples=tp + fp,
        )

    def to_csv(self) -> str:
        """One row per class plus a ``micro`` row with the summed counts."""
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(METRICS_HEADER)
        c = self.counts
        for k in range(NUM_CLASSES):
            writer.writerow((
                k,
                repr(float(self.precision[k])),
                repr(float(self.recall[k])),
                repr(float(self.f1[k])),
                int(c.tp[k]),
                int(c.fp[k]),
                int(c.fn[k]),
            ))
        writer.writerow((
            "micro",
            repr(self.micro_precision),
            repr(self.micro_recall),
            repr(self.micro_f1),
            int(c.tp.sum()),
            int(c.fp.sum()),
            int(c.fn.sum()),
        ))
        return out.getvalue()

    def to_table(self, title: str = "Occupancy metrics") -> Table:
        """Per-class rows for classes that occur, followed by the micro average."""
        table = Table(title=title)
        for name in ("class", "precision", "recall", "F1", "support"):
            table.add_column(name, justify="right")
        c = self.counts
        for k in range(NUM_CLASSES):
            support = int(c.tp[k] + c.fn[k])
            if support or c.fp[k]:
                table.add_row(
                    str(k), f"{self.precision[k]:.4f}", f"{self.recall[k]:.4f}", f"{self.f1[k]:.4f}", str(support)
                )
        table.add_row(
            "micro",
            f"{self.micro_precision:.4f}",
            f"{self.micro_recall:.4f}",
            f"{self.micro_f1:.4f}",
            str(self.samples),
            style="bold",
        )
        return table

    def to_text(self) -> str:
        lines = [f"{'class':>6} {'precision':>10} {'recall':>10} {'f1':>10} {'support':>8}"]
        c = self.counts
        for k in range(NUM_CLASSES):
            support = int(c.tp[k] + c.fn[k])
            lines.append(f"{k:>6} {self.precision[k]:>10.4f} {self.recall[k]:>10.4f} {self.f1[k]:>10.4f} {support:>8}")
        lines.append(
            f"{'micro':>6} {self.micro_precision:>10.4f} {self.micro_recall:>10.4f} {self.micro_f1:>10.4f} {self.samples:>8}"
        )
        return "\n".join(lines) + "\n"


def read_metrics_csv(text: str) -> MetricsReport:
    """Rebuild a report from :meth:`MetricsReport.to_csv` output."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != METRICS_HEADER or len(rows) != NUM_CLASSES + 2:
        raise DataError("not a metrics CSV: expected a header, 16 class rows and a micro row")
    try:
        body = rows[1 : NUM_CLASSES + 1]
        counts = ConfusionCounts(
            tp=np.array([int(r[4]) for r in body]),
            fp=np.array([int(r[5]) for r in body]),
            fn=np.array([int(r[6]) for r in body]),
        )
    except (ValueError, IndexError) as e:
        raise DataError(f"malformed metrics CSV: {e}") from e
    return MetricsReport.from_counts(counts)


@dataclass(frozen=True)
class PredictionSeries:
    """Per-window ``(timestamp, truth, prediction)`` triples in time order."""

    timestamps: np.ndarray
    truths: np.ndarray
    predictions: np.ndarray

    def __len__(self) -> int:
        return int(self.timestamps.shape[0])

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(SERIES_HEADER)
        for row in zip(self.timestamps.tolist(), self.truths.tolist(), self.predictions.tolist()):
            writer.writerow(row)
        return out.getvalue()


def read_series_csv(text: str) -> PredictionSeries:
    """Parse a ``timestamp,truth,prediction`` CSV; any defect is a usage error."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(h.strip().lower() for h in header) != SERIES_HEADER:
        raise UsageError(f"series CSV must start with {','.join(SERIES_HEADER)}")
    stamps, truths, preds = [], [], []
    for row in reader:
        if not row:
            continue
        if len(row) != len(SERIES_HEADER):
            raise UsageError(f"series CSV line {reader.line_num}: expected 3 columns, got {len(row)}")
        try:
            stamps.append(int(row[0]))
            truths.append(int(row[1]))
            preds.append(int(row[2]))
        except ValueError:
            raise UsageError(f"series CSV line {reader.line_num}: non-integer value") from None
    if not stamps:
        raise UsageError("series CSV has no rows")
    return PredictionSeries(
        timestamps=np.array(stamps, dtype=np.int64),
        truths=np.array(truths, dtype=np.int64),
        predictions=np.array(preds, dtype=np.int64),
    )


@dataclass(frozen=True)
class EvaluationResult:
    report: MetricsReport
    series: PredictionSeries


def predict_labels(model: LstmModel, outputs: np.ndarray) -> np.ndarray:
    """Class labels from raw model outputs: argmax for the classifier, rounding for the regressor."""
    if model.config.classifier:
        return decode_batch(outputs)
    return round_to_classes(outputs[:, 0])


def evaluate_model(
    model: LstmModel, data: WindowedDataset, outputs: np.ndarray | None = None, threads: int = 1
) -> EvaluationResult:
    """Score ``model`` on labeled windows; ``outputs`` skips the forward pass when already computed."""
    if len(data) == 0:
        raise EmptyDataset("no test windows to evaluate")
    if not data.labeled:
        raise DataError("evaluation needs labeled windows")
    if outputs is None:
        outputs = model.forward(data.windows, threads=threads)
    preds = predict_labels(model, outputs)
    truths = clamp_counts(data.labels)
    report = MetricsReport.from_counts(confusion(preds, truths))
    logger.debug("evaluated %d windows, micro-F1 %.4f", len(data), report.micro_f1)
    return EvaluationResult(report=report, series=PredictionSeries(data.timestamps.copy(), truths, preds))
