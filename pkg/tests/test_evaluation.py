from __future__ import annotations

import numpy as np
import pytest

from occulstm.data.readings import WindowedDataset
from occulstm.errors import DataError, EmptyDataset, EmptyInput, LengthMismatch, UsageError
from occulstm.evaluation import (
    ConfusionCounts,
    MetricsReport,
    PredictionSeries,
    confusion,
    evaluate_model,
    f1,
    precision_recall,
    read_metrics_csv,
    read_series_csv,
    round_to_class,
    round_to_classes,
)
from occulstm.nn.model import HeadParams, LstmModel, LstmParams, ModelConfig


def counts_at(k: int, tp: int, fp: int, fn: int) -> ConfusionCounts:
    arrays = [np.zeros(16, dtype=np.int64) for _ in range(3)]
    for array, value in zip(arrays, (tp, fp, fn)):
        array[k] = value
    return ConfusionCounts(*arrays)


def brute_force(preds: list[int], truths: list[int]) -> dict[str, list[float]]:
    tp, fp, fn = [0] * 16, [0] * 16, [0] * 16
    for p, t in zip(preds, truths):
        if p == t:
            tp[t] += 1
        else:
            fp[p] += 1
            fn[t] += 1
    precision = [tp[k] / (tp[k] + fp[k]) if tp[k] + fp[k] else 0.0 for k in range(16)]
    recall = [tp[k] / (tp[k] + fn[k]) if tp[k] + fn[k] else 0.0 for k in range(16)]
    score = [2 * p * r / (p + r) if p + r else 0.0 for p, r in zip(precision, recall)]
    return {"tp": tp, "fp": fp, "fn": fn, "precision": precision, "recall": recall, "f1": score}


def constant_model(label: int) -> LstmModel:
    """A classifier that predicts ``label`` for every window."""
    head = HeadParams.zeros(2)
    head.b_out[label] = 5.0
    return LstmModel(ModelConfig(hidden_dim=2, window_len=2), LstmParams.zeros(2), head)


def dataset(labels: list[int]) -> WindowedDataset:
    n = len(labels)
    return WindowedDataset(
        windows=np.zeros((n, 2, 5)),
        labels=np.array(labels, dtype=np.int64),
        timestamps=1_000 + 300 * np.arange(n),
        last_co2=np.full(n, 450.0),
        window_len=2,
        stride=1,
    )


def test_confusion_all_correct():
    counts = confusion([3, 3, 7], [3, 3, 7])
    assert counts.tp[3] == 2
    assert counts.tp[7] == 1
    assert counts.fp.sum() == 0
    assert counts.fn.sum() == 0


def test_confusion_single_miss():
    counts = confusion([3], [7])
    assert counts.fp[3] == 1
    assert counts.fn[7] == 1
    assert counts.tp.sum() == 0


def test_confusion_preconditions():
    with pytest.raises(LengthMismatch):
        confusion([1, 2], [1])
    with pytest.raises(EmptyInput):
        confusion([], [])
    with pytest.raises(DataError):
        confusion([16], [0])


@pytest.mark.parametrize(
    ("counts", "expected"),
    [((8, 2, 2), (0.8, 0.8)), ((0, 0, 0), (0.0, 0.0)), ((5, 0, 5), (1.0, 0.5))],
)
def test_precision_recall(counts, expected):
    assert precision_recall(counts_at(4, *counts), 4) == expected


def test_f1_values():
    assert f1(1.0, 1.0) == 1.0
    assert f1(0.8, 0.8) == pytest.approx(0.8, abs=1e-15)
    assert f1(0.5, 1.0) == pytest.approx(2 / 3, abs=1e-15)
    assert f1(0.0, 0.0) == 0.0


def test_f1_lies_between_precision_and_recall(rng):
    for p, r in rng.uniform(1e-6, 1.0, size=(500, 2)):
        assert f1(p, r) == f1(r, p)
        assert min(p, r) - 1e-15 <= f1(p, r) <= max(p, r) + 1e-15


@pytest.mark.parametrize(
    ("pred", "label"),
    [
        (10.1, 10),
        (1.5, 2),
        (2.5, 3),
        (-0.4, 0),
        (-1.5, 0),
        (17.3, 15),
        (14.49, 14),
        (0.49999999999999994, 0),
        (-0.49999999999999994, 0),
        (1.4999999999999998, 1),
    ],
)
def test_round_to_class(pred, label):
    assert round_to_class(pred) == label
    assert round_to_classes(np.array([pred]))[0] == label


def test_metrics_match_brute_force(rng):
    for _ in range(1000):
        n = int(rng.integers(1, 40))
        truths = rng.integers(0, 16, size=n).tolist()
        preds = rng.integers(0, 16, size=n).tolist()
        report = MetricsReport.from_counts(confusion(preds, truths))
        oracle = brute_force(preds, truths)

        assert report.counts.tp.tolist() == oracle["tp"]
        assert report.counts.fp.tolist() == oracle["fp"]
        assert report.counts.fn.tolist() == oracle["fn"]
        assert report.precision.tolist() == oracle["precision"]
        assert report.recall.tolist() == oracle["recall"]
        assert report.f1.tolist() == oracle["f1"]

        accuracy = sum(p == t for p, t in zip(preds, truths)) / n
        assert report.micro_precision == report.micro_recall == accuracy
        assert report.samples == n


def test_perfect_classifier_scores_one():
    result = evaluate_model(constant_model(4), dataset([4, 4, 4]))
    assert result.report.micro_f1 == 1.0


def test_majority_class_on_balanced_set():
    result = evaluate_model(constant_model(0), dataset([0, 0, 5, 5]))
    assert result.report.micro_f1 == 0.5
    np.testing.assert_array_equal(result.series.predictions, [0, 0, 0, 0])
    np.testing.assert_array_equal(result.series.truths, [0, 0, 5, 5])


def test_regressor_outputs_are_rounded():
    head = HeadParams.zeros(2, num_outputs=1)
    head.b_out[0] = 2.5
    model = LstmModel(ModelConfig(hidden_dim=2, window_len=2, mode="regressor"), LstmParams.zeros(2), head)
    result = evaluate_model(model, dataset([3, 2, 19]))

    np.testing.assert_array_equal(result.series.predictions, [3, 3, 3])
    np.testing.assert_array_equal(result.series.truths, [3, 2, 15])


def test_evaluate_preconditions():
    with pytest.raises(EmptyDataset):
        evaluate_model(constant_model(1), dataset([]))
    with pytest.raises(DataError):
        evaluate_model(constant_model(1), dataset([1, -1]))


def test_metrics_csv_layout_and_reader():
    report = MetricsReport.from_counts(confusion([0, 0, 5, 3], [0, 5, 5, 3]))
    lines = report.to_csv().splitlines()

    assert lines[0] == "class,precision,recall,f1,tp,fp,fn"
    assert lines[1] == "0,0.5,1.0,0.6666666666666666,1,1,0"
    assert lines[-1] == "micro,0.75,0.75,0.75,3,1,1"
    assert len(lines) == 18

    again = read_metrics_csv(report.to_csv())
    assert again.micro_f1 == report.micro_f1
    np.testing.assert_array_equal(again.f1, report.f1)


def test_metrics_reader_rejects_other_files():
    with pytest.raises(DataError):
        read_metrics_csv("timestamp,truth,prediction\n1,2,3\n")


def test_text_and_table_renderings():
    report = MetricsReport.from_counts(confusion([1, 2], [1, 1]))
    text = report.to_text()
    assert text.splitlines()[-1].split() == ["micro", "0.5000", "0.5000", "0.5000", "2"]
    assert report.to_table().row_count == 3


def test_series_csv():
    series = PredictionSeries(np.array([100, 400]), np.array([0, 12]), np.array([1, 12]))
    text = series.to_csv()
    assert text == "timestamp,truth,prediction\n100,0,1\n400,12,12\n"
    parsed = read_series_csv(text)
    np.testing.assert_array_equal(parsed.predictions, series.predictions)
    assert len(parsed) == 2


@pytest.mark.parametrize(
    "text",
    ["", "a,b,c\n1,2,3\n", "timestamp,truth,prediction\n", "timestamp,truth,prediction\n1,2\n", "timestamp,truth,prediction\n1,x,3\n"],
)
def test_series_reader_rejects_malformed(text):
    with pytest.raises(UsageError):
        read_series_csv(text)
