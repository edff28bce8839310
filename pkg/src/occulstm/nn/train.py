"""Losses, backpropagation through time, Adam, and the training loop."""

from __future__ import annotations

import csv
import io
import logging
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from occulstm.config import child_seed
from occulstm.data.readings import DatasetSplit, NormStats, WindowedDataset, compute_norm_stats, make_windows
from occulstm.errors import CacheMismatch, DivergedLoss, EmptyDataset, ShapeMismatch
from occulstm.evaluation import evaluate_model
from occulstm.nn.encoding import clamp_counts, one_hot_batch
from occulstm.nn.model import (
    GATES,
    ForwardCache,
    HeadParams,
    LstmModel,
    LstmParams,
    ModelConfig,
    as_real,
    forward_batch,
    init_params,
)

logger = logging.getLogger(__name__)

PROB_CLIP = 1e-12

# Windows per backward task; fixed so the reduction order never depends on --threads
CHUNK = 8

Gradients = dict[str, np.ndarray]


def bce_loss(probs: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Binary cross-entropy averaged over the 16 one-hot positions (per row for batches)."""
    p = np.clip(probs, PROB_CLIP, 1.0 - PROB_CLIP)
    y = np.asarray(target, dtype=np.float64)
    return np.mean(-(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)), axis=-1)


def mse_loss(pred: np.ndarray | float, target: np.ndarray | float) -> np.ndarray:
    return np.square(as_real(pred) - as_real(target))


def bce_logit_grad(probs: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Gradient of :func:`bce_loss` with respect to the softmax logits, row-wise."""
    y = np.asarray(target, dtype=np.float64)
    inside = (probs > PROB_CLIP) & (probs < 1.0 - PROB_CLIP)
    p = np.clip(probs, PROB_CLIP, 1.0 - PROB_CLIP)
    dp = np.where(inside, (-y / p + (1.0 - y) / (1.0 - p)) / probs.shape[-1], 0.0)
    # softmax Jacobian-vector product
    return probs * (dp - np.sum(probs * dp, axis=-1, keepdims=True))


def targets_for(labels: np.ndarray, classifier: bool) -> np.ndarray:
    """One-hot rows for the classifier, capped counts as ``[n, 1]`` floats for the regressor."""
    capped = clamp_counts(labels)
    return one_hot_batch(capped) if classifier else capped.astype(np.float64)[:, np.newaxis]


def sample_losses(output: np.ndarray, targets: np.ndarray, classifier: bool) -> np.ndarray:
    if classifier:
        return bce_loss(output, targets)
    return mse_loss(output, targets)[:, 0]


def _bptt(
    params: LstmParams,
    head: HeadParams,
    targets: np.ndarray,
    cache: ForwardCache,
    scale: float,
) -> Gradients:
    """Gradients of ``scale * sum(per-window loss)`` over the cached batch."""
    if cache.classifier:
        d_out = bce_logit_grad(cache.output, targets)
    else:
        d_out = 2.0 * (cache.output - targets)
    d_out = d_out * scale

    h_last = cache.h[cache.steps]
    grads: Gradients = {name: np.zeros_like(a) for name, a in params.arrays().items()}
    grads["W_out"] = d_out.T @ h_last
    grads["b_out"] = d_out.sum(axis=0)

    dh = d_out @ head.W_out
    dc_next = np.zeros_like(dh)
    for t in reversed(range(cache.steps)):
        f, i, o, g = cache.f[t], cache.i[t], cache.o[t], cache.c_tilde[t]
        tanh_c = np.tanh(cache.c[t + 1])
        dc = dc_next + dh * o * (1.0 - tanh_c**2)
        dz = {
            "f": dc * cache.c[t] * f * (1.0 - f),
            "i": dc * g * i * (1.0 - i),
            "o": dh * tanh_c * o * (1.0 - o),
            "c": dc * i * (1.0 - g**2),
        }
        dc_next = dc * f
        x_t, h_prev = cache.x[t], cache.h[t]
        dh = np.zeros_like(dh)
        for gate in GATES:
            _, U, _ = params.gate(gate)
            grads[f"W_{gate}"] += dz[gate].T @ x_t
            grads[f"U_{gate}"] += dz[gate].T @ h_prev
            grads[f"b_{gate}"] += dz[gate].sum(axis=0)
            dh += dz[gate] @ U
    return grads


def backward(
    params: LstmParams,
    head: HeadParams,
    windows: np.ndarray,
    targets: np.ndarray,
    cache: ForwardCache,
) -> Gradients:
    """Exact gradients of the batch-mean loss for the windows that produced ``cache``.

    A single ``[steps, features]`` window with a 16-vector (or scalar) target is
    accepted as a batch of one.
    """
    windows = np.asarray(windows, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if windows.ndim == 2:
        windows = windows[np.newaxis]
        targets = targets.reshape(1, -1)
    if cache.x.shape != windows.transpose(1, 0, 2).shape or not np.array_equal(cache.x, windows.transpose(1, 0, 2)):
        raise CacheMismatch("forward cache was computed for different windows")
    if cache.classifier != head.classifier or cache.output.shape != targets.shape:
        raise CacheMismatch(f"cache output {cache.output.shape} does not match targets {targets.shape}")
    return _bptt(params, head, targets, cache, 1.0 / cache.batch)


@dataclass
class AdamState:
    """First and second moment estimates keyed like the parameter set."""

    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0
    alpha: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params: dict[str, np.ndarray], **hyper: float) -> AdamState:
        return cls(
            m={k: np.zeros_like(a) for k, a in params.items()},
            v={k: np.zeros_like(a) for k, a in params.items()},
            **hyper,
        )


def adam_update(params: dict[str, np.ndarray], grads: Gradients, state: AdamState) -> AdamState:
    """One bias-corrected Adam step, applied to ``params`` in place."""
    if params.keys() != grads.keys() or params.keys() != state.m.keys():
        raise ShapeMismatch("parameter, gradient and moment sets have different names")
    for k, p in params.items():
        if grads[k].shape != p.shape or state.m[k].shape != p.shape:
            raise ShapeMismatch(f"{k}: parameter {p.shape}, gradient {grads[k].shape}, moment {state.m[k].shape}")

    state.t += 1
    bc1 = 1.0 - state.beta1**state.t
    bc2 = 1.0 - state.beta2**state.t
    for k, p in params.items():
        g = grads[k]
        state.m[k] *= state.beta1
        state.m[k] += (1.0 - state.beta1) * g
        state.v[k] *= state.beta2
        state.v[k] += (1.0 - state.beta2) * (g * g)
        p -= state.alpha * (state.m[k] / bc1) / (np.sqrt(state.v[k] / bc2) + state.eps)
    return state


def clip_gradients(grads: Gradients, max_norm: float) -> float:
    """Rescale ``grads`` in place to a global L2 norm of at most ``max_norm``; returns the original norm."""
    norm = float(np.sqrt(sum(float(np.sum(g * g)) for g in grads.values())))
    if norm > max_norm:
        for g in grads.values():
            g *= max_norm / norm
    return norm


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float
    val_f1: float


@dataclass
class TrainHistory:
    epochs: list[EpochRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.epochs)

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(("epoch", "train_loss", "val_loss", "val_f1"))
        for r in self.epochs:
            writer.writerow((r.epoch, repr(r.train_loss), repr(r.val_loss), repr(r.val_f1)))
        return out.getvalue()


# Adam step size per head when none is given
DEFAULT_LEARNING_RATE = {"classifier": 1e-2, "regressor": 1e-3}


def learning_rate_for(mode: str, learning_rate: float | None = None) -> float:
    """The explicit step size, else the default for the ``mode`` head."""
    return DEFAULT_LEARNING_RATE[mode] if learning_rate is None else learning_rate


@dataclass(frozen=True)
class TrainHyper:
    epochs: int = 60
    batch_size: int = 32
    learning_rate: float | None = None
    seed: int = 0
    clip_norm: float | None = None
    threads: int = 1


@dataclass
class FitResult:
    model: LstmModel
    history: TrainHistory
    best_epoch: int | None = None


@dataclass
class SplitFitResult(FitResult):
    """Training outcome plus the normalization fit on the training days."""

    stats: NormStats = field(kw_only=True)


def batch_gradients(
    model: LstmModel,
    windows: np.ndarray,
    targets: np.ndarray,
    pool: ThreadPoolExecutor | None = None,
) -> tuple[Gradients, float]:
    """Batch-mean gradients and summed loss, reduced over fixed chunks in order."""
    scale = 1.0 / len(windows)

    def task(start: int) -> tuple[Gradients, float]:
        x, y = windows[start : start + CHUNK], targets[start : start + CHUNK]
        output, cache = forward_batch(model.params, model.head, x)
        loss = float(np.sum(sample_losses(output, y, cache.classifier)))
        return _bptt(model.params, model.head, y, cache, scale), loss

    starts = range(0, len(windows), CHUNK)
    results = list(pool.map(task, starts)) if pool else [task(s) for s in starts]
    grads, loss = results[0]
    for part, part_loss in results[1:]:
        for k in grads:
            grads[k] += part[k]
        loss += part_loss
    return grads, loss


def validate(model: LstmModel, data: WindowedDataset, threads: int = 1) -> tuple[float, float]:
    """Mean validation loss and micro-F1."""
    output = model.forward(data.windows, threads=threads)
    targets = targets_for(data.labels, model.config.classifier)
    loss = float(np.mean(sample_losses(output, targets, model.config.classifier)))
    return loss, evaluate_model(model, data, outputs=output).report.micro_f1


def fit_windows(config: ModelConfig, train: WindowedDataset, val: WindowedDataset, hyper: TrainHyper) -> FitResult:
    """Mini-batch Adam over pre-windowed data, keeping the best validation epoch.

    The best epoch is the highest validation micro-F1 for the classifier and the
    lowest validation loss for the regressor; the earliest epoch wins ties.
    """
    if len(train) == 0 or len(val) == 0:
        raise EmptyDataset(f"need training and validation windows, got {len(train)} and {len(val)}")

    model = LstmModel.initialize(config, child_seed(hyper.seed, "train.init"))
    history = TrainHistory()
    if hyper.epochs == 0:
        return FitResult(model=model, history=history)

    rng = np.random.Generator(np.random.PCG64(child_seed(hyper.seed, "train.shuffle")))
    targets = targets_for(train.labels, config.classifier)
    params = model.arrays()
    alpha = learning_rate_for(config.mode, hyper.learning_rate)
    logger.debug("adam step size %g", alpha)
    adam = AdamState.for_params(params, alpha=alpha)

    best = model.copy()
    best_epoch, best_score = 0, -np.inf
    pool = ThreadPoolExecutor(max_workers=hyper.threads) if hyper.threads > 1 else None
    try:
        for epoch in range(1, hyper.epochs + 1):
            order = rng.permutation(len(train))
            total = 0.0
            for start in range(0, len(order), hyper.batch_size):
                idx = order[start : start + hyper.batch_size]
                grads, loss = batch_gradients(model, train.windows[idx], targets[idx], pool)
                if not np.isfinite(loss):
                    raise DivergedLoss(epoch)
                if hyper.clip_norm is not None:
                    clip_gradients(grads, hyper.clip_norm)
                adam_update(params, grads, adam)
                total += loss
            train_loss = total / len(train)
            val_loss, val_f1 = validate(model, val, hyper.threads)
            if not (np.isfinite(train_loss) and np.isfinite(val_loss)):
                raise DivergedLoss(epoch)
            history.epochs.append(EpochRecord(epoch, train_loss, val_loss, val_f1))
            logger.info(
                "epoch %d/%d train_loss=%.6f val_loss=%.6f val_f1=%.4f",
                epoch,
                hyper.epochs,
                train_loss,
                val_loss,
                val_f1,
            )

            score = val_f1 if config.classifier else -val_loss
            if score > best_score:
                best, best_epoch, best_score = model.copy(), epoch, score
    finally:
        if pool:
            pool.shutdown()

    logger.info("best epoch %d", best_epoch)
    return FitResult(model=best, history=history, best_epoch=best_epoch)


def fit(config: ModelConfig, split: DatasetSplit, hyper: TrainHyper, stride: int = 1) -> SplitFitResult:
    """Normalize on the training days, window train and val, and train."""
    stats = compute_norm_stats(split.train)
    train = make_windows(split.train, stats, config.window_len, stride)
    val = make_windows(split.val, stats, config.window_len, stride)
    logger.info("training on %d windows, validating on %d", len(train), len(val))
    result = fit_windows(config, train, val, hyper)
    return SplitFitResult(model=result.model, history=result.history, best_epoch=result.best_epoch, stats=stats)


def gradient_check(
    config: ModelConfig,
    seed: int,
    *,
    eps: float = 1e-6,
    backward_fn: Callable[..., Gradients] = backward,
) -> float:
    """Largest relative gap between analytic and central-difference gradients.

    Uses one random window and target on a model with randomized biases. Meant
    for small models (hidden <= 8, window <= 4): it runs two forward passes per
    parameter entry. The finite differences are taken in extended precision
    where the platform has one, so rounding in the loss stays well below the
    size of the smallest gradient entries.
    """
    rng = np.random.Generator(np.random.PCG64(child_seed(seed, "gradient_check")))
    params, head = init_params(config, seed)
    for b in (*(params.gate(g)[2] for g in GATES), head.b_out):
        b += rng.uniform(-0.5, 0.5, size=b.shape)
    window = rng.standard_normal((config.window_len, config.input_dim))
    if config.classifier:
        target = one_hot_batch([int(rng.integers(0, config.num_outputs))])[0]
    else:
        target = np.array([float(rng.integers(0, 16))])

    _, cache = forward_batch(params, head, window[np.newaxis])
    analytic = backward_fn(params, head, window, target, cache)

    wide_params = LstmParams(**{n: a.astype(np.longdouble) for n, a in params.arrays().items()})
    wide_head = HeadParams(**{n: a.astype(np.longdouble) for n, a in head.arrays().items()})
    wide_window = window.astype(np.longdouble)[np.newaxis]

    def loss_at() -> np.longdouble:
        output, cache = forward_batch(wide_params, wide_head, wide_window)
        return sample_losses(output, target[np.newaxis], cache.classifier)[0]

    worst = 0.0
    for name, array in {**wide_params.arrays(), **wide_head.arrays()}.items():
        flat = array.reshape(-1)
        for j in range(flat.size):
            saved = flat[j]
            flat[j] = saved + eps
            plus = loss_at()
            flat[j] = saved - eps
            minus = loss_at()
            flat[j] = saved
            numeric = float((plus - minus) / (2.0 * eps))
            a = float(analytic[name].reshape(-1)[j])
            worst = max(worst, abs(a - numeric) / max(abs(a), abs(numeric), 1e-8))
    return worst
