"""Single-layer LSTM with a softmax classification head or a linear regression head.

One step of the cell::

    f_t = sigmoid(W_f x_t + U_f h_{t-1} + b_f)
    i_t = sigmoid(W_i x_t + U_i h_{t-1} + b_i)
    o_t = sigmoid(W_o x_t + U_o h_{t-1} + b_o)
    c~_t = tanh(W_c x_t + U_c h_{t-1} + b_c)
    c_t = f_t * c_{t-1} + i_t * c~_t
    h_t = o_t * tanh(c_t)

Arrays are float64 unless the caller passes np.longdouble. Inputs may carry a
leading batch axis; every window in a batch starts from a zero state.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import ClassVar

import numpy as np

from occulstm.data.readings import FEATURES
from occulstm.errors import DimensionMismatch
from occulstm.nn.encoding import NUM_CLASSES

GATES = ("f", "i", "o", "c")
MODES = ("classifier", "regressor")


@dataclass(frozen=True)
class ModelConfig:
    """Shape of the network. ``regressor`` swaps the 16-way head for one output."""

    hidden_dim: int = 64
    window_len: int = 12
    mode: str = "classifier"
    input_dim: int = len(FEATURES)

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.hidden_dim < 1 or self.window_len < 1:
            raise ValueError("hidden_dim and window_len must be positive")

    @property
    def classifier(self) -> bool:
        return self.mode == "classifier"

    @property
    def num_outputs(self) -> int:
        return NUM_CLASSES if self.classifier else 1


@dataclass
class LstmParams:
    """Input weights ``W_g [hidden, input]``, recurrent weights ``U_g [hidden, hidden]``, biases ``b_g``."""

    W_f: np.ndarray
    U_f: np.ndarray
    b_f: np.ndarray
    W_i: np.ndarray
    U_i: np.ndarray
    b_i: np.ndarray
    W_o: np.ndarray
    U_o: np.ndarray
    b_o: np.ndarray
    W_c: np.ndarray
    U_c: np.ndarray
    b_c: np.ndarray

    NAMES: ClassVar[tuple[str, ...]] = tuple(f"{kind}_{g}" for g in GATES for kind in ("W", "U", "b"))

    @classmethod
    def zeros(cls, hidden_dim: int, input_dim: int = len(FEATURES)) -> LstmParams:
        shapes = {"W": (hidden_dim, input_dim), "U": (hidden_dim, hidden_dim), "b": (hidden_dim,)}
        return cls(**{name: np.zeros(shapes[name[0]]) for name in cls.NAMES})

    @property
    def hidden_dim(self) -> int:
        return int(self.W_f.shape[0])

    @property
    def input_dim(self) -> int:
        return int(self.W_f.shape[1])

    def arrays(self) -> dict[str, np.ndarray]:
        """Live references to every parameter array, keyed by name."""
        return {name: getattr(self, name) for name in self.NAMES}

    def gate(self, g: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return getattr(self, f"W_{g}"), getattr(self, f"U_{g}"), getattr(self, f"b_{g}")

    def copy(self) -> LstmParams:
        return LstmParams(**{name: a.copy() for name, a in self.arrays().items()})

    def check(self) -> None:
        """Raise :class:`DimensionMismatch` unless all shapes agree."""
        h, d = self.hidden_dim, self.input_dim
        for g in GATES:
            W, U, b = self.gate(g)
            if W.shape != (h, d) or U.shape != (h, h) or b.shape != (h,):
                raise DimensionMismatch(f"gate {g}: shapes {W.shape}, {U.shape}, {b.shape} for hidden={h}, input={d}")


@dataclass
class HeadParams:
    """Affine output layer applied to the final hidden state."""

    W_out: np.ndarray
    b_out: np.ndarray

    NAMES: ClassVar[tuple[str, ...]] = ("W_out", "b_out")

    @classmethod
    def zeros(cls, hidden_dim: int, num_outputs: int = NUM_CLASSES) -> HeadParams:
        return cls(W_out=np.zeros((num_outputs, hidden_dim)), b_out=np.zeros(num_outputs))

    @property
    def num_outputs(self) -> int:
        return int(self.W_out.shape[0])

    @property
    def classifier(self) -> bool:
        return self.num_outputs == NUM_CLASSES

    def arrays(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in self.NAMES}

    def copy(self) -> HeadParams:
        return HeadParams(W_out=self.W_out.copy(), b_out=self.b_out.copy())


@dataclass(frozen=True)
class LstmState:
    h: np.ndarray
    c: np.ndarray

    @classmethod
    def zeros(cls, hidden_dim: int, batch: int | None = None) -> LstmState:
        shape = (hidden_dim,) if batch is None else (batch, hidden_dim)
        return cls(h=np.zeros(shape), c=np.zeros(shape))


@dataclass(frozen=True)
class GateActivations:
    f: np.ndarray
    i: np.ndarray
    o: np.ndarray
    c_tilde: np.ndarray


@dataclass
class ForwardCache:
    """Everything backward needs, stacked over time: ``h[0]`` and ``c[0]`` are the zero state."""

    x: np.ndarray
    h: np.ndarray
    c: np.ndarray
    f: np.ndarray
    i: np.ndarray
    o: np.ndarray
    c_tilde: np.ndarray
    output: np.ndarray
    classifier: bool

    @property
    def steps(self) -> int:
        return int(self.x.shape[0])

    @property
    def batch(self) -> int:
        return int(self.x.shape[1])


def as_real(x: np.ndarray | float) -> np.ndarray:
    """Float64 array of ``x``; extended-precision input keeps its dtype."""
    x = np.asarray(x)
    return x if x.dtype == np.longdouble else x.astype(np.float64, copy=False)


def sigmoid(x: np.ndarray | float) -> np.ndarray:
    """Logistic function, evaluated on ``exp(-|x|)`` so neither tail overflows."""
    x = as_real(x)
    e = np.exp(-np.abs(x))
    return np.where(x >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def tanh_act(x: np.ndarray | float) -> np.ndarray:
    return np.tanh(as_real(x))


def softmax(logits: np.ndarray) -> np.ndarray:
    """Normalized exponentials over the last axis, shifted by the max for stability."""
    z = as_real(logits)
    e = np.exp(z - z.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def lstm_step(params: LstmParams, x_t: np.ndarray, prev: LstmState) -> tuple[LstmState, GateActivations]:
    """Advance the cell by one input vector (or one row per batch element)."""
    x_t = as_real(x_t)
    if x_t.shape[-1] != params.input_dim:
        raise DimensionMismatch(f"input has {x_t.shape[-1]} features, parameters expect {params.input_dim}")
    if prev.h.shape[-1] != params.hidden_dim or prev.c.shape != prev.h.shape:
        raise DimensionMismatch(f"state shape {prev.h.shape} does not match hidden size {params.hidden_dim}")

    def pre(g: str) -> np.ndarray:
        W, U, b = params.gate(g)
        return x_t @ W.T + prev.h @ U.T + b

    f = sigmoid(pre("f"))
    i = sigmoid(pre("i"))
    o = sigmoid(pre("o"))
    c_tilde = tanh_act(pre("c"))
    c = f * prev.c + i * c_tilde
    h = o * np.tanh(c)
    return LstmState(h=h, c=c), GateActivations(f=f, i=i, o=o, c_tilde=c_tilde)


def head_output(head: HeadParams, h: np.ndarray) -> np.ndarray:
    """Softmax probabilities for a 16-way head, the raw affine value otherwise."""
    z = h @ head.W_out.T + head.b_out
    return softmax(z) if head.classifier else z


def forward_batch(params: LstmParams, head: HeadParams, windows: np.ndarray) -> tuple[np.ndarray, ForwardCache]:
    """Run ``[batch, steps, features]`` windows through the cell and the head."""
    windows = as_real(windows)
    if windows.ndim != 3:
        raise DimensionMismatch(f"expected [batch, steps, features], got shape {windows.shape}")
    if head.W_out.shape[1] != params.hidden_dim:
        raise DimensionMismatch(f"head expects hidden size {head.W_out.shape[1]}, cell has {params.hidden_dim}")
    batch, steps, _ = windows.shape
    hidden = params.hidden_dim
    dtype = np.result_type(windows, params.W_f, head.W_out)

    xs = windows.transpose(1, 0, 2)
    hs = np.zeros((steps + 1, batch, hidden), dtype=dtype)
    cs = np.zeros((steps + 1, batch, hidden), dtype=dtype)
    fs, is_, os_, gs = (np.empty((steps, batch, hidden), dtype=dtype) for _ in range(4))
    state = LstmState.zeros(hidden, batch)
    for t in range(steps):
        state, act = lstm_step(params, xs[t], state)
        hs[t + 1], cs[t + 1] = state.h, state.c
        fs[t], is_[t], os_[t], gs[t] = act.f, act.i, act.o, act.c_tilde

    output = head_output(head, hs[steps])
    cache = ForwardCache(x=xs, h=hs, c=cs, f=fs, i=is_, o=os_, c_tilde=gs, output=output, classifier=head.classifier)
    return output, cache


def forward_sequence(params: LstmParams, head: HeadParams, window: np.ndarray) -> tuple[np.ndarray, ForwardCache]:
    """Run a single ``[steps, features]`` window; returns the 16 probabilities (or 1 value)."""
    window = as_real(window)
    if window.ndim != 2:
        raise DimensionMismatch(f"expected [steps, features], got shape {window.shape}")
    output, cache = forward_batch(params, head, window[np.newaxis])
    return output[0], cache


def init_params(config: ModelConfig, seed: int) -> tuple[LstmParams, HeadParams]:
    """Glorot-uniform weights, zero biases except a forget-gate bias of 1."""
    rng = np.random.Generator(np.random.PCG64(seed))
    h, d, k = config.hidden_dim, config.input_dim, config.num_outputs

    def uniform(rows: int, cols: int) -> np.ndarray:
        bound = np.sqrt(6.0 / (rows + cols))
        return rng.uniform(-bound, bound, size=(rows, cols))

    arrays: dict[str, np.ndarray] = {}
    for g in GATES:
        arrays[f"W_{g}"] = uniform(h, d)
        arrays[f"U_{g}"] = uniform(h, h)
        arrays[f"b_{g}"] = np.ones(h) if g == "f" else np.zeros(h)
    head = HeadParams(W_out=uniform(k, h), b_out=np.zeros(k))
    return LstmParams(**arrays), head


@dataclass
class LstmModel:
    """A configured cell plus head, the unit training and checkpoints work with."""

    config: ModelConfig
    params: LstmParams
    head: HeadParams

    @classmethod
    def initialize(cls, config: ModelConfig, seed: int) -> LstmModel:
        params, head = init_params(config, seed)
        return cls(config, params, head)

    def arrays(self) -> dict[str, np.ndarray]:
        """All trainable arrays, cell first, in a fixed order."""
        return {**self.params.arrays(), **self.head.arrays()}

    def copy(self) -> LstmModel:
        return LstmModel(self.config, self.params.copy(), self.head.copy())

    def forward(self, windows: np.ndarray, chunk: int = 512, threads: int = 1) -> np.ndarray:
        """Outputs for any number of windows, evaluated ``chunk`` windows at a time.

        With ``threads > 1`` the chunks run on a thread pool. Chunk boundaries do not
        depend on ``threads``, so the outputs are bit-identical either way.
        """
        windows = np.asarray(windows, dtype=np.float64)
        if windows.shape[0] == 0:
            return np.empty((0, self.config.num_outputs))

        def run(start: int) -> np.ndarray:
            return forward_batch(self.params, self.head, windows[start : start + chunk])[0]

        starts = range(0, len(windows), chunk)
        if threads > 1 and len(starts) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                return np.concatenate(list(pool.map(run, starts)))
        return np.concatenate([run(s) for s in starts])
