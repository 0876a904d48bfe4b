"""Single-layer LSTM regressor implemented directly on numpy.

One feature in, one value out: an LSTM cell of `units` dimensions unrolled
over the window, inverted dropout on the final hidden vector, and a linear
head. Training is plain minibatch SGD on MSE over contiguous chunks of the
window set, with chunk order reshuffled between epochs. Everything is seeded
and single-threaded so runs are bit-reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonFiniteLoss

# Gate order inside stacked weight matrices: input, forget, candidate, output.
GATES = ("i", "f", "g", "o")


def lstm_param_count(units: int, input_dim: int = 1) -> int:
    """Trainable parameters of the LSTM layer alone (no dense head)."""
    if units < 1 or input_dim < 1:
        raise ValueError("units and input_dim must be >= 1")
    return 4 * units * (units + input_dim + 1)


def total_param_count(units: int, input_dim: int = 1) -> int:
    """LSTM layer plus the one-unit linear head."""
    return lstm_param_count(units, input_dim) + units + 1


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-x))


@dataclass
class LstmParams:
    """All trainable arrays. W: (4u, d) input weights, U: (4u, u) recurrent
    weights, b: (4u,) biases, gates stacked in GATES order; dense head (u,) + scalar."""

    units: int
    input_dim: int
    W: np.ndarray
    U: np.ndarray
    b: np.ndarray
    dense_w: np.ndarray
    dense_b: float

    @classmethod
    def init(cls, units: int, input_dim: int, rng: np.random.Generator) -> "LstmParams":
        def glorot(shape, fan_in, fan_out):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            return rng.uniform(-limit, limit, size=shape)

        # One Glorot draw per gate matrix, in a fixed order.
        W = np.vstack([glorot((units, input_dim), input_dim, units) for _ in GATES])
        U = np.vstack([glorot((units, units), units, units) for _ in GATES])
        b = np.zeros(4 * units)
        b[units:2 * units] = 1.0  # forget-gate bias 1 stabilizes early training
        dense_w = glorot((units,), units, 1)
        return cls(units=units, input_dim=input_dim, W=W, U=U, b=b,
                   dense_w=dense_w, dense_b=0.0)

    def flat_arrays(self) -> dict[str, np.ndarray]:
        return {"W": self.W, "U": self.U, "b": self.b, "dense_w": self.dense_w}

    def count(self) -> int:
        return self.W.size + self.U.size + self.b.size + self.dense_w.size + 1

    def copy(self) -> "LstmParams":
        return LstmParams(self.units, self.input_dim, self.W.copy(), self.U.copy(),
                          self.b.copy(), self.dense_w.copy(), self.dense_b)

    def to_json_obj(self) -> dict:
        return {
            "units": self.units,
            "input_dim": self.input_dim,
            "W": self.W.tolist(),
            "U": self.U.tolist(),
            "b": self.b.tolist(),
            "dense_w": self.dense_w.tolist(),
            "dense_b": self.dense_b,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "LstmParams":
        return cls(units=obj["units"], input_dim=obj["input_dim"],
                   W=np.array(obj["W"]), U=np.array(obj["U"]), b=np.array(obj["b"]),
                   dense_w=np.array(obj["dense_w"]), dense_b=float(obj["dense_b"]))


def forward(params: LstmParams, X: np.ndarray, drop_mask: np.ndarray | None = None,
            keep_cache: bool = False):
    """Run the network over a batch of windows X (N, T).

    drop_mask, when given, is the inverted-dropout multiplier for the final
    hidden vector (train time only). Returns (predictions (N,), cache).
    """
    N, T = X.shape
    u = params.units
    h = np.zeros((N, u))
    c = np.zeros((N, u))
    cache = {"steps": [], "X": X, "drop_mask": drop_mask} if keep_cache else None
    Wt, Ut = params.W.T, params.U.T
    for t in range(T):
        x_t = X[:, t:t + 1]  # (N, 1)
        z = x_t @ Wt + h @ Ut + params.b
        i = _sigmoid(z[:, :u])
        f = _sigmoid(z[:, u:2 * u])
        g = np.tanh(z[:, 2 * u:3 * u])
        o = _sigmoid(z[:, 3 * u:])
        c_prev = c
        c = f * c_prev + i * g
        tanh_c = np.tanh(c)
        h_prev = h
        h = o * tanh_c
        if keep_cache:
            cache["steps"].append((x_t, h_prev, c_prev, i, f, g, o, c, tanh_c))
    h_eff = h if drop_mask is None else h * drop_mask
    if keep_cache:
        cache["h_eff"] = h_eff
    y = h_eff @ params.dense_w + params.dense_b
    return y, cache


def mse_loss(pred: np.ndarray, target: np.ndarray) -> float:
    return float(np.mean((pred - target) ** 2))


def backward(params: LstmParams, cache: dict, pred: np.ndarray,
             target: np.ndarray) -> LstmParams:
    """Gradients of the batch-mean MSE w.r.t. every parameter (BPTT)."""
    X = cache["X"]
    N, T = X.shape
    u = params.units
    drop_mask = cache["drop_mask"]

    grads = LstmParams(params.units, params.input_dim,
                       np.zeros_like(params.W), np.zeros_like(params.U),
                       np.zeros_like(params.b), np.zeros_like(params.dense_w), 0.0)

    dy = 2.0 * (pred - target) / N  # (N,)
    h_eff = cache["h_eff"]
    grads.dense_w = h_eff.T @ dy
    grads.dense_b = float(dy.sum())
    dh = np.outer(dy, params.dense_w)
    if drop_mask is not None:
        dh = dh * drop_mask

    dc_next = np.zeros((N, u))
    for t in range(T - 1, -1, -1):
        x_t, h_prev, c_prev, i, f, g, o, c, tanh_c = cache["steps"][t]
        do = dh * tanh_c
        dc = dh * o * (1.0 - tanh_c ** 2) + dc_next
        di = dc * g
        df = dc * c_prev
        dg = dc * i
        dc_next = dc * f
        dz = np.concatenate([
            di * i * (1.0 - i),
            df * f * (1.0 - f),
            dg * (1.0 - g ** 2),
            do * o * (1.0 - o),
        ], axis=1)  # (N, 4u)
        grads.W += dz.T @ x_t
        grads.U += dz.T @ h_prev
        grads.b += dz.sum(axis=0)
        dh = dz @ params.U
    return grads


@dataclass
class TrainTrace:
    """Per-chunk final losses, in the order chunks were visited."""

    chunk_losses: list[float] = field(default_factory=list)


def train_chunked(X: np.ndarray, y: np.ndarray, units: int, *,
                  num_chunks: int = 1, batch_size: int = 128, epochs: int = 1,
                  learning_rate: float = 0.01, dropout: float = 0.2,
                  seed: int = 0,
                  params: LstmParams | None = None) -> tuple[LstmParams, TrainTrace]:
    """Minibatch SGD over contiguous chunks of the window set.

    Each epoch walks the chunks in their current order; chunk order is
    reshuffled (seeded) between epochs. Dropout applies to the final hidden
    vector only, with inverted scaling so inference needs no correction.
    """
    if len(X) == 0:
        raise ValueError("no training windows")
    rng = np.random.default_rng(seed)
    if params is None:
        params = LstmParams.init(units, 1, rng)
    else:
        params = params.copy()
    chunk_ids = list(range(num_chunks))
    chunks = np.array_split(np.arange(len(X)), num_chunks)
    trace = TrainTrace()
    keep = 1.0 - dropout
    for _epoch in range(epochs):
        for cid in chunk_ids:
            idx = chunks[cid]
            loss = None
            for lo in range(0, len(idx), batch_size):
                batch = idx[lo:lo + batch_size]
                Xb, yb = X[batch], y[batch]
                if dropout > 0:
                    mask = (rng.random((len(batch), units)) < keep) / keep
                else:
                    mask = None
                pred, cache = forward(params, Xb, drop_mask=mask, keep_cache=True)
                loss = mse_loss(pred, yb)
                if not np.isfinite(loss):
                    raise NonFiniteLoss(f"loss diverged to {loss}")
                grads = backward(params, cache, pred, yb)
                params.W -= learning_rate * grads.W
                params.U -= learning_rate * grads.U
                params.b -= learning_rate * grads.b
                params.dense_w -= learning_rate * grads.dense_w
                params.dense_b -= learning_rate * grads.dense_b
            if loss is not None:
                trace.chunk_losses.append(loss)
        rng.shuffle(chunk_ids)
    return params, trace


def predict(params: LstmParams, X: np.ndarray) -> np.ndarray:
    """Inference-time predictions (no dropout)."""
    pred, _ = forward(params, X)
    return pred
