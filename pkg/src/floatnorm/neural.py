"""Dense feed-forward network engine (numpy, 64-bit).

Small enough to verify: exact reverse-mode gradients (checked against
central differences), Adam, reduce-on-plateau learning rate, whole-network
freezing with gradient pass-through, JSON serialization.
"""
from __future__ import annotations

import hashlib
import json
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

SCHEMA_VERSION = 1
ACTIVATIONS = ("relu", "linear", "sigmoid")


class NeuralError(ValueError):
    """Invalid network construction or use."""


class TrainingError(RuntimeError):
    """Training aborted (non-finite loss/gradient, empty data)."""


def _relu(x):
    return np.maximum(x, 0.0)


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


@dataclass
class MlpNetwork:
    dims: tuple                 # (input, hidden..., output)
    hidden_activation: str = "relu"
    output_activation: str = "linear"
    weights: list = field(default_factory=list)   # W_l: (fan_in, fan_out)
    biases: list = field(default_factory=list)
    frozen: bool = False
    metadata: dict = field(default_factory=dict)

    @property
    def n_layers(self):
        return len(self.dims) - 1

    def check(self):
        if len(self.dims) < 2:
            raise NeuralError("network needs at least input and output dims")
        if self.output_activation not in ("linear", "sigmoid"):
            raise NeuralError(f"bad output activation {self.output_activation!r}")
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (self.dims[l], self.dims[l + 1]) or \
                    b.shape != (self.dims[l + 1],):
                raise NeuralError(f"layer {l}: shape mismatch with dims")

    def copy_weights(self):
        return ([w.copy() for w in self.weights],
                [b.copy() for b in self.biases])

    def set_weights(self, weights, biases):
        self.weights = [w.copy() for w in weights]
        self.biases = [b.copy() for b in biases]

    def weight_hash(self):
        h = hashlib.sha256()
        for w, b in zip(self.weights, self.biases):
            h.update(np.ascontiguousarray(w).tobytes())
            h.update(np.ascontiguousarray(b).tobytes())
        return h.hexdigest()


def init_network(dims, hidden_activation="relu", output_activation="linear",
                 seed=0, metadata=None) -> MlpNetwork:
    """He init (var 2/fan_in, normal) for hidden ReLU layers; uniform with
    var 1/fan_in for the output layer. Biases zero."""
    dims = tuple(int(d) for d in dims)
    if len(dims) < 2:
        raise NeuralError("dims must list at least input and output sizes")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for l in range(len(dims) - 1):
        fan_in, fan_out = dims[l], dims[l + 1]
        if l < len(dims) - 2:
            w = rng.normal(0.0, np.sqrt(2.0 / fan_in), (fan_in, fan_out))
        else:
            lim = np.sqrt(3.0 / fan_in)
            w = rng.uniform(-lim, lim, (fan_in, fan_out))
        weights.append(w)
        biases.append(np.zeros(fan_out))
    net = MlpNetwork(dims, hidden_activation, output_activation,
                     weights, biases, metadata=dict(metadata or {}))
    net.check()
    return net


def forward_pass(net: MlpNetwork, x):
    """Returns (output, cache). x may be (d,) or (n, d)."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.shape[1] != net.dims[0]:
        raise NeuralError(
            f"input has {x.shape[1]} features, network expects {net.dims[0]}")
    a = x
    pre, post = [], [x]
    for l in range(net.n_layers):
        z = a @ net.weights[l] + net.biases[l]
        pre.append(z)
        if l < net.n_layers - 1:
            a = _relu(z)
        elif net.output_activation == "sigmoid":
            # keep outputs strictly inside (0, 1) even for saturating inputs
            a = np.clip(_sigmoid(z), 1e-12, 1.0 - 1e-12)
        else:
            a = z
        post.append(a)
    cache = {"pre": pre, "post": post, "net_id": id(net), "single": single}
    return (a[0] if single else a), cache


def backward_pass(net: MlpNetwork, cache, output_gradient):
    """Exact gradients w.r.t. all weights, biases, and the input.

    output_gradient is dL/d(output), same shape as the forward output.
    Returns ((weight_grads, bias_grads), input_gradient). Freezing does not
    change the math, only whether updates are applied.
    """
    if cache.get("net_id") != id(net):
        raise NeuralError("cache does not belong to this network")
    g = np.asarray(output_gradient, dtype=float)
    if cache["single"]:
        g = g[None, :]
    pre, post = cache["pre"], cache["post"]
    w_grads = [None] * net.n_layers
    b_grads = [None] * net.n_layers
    # output layer activation
    if net.output_activation == "sigmoid":
        y = post[-1]
        delta = g * y * (1.0 - y)
    else:
        delta = g
    for l in range(net.n_layers - 1, -1, -1):
        w_grads[l] = post[l].T @ delta
        b_grads[l] = delta.sum(axis=0)
        delta = delta @ net.weights[l].T
        if l > 0:
            delta = delta * (pre[l - 1] > 0)   # ReLU subgradient at 0 -> 0
    input_grad = delta[0] if cache["single"] else delta
    return (w_grads, b_grads), input_grad


@dataclass
class AdamState:
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m_w: list = None
    v_w: list = None
    m_b: list = None
    v_b: list = None

    @classmethod
    def for_network(cls, net):
        return cls(m_w=[np.zeros_like(w) for w in net.weights],
                   v_w=[np.zeros_like(w) for w in net.weights],
                   m_b=[np.zeros_like(b) for b in net.biases],
                   v_b=[np.zeros_like(b) for b in net.biases])


def adam_step(net: MlpNetwork, state: AdamState, w_grads, b_grads, lr):
    """One Adam update in place; a frozen network is left untouched."""
    if net.frozen:
        return
    for g in w_grads + b_grads:
        if not np.all(np.isfinite(g)):
            raise TrainingError("non-finite gradient encountered")
    state.t += 1
    c1 = 1.0 - state.beta1 ** state.t
    c2 = 1.0 - state.beta2 ** state.t
    for l in range(net.n_layers):
        for m, v, g, p in ((state.m_w[l], state.v_w[l], w_grads[l],
                            net.weights[l]),
                           (state.m_b[l], state.v_b[l], b_grads[l],
                            net.biases[l])):
            m *= state.beta1
            m += (1 - state.beta1) * g
            v *= state.beta2
            v += (1 - state.beta2) * g * g
            p -= lr * (m / c1) / (np.sqrt(v / c2) + state.eps)


@dataclass
class TrainConfig:
    batch_size: int = 256
    max_epochs: int = 200
    initial_lr: float = 1e-3
    plateau_factor: float = 0.5
    plateau_patience: int = 10
    plateau_min_delta: float = 1e-3   # relative improvement threshold
    min_lr: float = 1e-6
    early_stop_patience: int = 40
    seed: int = 0
    validation_fraction: float = 0.1

    def __post_init__(self):
        if not 0.0 < self.plateau_factor < 1.0:
            raise NeuralError("plateau_factor must be in (0, 1)")
        if self.plateau_patience < 1 or self.early_stop_patience < 1:
            raise NeuralError("patience must be >= 1")

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass
class TrainReport:
    train_mse: list = field(default_factory=list)
    val_mse: list = field(default_factory=list)
    lr: list = field(default_factory=list)
    best_epoch: int = -1
    best_val_mse: float = np.inf
    wall_time: float = 0.0

    def to_dict(self):
        return {"train_mse": self.train_mse, "val_mse": self.val_mse,
                "lr": self.lr, "best_epoch": self.best_epoch,
                "best_val_mse": self.best_val_mse,
                "wall_time": self.wall_time}


def split_train_val(n, validation_fraction, seed):
    """Deterministic shuffled split; validation gets at least one sample
    whenever the fraction is nonzero."""
    idx = np.random.default_rng([seed, 9151]).permutation(n)
    n_val = int(round(n * validation_fraction))
    if validation_fraction > 0:
        n_val = max(n_val, 1)
    return idx[n_val:], idx[:n_val]


def mse(pred, target):
    d = pred - target
    return float(np.mean(d * d))


def train(net: MlpNetwork, inputs, targets, config: TrainConfig) -> TrainReport:
    """Minibatch MSE training with plateau LR decay and best-weight restore."""
    inputs = np.asarray(inputs, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if inputs.shape[0] == 0:
        raise TrainingError("empty dataset")
    if net.frozen:
        raise TrainingError("cannot train a frozen network")
    t0 = time.perf_counter()
    tr, va = split_train_val(inputs.shape[0], config.validation_fraction,
                             config.seed)
    x_tr, y_tr = inputs[tr], targets[tr]
    x_va, y_va = inputs[va], targets[va]
    state = AdamState.for_network(net)
    report = TrainReport()
    lr = config.initial_lr
    best_w = net.copy_weights()
    plateau_wait = 0
    stop_wait = 0

    def validate():
        out, _ = forward_pass(net, x_va)
        return mse(out, y_va)

    for epoch in range(config.max_epochs):
        order = np.random.default_rng([config.seed, 1, epoch]).permutation(
            x_tr.shape[0])
        ep_loss = 0.0
        for start in range(0, x_tr.shape[0], config.batch_size):
            b = order[start:start + config.batch_size]
            out, cache = forward_pass(net, x_tr[b])
            diff = out - y_tr[b]
            loss = float(np.mean(diff * diff))
            if not np.isfinite(loss):
                raise TrainingError(f"non-finite loss at epoch {epoch}")
            g = 2.0 * diff / diff.size
            (wg, bg), _ = backward_pass(net, cache, g)
            adam_step(net, state, wg, bg, lr)
            ep_loss += loss * len(b)
        report.train_mse.append(ep_loss / x_tr.shape[0])
        v = validate()
        report.val_mse.append(v)
        report.lr.append(lr)

        if v < report.best_val_mse * (1.0 - config.plateau_min_delta):
            plateau_wait = 0
            stop_wait = 0
        else:
            plateau_wait += 1
            stop_wait += 1
        if v < report.best_val_mse:
            report.best_val_mse = v
            report.best_epoch = epoch
            best_w = net.copy_weights()
        if plateau_wait >= config.plateau_patience:
            lr *= config.plateau_factor
            plateau_wait = 0
        if lr < config.min_lr or stop_wait >= config.early_stop_patience:
            break
    net.set_weights(*best_w)
    report.wall_time = time.perf_counter() - t0
    return report


def gradient_check(net: MlpNetwork, n_probes=50, h=1e-6, seed=0):
    """Max relative error of backward_pass vs central differences, probing
    random weight/bias/input coordinates of a random input."""
    rng = np.random.default_rng(seed)
    # central differences are meaningless on a ReLU kink; redraw the probe
    # input until every hidden pre-activation is safely away from zero
    for _ in range(100):
        x = rng.normal(0, 1, net.dims[0])
        _, c = forward_pass(net, x)
        if all(np.min(np.abs(z)) > max(100 * h, 1e-5)
               for z in c["pre"][:-1]):
            break
    g_out = rng.normal(0, 1, net.dims[-1])

    def loss():
        out, _ = forward_pass(net, x)
        return float(np.dot(g_out, out))

    out, cache = forward_pass(net, x)
    (wg, bg), xg = backward_pass(net, cache, g_out)
    worst = 0.0
    coords = []
    for _ in range(n_probes):
        kind = rng.integers(0, 3)
        l = int(rng.integers(0, net.n_layers))
        if kind == 0:
            i = int(rng.integers(0, net.weights[l].shape[0]))
            j = int(rng.integers(0, net.weights[l].shape[1]))
            coords.append(("w", l, (i, j), wg[l][i, j]))
        elif kind == 1:
            j = int(rng.integers(0, net.biases[l].shape[0]))
            coords.append(("b", l, j, bg[l][j]))
        else:
            j = int(rng.integers(0, net.dims[0]))
            coords.append(("x", 0, j, xg[j]))
    for kind, l, ij, analytic in coords:
        if kind == "w":
            arr = net.weights[l]
        elif kind == "b":
            arr = net.biases[l]
        else:
            arr = x
        old = arr[ij]
        arr[ij] = old + h
        lp = loss()
        arr[ij] = old - h
        lm = loss()
        arr[ij] = old
        numeric = (lp - lm) / (2 * h)
        scale = max(abs(analytic), abs(numeric), 1e-8)
        worst = max(worst, abs(analytic - numeric) / scale)
    return worst


# ---------------------------------------------------------------------------
# serialization

def save_model(net: MlpNetwork, path):
    doc = {
        "schema_version": SCHEMA_VERSION,
        "stage": net.metadata.get("stage"),
        "scheme": net.metadata.get("scheme"),
        "dims": list(net.dims),
        "activations": {"hidden": net.hidden_activation,
                        "output": net.output_activation},
        "parameter_order": net.metadata.get("parameter_order"),
        "scaling_constants": net.metadata.get("scaling_constants"),
        "weights": [w.reshape(-1).tolist() for w in net.weights],
        "biases": [b.tolist() for b in net.biases],
    }
    with open(path, "w") as f:
        json.dump(doc, f)
        f.write("\n")


def load_model(path, expected_parameter_order=None) -> MlpNetwork:
    with open(path) as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as exc:
            raise NeuralError(f"{path}: corrupt model JSON: {exc}")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise NeuralError(
            f"{path}: unsupported schema_version {doc.get('schema_version')!r}")
    dims = tuple(doc["dims"])
    weights, biases = [], []
    for l in range(len(dims) - 1):
        w = np.array(doc["weights"][l], dtype=float)
        if w.size != dims[l] * dims[l + 1]:
            raise NeuralError(f"{path}: layer {l}: weight size {w.size} "
                              f"inconsistent with dims {dims[l]}x{dims[l+1]}")
        weights.append(w.reshape(dims[l], dims[l + 1]))
        b = np.array(doc["biases"][l], dtype=float)
        if b.shape != (dims[l + 1],):
            raise NeuralError(f"{path}: layer {l}: bias size mismatch")
        biases.append(b)
    meta = {"stage": doc.get("stage"), "scheme": doc.get("scheme"),
            "parameter_order": doc.get("parameter_order"),
            "scaling_constants": doc.get("scaling_constants")}
    if (expected_parameter_order is not None
            and doc.get("parameter_order") is not None
            and list(expected_parameter_order) != list(doc["parameter_order"])):
        warnings.warn(
            f"{path}: stored parameter order {doc['parameter_order']} differs "
            f"from the current registry", stacklevel=2)
    net = MlpNetwork(dims, doc["activations"]["hidden"],
                     doc["activations"]["output"], weights, biases,
                     metadata=meta)
    net.check()
    return net
