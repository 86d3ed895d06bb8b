"""Feed-forward softmax classifier for the 3-efficiency feature vectors.

Plain numpy in float64: rectifier hidden layers, softmax output, mean sparse
categorical cross-entropy, Adam updates. Features are z-scored with
statistics from the training split only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .config import TrainConfig
from .errors import BadFractions, Divergence, EmptySplit, SchemaMismatch

N_CLASSES = 5
NM_LABELS = (0, 1, 2)
MK_LABELS = (3, 4)


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


@dataclass
class MlpModel:
    sizes: tuple[int, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    mean: np.ndarray
    std: np.ndarray
    config_hash: str = ""

    @classmethod
    def init(cls, sizes, seed: int, mean=None, std=None) -> "MlpModel":
        rng = np.random.default_rng(seed)
        ws = [rng.standard_normal((a, b)) * np.sqrt(2.0 / a) for a, b in zip(sizes[:-1], sizes[1:])]
        bs = [np.zeros(b) for b in sizes[1:]]
        mean = np.zeros(sizes[0]) if mean is None else np.asarray(mean, float)
        std = np.ones(sizes[0]) if std is None else np.asarray(std, float)
        return cls(tuple(sizes), ws, bs, mean, std)

    def normalize(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, float) - self.mean) / self.std

    def logits(self, x: np.ndarray) -> np.ndarray:
        h = self.normalize(x)
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            h = np.maximum(h @ w + b, 0.0)
        return h @ self.weights[-1] + self.biases[-1]

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        return softmax(self.logits(x))

    def predict(self, x: np.ndarray) -> np.ndarray:
        return np.argmax(self.logits(x), axis=1)

    # parameters as one flat view, in (W0, b0, W1, b1, ...) order
    def params(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out

    def copy(self) -> "MlpModel":
        return MlpModel(self.sizes, [w.copy() for w in self.weights], [b.copy() for b in self.biases],
                        self.mean.copy(), self.std.copy(), self.config_hash)

    def to_json(self) -> str:
        doc = {
            "layer_sizes": list(self.sizes),
            "activation": "relu",
            "output": "softmax",
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
            "normalizer": {"mean": self.mean.tolist(), "std": self.std.tolist()},
            "config_hash": self.config_hash,
        }
        return json.dumps(doc, indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "MlpModel":
        try:
            doc = json.loads(text)
            sizes = tuple(int(s) for s in doc["layer_sizes"])
            ws = [np.array(w, dtype=float) for w in doc["weights"]]
            bs = [np.array(b, dtype=float) for b in doc["biases"]]
            mean = np.array(doc["normalizer"]["mean"], dtype=float)
            std = np.array(doc["normalizer"]["std"], dtype=float)
            cfg_hash = str(doc.get("config_hash", ""))
        except (ValueError, KeyError, TypeError) as exc:
            raise SchemaMismatch("malformed model document: %s" % exc) from exc
        if len(ws) != len(sizes) - 1 or len(bs) != len(ws):
            raise SchemaMismatch("layer count does not match layer_sizes")
        for w, b, a, c in zip(ws, bs, sizes[:-1], sizes[1:]):
            if w.shape != (a, c) or b.shape != (c,):
                raise SchemaMismatch("weight shapes do not match layer_sizes")
        if mean.shape != (sizes[0],) or std.shape != (sizes[0],):
            raise SchemaMismatch("normalizer size does not match input layer")
        return cls(sizes, ws, bs, mean, std, cfg_hash)


def loss_and_grads(model: MlpModel, x: np.ndarray, y: np.ndarray) -> tuple[float, list[np.ndarray]]:
    """Mean cross-entropy and its gradients, ordered like :meth:`MlpModel.params`."""
    acts = [model.normalize(x)]
    for w, b in zip(model.weights[:-1], model.biases[:-1]):
        acts.append(np.maximum(acts[-1] @ w + b, 0.0))
    z = acts[-1] @ model.weights[-1] + model.biases[-1]
    z = z - z.max(axis=1, keepdims=True)
    logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    n = x.shape[0]
    loss = -float(logp[np.arange(n), y].mean())

    delta = np.exp(logp)
    delta[np.arange(n), y] -= 1.0
    delta /= n
    grads = []
    for layer in range(len(model.weights) - 1, -1, -1):
        grads.append(delta.sum(axis=0))
        grads.append(acts[layer].T @ delta)
        if layer:
            delta = (delta @ model.weights[layer].T) * (acts[layer] > 0)
    return loss, grads[::-1]


def mean_loss(model: MlpModel, x, y) -> float:
    return loss_and_grads(model, x, y)[0]


def accuracy(model: MlpModel, x, y) -> float:
    return float(np.mean(model.predict(x) == y)) if len(y) else float("nan")


def _relu_pattern(model: MlpModel, x: np.ndarray) -> list[np.ndarray]:
    h, pattern = model.normalize(x), []
    for w, b in zip(model.weights[:-1], model.biases[:-1]):
        z = h @ w + b
        pattern.append(z > 0)
        h = np.maximum(z, 0.0)
    return pattern


def gradient_check(model: MlpModel, x: np.ndarray, y: np.ndarray, n_params: int = 100, step: float = 1e-5,
                   seed: int = 0) -> float:
    """Largest relative error between backprop and central differences.

    A perturbation that flips any rectifier on the batch straddles a kink, where
    the central difference is not an estimate of the derivative; such parameters
    are replaced by further random picks so that ``n_params`` valid comparisons
    are made whenever enough parameters allow it.
    """
    if len(y) == 0:
        raise EmptySplit("gradient check needs a non-empty batch")
    _, grads = loss_and_grads(model, x, y)
    params = model.params()
    sizes = np.array([p.size for p in params])
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    base = _relu_pattern(model, x)
    order = np.random.default_rng(seed).permutation(sizes.sum())
    worst, checked = 0.0, 0
    for flat in order:
        if checked == n_params:
            break
        k = int(np.searchsorted(offsets, flat, side="right") - 1)
        p, g = params[k].reshape(-1), grads[k].reshape(-1)
        i = flat - offsets[k]
        orig = p[i]
        kink = False
        losses = []
        for value in (orig + step, orig - step):
            p[i] = value
            losses.append(mean_loss(model, x, y))
            kink = kink or any(not np.array_equal(a, b) for a, b in zip(base, _relu_pattern(model, x)))
        p[i] = orig
        if kink:
            continue
        num = (losses[0] - losses[1]) / (2 * step)
        worst = max(worst, abs(num - g[i]) / max(abs(num) + abs(g[i]), 1e-8))
        checked += 1
    return worst


@dataclass
class TrainReport:
    """Per-epoch curves; index 0 is the untrained model."""

    train_loss: list[float] = field(default_factory=list)
    train_acc: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    val_acc: list[float] = field(default_factory=list)
    best_epoch: int = 0
    test_acc: float | None = None

    @property
    def epochs(self) -> int:
        return len(self.train_loss) - 1

    def to_csv(self) -> str:
        lines = ["epoch,train_loss,train_acc,val_loss,val_acc"]
        for e, row in enumerate(zip(self.train_loss, self.train_acc, self.val_loss, self.val_acc)):
            lines.append("%d,%s" % (e, ",".join(format(v, ".17g") for v in row)))
        return "\n".join(lines) + "\n"


class _Adam:
    def __init__(self, params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.b1, self.b2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        c1 = 1 - self.b1 ** self.t
        c2 = 1 - self.b2 ** self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.b1
            m += (1 - self.b1) * g
            v *= self.b2
            v += (1 - self.b2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def train(init_seed: int, x_train, y_train, x_val, y_val, hp: TrainConfig = TrainConfig(),
          config_hash: str = "") -> tuple[MlpModel, TrainReport]:
    """Mini-batch Adam on the mean cross-entropy; keeps the best-validation-loss weights."""
    x_train, y_train = np.asarray(x_train, float), np.asarray(y_train, int)
    x_val, y_val = np.asarray(x_val, float), np.asarray(y_val, int)
    if len(y_train) == 0 or len(y_val) == 0:
        raise EmptySplit("training and validation splits must be non-empty")
    mean = x_train.mean(axis=0)
    std = x_train.std(axis=0)
    std = np.where(std > 1e-12, std, 1.0)
    sizes = (x_train.shape[1], *hp.hidden, N_CLASSES)
    model = MlpModel.init(sizes, init_seed, mean, std)
    model.config_hash = config_hash
    opt = _Adam(model.params(), hp.learning_rate)
    rng = np.random.default_rng([init_seed, 1])

    report = TrainReport()

    def record():
        tl, vl = mean_loss(model, x_train, y_train), mean_loss(model, x_val, y_val)
        if not (np.isfinite(tl) and np.isfinite(vl)):
            raise Divergence("loss became non-finite")
        report.train_loss.append(tl)
        report.val_loss.append(vl)
        report.train_acc.append(accuracy(model, x_train, y_train))
        report.val_acc.append(accuracy(model, x_val, y_val))

    record()
    best, best_loss, since = model.copy(), report.val_loss[0], 0
    n = len(y_train)
    for epoch in range(1, hp.epochs + 1):
        order = rng.permutation(n)
        for start in range(0, n, hp.batch_size):
            idx = order[start:start + hp.batch_size]
            _, grads = loss_and_grads(model, x_train[idx], y_train[idx])
            opt.step(model.params(), grads)
        record()
        if report.val_loss[-1] < best_loss:
            best, best_loss, since = model.copy(), report.val_loss[-1], 0
            report.best_epoch = epoch
        else:
            since += 1
            if since >= hp.patience:
                break
    return best, report


# ---------------------------------------------------------------- splits and metrics


def split(labels, fractions=(0.7, 0.15, 0.15), seed: int = 0) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Stratified (train, validation, test) index arrays."""
    fractions = tuple(float(f) for f in fractions)
    if len(fractions) != 3 or min(fractions) <= 0 or abs(sum(fractions) - 1) > 1e-9:
        raise BadFractions("fractions must be three positive numbers summing to 1, got %r" % (fractions,))
    labels = np.asarray(labels, int)
    rng = np.random.default_rng(seed)
    parts = ([], [], [])
    for c in np.unique(labels):
        idx = rng.permutation(np.flatnonzero(labels == c))
        n_tr = int(round(fractions[0] * idx.size))
        n_va = int(round(fractions[1] * idx.size))
        parts[0].append(idx[:n_tr])
        parts[1].append(idx[n_tr:n_tr + n_va])
        parts[2].append(idx[n_tr + n_va:])
    return tuple(np.sort(np.concatenate(p)) if p else np.zeros(0, int) for p in parts)


def confusion_matrix(y_true, y_pred, n: int = N_CLASSES) -> np.ndarray:
    cm = np.zeros((n, n), dtype=int)
    np.add.at(cm, (np.asarray(y_true, int), np.asarray(y_pred, int)), 1)
    return cm


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    confusion: np.ndarray
    nm_vs_mk: float
    within_nm: float
    within_mk: float

    @property
    def hierarchical(self) -> tuple[float, float, float]:
        return self.nm_vs_mk, self.within_nm, self.within_mk


def _block_accuracy(cm, labels):
    block = cm[np.ix_(labels, labels)]
    total = block.sum()
    return float(np.trace(block) / total) if total else float("nan")


def metrics_from_confusion(cm: np.ndarray) -> Metrics:
    total = cm.sum()
    if total == 0:
        raise EmptySplit("no predictions to score")
    nm, mk = list(NM_LABELS), list(MK_LABELS)
    binary = cm[np.ix_(nm, nm)].sum() + cm[np.ix_(mk, mk)].sum()
    return Metrics(float(np.trace(cm) / total), cm, float(binary / total),
                   _block_accuracy(cm, nm), _block_accuracy(cm, mk))


def evaluate(model: MlpModel, x, y) -> Metrics:
    y = np.asarray(y, int)
    if y.size == 0:
        raise EmptySplit("test split is empty")
    return metrics_from_confusion(confusion_matrix(y, model.predict(np.asarray(x, float))))


def confusion_csv(cm: np.ndarray, names) -> str:
    lines = ["true/predicted," + ",".join(names)]
    for name, row in zip(names, cm):
        lines.append(name + "," + ",".join(str(int(v)) for v in row))
    return "\n".join(lines) + "\n"
