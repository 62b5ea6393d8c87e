"""Five small classifiers behind one train/predict/score interface.

Everything is fit from scratch on numpy so that thousands of fits on small
bootstrapped tables stay fast and fully deterministic under a seed.  Class 1
is predicted whenever the model score reaches 0.5, and ``predict`` literally
thresholds ``predict_scores``, so the two can never disagree.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np
from scipy.special import expit

FAMILIES = ("logit", "knn", "svm_linear", "random_forest", "mlp")

_DEFAULTS = {
    "logit": {"l2": 1.0, "epochs": 200, "learning_rate": 0.1},
    "knn": {"k": 5},
    "svm_linear": {"C": 1.0, "epochs": 200, "learning_rate": 0.1},
    "random_forest": {"trees": 20, "max_depth": 6, "bootstrap": True,
                      "max_features": "sqrt"},
    "mlp": {"hidden": (16,), "epochs": 50, "learning_rate": 0.01},
}


@dataclass(frozen=True)
class ModelSpec:
    """Model family plus hyperparameter overrides; see module defaults."""

    family: str
    hyperparameters: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown model family {self.family!r}")
        unknown = set(self.hyperparameters) - set(_DEFAULTS[self.family])
        if unknown:
            raise ValueError(f"unknown hyperparameters for {self.family}: {sorted(unknown)}")

    def resolved(self) -> dict:
        hp = dict(_DEFAULTS[self.family])
        hp.update(self.hyperparameters)
        for key, value in hp.items():
            if key in ("bootstrap", "max_features", "hidden"):
                continue
            if key == "max_depth" and value is None:  # unlimited depth
                continue
            if not value > 0:
                raise ValueError(f"hyperparameter {key} must be positive, got {value}")
        return hp

    def with_seed(self, seed: int) -> "ModelSpec":
        return replace(self, seed=int(seed))


@dataclass
class TrainedModel:
    family: str
    params: Any
    n_features: int
    iterations: int = 0
    converged: bool = True
    constant: int | None = None  # set when a single-class fit degenerated


# ---------------------------------------------------------------------------
# family parameter containers

@dataclass
class _LinearParams:
    w: np.ndarray
    b: float


@dataclass
class _KnnParams:
    X: np.ndarray
    y: np.ndarray
    k: int


@dataclass
class _TreeNode:
    feature: int = -1
    threshold: float = 0.0
    left: "Any" = None
    right: "Any" = None
    value: float = 0.0  # leaf positive fraction

    @property
    def is_leaf(self):
        return self.feature < 0


@dataclass
class _ForestParams:
    trees: list


@dataclass
class _MlpParams:
    weights: list
    biases: list


def _check_training_inputs(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y).astype(int).ravel()
    if X.ndim != 2:
        X = X.reshape(len(y), -1)
    if len(X) == 0:
        raise ValueError("empty training set")
    if len(X) != len(y):
        raise ValueError("features and labels lengths differ")
    if not np.isfinite(X).all():
        raise ValueError("non-finite feature values")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be binary 0/1")
    return X, y


def logistic_loss_and_grad(w, b, X, y, l2):
    """Mean logistic loss with L2 penalty 0.5*l2*||w||^2/n, and its gradient."""
    n = len(X)
    z = X @ w + b
    p = expit(z)
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2 * (w @ w) / n)
    r = p - y
    gw = X.T @ r / n + l2 * w / n
    gb = float(r.mean())
    return loss, gw, gb


def _fit_logit(X, y, hp, rng):
    n, d = X.shape
    lr, l2, epochs = hp["learning_rate"], hp["l2"], int(hp["epochs"])
    w = np.zeros(d)
    b = 0.0
    gw = np.zeros(d)
    gb = 0.0
    for _ in range(epochs):
        r = expit(X @ w + b) - y
        gw = X.T @ r
        gw /= n
        gw += (l2 / n) * w
        gb = r.mean()
        w -= lr * gw
        b -= lr * gb
    converged = max(np.abs(gw).max(initial=0.0), abs(gb)) < 1e-4
    return _LinearParams(w, float(b)), epochs, converged


def _fit_svm(X, y, hp, rng):
    n, d = X.shape
    lr, C, epochs = hp["learning_rate"], hp["C"], int(hp["epochs"])
    t = 2.0 * y - 1.0
    w = np.zeros(d)
    b = 0.0
    gw = np.zeros(d)
    gb = 0.0
    for _ in range(epochs):
        margin = t * (X @ w + b)
        active = t * (margin < 1.0)
        gw = -(X.T @ active) / n + w / (C * n)
        gb = -active.mean()
        w -= lr * gw
        b -= lr * gb
    converged = max(np.abs(gw).max(initial=0.0), abs(gb)) < 1e-4
    return _LinearParams(w, float(b)), epochs, converged


def _fit_knn(X, y, hp, rng):
    k = int(hp["k"])
    if k > len(X):
        raise ValueError(f"k={k} exceeds training size {len(X)}")
    return _KnnParams(X.copy(), y.copy(), k), 0, True


def _gini_best_split(x_sorted, y_sorted):
    """Best threshold for one pre-sorted feature; returns (impurity, threshold)."""
    n = len(y_sorted)
    cut = np.flatnonzero(np.diff(x_sorted) > 0) + 1  # split before these positions
    if len(cut) == 0:
        return None
    pos = np.cumsum(y_sorted)
    nl = cut.astype(float)
    nr = n - nl
    pl = pos[cut - 1] / nl
    pr = (pos[-1] - pos[cut - 1]) / nr
    weighted = (nl * 2 * pl * (1 - pl) + nr * 2 * pr * (1 - pr)) / n
    best = int(np.argmin(weighted))
    thr = 0.5 * (x_sorted[cut[best] - 1] + x_sorted[cut[best]])
    return float(weighted[best]), thr


def _build_tree(X, y, depth, max_depth, max_features, rng):
    node = _TreeNode(value=float(y.mean()))
    n = len(y)
    if n < 2 or y.min() == y.max():
        return node
    if max_depth is not None and depth >= max_depth:
        return node
    d = X.shape[1]
    if max_features == "sqrt":
        m = max(1, int(np.sqrt(d)))
        feats = np.sort(rng.choice(d, size=m, replace=False))
    else:
        feats = np.arange(d)
    p = y.mean()
    parent = 2 * p * (1 - p)
    best = None
    for f in feats:
        order = np.argsort(X[:, f], kind="stable")
        found = _gini_best_split(X[order, f], y[order])
        if found is None:
            continue
        impurity, thr = found
        if best is None or impurity < best[0] - 1e-15:
            best = (impurity, int(f), thr)
    if best is None or best[0] >= parent - 1e-12:
        return node
    _, f, thr = best
    mask = X[:, f] <= thr
    node.feature = f
    node.threshold = thr
    node.left = _build_tree(X[mask], y[mask], depth + 1, max_depth, max_features, rng)
    node.right = _build_tree(X[~mask], y[~mask], depth + 1, max_depth, max_features, rng)
    return node


def _tree_scores(node, X):
    out = np.empty(len(X))
    stack = [(node, np.arange(len(X)))]
    while stack:
        nd, idx = stack.pop()
        if nd.is_leaf:
            out[idx] = nd.value
            continue
        mask = X[idx, nd.feature] <= nd.threshold
        stack.append((nd.left, idx[mask]))
        stack.append((nd.right, idx[~mask]))
    return out


def _fit_forest(X, y, hp, rng):
    trees = []
    n = len(X)
    for _ in range(int(hp["trees"])):
        tree_rng = np.random.default_rng(rng.integers(0, 2**63 - 1))
        if hp["bootstrap"]:
            idx = tree_rng.integers(0, n, size=n)
            Xb, yb = X[idx], y[idx]
        else:
            Xb, yb = X, y
        trees.append(_build_tree(Xb, yb, 0, hp["max_depth"], hp["max_features"], tree_rng))
    return _ForestParams(trees), len(trees), True


def _fit_mlp(X, y, hp, rng):
    lr, epochs = hp["learning_rate"], int(hp["epochs"])
    dims = [X.shape[1], *[int(h) for h in hp["hidden"]], 1]
    weights = [rng.normal(0.0, np.sqrt(2.0 / dims[i]), size=(dims[i], dims[i + 1]))
               for i in range(len(dims) - 1)]
    biases = [np.zeros(dims[i + 1]) for i in range(len(dims) - 1)]
    n = len(X)
    yy = y.reshape(-1, 1).astype(float)
    prev_loss = np.inf
    loss = np.inf
    for _ in range(epochs):
        # forward with ReLU hidden layers, sigmoid output
        acts = [X]
        for i, (W, b) in enumerate(zip(weights, biases)):
            z = acts[-1] @ W + b
            acts.append(expit(z) if i == len(weights) - 1 else np.maximum(z, 0.0))
        out = acts[-1]
        prev_loss, loss = loss, float(
            -np.mean(yy * np.log(np.clip(out, 1e-12, 1)) +
                     (1 - yy) * np.log(np.clip(1 - out, 1e-12, 1))))
        delta = (out - yy) / n
        for i in range(len(weights) - 1, -1, -1):
            gw = acts[i].T @ delta
            gb = delta.sum(axis=0)
            if i > 0:
                delta = (delta @ weights[i].T) * (acts[i] > 0)
            weights[i] -= lr * gw
            biases[i] -= lr * gb
    converged = abs(prev_loss - loss) < 1e-6
    return _MlpParams(weights, biases), epochs, converged


_FITTERS = {
    "logit": _fit_logit,
    "knn": _fit_knn,
    "svm_linear": _fit_svm,
    "random_forest": _fit_forest,
    "mlp": _fit_mlp,
}


def train(spec: ModelSpec, features, labels) -> TrainedModel:
    """Fit one model; a single-class training set degenerates to a constant."""
    X, y = _check_training_inputs(features, labels)
    hp = spec.resolved()
    if y.min() == y.max():
        return TrainedModel(spec.family, None, X.shape[1], constant=int(y[0]))
    rng = np.random.default_rng(spec.seed)
    params, iterations, converged = _FITTERS[spec.family](X, y, hp, rng)
    return TrainedModel(spec.family, params, X.shape[1],
                        iterations=iterations, converged=converged)


def predict_scores(model: TrainedModel, features) -> np.ndarray:
    """Scores in [0, 1]; 0.5 is the decision point for every family."""
    X = np.asarray(features, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.shape[1] != model.n_features:
        raise ValueError(
            f"feature dimension {X.shape[1]} does not match training dimension "
            f"{model.n_features}")
    if model.constant is not None:
        return np.full(len(X), float(model.constant))
    p = model.params
    if model.family in ("logit", "svm_linear"):
        # for the SVM this squashes the margin, preserving the sign convention
        return expit(X @ p.w + p.b)
    if model.family == "knn":
        d2 = (
            np.sum(X**2, axis=1)[:, None]
            - 2.0 * (X @ p.X.T)
            + np.sum(p.X**2, axis=1)[None, :]
        )
        neighbors = np.argsort(d2, axis=1, kind="stable")[:, : p.k]
        return p.y[neighbors].mean(axis=1)
    if model.family == "random_forest":
        return np.mean([_tree_scores(t, X) for t in p.trees], axis=0)
    if model.family == "mlp":
        a = X
        for i, (W, b) in enumerate(zip(p.weights, p.biases)):
            z = a @ W + b
            a = expit(z) if i == len(p.weights) - 1 else np.maximum(z, 0.0)
        return a.ravel()
    raise ValueError(f"unknown family {model.family!r}")


def predict(model: TrainedModel, features) -> np.ndarray:
    return (predict_scores(model, features) >= 0.5).astype(int)


def accuracy(model: TrainedModel, features, labels) -> float:
    labels = np.asarray(labels).astype(int).ravel()
    if len(labels) == 0:
        raise ValueError("empty evaluation set")
    return float(np.mean(predict(model, features) == labels))
