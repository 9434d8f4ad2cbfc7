"""Binary classifiers (LD, RF, MLP) behind one fit / predict_proba contract.

Scores are the probability of the positive class (label 1 = conspiracy).
Inputs are standardized with statistics frozen at fit time; a feature with
zero training variance is mapped to 0.
"""
from __future__ import annotations

import io
import pickle
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from sklearn.tree import DecisionTreeClassifier

from .model import CascadeError

KINDS = ("ld", "rf", "mlp")
MAGIC = b"CASCADELAB-MODEL v1\n"


class SingleClassTraining(CascadeError, ValueError):
    pass


class SchemaMismatch(CascadeError, ValueError):
    pass


@dataclass(frozen=True)
class Hyper:
    ld_ridge: float = 1e-4
    rf_trees: int = 100
    rf_min_leaf: int = 1
    mlp_hidden: int = 64
    mlp_lr: float = 0.01
    mlp_epochs: int = 500


@dataclass
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray  # 0 where the training column is constant

    @classmethod
    def fit(cls, X):
        mean = X.mean(axis=0)
        std = X.std(axis=0)
        # guard against round-off noise on constant columns
        const = std <= 1e-12 * np.maximum(1.0, np.abs(mean))
        scale = np.where(const, 0.0, 1.0 / np.where(const, 1.0, std))
        return cls(mean, scale)

    def __call__(self, X):
        return (X - self.mean) * self.scale


@dataclass
class TrainedModel:
    kind: str
    schema: str
    n_features: int
    standardizer: Standardizer
    params: dict = field(repr=False)


def _as_matrix(rows, schema=None):
    """Accept FeatureVectors or a plain 2-D array; returns (X, schema)."""
    if isinstance(rows, np.ndarray):
        return np.asarray(rows, dtype=np.float64), schema
    rows = list(rows)
    schemas = {getattr(r, "schema", None) for r in rows}
    if len(schemas) > 1:
        raise SchemaMismatch(f"rows mix schemas {sorted(map(str, schemas))}")
    found = schemas.pop() if schemas else schema
    X = np.array([getattr(r, "values", r) for r in rows], dtype=np.float64)
    return X, found


def fit(kind: str, rows, labels, seed: int = 0, hyper: Hyper = Hyper(), schema=None) -> TrainedModel:
    """Train ``kind`` on ``rows`` (FeatureVectors or an array) with 0/1 ``labels``."""
    if kind not in KINDS:
        raise ValueError(f"unknown classifier {kind!r}; choose from {KINDS}")
    X, schema = _as_matrix(rows, schema)
    y = np.asarray(labels, dtype=np.int64)
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError("rows and labels must align")
    counts = np.bincount(y, minlength=2)
    if len(counts) > 2 or counts.min() < 2:
        raise SingleClassTraining(f"need at least 2 rows of each class, got {counts.tolist()}")
    std = Standardizer.fit(X)
    Z = std(X)
    trainer = {"ld": _fit_ld, "rf": _fit_rf, "mlp": _fit_mlp}[kind]
    return TrainedModel(kind, schema, X.shape[1], std, trainer(Z, y, seed, hyper))


def predict_proba(model: TrainedModel, rows) -> np.ndarray:
    X, schema = _as_matrix(rows, model.schema)
    if schema != model.schema or X.shape[1] != model.n_features:
        raise SchemaMismatch(f"model expects {model.schema} ({model.n_features} features), "
                             f"got {schema} ({X.shape[1]})")
    Z = model.standardizer(X)
    scorer = {"ld": _score_ld, "rf": _score_rf, "mlp": _score_mlp}[model.kind]
    return scorer(model.params, Z)


def predict(model, rows, threshold=0.5) -> np.ndarray:
    return (predict_proba(model, rows) >= threshold).astype(np.int64)


# ---------------------------------------------------------------- linear discriminant

def _fit_ld(Z, y, seed, hyper):
    mu0 = Z[y == 0].mean(axis=0)
    mu1 = Z[y == 1].mean(axis=0)
    c0 = Z[y == 0] - mu0
    c1 = Z[y == 1] - mu1
    cov = (c0.T @ c0 + c1.T @ c1) / (len(Z) - 2)
    cov[np.diag_indices_from(cov)] += hyper.ld_ridge
    w = np.linalg.solve(cov, mu1 - mu0)
    prior = np.log(np.mean(y == 1)) - np.log(np.mean(y == 0))
    b = -0.5 * (mu0 + mu1) @ w + prior
    return {"w": w, "b": float(b)}


def _score_ld(p, Z):
    # Gaussian posterior with shared covariance is logistic in the discriminant
    return _sigmoid(Z @ p["w"] + p["b"])


def _sigmoid(a):
    out = np.empty_like(a, dtype=np.float64)
    pos = a >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-a[pos]))
    ea = np.exp(a[~pos])
    out[~pos] = ea / (1.0 + ea)
    return out


# ---------------------------------------------------------------- random forest

def _fit_rf(Z, y, seed, hyper):
    rng = np.random.default_rng(seed)
    n, d = Z.shape
    max_features = max(1, int(np.floor(np.sqrt(d))))
    trees = []
    for _ in range(hyper.rf_trees):
        # a one-class bootstrap still yields a valid (constant) voter
        boot = rng.integers(0, n, size=n)
        tree = DecisionTreeClassifier(
            criterion="gini", max_features=max_features, max_depth=None,
            min_samples_leaf=hyper.rf_min_leaf,
            random_state=int(rng.integers(0, 2**31 - 1)))
        tree.fit(Z[boot], y[boot])
        trees.append(tree)
    return {"trees": trees}


def _score_rf(p, Z):
    votes = np.zeros(len(Z))
    for tree in p["trees"]:
        votes += tree.predict(Z) == 1
    return votes / len(p["trees"])


# ---------------------------------------------------------------- multi-layer perceptron

def mlp_init(n_in, n_hidden, rng):
    return {
        "W1": rng.normal(0.0, np.sqrt(2.0 / n_in), size=(n_in, n_hidden)),
        "b1": np.zeros(n_hidden),
        "w2": rng.normal(0.0, np.sqrt(1.0 / n_hidden), size=n_hidden),
        "b2": np.zeros(1),
    }


def mlp_forward(params, Z):
    pre = Z @ params["W1"] + params["b1"]
    hidden = np.maximum(pre, 0.0)
    logit = hidden @ params["w2"] + params["b2"][0]
    return pre, hidden, logit


def mlp_loss_and_grad(params, Z, y):
    """Mean binary cross-entropy and its analytic gradient w.r.t. every parameter."""
    pre, hidden, logit = mlp_forward(params, Z)
    n = len(Z)
    # log(1 + e^a) - y*a, stable for large |a|
    loss = float(np.mean(np.logaddexp(0.0, logit) - y * logit))
    d_logit = (_sigmoid(logit) - y) / n
    d_hidden = np.outer(d_logit, params["w2"]) * (pre > 0)
    grads = {
        "W1": Z.T @ d_hidden,
        "b1": d_hidden.sum(axis=0),
        "w2": hidden.T @ d_logit,
        "b2": np.array([d_logit.sum()]),
    }
    return loss, grads


def _fit_mlp(Z, y, seed, hyper):
    rng = np.random.default_rng(seed)
    params = mlp_init(Z.shape[1], hyper.mlp_hidden, rng)
    yf = y.astype(np.float64)
    for _ in range(hyper.mlp_epochs):
        _, grads = mlp_loss_and_grad(params, Z, yf)
        for k in params:
            params[k] -= hyper.mlp_lr * grads[k]
    return params


def _score_mlp(p, Z):
    return _sigmoid(mlp_forward(p, Z)[2])


# ---------------------------------------------------------------- persistence

def save_model(model: TrainedModel, path) -> None:
    """Magic header line followed by a pickle payload."""
    buf = io.BytesIO()
    buf.write(MAGIC)
    pickle.dump(model, buf, protocol=pickle.HIGHEST_PROTOCOL)
    Path(path).write_bytes(buf.getvalue())


def load_model(path) -> TrainedModel:
    data = Path(path).read_bytes()
    if not data.startswith(MAGIC):
        raise CascadeError(f"{path}: not a cascadelab model file")
    return pickle.loads(data[len(MAGIC):])
