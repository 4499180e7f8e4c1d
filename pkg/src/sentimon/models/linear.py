"""Linear classifiers: multinomial logistic regression and one-vs-rest SVM.

Both minimize ``C * data_loss + 0.5 * ||W||^2`` in 64-bit floats from a zero
start, deterministically.

Logistic regression runs full-batch gradient descent (Nesterov momentum with
gradient-based restarts by default) on the softmax cross-entropy; its bias is
not regularized.

The SVM runs the Pegasos stochastic subgradient method per class with the
step ``1 / (lambda * t)``, ``lambda = 1 / (C * n)``, over seed-shuffled
epochs, and returns the epoch-end iterate with the lowest objective. Its bias
is a constant feature of value 1 and therefore shares the L2 penalty.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp, softmax

from ..corpus import N_CLASSES
from ..errors import NonFinite
from .base import TrainConfig, as_matrix, check_dim, check_training_set, encode_labels, to_predictions

LOGISTIC = "logreg"
SVM = "svm"

DEFAULT_LOGREG_STEPS = 5000
DEFAULT_SVM_EPOCHS = 50
SVM_PATIENCE = 5


@dataclass(frozen=True, eq=False)
class LinearModel:
    weights: np.ndarray      # (3, V)
    bias: np.ndarray         # (3,)
    kind: str                # LOGISTIC or SVM
    c_value: float
    objective: float = math.nan
    n_iter: int = 0

    def __post_init__(self):
        if self.kind not in (LOGISTIC, SVM):
            raise ValueError(f"unknown linear model kind {self.kind!r}")

    @property
    def dim(self) -> int:
        return self.weights.shape[1]

    def margins(self, X) -> np.ndarray:
        X = as_matrix(X, self.dim)
        check_dim(X, self.dim)
        return np.asarray(X @ self.weights.T) + self.bias

    def decision_scores(self, X) -> np.ndarray:
        """Softmax probabilities for logistic models, raw margins for SVMs."""
        z = self.margins(X)
        return softmax(z, axis=1) if self.kind == LOGISTIC else z

    def predict_many(self, X):
        return to_predictions(self.decision_scores(X))

    def predict(self, x):
        return self.predict_many(x)[0]


# -- logistic regression ---------------------------------------------------

def logreg_objective(W, b, X, y, c_value):
    """Objective and gradients of the L2-regularized softmax loss.

    ``W`` is (3, V), ``b`` is (3,), ``y`` holds integer labels. Returns
    ``(J, dJ/dW, dJ/db)``.
    """
    z = np.asarray(X @ W.T) + b
    lse = logsumexp(z, axis=1)
    rows = np.arange(y.size)
    loss = float(np.sum(lse - z[rows, y]))
    J = c_value * loss + 0.5 * float(np.sum(W * W))
    resid = np.exp(z - lse[:, None])
    resid[rows, y] -= 1.0
    grad_W = c_value * np.asarray(X.T @ resid).T + W
    grad_b = c_value * resid.sum(axis=0)
    return J, grad_W, grad_b


def _lipschitz_bound(X, c_value: float) -> float:
    # softmax Hessian is bounded by 1/2 I; the Frobenius norm of [X, 1]
    # bounds its largest singular value
    fro2 = float(X.multiply(X).sum()) + X.shape[0]
    return 0.5 * c_value * fro2 + 1.0


def train_logreg(X, y, config: TrainConfig = TrainConfig(), dim: int | None = None,
                 trace: list | None = None) -> LinearModel:
    X = as_matrix(X, dim)
    labels = encode_labels(y)
    check_training_set(X, labels)
    C = config.c_value
    steps = config.max_epochs or DEFAULT_LOGREG_STEPS
    lr = config.learning_rate or 1.0 / _lipschitz_bound(X, C)

    n_terms = X.shape[1]
    W = np.zeros((N_CLASSES, n_terms))
    # the bias optimum at W = 0 is the log prior; start there so tiny C,
    # where the gradient is below tolerance from the outset, still predicts
    # the majority class (add-one keeps absent classes finite)
    counts = np.bincount(labels, minlength=N_CLASSES) + 1.0
    b = np.log(counts / counts.sum())
    b -= b.mean()
    W_prev, b_prev = W, b
    momentum_t = 1.0
    J = math.nan
    it = 0
    for it in range(1, steps + 1):
        if config.momentum:
            t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * momentum_t * momentum_t))
            beta = (momentum_t - 1.0) / t_next
            yW = W + beta * (W - W_prev)
            yb = b + beta * (b - b_prev)
        else:
            t_next, yW, yb = 1.0, W, b
        J, gW, gb = logreg_objective(yW, yb, X, labels, C)
        if not math.isfinite(J) or not np.all(np.isfinite(gW)):
            raise NonFinite(f"objective became {J} at step {it}; lower the learning rate")
        if trace is not None:
            trace.append(J)
        if max(np.max(np.abs(gW), initial=0.0), np.max(np.abs(gb))) < config.tolerance:
            W, b = yW, yb
            break
        W_new = yW - lr * gW
        b_new = yb - lr * gb
        if config.momentum and (np.sum(gW * (W_new - W)) + np.dot(gb, b_new - b)) > 0:
            t_next = 1.0   # momentum is pushing uphill: restart
        W_prev, b_prev, W, b = W, b, W_new, b_new
        momentum_t = t_next
    J = logreg_objective(W, b, X, labels, C)[0]
    if not math.isfinite(J):
        raise NonFinite(f"objective became {J}; lower the learning rate")
    return LinearModel(W, b, LOGISTIC, float(C), J, it)


# -- linear SVM ------------------------------------------------------------

def svm_objective(W, b, X, y, c_value) -> float:
    """Sum over classes of ``0.5 * ||[w_c, b_c]||^2 + C * sum_i hinge``."""
    z = np.asarray(X @ W.T) + b
    signs = -np.ones_like(z)
    signs[np.arange(y.size), y] = 1.0
    hinge = np.maximum(0.0, 1.0 - signs * z)
    return float(0.5 * (np.sum(W * W) + np.dot(b, b)) + c_value * hinge.sum())


def svm_hinge_total(model: LinearModel, X, y) -> float:
    z = model.margins(X)
    labels = encode_labels(y)
    signs = -np.ones_like(z)
    signs[np.arange(labels.size), labels] = 1.0
    return float(np.maximum(0.0, 1.0 - signs * z).sum())


def train_svm(X, y, config: TrainConfig = TrainConfig(), dim: int | None = None,
              trace: list | None = None) -> LinearModel:
    X = as_matrix(X, dim)
    labels = encode_labels(y)
    check_training_set(X, labels)
    n, n_terms = X.shape
    C = config.c_value
    epochs = config.max_epochs or DEFAULT_SVM_EPOCHS
    lam = 1.0 / (C * n)
    radius2 = 1.0 / lam

    indptr, indices, data = X.indptr, X.indices, X.data
    sq_norms = np.asarray(X.multiply(X).sum(axis=1)).ravel() + 1.0   # + bias feature
    signs = -np.ones((n, N_CLASSES))
    signs[np.arange(n), labels] = 1.0

    # W = scale[:, None] * V keeps the per-step shrink O(1)
    V = np.zeros((N_CLASSES, n_terms))
    vb = np.zeros(N_CLASSES)
    scale = np.ones(N_CLASSES)
    vnorm2 = np.zeros(N_CLASSES)

    rng = np.random.default_rng(config.seed)
    t = 0
    best = (math.inf, np.zeros((N_CLASSES, n_terms)), np.zeros(N_CLASSES), 0)
    stale = 0
    epoch = 0
    for epoch in range(1, epochs + 1):
        for i in rng.permutation(n):
            t += 1
            eta = 1.0 / (lam * t)
            lo, hi = indptr[i], indptr[i + 1]
            cols, vals = indices[lo:hi], data[lo:hi]
            vx = V[:, cols] @ vals + vb
            margin = signs[i] * scale * vx
            shrink = 1.0 - 1.0 / t
            if shrink == 0.0:
                V[:] = 0.0
                vb[:] = 0.0
                vnorm2[:] = 0.0
                scale[:] = 1.0
                vx = np.zeros(N_CLASSES)
            else:
                scale *= shrink
            for c in np.flatnonzero(margin < 1.0).tolist():
                step = eta * signs[i, c] / scale[c]
                V[c, cols] += step * vals
                vb[c] += step
                vnorm2[c] += 2.0 * step * vx[c] + step * step * sq_norms[i]
            # project each class onto the ball of radius sqrt(1 / lambda)
            wnorm2 = scale * scale * vnorm2
            for c in np.flatnonzero(wnorm2 > radius2).tolist():
                scale[c] *= math.sqrt(radius2 / wnorm2[c])
            if np.any(scale < 1e-100):
                V *= scale[:, None]
                vb *= scale
                vnorm2 *= scale * scale
                scale[:] = 1.0
        W = scale[:, None] * V
        b = scale * vb
        obj = svm_objective(W, b, X, labels, C)
        if not math.isfinite(obj):
            raise NonFinite(f"SVM objective became {obj} in epoch {epoch}")
        if trace is not None:
            trace.append(obj)
        # subgradient steps are not descent steps: keep the best epoch-end
        # iterate and stop once it has not improved for a few epochs
        if obj < best[0] - config.tolerance * max(1.0, abs(obj)):
            stale = 0
        else:
            stale += 1
        if obj < best[0]:
            best = (obj, W, b, epoch)
        if stale >= SVM_PATIENCE:
            break
    obj, W, b, _ = best
    return LinearModel(W, b, SVM, float(C), obj, epoch)
