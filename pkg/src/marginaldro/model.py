"""Data containers and pointwise losses with subgradients.

All losses are nonnegative.  Regression uses the absolute deviation loss,
classification the binary logistic loss with labels in {-1, +1}; the 0-1
loss is evaluation-only and has no subgradient.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

ABSOLUTE = "absolute_deviation"
LOGISTIC = "logistic"
ZERO_ONE = "zero_one"

LOSS_KINDS = (ABSOLUTE, LOGISTIC, ZERO_ONE)
TRAINABLE_LOSS_KINDS = (ABSOLUTE, LOGISTIC)


def _check_kind(kind, trainable=False):
    allowed = TRAINABLE_LOSS_KINDS if trainable else LOSS_KINDS
    if kind not in allowed:
        raise ValueError(f"unknown loss kind {kind!r}; expected one of {allowed}")


@dataclass
class Dataset:
    """An in-memory sample: feature matrix, labels, and optional side columns.

    Parameters
    ----------
    features : ndarray, shape (n, d)
    labels : ndarray, shape (n,)
        Real-valued for regression, {-1, +1} for classification.
    replicates : ndarray, shape (n, m), optional
        Repeated label draws per row (same covariates).
    group : ndarray, shape (n,), optional
        Latent group indicator in {0, 1}; diagnostics only.
    confounder : ndarray, shape (n,), optional
        Unobserved-confounder column of the confounded generator.
    """

    features: np.ndarray
    labels: np.ndarray
    replicates: np.ndarray | None = None
    group: np.ndarray | None = None
    confounder: np.ndarray | None = None

    def __post_init__(self):
        self.features = np.atleast_2d(np.asarray(self.features, dtype=float))
        self.labels = np.asarray(self.labels, dtype=float).ravel()
        n, d = self.features.shape
        if n < 1 or d < 1:
            raise ValueError(f"need n >= 1 and d >= 1, got features of shape {(n, d)}")
        if self.labels.shape != (n,):
            raise ValueError(f"labels shape {self.labels.shape} does not match n={n}")
        if not np.isfinite(self.features).all() or not np.isfinite(self.labels).all():
            raise ValueError("features and labels must be finite")
        if self.replicates is not None:
            self.replicates = np.atleast_2d(np.asarray(self.replicates, dtype=float))
            if self.replicates.shape[0] != n:
                raise ValueError("replicates must have one row per example")
            if not np.isfinite(self.replicates).all():
                raise ValueError("replicates must be finite")
        for name in ("group", "confounder"):
            col = getattr(self, name)
            if col is not None:
                col = np.asarray(col, dtype=float).ravel()
                if col.shape != (n,):
                    raise ValueError(f"{name} must have exactly n={n} entries")
                if not np.isfinite(col).all():
                    raise ValueError(f"{name} must be finite")
                setattr(self, name, col)
        if self.group is not None and not np.isin(self.group, (0.0, 1.0)).all():
            raise ValueError("group entries must be 0 or 1")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]


@dataclass
class ParamVector:
    """Linear model parameters; the intercept is kept out of regularization."""

    theta: np.ndarray
    intercept: float = 0.0

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float).ravel()
        self.intercept = float(self.intercept)
        if not np.isfinite(self.theta).all() or not np.isfinite(self.intercept):
            raise ValueError("parameters must be finite")

    def predict(self, features: np.ndarray) -> np.ndarray:
        features = np.atleast_2d(np.asarray(features, dtype=float))
        if features.shape[1] != self.theta.shape[0]:
            raise ValueError(
                f"feature dimension {features.shape[1]} does not match "
                f"parameter dimension {self.theta.shape[0]}"
            )
        return features @ self.theta + self.intercept


def loss_value(kind: str, params: ParamVector, x: np.ndarray, y: float) -> float:
    """Pointwise loss of a linear model at one example; always >= 0."""
    _check_kind(kind)
    pred = float(params.predict(np.asarray(x, dtype=float).reshape(1, -1))[0])
    if kind == ABSOLUTE:
        return abs(pred - y)
    if kind == LOGISTIC:
        _check_binary_label(y)
        return float(np.logaddexp(0.0, -y * pred))
    yhat = 1.0 if pred >= 0 else -1.0
    _check_binary_label(y)
    return float(yhat != y)


def loss_subgradient(kind: str, params: ParamVector, x: np.ndarray, y: float) -> np.ndarray:
    """Subgradient of ``loss_value`` with respect to (theta, intercept).

    Returns a vector of length d + 1 (intercept coordinate last).  At the
    absolute-loss kink the zero element of the subdifferential is returned.
    """
    _check_kind(kind, trainable=True)
    x = np.asarray(x, dtype=float).ravel()
    pred = float(params.predict(x.reshape(1, -1))[0])
    xb = np.append(x, 1.0)
    if kind == ABSOLUTE:
        s = np.sign(pred - y)
        return s * xb
    _check_binary_label(y)
    # d/df log(1 + exp(-y f)) = -y * sigmoid(-y f)
    return -y * expit(-y * pred) * xb


def loss_values(kind: str, params: ParamVector, features: np.ndarray,
                labels: np.ndarray) -> np.ndarray:
    """Vector of per-example losses for a whole sample."""
    _check_kind(kind)
    pred = params.predict(features)
    labels = np.asarray(labels, dtype=float).ravel()
    if kind == ABSOLUTE:
        return np.abs(pred - labels)
    if kind == LOGISTIC:
        _check_binary_labels(labels)
        return np.logaddexp(0.0, -labels * pred)
    _check_binary_labels(labels)
    yhat = np.where(pred >= 0, 1.0, -1.0)
    return (yhat != labels).astype(float)


def loss_residual_slopes(kind: str, params: ParamVector, features: np.ndarray,
                         labels: np.ndarray) -> np.ndarray:
    """Per-example derivative of the loss with respect to the prediction.

    The full per-example subgradient wrt (theta, intercept) is
    ``slope[i] * (x_i, 1)``; kinks of the absolute loss get slope 0.
    """
    _check_kind(kind, trainable=True)
    pred = params.predict(features)
    labels = np.asarray(labels, dtype=float).ravel()
    if kind == ABSOLUTE:
        return np.sign(pred - labels)
    _check_binary_labels(labels)
    return -labels * expit(-labels * pred)


def _check_binary_label(y):
    if y not in (-1.0, 1.0, -1, 1):
        raise ValueError(f"classification labels must be -1 or +1, got {y!r}")


def _check_binary_labels(labels):
    if not np.isin(labels, (-1.0, 1.0)).all():
        raise ValueError("classification labels must be -1 or +1")
