"""Weighted soft-margin linear classifiers, trained one-vs-all.

The per-category subproblems are independent weighted binary SVMs; libsvm
(via scikit-learn) solves the weighted hinge primal to tolerance, which is
all the contract asks for.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from sklearn.svm import SVC

from .core import (
    ClassifierBank,
    DomainError,
    EngineConfig,
    FeatureStore,
    LabelState,
    WeightMatrix,
    hinge_losses,
)

log = logging.getLogger(__name__)


@dataclass
class BinaryProblem:
    """One category's training rows: (sample index, label, instance weight)."""

    indices: np.ndarray
    y: np.ndarray
    v: np.ndarray
    C: float = 1.0
    tol: float = 1e-6
    warm_start: Optional[tuple[np.ndarray, float]] = None

    def __post_init__(self) -> None:
        self.indices = np.asarray(self.indices, dtype=np.int64)
        self.y = np.asarray(self.y, dtype=np.float64)
        self.v = np.asarray(self.v, dtype=np.float64)
        if self.indices.size == 0:
            raise DomainError("empty problem")
        if np.any((self.v < 0) | (self.v > 1)):
            raise DomainError("instance weights must lie in [0,1]")
        if np.any(np.abs(self.y) != 1):
            raise DomainError("labels must be -1 or +1")


def primal_objective(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray,
                     v: np.ndarray, C: float) -> float:
    """1/2 ||w||^2 + C * sum v_i (1 - y_i (w.x_i + b))_+ ."""
    losses = hinge_losses(X @ w + b, y)
    return 0.5 * float(w @ w) + C * float(np.sum(v * losses))


def train_weighted_binary(problem: BinaryProblem, store: FeatureStore) -> tuple[np.ndarray, float, float]:
    """Solve one weighted binary problem; returns (w, b, primal objective).

    Rows with v=0 are dropped before solving, so they cannot affect the
    optimum.  Both classes must survive the drop; otherwise the problem is
    degenerate and the caller keeps its previous hyperplane.
    """
    active = problem.v > 0
    idx = problem.indices[active]
    y = problem.y[active]
    v = problem.v[active]
    if idx.size == 0 or np.unique(y).size < 2:
        raise DomainError("problem needs positive-weight rows of both classes")
    X = store.features[idx]
    if not np.all(np.isfinite(X)):
        raise DomainError("non-finite features in training rows")
    # libsvm's per-sample C_i = C * sample_weight_i reproduces the weighted
    # hinge primal exactly; the stopping tolerance is the caller's to choose
    clf = SVC(kernel="linear", C=problem.C, tol=max(problem.tol, 1e-10),
              shrinking=False, cache_size=64)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        clf.fit(X, y, sample_weight=v)
    w = clf.coef_.ravel().astype(np.float64)
    b = float(clf.intercept_[0])
    # libsvm maps fit classes to sorted order; with y in {-1,+1} the sign
    # convention already matches.
    obj = primal_objective(w, b, X, y, v, problem.C)
    return w, b, obj


def train_one_vs_all(
    labels: LabelState,
    weights: WeightMatrix,
    store: FeatureStore,
    bank: ClassifierBank,
    config: EngineConfig,
) -> ClassifierBank:
    """Retrain every category's hyperplane on its assigned, positive-weight rows.

    Categories without usable positives keep their previous hyperplane (a
    warning is logged); pace ages and the iteration counter are preserved.
    """
    W = bank.W.copy()
    b = bank.b.copy()
    assigned = np.flatnonzero(labels.assigned_mask())
    for j in range(bank.m):
        yj = labels.y[assigned, j].astype(np.float64)
        vj = weights.v[assigned, j]
        usable = vj > 0
        has_pos = np.any(yj[usable] > 0)
        has_neg = np.any(yj[usable] < 0)
        if not (has_pos and has_neg):
            log.warning("category %d has no trainable positive/negative mix; hyperplane unchanged", j)
            continue
        problem = BinaryProblem(indices=assigned, y=yj, v=vj, C=config.C,
                                tol=config.solver_tol, warm_start=(bank.W[j], bank.b[j]))
        W[j], b[j], _ = train_weighted_binary(problem, store)
    return ClassifierBank(W=W, b=b, lam=bank.lam.copy(), t=bank.t)
