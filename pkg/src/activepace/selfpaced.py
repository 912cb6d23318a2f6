"""Self-paced weight subproblem: linear soft weighting and its closed form."""
from __future__ import annotations

import numpy as np

from .core import (
    ClassifierBank,
    DomainError,
    EngineConfig,
    FeatureStore,
    LabelState,
    WeightMatrix,
    hinge_losses,
)
from .pseudolabel import assignment_batch, candidate_labels


def regularizer_value(v_col: np.ndarray, lam: float) -> float:
    """lam * (1/2 ||v||^2 - sum v) for one category's weight column."""
    if lam <= 0:
        raise DomainError("pace parameter must be positive")
    v = np.asarray(v_col, dtype=np.float64)
    return float(lam * (0.5 * v @ v - np.sum(v)))


def spl_weight(loss: float, C: float, lam: float) -> float:
    """Closed-form minimizer of C*v*loss + lam*(v^2/2 - v) over [0,1]."""
    if C * loss < lam:
        return 1.0 - C * loss / lam
    return 0.0


def spl_weights(losses: np.ndarray, C: float, lam: np.ndarray) -> np.ndarray:
    """Vectorized closed form over an (n, m) loss matrix with per-column lam."""
    scaled = C * losses / lam
    return np.where(scaled < 1.0, 1.0 - scaled, 0.0)


def update_weights(
    bank: ClassifierBank,
    store: FeatureStore,
    labels: LabelState,
    weights: WeightMatrix,
    config: EngineConfig,
) -> WeightMatrix:
    """Recompute the importance-weight matrix under the current classifiers.

    Pinned (actively annotated) samples keep v=1 for their positive category;
    every other entry, including the whole row of free samples, follows the
    closed form on the hinge loss of its current label.  Free rows with no
    label yet are scored against candidate labels so the confident ones can
    surface for pseudo-labeling.
    """
    ann = labels.annotated_mask()
    if np.any(weights.pinned != ann):
        raise DomainError("curriculum markers inconsistent with the annotated set")
    s = bank.scores(store.features)
    y = labels.y.astype(np.float64)
    # pseudo labels are soft: every non-annotated row is rescored against the
    # best feasible assignment under the current classifiers, so an early
    # wrong claim cannot gate the row out of its true category once the
    # classifiers recover.  Rows already inside the curriculum keep their
    # importance weights in the label choice (the exact per-row subproblem);
    # rows outside it have no weighted preference and use unit weights.
    weighted = ~ann & np.any(weights.v > 0, axis=1)
    if np.any(weighted):
        y[weighted] = assignment_batch(s[weighted], weights.v[weighted])
    fresh = ~ann & ~weighted
    if np.any(fresh):
        y[fresh] = candidate_labels(s[fresh])
    losses = hinge_losses(s, y)
    v = spl_weights(losses, config.C, bank.lam)
    pos = labels.annotated_cat
    rows = np.flatnonzero(ann & (pos >= 0))
    v[rows, pos[rows]] = 1.0
    return WeightMatrix(v=v, pinned=ann.copy())
