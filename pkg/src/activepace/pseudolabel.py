"""Exact pseudo-labeling of high-confidence samples.

The per-sample label subproblem (minimize the weighted hinge sum subject to
at most one positive) has a closed-form solution over three cases; the
brute-force equivalent enumerates only m+1 feasible vectors, which the test
suite uses as the independent oracle.
"""
from __future__ import annotations

from typing import Optional

import numpy as np

from .core import (
    ClassifierBank,
    DomainError,
    FeatureStore,
    LabelState,
    WeightMatrix,
    hinge_losses,
)


def solve_label_assignment(scores: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, float]:
    """Optimal feasible label vector for one sample, and its objective.

    Entries with zero weight or a score exactly on the boundary default to
    -1 (they cannot change the objective).  Among the rest, all-negative is
    optimal when no score is positive; otherwise exactly one positive entry
    is chosen by the flip-gain criterion v_j*((1-s_j)_+ - (1+s_j)_+), with
    ties broken by the lowest category index.
    """
    s = np.asarray(scores, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    m = s.shape[0]
    in_m = (s != 0.0) & (v > 0.0)
    y = -np.ones(m, dtype=np.int8)
    positive = in_m & (s > 0.0)
    if np.any(positive):
        criterion = v * (np.maximum(0.0, 1.0 - s) - np.maximum(0.0, 1.0 + s))
        criterion = np.where(positive, criterion, np.inf)
        y[int(np.argmin(criterion))] = 1
    objective = float(np.sum(v * hinge_losses(s, y.astype(np.float64))))
    return y, objective


def assignment_batch(scores: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Vectorized optimal feasible label rows under per-entry weights.

    Row-wise equivalent of ``solve_label_assignment``: the positive goes to
    the weighted flip-gain argmin among entries with s > 0 and v > 0, ties
    to the lowest index; rows with no such entry come back all-negative.
    """
    s = np.atleast_2d(np.asarray(scores, dtype=np.float64))
    v = np.atleast_2d(np.asarray(v, dtype=np.float64))
    y = -np.ones_like(s)
    eligible = (s > 0.0) & (v > 0.0)
    rows = np.flatnonzero(np.any(eligible, axis=1))
    if rows.size:
        criterion = v * (np.maximum(0.0, 1.0 - s) - np.maximum(0.0, 1.0 + s))
        criterion = np.where(eligible, criterion, np.inf)
        y[rows, np.argmin(criterion[rows], axis=1)] = 1.0
    return y


def candidate_labels(scores: np.ndarray) -> np.ndarray:
    """Feasible label rows for unlabeled samples, scored with unit weights.

    Used to bootstrap importance weights before a sample has any label: the
    loss a free sample would pay under its best feasible assignment.
    """
    s = np.atleast_2d(scores)
    return assignment_batch(s, np.ones_like(s, dtype=np.float64))


def update_unknown_pool(weights: WeightMatrix, labels: LabelState) -> np.ndarray:
    """Maintain the unknown pool U: retire unclaimed rows from the curriculum.

    Rows nobody claims -- unannotated and without a positive label anywhere --
    drop to zero weight.  A confidently all-negative row would otherwise act
    as a maximum-weight negative for every classifier, including the one for
    its own not-yet-recognized class, and the mistake would self-confirm on
    the next round.  Such rows re-enter through fresh candidate labels as
    soon as some classifier claims them.  Returns the unknown-pool mask.
    """
    unclaimed = ~labels.annotated_mask() & ~np.any(labels.y == 1, axis=1)
    weights.v[unclaimed] = 0.0
    return unclaimed


def select_high_confidence(
    weights: WeightMatrix,
    labels: LabelState,
    pseudo_cap: Optional[int] = None,
) -> list[int]:
    """Unannotated samples with positive weight, most confident first.

    Ordered by descending row-max weight (index ascending on ties) and
    truncated to ``pseudo_cap`` when configured.
    """
    eligible = ~labels.annotated_mask()
    row_max = np.max(weights.v, axis=1, initial=0.0)
    candidates = np.flatnonzero(eligible & (row_max > 0))
    order = np.lexsort((candidates, -row_max[candidates]))
    ranked = [int(i) for i in candidates[order]]
    if pseudo_cap is not None:
        ranked = ranked[:pseudo_cap]
    return ranked


def pseudo_label_batch(
    S: list[int],
    bank: ClassifierBank,
    store: FeatureStore,
    weights: WeightMatrix,
    labels: LabelState,
) -> LabelState:
    """Assign the optimal label row to every sample in S (provenance pseudo).

    All-negative results land in the unknown set by construction; previously
    pseudo-labeled samples are freely re-derived.  Annotated samples must
    never appear in S.
    """
    if not S:
        return labels
    scores = bank.scores(store.features[S])
    for k, i in enumerate(S):
        row, _ = solve_label_assignment(scores[k], weights.v[i])
        labels.assign_pseudo(i, row)
    return labels
