"""Shared domain types and pure evaluators for the incremental identifier.

Everything here is a value-semantic snapshot: the engine owns mutation,
read-only evaluation is safe from any thread.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

# truth / annotation sentinels
UNKNOWN = -1          # sample belongs to no known category (background person)
NOT_ANNOTATED = -2

# provenance codes, one per sample row
PROV_NONE = 0
PROV_PSEUDO = 1
PROV_ANNOTATED = 2


class DomainError(ValueError):
    """Raised when an operation's preconditions are violated."""


@dataclass
class FeatureStore:
    """Immutable n x d feature matrix with optional ground truth.

    ``truth`` holds indices into a global name universe (``truth_names``);
    ``category_names`` lists the categories currently known to the engine,
    which may lag behind the truth universe when classes are withheld.
    """

    features: np.ndarray
    sample_ids: list[str]
    truth: Optional[np.ndarray]
    category_names: list[str]
    truth_names: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.ndim != 2 or self.features.shape[0] < 1 or self.features.shape[1] < 1:
            raise DomainError("features must be a non-empty 2-D matrix")
        if not np.all(np.isfinite(self.features)):
            bad = np.argwhere(~np.isfinite(self.features))[0]
            raise DomainError(f"non-finite feature at row {bad[0]}, column {bad[1]}")
        if len(self.sample_ids) != self.n:
            raise DomainError("sample_ids length must equal the number of rows")
        if self.truth is not None:
            self.truth = np.asarray(self.truth, dtype=np.int64)
            if self.truth.shape != (self.n,):
                raise DomainError("truth must have exactly one entry per sample")
            if not self.truth_names:
                hi = int(self.truth.max(initial=-1))
                self.truth_names = list(self.category_names)
                while len(self.truth_names) <= hi:
                    self.truth_names.append(f"c{len(self.truth_names)}")
            if np.any((self.truth < UNKNOWN) | (self.truth >= len(self.truth_names))):
                raise DomainError("truth entries must be valid indices or the unknown sentinel")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    @property
    def m(self) -> int:
        return len(self.category_names)

    def subset(self, idx: np.ndarray) -> "FeatureStore":
        return FeatureStore(
            features=self.features[idx].copy(),
            sample_ids=[self.sample_ids[i] for i in idx],
            truth=None if self.truth is None else self.truth[idx].copy(),
            category_names=list(self.category_names),
            truth_names=list(self.truth_names),
        )


@dataclass
class LabelState:
    """Per-sample, per-category labels with provenance and the unknown set.

    ``y`` takes values in {-1, +1, 0}; 0 means not yet assigned.  A row is
    either fully assigned (annotated or pseudo) or fully unassigned.
    ``annotated_cat`` is the positive category for annotated rows, UNKNOWN
    for rows annotated as background, NOT_ANNOTATED otherwise.
    """

    y: np.ndarray
    provenance: np.ndarray
    annotated_cat: np.ndarray
    # oracle-certified annotations; verification never re-asks about these,
    # so the weakest-score scan sweeps the whole annotated set over time
    verified: np.ndarray = None  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.verified is None:
            self.verified = np.zeros(self.y.shape[0], dtype=bool)

    @classmethod
    def empty(cls, n: int, m: int) -> "LabelState":
        return cls(
            y=np.zeros((n, m), dtype=np.int8),
            provenance=np.full(n, PROV_NONE, dtype=np.uint8),
            annotated_cat=np.full(n, NOT_ANNOTATED, dtype=np.int64),
        )

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def m(self) -> int:
        return self.y.shape[1]

    def assigned_mask(self) -> np.ndarray:
        return self.provenance != PROV_NONE

    def annotated_mask(self) -> np.ndarray:
        return self.provenance == PROV_ANNOTATED

    def unknown_mask(self) -> np.ndarray:
        """Membership in U: fully assigned and all-negative."""
        return self.assigned_mask() & np.all(self.y == -1, axis=1)

    def annotated_set(self, j: int) -> np.ndarray:
        """Indices of samples annotated as positives of category j."""
        return np.flatnonzero(self.annotated_cat == j)

    def assign_pseudo(self, i: int, row: np.ndarray) -> None:
        if self.provenance[i] == PROV_ANNOTATED:
            raise DomainError(f"sample {i} is annotated; pseudo-labeling it violates the curriculum")
        self._check_row(row)
        self.y[i] = row
        self.provenance[i] = PROV_PSEUDO

    def annotate(self, i: int, category: int) -> None:
        """Fix sample i's full label row from an oracle answer.

        ``category`` is a valid column index, or UNKNOWN for background.
        Re-annotation is allowed (verification corrections).
        """
        if category != UNKNOWN and not (0 <= category < self.m):
            raise DomainError(f"category {category} out of range")
        self.y[i] = -1
        if category != UNKNOWN:
            self.y[i, category] = 1
        self.provenance[i] = PROV_ANNOTATED
        self.annotated_cat[i] = category

    def add_category(self) -> None:
        col = np.zeros((self.n, 1), dtype=np.int8)
        col[self.assigned_mask()] = -1
        self.y = np.hstack([self.y, col])

    def _check_row(self, row: np.ndarray) -> None:
        if row.shape != (self.m,) or np.any(np.abs(row) != 1):
            raise DomainError("label row must be a full vector over {-1,+1}")
        if int(np.sum(np.abs(row + 1))) > 2:
            raise DomainError("label row violates the at-most-one-positive constraint")

    def validate(self) -> None:
        """Audit the structural invariants; raises DomainError on violation."""
        assigned = self.assigned_mask()
        if np.any(np.abs(self.y[assigned]) != 1):
            raise DomainError("assigned rows must be fully labeled")
        if np.any(self.y[~assigned] != 0):
            raise DomainError("unassigned rows must be all-zero")
        if np.any(np.sum(np.abs(self.y[assigned].astype(np.int64) + 1), axis=1) > 2):
            raise DomainError("at-most-one-positive constraint violated")
        ann = self.annotated_mask()
        if np.any((self.annotated_cat != NOT_ANNOTATED) != ann):
            raise DomainError("annotated_cat inconsistent with provenance")
        pos_cat = self.annotated_cat[ann & (self.annotated_cat >= 0)]
        rows = np.flatnonzero(ann & (self.annotated_cat >= 0))
        if rows.size and np.any(self.y[rows, pos_cat] != 1):
            raise DomainError("annotated positives must carry y=+1 in their category")


@dataclass
class ClassifierBank:
    """m linear hyperplanes with per-category pace ages and iteration count."""

    W: np.ndarray
    b: np.ndarray
    lam: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, m: int, d: int, lam0: float) -> "ClassifierBank":
        return cls(W=np.zeros((m, d)), b=np.zeros(m), lam=np.full(m, float(lam0)))

    @property
    def m(self) -> int:
        return self.W.shape[0]

    @property
    def d(self) -> int:
        return self.W.shape[1]

    def scores(self, X: np.ndarray) -> np.ndarray:
        """All decision values w_j . x_i + b_j, shape (n, m)."""
        return X @ self.W.T + self.b

    def add_category(self, w: np.ndarray, b: float, lam: float) -> None:
        self.W = np.vstack([self.W, w.reshape(1, -1)])
        self.b = np.append(self.b, float(b))
        self.lam = np.append(self.lam, float(lam))


@dataclass
class WeightMatrix:
    """Importance weights v in [0,1] plus the per-sample curriculum marker."""

    v: np.ndarray
    pinned: np.ndarray

    @classmethod
    def zeros(cls, n: int, m: int) -> "WeightMatrix":
        return cls(v=np.zeros((n, m)), pinned=np.zeros(n, dtype=bool))

    def add_category(self) -> None:
        self.v = np.hstack([self.v, np.zeros((self.v.shape[0], 1))])


@dataclass
class EngineConfig:
    """Tunable knobs; defaults follow the reference protocol."""

    C: float = 1.0
    lam0: float = 0.2
    alpha: float = 0.08
    tau: int = 12
    T: int = 5
    L: int = 5
    K: int = 5
    B: int = 8
    pseudo_cap: Optional[int] = None
    seed: int = 0
    solver_tol: float = 1e-6
    max_iters: int = 40
    ambiguity_min_positives: int = 2

    def __post_init__(self) -> None:
        for name in ("C", "lam0", "alpha", "solver_tol"):
            if getattr(self, name) <= 0:
                raise DomainError(f"{name} must be positive")
        for name in ("tau", "T", "L", "K", "max_iters"):
            if getattr(self, name) < (0 if name == "L" else 1):
                raise DomainError(f"{name} out of range")
        if self.B < 0:
            raise DomainError("B must be non-negative")
        if self.pseudo_cap is not None and self.pseudo_cap < 0:
            raise DomainError("pseudo_cap must be non-negative when present")


def decision_value(bank: ClassifierBank, store: FeatureStore, i: int, j: int) -> float:
    """Signed score of sample i under category j's hyperplane."""
    if not (0 <= i < store.n):
        raise DomainError(f"sample index {i} out of range")
    if not (0 <= j < bank.m):
        raise DomainError(f"category index {j} out of range")
    return float(bank.W[j] @ store.features[i] + bank.b[j])


def hinge_loss(score: float, y: int) -> float:
    """(1 - y*score)_+ for y in {-1,+1}."""
    if y not in (-1, 1):
        raise DomainError("label must be -1 or +1")
    return max(0.0, 1.0 - y * score)


def hinge_losses(scores: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Vectorized hinge on matching-shape score/label arrays."""
    return np.maximum(0.0, 1.0 - y * scores)


def total_objective(
    bank: ClassifierBank,
    store: FeatureStore,
    labels: LabelState,
    weights: WeightMatrix,
    config: EngineConfig,
) -> float:
    """Joint objective: margin terms + weighted hinge + soft-weighting penalty.

    Only rows with assigned labels contribute; unassigned rows carry v=0 and
    would contribute zero anyway.
    """
    if labels.y.shape != weights.v.shape or labels.m != bank.m or labels.n != store.n:
        raise DomainError("dimension mismatch between labels, weights, bank and store")
    assigned = labels.assigned_mask()
    s = bank.scores(store.features[assigned])
    y = labels.y[assigned].astype(np.float64)
    v = weights.v[assigned]
    losses = hinge_losses(s, y)
    value = 0.5 * float(np.sum(bank.W * bank.W))
    value += config.C * float(np.sum(v * losses))
    value += float(np.sum(bank.lam * (0.5 * np.sum(v * v, axis=0) - np.sum(v, axis=0))))
    return value
