"""Iteration loop: classifier updates, self-paced labeling, active queries.

One Engine instance owns all mutable state for a run and appends one ledger
record per iteration.  Strategy flags turn off the self-paced or active
halves to build the comparison baselines.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import (
    PROV_PSEUDO,
    UNKNOWN,
    ClassifierBank,
    DomainError,
    EngineConfig,
    FeatureStore,
    LabelState,
    WeightMatrix,
    hinge_losses,
    total_objective,
)
from .pseudolabel import (
    assignment_batch,
    pseudo_label_batch,
    select_high_confidence,
    update_unknown_pool,
)
from .query import (
    Oracle,
    annotate_batch,
    handle_new_classes,
    select_low_confidence,
    verify_annotations,
)
from .selfpaced import update_weights
from .svm import train_one_vs_all

log = logging.getLogger(__name__)

STRATEGIES = ("ASPL", "ASPL_no_SPL", "ASPL_no_AL", "RANDOM", "UNCERTAINTY", "ALL")

# feature-refresh hook: receives (store, labels), may return a replacement
# feature matrix; the default is the identity
FeatureRefresh = Callable[[FeatureStore, LabelState], Optional[np.ndarray]]


@dataclass
class IterationRecord:
    t: int
    requested: int
    answered: int
    corrections: int
    pseudo_count: int
    pseudo_error: float
    rank1: float
    objective: float
    lam: list[float]
    annotated_total: int
    new_classes: list[str]
    wall_time: float

    def as_dict(self) -> dict:
        return {
            "t": self.t,
            "requested": self.requested,
            "answered": self.answered,
            "corrections": self.corrections,
            "pseudo_count": self.pseudo_count,
            "pseudo_error": self.pseudo_error,
            "rank1": self.rank1,
            "objective": self.objective,
            "lam": self.lam,
            "annotated_total": self.annotated_total,
            "new_classes": self.new_classes,
            "wall_time": self.wall_time,
        }


@dataclass
class RunLedger:
    records: list[IterationRecord] = field(default_factory=list)

    def append(self, record: IterationRecord) -> None:
        if self.records and record.t <= self.records[-1].t:
            raise DomainError("iteration counter must be strictly increasing")
        self.records.append(record)

    def series(self, name: str) -> list:
        return [getattr(r, name) for r in self.records]


def audited_objective(
    bank: ClassifierBank,
    store: FeatureStore,
    labels: LabelState,
    weights: WeightMatrix,
    config: EngineConfig,
) -> float:
    """Joint objective with free-row labels optimized out.

    Non-annotated rows are evaluated at their best feasible assignment under
    the current weights, which is exactly the value the pseudo-labeling step
    realizes.  This is the quantity the per-block descent audit tracks: the
    classifier step descends it through the stored-label upper bound, the
    weight step through the per-entry closed form, and the labeling step
    leaves it unchanged by construction.
    """
    s = bank.scores(store.features)
    ann = labels.annotated_mask()
    y = labels.y.astype(np.float64)
    free = ~ann
    if np.any(free):
        y[free] = assignment_batch(s[free], weights.v[free])
    losses = hinge_losses(s, y)
    v = weights.v
    value = 0.5 * float(np.sum(bank.W * bank.W))
    value += config.C * float(np.sum(v * losses))
    value += float(np.sum(bank.lam * (0.5 * np.sum(v * v, axis=0) - np.sum(v, axis=0))))
    return value


def update_pace(lam: float, t: int, eta: float, config: EngineConfig) -> float:
    """Pace schedule: reset at t=0, linear growth until tau, frozen after."""
    if t == 0:
        return config.lam0
    if 1 <= t <= config.tau:
        return lam + config.alpha * eta
    return lam


def rank1_accuracy(bank: ClassifierBank, features: np.ndarray, truth: np.ndarray,
                   category_names: list[str], truth_names: list[str]) -> float:
    """Fraction of samples whose top-scoring category matches ground truth.

    Samples with unknown truth are excluded from the denominator.  Truth for
    categories the bank has not met yet counts as a miss.
    """
    known = truth != UNKNOWN
    if features.shape[0] == 0 or not np.any(known):
        raise DomainError("evaluation split is empty")
    s = features[known] @ bank.W.T + bank.b
    pred = np.argmax(s, axis=1)
    pred_names = np.array([category_names[j] for j in pred])
    true_names = np.array([truth_names[int(k)] for k in truth[known]])
    return float(np.mean(pred_names == true_names))


def generate_synthetic(m: int, per_cluster: int, d: int, spread: float,
                       seed: int) -> FeatureStore:
    """Isotropic Gaussian clusters with deterministic layout per seed."""
    if m * per_cluster == 0:
        raise DomainError("cluster count times cluster size must be positive")
    rng = np.random.default_rng(seed)
    centers = rng.normal(size=(m, d))
    features = np.repeat(centers, per_cluster, axis=0) + spread * rng.normal(
        size=(m * per_cluster, d))
    truth = np.repeat(np.arange(m), per_cluster)
    perm = rng.permutation(m * per_cluster)
    names = [f"c{j}" for j in range(m)]
    return FeatureStore(
        features=features[perm],
        sample_ids=[f"s{i}" for i in range(m * per_cluster)],
        truth=truth[perm],
        category_names=list(names),
        truth_names=list(names),
    )


def identity_refresh(store: FeatureStore, labels: LabelState) -> Optional[np.ndarray]:
    return None


class Engine:
    """Owns one run's mutable state and executes the iteration loop."""

    def __init__(
        self,
        store: FeatureStore,
        config: EngineConfig,
        oracle: Oracle,
        strategy: str = "ASPL",
        eval_features: Optional[np.ndarray] = None,
        eval_truth: Optional[np.ndarray] = None,
        verification: bool = True,
        feature_refresh: FeatureRefresh = identity_refresh,
        descent_audit: bool = False,
    ) -> None:
        if strategy not in STRATEGIES:
            raise DomainError(f"unrecognized strategy {strategy!r}")
        self.store = store
        self.config = config
        self.oracle = oracle
        self.strategy = strategy
        self.eval_features = eval_features
        self.eval_truth = eval_truth
        self.verification = verification
        self.feature_refresh = feature_refresh
        self.descent_audit = descent_audit
        self.labels = LabelState.empty(store.n, store.m)
        self.weights = WeightMatrix.zeros(store.n, store.m)
        self.bank = ClassifierBank.zeros(store.m, store.d, config.lam0)
        self.ledger = RunLedger()
        self.rng = np.random.default_rng(config.seed)
        self.audit_log: list[tuple[float, float, float, float]] = []

    # -- initialization ----------------------------------------------------

    def annotate_initial(self, i: int, category: int) -> None:
        self.labels.annotate(i, category)
        self.weights.pinned[i] = True
        self.weights.v[i] = 1.0

    def seed_annotations(self, per_class: int, flip_fraction: float = 0.0) -> None:
        """Annotate per_class random training samples for each known class.

        ``flip_fraction`` of the seeds get a deliberately wrong class, which
        models noisy initial annotation.
        """
        truth = self.store.truth
        if truth is None:
            raise DomainError("seeding needs ground truth")
        chosen: list[int] = []
        for j, name in enumerate(self.store.category_names):
            k = self.store.truth_names.index(name)
            pool = np.flatnonzero(truth == k)
            take = min(per_class, pool.size)
            chosen.extend(int(i) for i in self.rng.choice(pool, size=take, replace=False))
        flips = set()
        if flip_fraction > 0 and chosen:
            n_flip = int(round(flip_fraction * len(chosen)))
            flips = set(int(i) for i in self.rng.choice(chosen, size=n_flip, replace=False))
        for i in chosen:
            k = int(truth[i])
            name = self.store.truth_names[k]
            j = self.store.category_names.index(name)
            if i in flips:
                others = [c for c in range(self.store.m) if c != j]
                j = int(self.rng.choice(others))
            self.annotate_initial(i, j)

    def annotate_everything(self) -> None:
        truth = self.store.truth
        if truth is None:
            raise DomainError("full annotation needs ground truth")
        for i in range(self.store.n):
            k = int(truth[i])
            if k == UNKNOWN:
                self.annotate_initial(i, UNKNOWN)
                continue
            name = self.store.truth_names[k]
            if name not in self.store.category_names:
                continue
            self.annotate_initial(i, self.store.category_names.index(name))

    # -- metrics helpers ---------------------------------------------------

    def classifier_accuracies(self) -> np.ndarray:
        """Binary accuracy of each classifier on the annotated samples."""
        rows = np.flatnonzero(self.labels.annotated_mask())
        eta = np.ones(self.bank.m)
        if rows.size == 0:
            return eta
        s = self.bank.scores(self.store.features[rows])
        for j in range(self.bank.m):
            target = np.where(self.labels.annotated_cat[rows] == j, 1.0, -1.0)
            pred = np.where(s[:, j] > 0, 1.0, -1.0)
            eta[j] = float(np.mean(pred == target))
        return eta

    def pseudo_error_rate(self) -> float:
        """Fraction of pseudo-labeled rows whose label row contradicts truth."""
        truth = self.store.truth
        if truth is None:
            return float("nan")
        rows = np.flatnonzero(self.labels.provenance == PROV_PSEUDO)
        if rows.size == 0:
            return 0.0
        wrong = 0
        for i in rows:
            pos = np.flatnonzero(self.labels.y[i] == 1)
            k = int(truth[i])
            true_name = None if k == UNKNOWN else self.store.truth_names[k]
            if pos.size == 0:
                wrong += true_name is not None and true_name in self.store.category_names
            else:
                wrong += true_name != self.store.category_names[int(pos[0])]
        return wrong / rows.size

    def evaluate(self) -> float:
        if self.eval_features is None or self.eval_truth is None:
            return float("nan")
        return rank1_accuracy(self.bank, self.eval_features, self.eval_truth,
                              self.store.category_names, self.store.truth_names)

    def objective(self) -> float:
        return total_objective(self.bank, self.store, self.labels, self.weights, self.config)

    # -- the loop ----------------------------------------------------------

    def _classifier_and_spl_steps(self) -> int:
        """Steps 2-5: retrain, reweight, pseudo-label, U update.  Returns |S|."""
        cfg = self.config

        def g() -> float:
            return audited_objective(self.bank, self.store, self.labels, self.weights, cfg)

        if self.descent_audit:
            before = g()
        self.bank = train_one_vs_all(self.labels, self.weights, self.store, self.bank, cfg)
        if self.descent_audit:
            after_svm = g()
        self.weights = update_weights(self.bank, self.store, self.labels, self.weights, cfg)
        if self.descent_audit:
            after_v = g()
        s_size = 0
        if self.strategy in ("ASPL", "ASPL_no_AL"):
            S = select_high_confidence(self.weights, self.labels, cfg.pseudo_cap)
            pseudo_label_batch(S, self.bank, self.store, self.weights, self.labels)
            s_size = len(S)
        if self.descent_audit:
            after_y = g()
            self.audit_log.append((before, after_svm, after_v, after_y))
        # step 5 sits outside the audited window: retiring unclaimed rows is
        # curriculum maintenance, not part of the block-descent guarantee
        update_unknown_pool(self.weights, self.labels)
        return s_size

    def _active_step(self) -> tuple[int, int, int, list[str]]:
        """Steps 6-7: verification then annotation.  Returns counts."""
        cfg = self.config
        corrections = 0
        new_names: list[str] = []
        pending_seeds: dict[str, list[int]] = {}
        if self.verification and np.any(self.labels.annotated_cat >= 0):
            fixed, seeds = verify_annotations(self.bank, self.store, self.labels,
                                              self.weights, self.oracle, cfg.L)
            corrections = len(fixed)
            for name, idxs in seeds.items():
                pending_seeds.setdefault(name, []).extend(idxs)
        selected = self._select_for_annotation()
        answered, seeds = annotate_batch(selected, self.oracle, self.store,
                                         self.labels, self.weights)
        for name, idxs in seeds.items():
            pending_seeds.setdefault(name, []).extend(idxs)
        if pending_seeds:
            new_names = handle_new_classes(pending_seeds, self.store, self.labels,
                                           self.weights, self.bank, self.oracle, cfg)
            # per the loop-back rule, re-run the model updates so the fresh
            # classifiers participate in this iteration's state
            self._classifier_and_spl_steps()
        return len(selected), answered, corrections, new_names

    def _select_for_annotation(self) -> list[int]:
        cfg = self.config
        unannotated = np.flatnonzero(~self.labels.annotated_mask())
        if unannotated.size == 0:
            return []
        if self.strategy in ("ASPL", "ASPL_no_SPL"):
            return select_low_confidence(self.bank, self.store, self.labels,
                                         cfg.B, cfg.ambiguity_min_positives)
        if self.strategy == "RANDOM":
            take = min(cfg.B, unannotated.size)
            return [int(i) for i in self.rng.choice(unannotated, size=take, replace=False)]
        if self.strategy == "UNCERTAINTY":
            # lowest-prediction-confidence sample, one per iteration
            s = self.bank.scores(self.store.features[unannotated])
            conf = np.abs(np.max(s, axis=1))
            return [int(unannotated[int(np.lexsort((unannotated, conf))[0])])]
        return []  # ASPL_no_AL, ALL

    def run_iteration(self) -> IterationRecord:
        start = time.perf_counter()
        self.bank.t += 1
        t = self.bank.t
        s_size = self._classifier_and_spl_steps()
        requested = answered = corrections = 0
        new_names: list[str] = []
        if self.strategy not in ("ASPL_no_AL", "ALL"):
            requested, answered, corrections, new_names = self._active_step()
        if t % self.config.T == 0:
            refreshed = self.feature_refresh(self.store, self.labels)
            if refreshed is not None:
                self.store.features = np.asarray(refreshed, dtype=np.float64)
        # the pace schedule is defined on the iteration clock: one increment
        # per iteration while t <= pace_cap, frozen afterwards
        eta = self.classifier_accuracies()
        for j in range(self.bank.m):
            self.bank.lam[j] = update_pace(self.bank.lam[j], t, float(eta[j]), self.config)
        self.labels.validate()
        record = IterationRecord(
            t=t,
            requested=requested,
            answered=answered,
            corrections=corrections,
            pseudo_count=s_size,
            pseudo_error=self.pseudo_error_rate(),
            rank1=self.evaluate(),
            objective=self.objective(),
            lam=[float(x) for x in self.bank.lam],
            annotated_total=int(np.sum(self.labels.annotated_mask())),
            new_classes=new_names,
            wall_time=time.perf_counter() - start,
        )
        self.ledger.append(record)
        return record

    def run(self, iterations: Optional[int] = None) -> RunLedger:
        n_iter = self.config.max_iters if iterations is None else iterations
        for _ in range(n_iter):
            self.run_iteration()
            if self.strategy not in ("ASPL_no_AL", "ALL") and not np.any(~self.labels.annotated_mask()):
                break
        return self.ledger
