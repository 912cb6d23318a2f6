"""Active side of the loop: query selection, verification, new-class handling.

The Oracle interface is the seam where either the simulated labeler (ground
truth plus optional flip noise) or a human behind the HTTP service plugs in.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from .core import (
    UNKNOWN,
    ClassifierBank,
    DomainError,
    EngineConfig,
    FeatureStore,
    LabelState,
    WeightMatrix,
)
from .svm import BinaryProblem, train_weighted_binary

log = logging.getLogger(__name__)


@dataclass
class OracleAnswer:
    sample_id: str
    category: str           # category name, "new:<name>", or "unknown"
    is_correction: bool = False


class OracleUnavailable(RuntimeError):
    """Raised when an oracle cannot answer (timeout, shut down)."""


class Oracle(Protocol):
    def label(self, sample_id: str) -> OracleAnswer: ...
    def verify(self, sample_id: str, claimed: str) -> OracleAnswer: ...


@dataclass
class SimulatedOracle:
    """Answers from ground truth, with flip-probability noise on labels.

    ``names`` covers the whole truth universe, so withheld classes come back
    as "new:<name>".  Verification answers are truthful by default (humans
    double-check carefully); set ``verify_noise`` to model sloppy reviewers.
    """

    truth: np.ndarray
    names: list[str]
    id_index: dict[str, int]
    rng: np.random.Generator
    noise: float = 0.0
    verify_noise: float = 0.0

    @classmethod
    def for_store(cls, store: FeatureStore, rng: np.random.Generator,
                  noise: float = 0.0, verify_noise: float = 0.0) -> "SimulatedOracle":
        if store.truth is None:
            raise DomainError("simulated oracle needs ground truth")
        return cls(truth=store.truth, names=list(store.truth_names),
                   id_index={sid: i for i, sid in enumerate(store.sample_ids)},
                   rng=rng, noise=noise, verify_noise=verify_noise)

    def _answer(self, sample_id: str, noise: float, is_correction: bool) -> OracleAnswer:
        i = self.id_index[sample_id]
        t = int(self.truth[i])
        if noise > 0 and self.rng.random() < noise:
            wrong = [k for k in range(len(self.names)) if k != t]
            t = int(self.rng.choice(wrong))
        category = "unknown" if t == UNKNOWN else self.names[t]
        return OracleAnswer(sample_id=sample_id, category=category, is_correction=is_correction)

    def label(self, sample_id: str) -> OracleAnswer:
        return self._answer(sample_id, self.noise, is_correction=False)

    def verify(self, sample_id: str, claimed: str) -> OracleAnswer:
        return self._answer(sample_id, self.verify_noise, is_correction=True)


def resolve_category(category: str, known: list[str]) -> tuple[int, str | None]:
    """Map an oracle answer onto (column index, pending-new-class name).

    Returns (UNKNOWN, None) for background, (idx, None) for a known name,
    and (UNKNOWN, name) when the class does not exist yet.
    """
    if category == "unknown":
        return UNKNOWN, None
    name = category[4:] if category.startswith("new:") else category
    if name in known:
        return known.index(name), None
    return UNKNOWN, name


def select_low_confidence(
    bank: ClassifierBank,
    store: FeatureStore,
    labels: LabelState,
    B: int,
    min_positives: int = 2,
) -> list[int]:
    """Up to B unannotated samples the current classifiers are unsure about.

    Primary pool: samples scored positive by at least ``min_positives``
    categories, most ambiguous first (positive count descending, top-two
    score gap ascending).  Shortfall is filled with samples whose best score
    sits nearest the decision boundaries.
    """
    if B == 0:
        return []
    s = bank.scores(store.features)
    unannotated = np.flatnonzero(~labels.annotated_mask())
    if unannotated.size == 0:
        return []
    su = s[unannotated]
    pos_counts = np.sum(su > 0, axis=1)
    if su.shape[1] >= 2:
        top2 = -np.partition(-su, 1, axis=1)[:, :2]
        gap = top2[:, 0] - top2[:, 1]
    else:
        gap = np.abs(su[:, 0])
    ambiguous = pos_counts >= min_positives
    amb_idx = np.flatnonzero(ambiguous)
    order = np.lexsort((unannotated[amb_idx], gap[amb_idx], -pos_counts[amb_idx]))
    chosen = [int(unannotated[amb_idx[k]]) for k in order[:B]]
    if len(chosen) < B:
        rest = np.flatnonzero(~ambiguous)
        near = np.abs(np.max(su[rest], axis=1)) if rest.size else np.empty(0)
        order = np.lexsort((unannotated[rest], near))
        chosen.extend(int(unannotated[rest[k]]) for k in order[: B - len(chosen)])
    return chosen


def verify_annotations(
    bank: ClassifierBank,
    store: FeatureStore,
    labels: LabelState,
    weights: WeightMatrix,
    oracle: Oracle,
    L: int,
) -> tuple[list[tuple[int, int, int]], dict[str, list[int]]]:
    """Re-check the L weakest-scoring annotations with the oracle.

    Returns the corrections applied as (sample, old category, new category)
    plus any new-class seeds surfaced by corrected answers.
    """
    corrections: list[tuple[int, int, int]] = []
    new_seeds: dict[str, list[int]] = {}
    if L == 0:
        return corrections, new_seeds
    rows = np.flatnonzero((labels.annotated_cat >= 0) & ~labels.verified)
    if rows.size == 0:
        return corrections, new_seeds
    cats = labels.annotated_cat[rows]
    own = np.sum(store.features[rows] * bank.W[cats], axis=1) + bank.b[cats]
    order = np.lexsort((rows, own))
    for k in order[:L]:
        i = int(rows[k])
        old = int(cats[k])
        try:
            answer = oracle.verify(store.sample_ids[i], store.category_names[old])
        except OracleUnavailable:
            log.warning("oracle unavailable; verification skipped")
            return corrections, new_seeds
        labels.verified[i] = True
        idx, pending = resolve_category(answer.category, store.category_names)
        if pending is not None:
            new_seeds.setdefault(pending, []).append(i)
            continue
        if idx != old:
            labels.annotate(i, idx)
            weights.v[i] = 1.0
            corrections.append((i, old, idx))
    return corrections, new_seeds


def annotate_batch(
    selected: list[int],
    oracle: Oracle,
    store: FeatureStore,
    labels: LabelState,
    weights: WeightMatrix,
) -> tuple[int, dict[str, list[int]]]:
    """Query the oracle on each selected sample and pin the answers.

    Returns the number of answers applied and seeds for classes the engine
    has not met yet (their rows stay untouched until the class exists).
    """
    if len(set(selected)) != len(selected):
        raise DomainError("duplicate sample in annotation batch")
    ann = labels.annotated_mask()
    if any(ann[i] for i in selected):
        raise DomainError("annotation batch overlaps the annotated set")
    answered = 0
    new_seeds: dict[str, list[int]] = {}
    for i in selected:
        try:
            answer = oracle.label(store.sample_ids[i])
        except OracleUnavailable:
            log.warning("oracle timed out; iteration continues with partial annotations")
            break
        answered += 1
        idx, pending = resolve_category(answer.category, store.category_names)
        if pending is not None:
            new_seeds.setdefault(pending, []).append(i)
            continue
        labels.annotate(i, idx)
        weights.pinned[i] = True
        weights.v[i] = 1.0
    return answered, new_seeds


def handle_new_classes(
    new_seeds: dict[str, list[int]],
    store: FeatureStore,
    labels: LabelState,
    weights: WeightMatrix,
    bank: ClassifierBank,
    oracle: Oracle,
    config: EngineConfig,
) -> list[str]:
    """Create classifiers for freshly met classes without touching old ones.

    For each seed, its K nearest unknown-pool neighbors are sent to the
    oracle to enrich the positives, then the new hyperplane is trained from
    the enriched class against everything currently assigned.
    """
    created: list[str] = []
    queue = dict(new_seeds)
    while queue:
        name, seeds = next(iter(queue.items()))
        queue.pop(name)
        j = _append_category(name, store, labels, weights, bank, config)
        created.append(name)
        for i in seeds:
            labels.annotate(i, j)
            weights.pinned[i] = True
            weights.v[i] = 1.0
        neighbors = _unknown_pool_neighbors(seeds, store, labels, config.K)
        if not neighbors and config.K > 0:
            log.warning("unknown pool empty; class %r starts from its seeds only", name)
        for i in neighbors:
            try:
                answer = oracle.label(store.sample_ids[i])
            except OracleUnavailable:
                break
            idx, pending = resolve_category(answer.category, store.category_names)
            if pending is not None:
                queue.setdefault(pending, []).append(i)
                continue
            labels.annotate(i, idx)
            weights.pinned[i] = True
            weights.v[i] = 1.0
        _train_new_hyperplane(j, store, labels, weights, bank, config)
    return created


def _append_category(name: str, store: FeatureStore, labels: LabelState,
                     weights: WeightMatrix, bank: ClassifierBank,
                     config: EngineConfig) -> int:
    store.category_names.append(name)
    if name not in store.truth_names:
        store.truth_names.append(name)
    labels.add_category()
    weights.add_category()
    bank.add_category(np.zeros(bank.d), 0.0, config.lam0)
    return len(store.category_names) - 1


def _unknown_pool_neighbors(seeds: list[int], store: FeatureStore,
                            labels: LabelState, K: int) -> list[int]:
    """Deduplicated K-nearest pool members per seed, by Euclidean distance."""
    pool = np.flatnonzero(labels.unknown_mask() & ~labels.annotated_mask())
    if pool.size == 0 or K == 0:
        return []
    picked: list[int] = []
    for seed in seeds:
        dists = np.linalg.norm(store.features[pool] - store.features[seed], axis=1)
        order = np.lexsort((pool, dists))
        picked.extend(int(pool[k]) for k in order[:K])
    return sorted(set(picked))


def _train_new_hyperplane(j: int, store: FeatureStore, labels: LabelState,
                          weights: WeightMatrix, bank: ClassifierBank,
                          config: EngineConfig) -> None:
    assigned = np.flatnonzero(labels.assigned_mask())
    yj = labels.y[assigned, j].astype(np.float64)
    vj = weights.v[assigned, j]
    if not (np.any((yj > 0) & (vj > 0)) and np.any((yj < 0) & (vj > 0))):
        log.warning("new class %d lacks a trainable positive/negative mix", j)
        return
    problem = BinaryProblem(indices=assigned, y=yj, v=vj, C=config.C, tol=config.solver_tol)
    w, b, _ = train_weighted_binary(problem, store)
    bank.W[j] = w
    bank.b[j] = b
