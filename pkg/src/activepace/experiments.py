"""Experiment harness: splits, strategies, noise protocols, summary curves."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .core import DomainError, EngineConfig, FeatureStore, UNKNOWN
from .engine import Engine, RunLedger, STRATEGIES, generate_synthetic
from .query import SimulatedOracle

log = logging.getLogger(__name__)


@dataclass
class NoiseSpec:
    initial_noise: float = 0.0     # fraction of initial annotations flipped
    midrun_noise: float = 0.0      # fraction of answers flipped at t_inject
    t_inject: int = 0
    verification: bool = True


@dataclass
class SyntheticSpec:
    m: int = 10
    per_cluster: int = 200
    d: int = 16
    spread: float = 0.85
    seed: int = 0


@dataclass
class ExperimentSpec:
    dataset: Optional[str] = None            # path; None means synthetic
    synthetic: SyntheticSpec = field(default_factory=SyntheticSpec)
    split_fraction: float = 0.8
    n0: int = 3
    strategy: str = "ASPL"
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    repeats: int = 5
    # the benchmark preset differs from the bare engine defaults: a small
    # annotation batch keeps the annotation-fraction curves finely resolved
    # (pseudo-labeling carries most of the accuracy), and a looser solver
    # tolerance trades irrelevant dual precision for a faster run
    config: EngineConfig = field(default_factory=lambda: EngineConfig(B=4, solver_tol=1e-4))
    withhold_classes: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not (0.0 <= self.split_fraction <= 1.0):
            raise DomainError("split fraction must lie in [0,1]")
        if self.strategy not in STRATEGIES:
            raise DomainError(f"unrecognized strategy {self.strategy!r}")


def split_store(store: FeatureStore, fraction: float, seed: int) -> tuple[FeatureStore, np.ndarray, np.ndarray]:
    """Per-class split into an unlabeled training pool and a test set."""
    if store.truth is None:
        raise DomainError("splitting requires ground truth")
    rng = np.random.default_rng(seed)
    train_idx: list[int] = []
    test_idx: list[int] = []
    for k in sorted(set(int(x) for x in store.truth)):
        pool = np.flatnonzero(store.truth == k)
        pool = pool[np.argsort(pool)]
        perm = rng.permutation(pool)
        cut = int(round(fraction * pool.size))
        train_idx.extend(int(i) for i in perm[:cut])
        test_idx.extend(int(i) for i in perm[cut:])
    train_idx = np.array(sorted(train_idx))
    test_idx = np.array(sorted(test_idx))
    return store.subset(train_idx), store.features[test_idx].copy(), (
        store.truth[test_idx].copy())


class MidrunNoiseOracle:
    """Wraps an oracle so a single iteration's answers carry flip noise."""

    def __init__(self, inner: SimulatedOracle):
        self.inner = inner
        self.active = False
        self.noise = 0.0

    def label(self, sample_id):
        saved = self.inner.noise
        if self.active:
            self.inner.noise = self.noise
        try:
            return self.inner.label(sample_id)
        finally:
            self.inner.noise = saved

    def verify(self, sample_id, claimed):
        return self.inner.verify(sample_id, claimed)


def build_engine(spec: ExperimentSpec, seed: int, strategy: Optional[str] = None,
                 store: Optional[FeatureStore] = None) -> Engine:
    """Assemble a ready-to-run engine for one (seed, strategy) cell."""
    strategy = strategy or spec.strategy
    if store is None:
        store = make_store(spec)
    train, eval_x, eval_t = split_store(store, spec.split_fraction, seed)
    if spec.withhold_classes:
        train.category_names = [c for c in train.category_names
                                if c not in spec.withhold_classes]
    config = replace(spec.config, seed=seed)
    oracle_rng = np.random.default_rng((seed, 0xA11CE))
    oracle = SimulatedOracle.for_store(train, oracle_rng)
    engine = Engine(
        store=train,
        config=config,
        oracle=oracle,
        strategy=strategy,
        eval_features=eval_x,
        eval_truth=eval_t,
        verification=spec.noise.verification,
    )
    if strategy == "ALL":
        engine.annotate_everything()
    else:
        engine.seed_annotations(spec.n0, flip_fraction=spec.noise.initial_noise)
    return engine


def make_store(spec: ExperimentSpec) -> FeatureStore:
    if spec.dataset is not None:
        from .datasets import load_dataset
        return load_dataset(spec.dataset)
    s = spec.synthetic
    return generate_synthetic(s.m, s.per_cluster, s.d, s.spread, s.seed)


def run_single(spec: ExperimentSpec, seed: int, strategy: Optional[str] = None,
               iterations: Optional[int] = None) -> RunLedger:
    engine = build_engine(spec, seed, strategy)
    strategy = strategy or spec.strategy
    noisy = spec.noise.midrun_noise > 0 and strategy != "ALL"
    if noisy:
        wrapper = MidrunNoiseOracle(engine.oracle)
        wrapper.noise = spec.noise.midrun_noise
        engine.oracle = wrapper
    n_iter = engine.config.max_iters if iterations is None else iterations
    for k in range(n_iter):
        if noisy:
            wrapper.active = (engine.bank.t + 1) == spec.noise.t_inject
        engine.run_iteration()
        if strategy not in ("ASPL_no_AL", "ALL") and not np.any(~engine.labels.annotated_mask()):
            break
    return engine.ledger


@dataclass
class ExperimentResult:
    """Per-strategy ledgers keyed by seed, plus averaged summary curves."""

    spec: ExperimentSpec
    ledgers: dict[str, dict[int, RunLedger]]
    curves: dict[str, dict[str, list[float]]]

    def strategy_curve(self, strategy: str, name: str) -> list[float]:
        return self.curves[strategy][name]


def summarize(ledgers: dict[int, RunLedger], pool_size: int) -> dict[str, list[float]]:
    """Average accuracy / annotation-fraction / demand series over seeds."""
    length = min(len(l.records) for l in ledgers.values())
    acc = np.mean([[l.records[k].rank1 for k in range(length)] for l in ledgers.values()], axis=0)
    frac = np.mean([[l.records[k].annotated_total / pool_size for k in range(length)]
                    for l in ledgers.values()], axis=0)
    demand = np.mean([[l.records[k].answered for k in range(length)] for l in ledgers.values()], axis=0)
    return {
        "iteration": [float(k + 1) for k in range(length)],
        "accuracy": [float(x) for x in acc],
        "annotation_fraction": [float(x) for x in frac],
        "annotation_demand": [float(x) for x in demand],
    }


def run_experiment(spec: ExperimentSpec, strategies: Optional[list[str]] = None,
                   base_seed: int = 0) -> ExperimentResult:
    """Run `repeats` paired-seed runs per strategy and average the curves."""
    strategies = strategies or [spec.strategy]
    pool_size = _train_pool_size(spec)
    ledgers: dict[str, dict[int, RunLedger]] = {}
    for strategy in strategies:
        per_seed: dict[int, RunLedger] = {}
        iterations = 2 if strategy == "ALL" else None
        for r in range(spec.repeats):
            seed = base_seed + r
            per_seed[seed] = run_single(spec, seed, strategy, iterations=iterations)
        ledgers[strategy] = per_seed
    curves = {s: summarize(l, pool_size) for s, l in ledgers.items()}
    return ExperimentResult(spec=spec, ledgers=ledgers, curves=curves)


def _train_pool_size(spec: ExperimentSpec) -> int:
    store = make_store(spec)
    train, _, _ = split_store(store, spec.split_fraction, 0)
    return train.n


def annotation_fraction_to_reach(ledger: RunLedger, target: float, pool_size: int) -> Optional[float]:
    """Smallest annotation fraction at which accuracy first reaches target."""
    for r in ledger.records:
        if r.rank1 >= target:
            return r.annotated_total / pool_size
    return None
