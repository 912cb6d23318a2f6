"""Shared fixtures: small deterministic stores, engines, and oracle helpers."""
from __future__ import annotations

import numpy as np
import pytest

from activepace.core import EngineConfig, FeatureStore
from activepace.engine import Engine, generate_synthetic
from activepace.experiments import split_store
from activepace.query import SimulatedOracle


def make_store(n: int = 30, d: int = 4, m: int = 3, seed: int = 0,
               unknown: int = 0) -> FeatureStore:
    """Small labeled store with optional unknown-truth rows appended."""
    store = generate_synthetic(m=m, per_cluster=n // m, d=d, spread=0.4, seed=seed)
    if unknown:
        rng = np.random.default_rng(seed + 1)
        extra = rng.normal(size=(unknown, d)) * 4.0
        feats = np.vstack([store.features, extra])
        ids = store.sample_ids + [f"u{i}" for i in range(unknown)]
        truth = np.concatenate([store.truth, np.full(unknown, -1)])
        store = FeatureStore(features=feats, sample_ids=ids, truth=truth,
                             category_names=list(store.category_names),
                             truth_names=list(store.truth_names))
    return store


def make_engine(strategy: str = "ASPL", seed: int = 0, n0: int = 3,
                m: int = 4, per_cluster: int = 40, d: int = 8,
                spread: float = 0.6, config: EngineConfig | None = None,
                noise: float = 0.0, **engine_kw) -> Engine:
    """Fully seeded small engine over a synthetic split."""
    store = generate_synthetic(m=m, per_cluster=per_cluster, d=d,
                               spread=spread, seed=seed)
    train, eval_x, eval_t = split_store(store, 0.8, seed)
    config = config or EngineConfig(B=4, solver_tol=1e-4, seed=seed)
    oracle = SimulatedOracle.for_store(train, np.random.default_rng((seed, 7)),
                                       noise=noise)
    engine = Engine(store=train, config=config, oracle=oracle, strategy=strategy,
                    eval_features=eval_x, eval_truth=eval_t, **engine_kw)
    engine.seed_annotations(n0)
    return engine


@pytest.fixture(scope="session")
def short_run_engine() -> Engine:
    """One 10-iteration default-strategy run shared by read-only tests."""
    engine = make_engine(seed=3)
    engine.run(10)
    return engine
