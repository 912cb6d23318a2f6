"""Soft-weight closed form: grid-search oracle, axioms, matrix update."""
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from activepace.core import (
    ClassifierBank,
    DomainError,
    EngineConfig,
    LabelState,
    WeightMatrix,
)
from activepace.selfpaced import (
    regularizer_value,
    spl_weight,
    spl_weights,
    update_weights,
)

from conftest import make_store

GRID = np.arange(0.0, 1.0 + 1e-4, 1e-4)


def grid_search_argmin(loss: float, C: float, lam: float) -> float:
    """Independent oracle: brute minimum of the scalar subproblem on [0,1]."""
    objective = C * GRID * loss + lam * (0.5 * GRID**2 - GRID)
    return float(GRID[int(np.argmin(objective))])


class TestGridSearchOracle:
    def test_thousand_random_cases(self):
        rng = np.random.default_rng(11)
        start = time.perf_counter()
        for _ in range(1000):
            loss = float(rng.uniform(0.0, 2.0))
            C = float(rng.uniform(0.1, 3.0))
            lam = float(rng.uniform(0.05, 2.0))
            assert abs(spl_weight(loss, C, lam) - grid_search_argmin(loss, C, lam)) <= 1e-3
        assert time.perf_counter() - start < 5.0

    def test_boundary_cases(self):
        # exactly at the cutoff C*loss == lam the weight drops to zero
        assert spl_weight(1.0, 1.0, 1.0) == 0.0
        assert spl_weight(0.0, 1.0, 0.2) == 1.0
        assert spl_weight(0.1, 1.0, 0.2) == pytest.approx(0.5)


# axiom suite: 10,000 generated cases split evenly across the three properties
common = dict(
    loss=st.floats(0.0, 4.0, allow_nan=False),
    C=st.floats(0.01, 5.0, allow_nan=False),
    lam=st.floats(0.01, 5.0, allow_nan=False),
)


@settings(max_examples=3400, deadline=None)
@given(**common, delta=st.floats(0.0, 2.0, allow_nan=False))
def test_axiom_nonincreasing_in_loss(loss, C, lam, delta):
    assert spl_weight(loss + delta, C, lam) <= spl_weight(loss, C, lam) + 1e-12


@settings(max_examples=3300, deadline=None)
@given(**common, delta=st.floats(0.0, 2.0, allow_nan=False))
def test_axiom_nondecreasing_in_pace(loss, C, lam, delta):
    assert spl_weight(loss, C, lam + delta) >= spl_weight(loss, C, lam) - 1e-12


@settings(max_examples=3300, deadline=None)
@given(**common)
def test_axiom_range(loss, C, lam):
    v = spl_weight(loss, C, lam)
    assert 0.0 <= v <= 1.0


class TestVectorizedForm:
    def test_matches_scalar(self):
        rng = np.random.default_rng(3)
        losses = rng.uniform(0, 2, size=(40, 3))
        lam = rng.uniform(0.1, 1.5, size=3)
        V = spl_weights(losses, 1.3, lam)
        for i in range(40):
            for j in range(3):
                assert V[i, j] == pytest.approx(spl_weight(losses[i, j], 1.3, lam[j]))


class TestRegularizer:
    def test_hand_computed(self):
        # lam * (1/2 * (1 + 0.25) - 1.5) with v = (1, 0.5)
        assert regularizer_value(np.array([1.0, 0.5]), 0.4) == pytest.approx(
            0.4 * (0.5 * 1.25 - 1.5))

    def test_rejects_nonpositive_pace(self):
        with pytest.raises(DomainError):
            regularizer_value(np.array([0.5]), 0.0)

    def test_minimized_at_one_per_entry(self):
        # per-entry the regularizer lam*(v^2/2 - v) is minimal at v=1
        best = regularizer_value(np.ones(3), 0.7)
        for v in (0.0, 0.3, 0.9):
            assert regularizer_value(np.full(3, v), 0.7) >= best


class TestUpdateWeights:
    def _setup(self, seed=0):
        store = make_store(n=15, d=3, m=3, seed=seed)
        bank = ClassifierBank.zeros(3, 3, 0.5)
        bank.W = np.random.default_rng(seed).normal(size=(3, 3))
        labels = LabelState.empty(15, 3)
        weights = WeightMatrix.zeros(15, 3)
        return store, bank, labels, weights

    def test_annotated_positive_pinned_at_one(self):
        store, bank, labels, weights = self._setup()
        labels.annotate(2, 1)
        weights.pinned[2] = True
        cfg = EngineConfig()
        out = update_weights(bank, store, labels, weights, cfg)
        assert out.v[2, 1] == 1.0
        assert out.pinned[2]

    def test_free_rows_follow_closed_form_at_best_assignment(self):
        store, bank, labels, weights = self._setup()
        labels.annotate(0, 0)
        weights.pinned[0] = True
        cfg = EngineConfig()
        out = update_weights(bank, store, labels, weights, cfg)
        s = bank.scores(store.features)
        from activepace.pseudolabel import candidate_labels
        y = candidate_labels(s[1:])
        losses = np.maximum(0.0, 1.0 - y * s[1:])
        expected = spl_weights(losses, cfg.C, bank.lam)
        np.testing.assert_allclose(out.v[1:], expected)

    def test_inconsistent_markers_raise(self):
        store, bank, labels, weights = self._setup()
        weights.pinned[4] = True        # marked but not annotated
        with pytest.raises(DomainError, match="curriculum markers"):
            update_weights(bank, store, labels, weights, EngineConfig())

    def test_weights_in_range(self):
        store, bank, labels, weights = self._setup(seed=9)
        labels.annotate(1, 0)
        weights.pinned[1] = True
        out = update_weights(bank, store, labels, weights, EngineConfig())
        assert np.all((out.v >= 0.0) & (out.v <= 1.0))
