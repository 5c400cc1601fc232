import math
import os

import numpy as np
import pytest

from sensenorm.sgns import (
    SgnsConfig, _build_vocab, _keep_probs, _negative_cumulative, sgns_pair_objective,
    train_sgns,
)


def _fd_gradient(func, vec, h=1e-5):
    """Central finite differences of a scalar function of one vector."""
    grad = np.zeros_like(vec)
    for i in range(len(vec)):
        up = vec.copy()
        down = vec.copy()
        up[i] += h
        down[i] -= h
        grad[i] = (func(up) - func(down)) / (2 * h)
    return grad


def test_pair_objective_at_zero_dot():
    target = np.array([1.0, 0.0])
    context = np.array([0.0, 2.0])
    loss, grad_t, grad_c = sgns_pair_objective(target, context, +1)
    assert loss == pytest.approx(math.log(2), rel=1e-12)
    np.testing.assert_allclose(grad_t, -0.5 * context, atol=1e-12)
    np.testing.assert_allclose(grad_c, -0.5 * target, atol=1e-12)


def test_pair_objective_label_flip_negates_gradient_at_zero_dot():
    target = np.array([1.0, 0.0])
    context = np.array([0.0, 2.0])
    _, grad_pos, _ = sgns_pair_objective(target, context, +1)
    _, grad_neg, _ = sgns_pair_objective(target, context, -1)
    np.testing.assert_allclose(grad_pos, -grad_neg, atol=1e-12)


def test_pair_objective_rejects_bad_label():
    with pytest.raises(ValueError):
        sgns_pair_objective(np.ones(3), np.ones(3), 0)


def test_pair_gradients_match_finite_differences(rng):
    worst = 0.0
    for _ in range(120):
        target = rng.normal(0, 1.5, 10)
        context = rng.normal(0, 1.5, 10)
        label = 1 if rng.random() < 0.5 else -1
        _, grad_t, grad_c = sgns_pair_objective(target, context, label)
        fd_t = _fd_gradient(lambda v: sgns_pair_objective(v, context, label)[0], target)
        fd_c = _fd_gradient(lambda v: sgns_pair_objective(target, v, label)[0], context)
        scale = max(np.linalg.norm(fd_t), np.linalg.norm(fd_c), 1e-12)
        worst = max(worst,
                    np.linalg.norm(grad_t - fd_t) / scale,
                    np.linalg.norm(grad_c - fd_c) / scale)
    assert worst < 1e-5


def test_two_token_stream_trains():
    stream = [["a", "b"] * 50] * 20
    cfg = SgnsConfig(dim=8, window=2, negatives=2, epochs=5, seed=4,
                     subsample_threshold=0.0)
    emb, report = train_sgns(stream, cfg, with_report=True)
    assert set(emb.keys) == {"a", "b"}
    assert np.all(np.isfinite(emb.vectors))
    assert report.epoch_losses[-1] < report.epoch_losses[0]


def test_same_seed_same_matrix():
    stream = [["x", "y", "z", "y"] * 10] * 15
    cfg = SgnsConfig(dim=6, epochs=2, seed=12)
    e1 = train_sgns(stream, cfg)
    e2 = train_sgns(stream, cfg)
    assert e1.keys == e2.keys
    assert np.array_equal(e1.vectors, e2.vectors)


def test_min_count_controls_vocabulary():
    stream = [["a"] * 10 + ["b"] * 5 + ["c"] * 2 + ["d"]]
    emb = train_sgns(stream, SgnsConfig(dim=4, epochs=1, min_count=2, seed=0))
    assert set(emb.keys) == {"a", "b", "c"}
    emb = train_sgns(stream, SgnsConfig(dim=4, epochs=1, min_count=5, seed=0))
    assert set(emb.keys) == {"a", "b"}


def test_norms_nonzero_after_training():
    stream = [["a", "b", "c", "a", "b"] * 8] * 10
    emb = train_sgns(stream, SgnsConfig(dim=8, epochs=2, seed=7))
    norms = np.linalg.norm(emb.vectors, axis=1)
    assert np.all(np.isfinite(norms))
    assert np.all(norms > 0)


def test_too_small_stream_errors():
    with pytest.raises(ValueError):
        train_sgns([["only"]], SgnsConfig(dim=4))
    with pytest.raises(ValueError):
        train_sgns([["a", "b"]], SgnsConfig(dim=4, min_count=5))


def test_negative_sampling_table_matches_powered_frequencies():
    stream = [["a"] * 16 + ["b"] * 4 + ["c"] * 2]
    tokens, counts = _build_vocab(stream, min_count=1)
    cum = _negative_cumulative(tokens, counts)
    raw = np.array([counts[t] for t in tokens], dtype=float) ** 0.75
    expected = np.cumsum(raw / raw.sum())
    np.testing.assert_allclose(cum, expected, rtol=1e-12)
    assert cum[-1] == 1.0


def test_keep_probability_formula():
    stream = [["a"] * 99 + ["b"]]
    tokens, counts = _build_vocab(stream, min_count=1)
    t = 1e-2
    keep = _keep_probs(tokens, counts, t, total=100)
    # survival rule: (sqrt(f/tN) + 1) * tN / f, capped at 1
    for tok, prob in zip(tokens, keep):
        f = counts[tok]
        expected = min(1.0, (math.sqrt(f / (t * 100)) + 1) * (t * 100) / f)
        assert prob == pytest.approx(expected, rel=1e-12)
    assert keep[tokens.index("a")] < 1.0
    assert keep[tokens.index("b")] == 1.0


def test_fallback_path_is_bit_identical():
    stream = [["a", "b", "c", "d", "b", "a"] * 5] * 6
    cfg = SgnsConfig(dim=5, window=3, negatives=3, epochs=2, seed=21)
    fast = train_sgns(stream, cfg)
    os.environ["SENSENORM_DISABLE_NUMBA"] = "1"
    try:
        slow = train_sgns(stream, cfg)
    finally:
        del os.environ["SENSENORM_DISABLE_NUMBA"]
    assert np.array_equal(fast.vectors, slow.vectors)


def test_multiworker_run_produces_finite_vectors():
    stream = [["a", "b", "c", "d"] * 6] * 12
    emb = train_sgns(stream, SgnsConfig(dim=6, epochs=2, workers=2, seed=3))
    assert np.all(np.isfinite(emb.vectors))
    assert set(emb.keys) == {"a", "b", "c", "d"}


def test_config_validation():
    with pytest.raises(ValueError):
        SgnsConfig(dim=0)
    with pytest.raises(ValueError):
        SgnsConfig(initial_lr=0.0)
    with pytest.raises(ValueError):
        SgnsConfig(subsample_threshold=-1.0)
