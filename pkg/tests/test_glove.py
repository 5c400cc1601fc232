import os
from collections import defaultdict

import numpy as np
import pytest

from sensenorm.glove import (
    CoocTable, GloveConfig, build_cooc, glove_pair_objective, loss_weight,
    read_cooc, train_glove, write_cooc,
)
from sensenorm.kernels.glove import glove_epoch


def brute_force_cooc(sentences, window):
    """O(n * window) double-loop recount used as the oracle."""
    table = defaultdict(float)
    for sent in sentences:
        for i, focus in enumerate(sent):
            for j in range(max(0, i - window), min(len(sent), i + window + 1)):
                if j == i:
                    continue
                table[(focus, sent[j])] += 1.0 / abs(i - j)
    return dict(table)


def test_adjacent_pair():
    table = build_cooc([["a", "b"]], window=10)
    assert table.weight("a", "b") == 1.0
    assert table.weight("b", "a") == 1.0


def test_distance_two_weight():
    table = build_cooc([["a", "x", "b"]], window=10)
    assert table.weight("a", "b") == 0.5
    assert table.weight("b", "a") == 0.5
    assert table.weight("a", "x") == 1.0


def test_window_cutoff_and_sentence_boundary():
    table = build_cooc([["a", "x", "b"]], window=1)
    assert table.weight("a", "b") == 0.0
    table = build_cooc([["a"], ["b"]], window=10)
    assert table.nnz == 0


def test_cooc_matches_brute_force_oracle(rng):
    tokens = [f"t{i}" for i in range(30)]
    sentences = []
    remaining = 10_000
    while remaining > 0:
        length = int(rng.integers(1, 40))
        length = min(length, remaining)
        sentences.append([tokens[i] for i in rng.integers(0, 30, size=length)])
        remaining -= length
    table = build_cooc(sentences, window=5)
    oracle = brute_force_cooc(sentences, window=5)
    mapping = table.to_mapping()
    assert set(mapping) == set(oracle)
    for pair, weight in oracle.items():
        assert mapping[pair] == pytest.approx(weight, rel=1e-12)


def test_total_mass_formula(rng):
    sentences = [[f"t{i}" for i in rng.integers(0, 10, size=n)]
                 for n in (17, 3, 29, 1)]
    table = build_cooc(sentences, window=4)
    expected = 0.0
    for sent in sentences:
        for i in range(len(sent)):
            for k in range(1, min(4, len(sent) - 1 - i) + 1):
                expected += 2.0 / k
    assert table.total_mass() == pytest.approx(expected, rel=1e-12)


def test_empty_stream_errors():
    with pytest.raises(ValueError):
        build_cooc([], window=5)


def test_loss_weight_properties():
    x = np.linspace(0.0, 250.0, 500)
    f = loss_weight(x, x_max=100.0, alpha=0.75)
    assert np.all(np.diff(f) >= 0)
    assert np.all(f[x >= 100.0] == 1.0)
    assert f[0] == 0.0
    assert np.all(f[x > 0] > 0)


def test_pair_objective_zero_residual():
    wi = np.array([0.3, -0.2])
    wj = np.array([1.0, 0.5])
    bi = 0.25
    bj = np.log(4.0) - float(wi @ wj) - bi
    loss, gwi, gwj, gbi, gbj = glove_pair_objective(wi, wj, bi, bj, 4.0)
    assert loss == pytest.approx(0.0, abs=1e-15)
    np.testing.assert_allclose(gwi, 0.0, atol=1e-12)
    np.testing.assert_allclose(gwj, 0.0, atol=1e-12)
    assert gbi == pytest.approx(0.0, abs=1e-12)


def test_pair_objective_weight_cap():
    loss_at_cap, *_ = glove_pair_objective(np.zeros(2), np.zeros(2), 0.0, 0.0, 150.0)
    residual = -np.log(150.0)
    assert loss_at_cap == pytest.approx(residual ** 2, rel=1e-12)


def test_pair_objective_rejects_nonpositive_weight():
    with pytest.raises(ValueError):
        glove_pair_objective(np.zeros(2), np.zeros(2), 0.0, 0.0, 0.0)


def test_pair_gradients_match_finite_differences(rng):
    h = 1e-5
    worst = 0.0
    for _ in range(120):
        wi = rng.normal(0, 1, 10)
        wj = rng.normal(0, 1, 10)
        bi, bj = rng.normal(0, 1, 2)
        x = float(rng.uniform(0.1, 150.0))
        _, gwi, gwj, gbi, gbj = glove_pair_objective(wi, wj, bi, bj, x)
        fd_wi = np.array([
            (glove_pair_objective(wi + h * e, wj, bi, bj, x)[0]
             - glove_pair_objective(wi - h * e, wj, bi, bj, x)[0]) / (2 * h)
            for e in np.eye(10)
        ])
        fd_bi = (glove_pair_objective(wi, wj, bi + h, bj, x)[0]
                 - glove_pair_objective(wi, wj, bi - h, bj, x)[0]) / (2 * h)
        scale = max(np.linalg.norm(fd_wi), abs(fd_bi), 1e-12)
        worst = max(worst, np.linalg.norm(gwi - fd_wi) / scale,
                    abs(gbi - fd_bi) / scale)
    assert worst < 1e-5


def test_epoch_kernel_fixed_point():
    # a single entry with log x = 0 and all-zero parameters stays put
    dim = 4
    zeros = np.zeros((1, dim))
    w_focus, w_ctx = zeros.copy(), zeros.copy()
    b_focus, b_ctx = np.zeros(1), np.zeros(1)
    sq = np.ones((1, dim))
    loss = glove_epoch(w_focus, w_ctx, b_focus, b_ctx, sq.copy(), sq.copy(),
                       np.ones(1), np.ones(1), np.zeros(1, np.int64),
                       np.zeros(1, np.int64), np.zeros(1), np.ones(1),
                       np.zeros(1, np.int64), 0.05)
    assert loss == 0.0
    assert np.all(w_focus == 0.0)
    assert np.all(b_focus == 0.0)


def _toy_table(rng, n=50):
    sentences = [[f"s{i:02d}" for i in rng.integers(0, n, size=30)]
                 for _ in range(60)]
    return build_cooc(sentences, window=5)


def test_loss_decreases_monotonically(rng):
    table = _toy_table(rng)
    cfg = GloveConfig(dim=16, epochs=12, workers=1, seed=5)
    _, report = train_glove(table, cfg, with_report=True)
    losses = report.epoch_losses
    assert all(a > b for a, b in zip(losses, losses[1:]))


def test_train_deterministic(rng):
    table = _toy_table(rng)
    cfg = GloveConfig(dim=8, epochs=3, workers=1, seed=9)
    e1 = train_glove(table, cfg)
    e2 = train_glove(table, cfg)
    assert np.array_equal(e1.vectors, e2.vectors)


def test_fallback_path_is_bit_identical(rng):
    table = build_cooc([["a", "b", "c", "d"] * 5], window=3)
    cfg = GloveConfig(dim=6, epochs=3, workers=1, seed=2)
    fast = train_glove(table, cfg)
    os.environ["SENSENORM_DISABLE_NUMBA"] = "1"
    try:
        slow = train_glove(table, cfg)
    finally:
        del os.environ["SENSENORM_DISABLE_NUMBA"]
    assert np.array_equal(fast.vectors, slow.vectors)


def test_multiworker_runs(rng):
    table = _toy_table(rng)
    emb = train_glove(table, GloveConfig(dim=8, epochs=2, workers=2, seed=1))
    assert np.all(np.isfinite(emb.vectors))


def test_empty_table_errors():
    table = CoocTable(["a"], np.empty(0, np.int64), np.empty(0, np.int64),
                      np.empty(0))
    with pytest.raises(ValueError):
        train_glove(table, GloveConfig(dim=4))


def test_cooc_tsv_round_trip(rng, tmp_path):
    table = _toy_table(rng)
    path = tmp_path / "cooc.tsv"
    write_cooc(table, path)
    again = read_cooc(path)
    assert again.to_mapping() == table.to_mapping()
    path2 = tmp_path / "cooc2.tsv"
    write_cooc(again, path2)
    assert path.read_bytes() == path2.read_bytes()
