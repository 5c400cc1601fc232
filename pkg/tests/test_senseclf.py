import math

import numpy as np
import pytest

from sensenorm.corpus import SenseInventory, parse_corpus
from sensenorm.embeddings import EmbeddingMatrix
from sensenorm.senseclf import (
    ContextStore, LogRegModel, MissingSenseError, NORM_FROM_MEAN,
    PLAIN_NORM, WicPair, WsdInstance, cosine, evaluate_wic, evaluate_wsd,
    mean_norm_feature, read_gold_keys, read_wic_pairs, resolve_sense,
    train_logreg, wic_build_training, wic_features, write_ctxstore, read_ctxstore,
    wsd_build_training, wsd_features, wsd_instances_from_corpus, wsd_predict,
)


def _emb(mapping):
    return EmbeddingMatrix.from_dict({k: np.asarray(v, float) for k, v in mapping.items()})


MODEL_EMB = _emb({
    "s.a": [1.0, 0.0, 0.0],
    "s.b": [0.0, 1.0, 0.0],
    "s.c": [0.0, 0.0, 1.0],
})
NORM_EMB = _emb({
    "s.a": [2.0, 0.0],
    "s.b": [1.0, 0.0],
})
INV = SenseInventory({("w", "NOUN"): ["s.a", "s.b", "s.c"]})


# ---------------------------------------------------------------------------
# feature extraction


def test_cosine_parallel_and_orthogonal():
    t = np.array([3.0, 0.0, 0.0])
    feats, _ = wsd_features(t, "s.a", MODEL_EMB, None, use_norm=False)
    assert feats[0] == pytest.approx(1.0)
    feats, _ = wsd_features(t, "s.b", MODEL_EMB, None, use_norm=False)
    assert feats[0] == pytest.approx(0.0)


def test_wsd_feature_fixture_values():
    emb = _emb({"s": [2.0, 0.0, 0.0]})
    t = np.array([1.0, 2.0, 2.0])
    feats, imputed = wsd_features(t, "s", emb, emb, use_norm=True)
    assert feats[0] == pytest.approx(1.0 / 3.0, rel=1e-12)
    assert feats[1] == pytest.approx(4.0, rel=1e-12)
    assert not imputed


def test_norm_feature_imputed_for_missing_sense():
    t = np.array([0.0, 0.0, 1.0])
    feats, imputed = wsd_features(t, "s.c", MODEL_EMB, NORM_EMB, use_norm=True)
    assert imputed
    assert feats[1] == pytest.approx(mean_norm_feature(NORM_EMB))
    assert mean_norm_feature(NORM_EMB) == pytest.approx((4.0 + 1.0) / 2)


def test_plain_norm_variant():
    t = np.array([1.0, 0.0, 0.0])
    feats, _ = wsd_features(t, "s.a", MODEL_EMB, NORM_EMB, use_norm=True,
                            norm_kind=PLAIN_NORM)
    assert feats[1] == pytest.approx(2.0)


def test_missing_model_sense_raises():
    with pytest.raises(MissingSenseError):
        wsd_features(np.ones(3), "nope", MODEL_EMB, None, use_norm=False)


# ---------------------------------------------------------------------------
# training-set construction


def _store(mapping):
    entries = {k: np.asarray(v, float) for k, v in mapping.items()}
    dim = len(next(iter(entries.values())))
    return ContextStore(entries=entries, dim=dim)


def test_build_training_row_structure():
    inst = WsdInstance("i1", "w", "NOUN", ("s.a", "s.b", "s.c"), gold="s.b")
    ctx = _store({"i1": [1.0, 1.0, 0.0]})
    ts = wsd_build_training([inst], ctx, MODEL_EMB, NORM_EMB, use_norm=True)
    assert ts.X.shape == (3, 2)
    assert list(ts.y) == [0.0, 1.0, 0.0]


def test_build_training_monosemous():
    inst = WsdInstance("i1", "w", "NOUN", ("s.a",), gold="s.a")
    ctx = _store({"i1": [1.0, 0.0, 0.0]})
    ts = wsd_build_training([inst], ctx, MODEL_EMB, None, use_norm=False)
    assert ts.X.shape == (1, 1)
    assert list(ts.y) == [1.0]


def test_build_training_skips_missing_context():
    insts = [
        WsdInstance("i1", "w", "NOUN", ("s.a", "s.b"), gold="s.a"),
        WsdInstance("i2", "w", "NOUN", ("s.a", "s.b"), gold="s.b"),
    ]
    ctx = _store({"i1": [1.0, 0.0, 0.0]})
    ts = wsd_build_training(insts, ctx, MODEL_EMB, None, use_norm=False)
    assert ts.n_skipped == 1
    assert ts.X.shape == (2, 1)


def test_build_training_row_count_matches_counting_oracle(rng):
    # 100 instances with varying candidate counts
    senses = [f"s{i:02d}" for i in range(30)]
    emb = _emb({s: rng.normal(0, 1, 4) for s in senses})
    instances = []
    ctx_entries = {}
    expected_rows = 0
    for i in range(100):
        k = int(rng.integers(1, 6))
        cands = sorted(rng.choice(senses, size=k, replace=False))
        gold = cands[int(rng.integers(0, k))]
        instances.append(WsdInstance(f"i{i}", "w", "NOUN", tuple(cands), gold=gold))
        ctx_entries[f"i{i}"] = rng.normal(0, 1, 4)
        expected_rows += k
    ts = wsd_build_training(instances, _store(ctx_entries), emb, emb, use_norm=True)
    assert ts.X.shape[0] == expected_rows
    assert int(ts.y.sum()) == 100


def test_instances_from_corpus():
    text = (
        "bank\tbank\tNOUN\ts.a\ti1\n"
        "bank\tbank\tNOUN\ts.b\ti2\n"
        "plain\tplain\tNOUN\t-\n"
    )
    corpus = parse_corpus(text)
    inv = SenseInventory({("bank", "NOUN"): ["s.a", "s.b"]})
    instances = wsd_instances_from_corpus(corpus, inv)
    assert [i.instance_id for i in instances] == ["i1", "i2"]
    assert instances[0].candidates == ("s.a", "s.b")
    assert instances[0].gold == "s.a"


# ---------------------------------------------------------------------------
# prediction


def _trained_model(use_norm):
    names = ["cos_ctx_sense", "sense_norm"][: 2 if use_norm else 1]
    weights = np.array([3.0, 0.5][: len(names)])
    return LogRegModel(weights=weights, bias=-1.0, feature_names=names,
                       mean=np.zeros(len(names)), scale=np.ones(len(names)))


def test_predict_single_candidate():
    inst = WsdInstance("i1", "w", "NOUN", ("s.a",))
    ctx = _store({"i1": [0.0, 1.0, 0.0]})
    sense, backed_off = wsd_predict(inst, _trained_model(False), ctx, MODEL_EMB,
                                    None, use_norm=False)
    assert sense == "s.a"
    assert not backed_off


def test_predict_dominating_candidate_wins():
    inst = WsdInstance("i1", "w", "NOUN", ("s.a", "s.b"))
    ctx = _store({"i1": [1.0, 0.2, 0.0]})
    sense, _ = wsd_predict(inst, _trained_model(True), ctx, MODEL_EMB, NORM_EMB,
                           use_norm=True)
    assert sense == "s.a"  # higher cosine and higher norm


def test_predict_matches_probability_enumeration(rng):
    model = _trained_model(True)
    impute = mean_norm_feature(NORM_EMB)
    for _ in range(30):
        t = rng.normal(0, 1, 3)
        inst = WsdInstance("i1", "w", "NOUN", ("s.a", "s.b", "s.c"))
        ctx = _store({"i1": t})
        got, _ = wsd_predict(inst, model, ctx, MODEL_EMB, NORM_EMB, True,
                             impute_value=impute)
        # brute-force sigma(w . x + b) per candidate
        best, best_p = None, -1.0
        for sense in inst.candidates:
            feats, _ = wsd_features(t, sense, MODEL_EMB, NORM_EMB, True,
                                    impute_value=impute)
            p = 1.0 / (1.0 + math.exp(-(model.weights @ feats + model.bias)))
            if p > best_p or (p == best_p and sense < best):
                best, best_p = sense, p
        assert got == best


def test_predict_backoff_when_unscoreable():
    inst = WsdInstance("i1", "w", "NOUN", ("zz", "aa"))
    ctx = _store({"i1": [1.0, 0.0, 0.0]})
    sense, backed_off = wsd_predict(inst, _trained_model(False), ctx, MODEL_EMB,
                                    None, use_norm=False)
    assert backed_off
    assert sense == "aa"  # lexicographically first


def test_zero_norm_weight_reproduces_baseline_predictions(rng):
    """With the norm feature's weight forced to 0, decisions must equal the
    baseline (cosine-only) model's decisions exactly."""
    base = _trained_model(False)
    augmented = LogRegModel(
        weights=np.array([base.weights[0], 0.0]), bias=base.bias,
        feature_names=["cos_ctx_sense", "sense_norm"],
        mean=np.zeros(2), scale=np.ones(2))
    impute = mean_norm_feature(NORM_EMB)
    for i in range(40):
        t = rng.normal(0, 1, 3)
        inst = WsdInstance(f"i{i}", "w", "NOUN", ("s.a", "s.b", "s.c"))
        ctx = _store({f"i{i}": t})
        with_norm, _ = wsd_predict(inst, augmented, ctx, MODEL_EMB, NORM_EMB,
                                   use_norm=True, impute_value=impute)
        without, _ = wsd_predict(inst, base, ctx, MODEL_EMB, None, use_norm=False)
        assert with_norm == without


# ---------------------------------------------------------------------------
# WiC


def _pair(gold=None):
    return WicPair(
        pair_id="wic.0", lemma="w", pos="NOUN",
        tokens_1=("the", "w"), tokens_2=("a", "w"),
        index_1=1, index_2=1, gold=gold)


def test_wic_all_equal_vectors():
    emb = _emb({"s.a": [1.0, 0.0, 0.0]})
    inv = SenseInventory({("w", "NOUN"): ["s.a"]})
    ctx = _store({"wic.0.a": [1.0, 0.0, 0.0], "wic.0.b": [1.0, 0.0, 0.0]})
    feats, _ = wic_features(_pair(), ctx, emb, None, inv, use_norm=False)
    np.testing.assert_allclose(feats, [1.0, 1.0, 1.0, 1.0])


def test_wic_orthogonal_contexts_same_sense():
    emb = _emb({"s.a": [1.0, 1.0, 0.0]})
    inv = SenseInventory({("w", "NOUN"): ["s.a"]})
    ctx = _store({"wic.0.a": [1.0, 0.0, 0.0], "wic.0.b": [0.0, 1.0, 0.0]})
    feats, _ = wic_features(_pair(), ctx, emb, None, inv, use_norm=False)
    assert feats[0] == pytest.approx(1.0)  # s1 == s2
    assert feats[1] == pytest.approx(0.0)  # t1 . t2 = 0


def test_wic_fixture_cosines():
    emb = _emb({"s.a": [2.0, 0.0, 0.0], "s.b": [0.0, 3.0, 0.0]})
    inv = SenseInventory({("w", "NOUN"): ["s.a", "s.b"]})
    t1 = [1.0, 2.0, 2.0]
    t2 = [0.0, 1.0, 0.0]
    ctx = _store({"wic.0.a": t1, "wic.0.b": t2})
    feats, _ = wic_features(_pair(), ctx, emb, None, inv, use_norm=False)
    # nearest senses: s1 = argmax cos(t1, .) = s.b (2/3 vs 1/3); s2 = s.b
    assert feats[0] == pytest.approx(1.0)
    assert feats[1] == pytest.approx(cosine(np.array(t1), np.array(t2)))
    assert feats[2] == pytest.approx(2.0 / 3.0)
    assert feats[3] == pytest.approx(1.0)


def test_wic_fifth_feature_sources():
    emb = _emb({"s.a": [1.0, 0.0], "s.b": [0.0, 1.0]})
    norm_emb = _emb({"s.a": [3.0, 0.0], "s.b": [1.0, 0.0]})
    inv = SenseInventory({("w", "NOUN"): ["s.a", "s.b"]})
    ctx = _store({"wic.0.a": [1.0, 0.1], "wic.0.b": [0.1, 1.0]})
    first, _ = wic_features(_pair(), ctx, emb, norm_emb, inv, use_norm=True)
    assert first[4] == pytest.approx(9.0)  # sense of context 1 is s.a
    mean, _ = wic_features(_pair(), ctx, emb, norm_emb, inv, use_norm=True,
                           norm_source=NORM_FROM_MEAN)
    assert mean[4] == pytest.approx((9.0 + 1.0) / 2)


def test_resolve_sense_skips_missing_vectors():
    emb = _emb({"s.b": [1.0, 0.0]})
    assert resolve_sense(np.array([1.0, 0.0]), ["s.a", "s.b"], emb) == "s.b"
    with pytest.raises(MissingSenseError):
        resolve_sense(np.array([1.0, 0.0]), ["s.x"], emb)


def test_wic_build_training_counts(rng):
    emb = _emb({"s.a": [1.0, 0.0], "s.b": [0.0, 1.0]})
    inv = SenseInventory({("w", "NOUN"): ["s.a", "s.b"]})
    pairs = []
    entries = {}
    for i in range(10):
        pair = WicPair(f"wic.{i}", "w", "NOUN", ("w",), ("w",), 0, 0,
                       gold=bool(i % 2))
        pairs.append(pair)
        if i != 3:  # one pair misses a context vector
            entries[pair.instance_id_1] = rng.normal(0, 1, 2)
            entries[pair.instance_id_2] = rng.normal(0, 1, 2)
    ts = wic_build_training(pairs, _store(entries), emb, None, inv, use_norm=False)
    assert ts.X.shape == (9, 4)
    assert ts.n_skipped == 1


# ---------------------------------------------------------------------------
# evaluation


def test_evaluate_wsd_all_correct():
    predictions = {"ds1.i1": "a", "ds1.i2": "b", "ds2.i1": "c"}
    gold = {k: {v} for k, v in predictions.items()}
    scores = evaluate_wsd(predictions, gold)
    assert scores["ALL"].f1 == 1.0
    assert scores["ALL"].precision == scores["ALL"].recall == scores["ALL"].accuracy
    assert set(scores) == {"ds1", "ds2", "ALL"}
    assert scores["ds1"].n_instances == 2


def test_evaluate_wsd_multi_gold():
    scores = evaluate_wsd({"d.i1": "a"}, {"d.i1": {"a", "b"}})
    assert scores["ALL"].f1 == 1.0
    scores = evaluate_wsd({"d.i1": "c"}, {"d.i1": {"a", "b"}})
    assert scores["ALL"].f1 == 0.0


def test_evaluate_wsd_misaligned_ids_error():
    with pytest.raises(ValueError):
        evaluate_wsd({"d.i1": "a"}, {"d.i2": {"a"}})
    with pytest.raises(ValueError):
        evaluate_wsd({"d.i1": "a", "d.i2": "a"}, {"d.i1": {"a"}})


def test_evaluate_wic():
    predictions = {"p1": True, "p2": False, "p3": True}
    gold = {"p1": True, "p2": True, "p3": True}
    scores = evaluate_wic(predictions, gold)
    assert scores.accuracy == pytest.approx(2.0 / 3.0)
    with pytest.raises(ValueError):
        evaluate_wic({"p1": True}, gold)


# ---------------------------------------------------------------------------
# file formats


def test_ctxstore_round_trip(tmp_path, rng):
    entries = {f"d0.s0.t{i}": rng.normal(0, 1, 5) for i in range(7)}
    store = ContextStore(entries=entries, dim=5)
    path = tmp_path / "store.ctx"
    write_ctxstore(store, path, comments=["model: test", "layers: last4"])
    again = read_ctxstore(path)
    assert len(again) == 7
    for key, vec in entries.items():
        np.testing.assert_array_equal(again[key], vec)
    path2 = tmp_path / "store2.ctx"
    write_ctxstore(again, path2, comments=["model: test", "layers: last4"])
    assert path.read_bytes() == path2.read_bytes()


def test_ctxstore_bad_header(tmp_path):
    path = tmp_path / "bad.ctx"
    path.write_text("NOTCTX 1 0 5\n")
    with pytest.raises(Exception):
        read_ctxstore(path)


def test_gold_keys_multi_sense(tmp_path):
    path = tmp_path / "gold.key"
    path.write_text("d0.i1 a%1 a%2\nd0.i2 b%1\n")
    gold = read_gold_keys(path)
    assert gold == {"d0.i1": {"a%1", "a%2"}, "d0.i2": {"b%1"}}


def test_read_wic_pairs(tmp_path):
    tsv = tmp_path / "wic.tsv"
    tsv.write_text(
        "bank\tN\t1-2\tthe bank rose\twe sat by the bank\n"
        "run\tV\t0-3\truns fast today\ti will run home\n")
    gold = tmp_path / "wic.gold"
    gold.write_text("T\nF\n")
    pairs = read_wic_pairs(tsv, gold)
    assert len(pairs) == 2
    assert pairs[0].lemma == "bank"
    assert pairs[0].pos == "NOUN"
    assert pairs[0].index_1 == 1 and pairs[0].index_2 == 2
    assert pairs[0].gold is True
    assert pairs[1].pos == "VERB"
    assert pairs[1].gold is False
    assert pairs[0].instance_id_1 == "wic.0.a"


def test_read_wic_pairs_gold_length_mismatch(tmp_path):
    tsv = tmp_path / "wic.tsv"
    tsv.write_text("bank\tN\t0-0\tbank\tbank\n")
    gold = tmp_path / "wic.gold"
    gold.write_text("T\nF\n")
    with pytest.raises(Exception):
        read_wic_pairs(tsv, gold)


# ---------------------------------------------------------------------------
# end-to-end: the norm feature helps on constructed data


def test_norm_feature_improves_separable_fixture(rng):
    """Fixture where cosine alone is ambiguous but frequency (norm) decides."""
    n = 400
    cos_feats = rng.normal(0.0, 0.05, n)
    norms = np.where(rng.random(n) < 0.5, 4.0, 1.0) + rng.normal(0, 0.05, n)
    y = (norms > 2.5).astype(float)
    X_base = cos_feats[:, None]
    X_aug = np.column_stack([cos_feats, norms])
    base = train_logreg(X_base, y)
    aug = train_logreg(X_aug, y)
    base_acc = np.mean((base.predict_proba(X_base) >= 0.5) == y.astype(bool))
    aug_acc = np.mean((aug.predict_proba(X_aug) >= 0.5) == y.astype(bool))
    assert aug_acc > base_acc
    assert aug_acc == 1.0
