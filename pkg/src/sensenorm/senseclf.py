"""Binary logistic regression plus the WSD and WiC feature harnesses.

Features combine cosine similarities between contextual vectors and sense
vectors from a high-coverage "model" embedding with the (squared) norm of a
corpus-trained "norm" embedding.  The classifier is a hand-rolled damped
Newton solver for L2-regularized logistic loss so that training is exactly
deterministic and its gradient can be checked against finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import SensenormError
from .corpus import Corpus, SenseInventory, normalize_pos
from .embeddings import EmbeddingMatrix, format_floats


class MissingSenseError(SensenormError):
    """No candidate sense of the target is covered by the model embedding."""


# ---------------------------------------------------------------------------
# logistic regression


@dataclass(frozen=True)
class LogRegConfig:
    c: float = 1.0
    tol: float = 1e-6
    max_iter: int = 1000
    standardize: bool = True

    def __post_init__(self):
        if self.c <= 0 or self.tol <= 0 or self.max_iter < 1:
            raise ValueError("invalid logistic regression configuration")


@dataclass
class LogRegModel:
    weights: np.ndarray
    bias: float
    feature_names: list[str]
    mean: np.ndarray
    scale: np.ndarray

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (np.atleast_2d(np.asarray(X, dtype=np.float64)) - self.mean) / self.scale

    def decision(self, X: np.ndarray) -> np.ndarray:
        return self.transform(X) @ self.weights + self.bias

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return 1.0 / (1.0 + np.exp(-np.clip(self.decision(X), -500, 500)))

    def to_json_dict(self):
        return {
            "weights": [float(w) for w in self.weights],
            "bias": self.bias,
            "feature_names": self.feature_names,
            "mean": [float(m) for m in self.mean],
            "scale": [float(s) for s in self.scale],
        }

    @classmethod
    def from_json_dict(cls, d):
        return cls(
            weights=np.asarray(d["weights"], dtype=np.float64),
            bias=float(d["bias"]),
            feature_names=list(d["feature_names"]),
            mean=np.asarray(d["mean"], dtype=np.float64),
            scale=np.asarray(d["scale"], dtype=np.float64),
        )


def logreg_objective(weights, bias, X, y, c: float = 1.0):
    """Mean log-loss plus ||w||^2 / (2 c n); returns (loss, grad_w, grad_b).

    ``y`` holds 0/1 labels; the bias is not regularized.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = X.shape[0]
    sign = 2.0 * y - 1.0
    margins = sign * (X @ weights + bias)
    # log(1 + exp(-m)) computed stably on both sides
    loss = float(np.mean(np.logaddexp(0.0, -margins)))
    loss += float(weights @ weights) / (2.0 * c * n)
    coeff = -sign / (1.0 + np.exp(np.clip(margins, -500, 500)))
    grad_w = X.T @ coeff / n + weights / (c * n)
    grad_b = float(coeff.mean())
    return loss, grad_w, grad_b


def train_logreg(X, y, cfg: LogRegConfig = LogRegConfig(),
                 feature_names: list[str] | None = None) -> LogRegModel:
    """Damped Newton fit, run to gradient norm <= cfg.tol or cfg.max_iter."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64)
    if X.shape[0] != y.shape[0]:
        raise ValueError("X and y must align")
    classes = np.unique(y)
    if not np.all(np.isin(classes, (0.0, 1.0))):
        raise ValueError("labels must be 0 or 1")
    if len(classes) < 2:
        raise ValueError("need at least one example of each class")

    n, p = X.shape
    if feature_names is None:
        feature_names = [f"f{i}" for i in range(p)]
    if cfg.standardize:
        mean = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale == 0.0] = 1.0
    else:
        mean = np.zeros(p)
        scale = np.ones(p)
    Xs = (X - mean) / scale

    w = np.zeros(p)
    b = 0.0
    reg = 1.0 / (cfg.c * n)
    loss, grad_w, grad_b = logreg_objective(w, b, Xs, y, cfg.c)
    for _ in range(cfg.max_iter):
        grad = np.append(grad_w, grad_b)
        if np.linalg.norm(grad) <= cfg.tol:
            break
        z = Xs @ w + b
        prob = 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))
        d = prob * (1.0 - prob)
        Xb = np.hstack([Xs, np.ones((n, 1))])
        hess = (Xb.T * d) @ Xb / n
        hess[:p, :p] += reg * np.eye(p)
        hess += 1e-12 * np.eye(p + 1)
        step = np.linalg.solve(hess, grad)
        # backtracking keeps Newton safe far from the optimum
        t = 1.0
        for _ in range(60):
            w_new = w - t * step[:p]
            b_new = b - t * step[p]
            new_loss, new_gw, new_gb = logreg_objective(w_new, b_new, Xs, y, cfg.c)
            if new_loss <= loss - 1e-4 * t * float(grad @ step):
                break
            t *= 0.5
        w, b, loss, grad_w, grad_b = w_new, b_new, new_loss, new_gw, new_gb
    return LogRegModel(weights=w, bias=float(b), feature_names=list(feature_names),
                       mean=mean, scale=scale)


# ---------------------------------------------------------------------------
# contextual vector store


@dataclass
class ContextStore:
    entries: dict[str, np.ndarray]
    dim: int

    def __post_init__(self):
        for instance_id, vec in self.entries.items():
            if vec.shape != (self.dim,):
                raise ValueError(
                    f"vector for {instance_id!r} has shape {vec.shape}, "
                    f"expected ({self.dim},)")
            if not np.all(np.isfinite(vec)):
                raise ValueError(f"vector for {instance_id!r} is not finite")

    def __contains__(self, instance_id):
        return instance_id in self.entries

    def __getitem__(self, instance_id) -> np.ndarray:
        return self.entries[instance_id]

    def get(self, instance_id):
        return self.entries.get(instance_id)

    def __len__(self):
        return len(self.entries)


def write_ctxstore(store: ContextStore, path, comments: list[str] | None = None):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"CTXSTORE 1 {len(store)} {store.dim}\n")
        for comment in comments or []:
            fh.write(f"# {comment}\n")
        for instance_id, vec in store.entries.items():
            fh.write(f"{instance_id} {format_floats(vec)}\n")


def read_ctxstore(path) -> ContextStore:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 4 or header[0] != "CTXSTORE" or header[1] != "1":
            raise SensenormError("expected header 'CTXSTORE 1 <count> <dim>'")
        count, dim = int(header[2]), int(header[3])
        entries = {}
        for line in fh:
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != dim + 1:
                raise SensenormError(
                    f"context row for {parts[0]!r} has {len(parts) - 1} values, "
                    f"expected {dim}")
            entries[parts[0]] = np.array([float(x) for x in parts[1:]])
    if len(entries) != count:
        raise SensenormError(f"expected {count} entries, found {len(entries)}")
    return ContextStore(entries=entries, dim=dim)


# ---------------------------------------------------------------------------
# instances


@dataclass(frozen=True)
class WsdInstance:
    instance_id: str
    lemma: str
    pos: str
    candidates: tuple[str, ...]
    gold: str | None = None

    def __post_init__(self):
        if not self.candidates:
            raise ValueError("candidates must be non-empty")
        if self.gold is not None and self.gold not in self.candidates:
            raise ValueError("gold sense must be among the candidates")


@dataclass(frozen=True)
class WicPair:
    pair_id: str
    lemma: str
    pos: str
    tokens_1: tuple[str, ...]
    tokens_2: tuple[str, ...]
    index_1: int
    index_2: int
    gold: bool | None = None

    def __post_init__(self):
        if not (0 <= self.index_1 < len(self.tokens_1)):
            raise ValueError("index_1 out of range")
        if not (0 <= self.index_2 < len(self.tokens_2)):
            raise ValueError("index_2 out of range")

    @property
    def instance_id_1(self) -> str:
        return f"{self.pair_id}.a"

    @property
    def instance_id_2(self) -> str:
        return f"{self.pair_id}.b"


# ---------------------------------------------------------------------------
# features

SQUARED_NORM = "squared"
PLAIN_NORM = "plain"


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(u @ v) / (nu * nv)


def norm_feature_value(norm_emb: EmbeddingMatrix, sense: str,
                       kind: str = SQUARED_NORM,
                       impute_value: float | None = None) -> tuple[float, bool]:
    """(value, imputed): the sense's norm feature, imputed with the matrix
    mean when the sense has no vector."""
    vec = norm_emb.get(sense)
    if vec is not None:
        sq = float(vec @ vec)
        return (sq if kind == SQUARED_NORM else math.sqrt(sq)), False
    if impute_value is None:
        impute_value = mean_norm_feature(norm_emb, kind)
    return impute_value, True


def mean_norm_feature(norm_emb: EmbeddingMatrix, kind: str = SQUARED_NORM) -> float:
    sq = norm_emb.squared_norms()
    return float(sq.mean() if kind == SQUARED_NORM else np.sqrt(sq).mean())


def wsd_features(context_vec: np.ndarray, sense: str, model_emb: EmbeddingMatrix,
                 norm_emb: EmbeddingMatrix | None, use_norm: bool,
                 norm_kind: str = SQUARED_NORM,
                 impute_value: float | None = None) -> tuple[np.ndarray, bool]:
    """[cosine(t, s)] plus, when enabled, the sense's norm feature.

    Contextual vectors are used as-is (no normalization beyond the cosine).
    """
    sense_vec = model_emb.get(sense)
    if sense_vec is None:
        raise MissingSenseError(f"sense {sense!r} missing from model embedding")
    feats = [cosine(context_vec, sense_vec)]
    imputed = False
    if use_norm:
        if norm_emb is None:
            raise ValueError("use_norm requires a norm embedding")
        value, imputed = norm_feature_value(norm_emb, sense, norm_kind, impute_value)
        feats.append(value)
    return np.array(feats), imputed


WSD_FEATURE_NAMES = ("cos_ctx_sense", "sense_norm")


@dataclass
class TrainingSet:
    X: np.ndarray
    y: np.ndarray
    feature_names: list[str]
    n_instances: int
    n_skipped: int
    n_imputed: int


def wsd_instances_from_corpus(corpus: Corpus, inventory: SenseInventory,
                              require_gold: bool = True) -> list[WsdInstance]:
    """One instance per annotated token that carries an instance id."""
    out = []
    for tok in corpus.tokens():
        if tok.instance_id is None:
            continue
        if require_gold and tok.sense_id is None:
            continue
        candidates = inventory.get((tok.lemma, tok.pos))
        if candidates is None:
            if tok.sense_id is None:
                continue
            candidates = [tok.sense_id]
        elif tok.sense_id is not None and tok.sense_id not in candidates:
            candidates = sorted(set(candidates) | {tok.sense_id})
        out.append(WsdInstance(
            instance_id=tok.instance_id,
            lemma=tok.lemma,
            pos=tok.pos,
            candidates=tuple(candidates),
            gold=tok.sense_id,
        ))
    return out


def wsd_build_training(instances: list[WsdInstance], ctx: ContextStore,
                       model_emb: EmbeddingMatrix,
                       norm_emb: EmbeddingMatrix | None, use_norm: bool,
                       norm_kind: str = SQUARED_NORM) -> TrainingSet:
    """One positive row per gold sense, one negative row per other candidate.

    Instances without a context vector are skipped and counted; candidates
    missing from the model embedding are skipped silently (they can never be
    scored at prediction time either).
    """
    impute = mean_norm_feature(norm_emb, norm_kind) if (use_norm and norm_emb) else None
    rows = []
    labels = []
    skipped = 0
    imputed = 0
    for inst in instances:
        if inst.gold is None:
            continue
        t_vec = ctx.get(inst.instance_id)
        if t_vec is None:
            skipped += 1
            continue
        for sense in inst.candidates:
            if sense not in model_emb:
                continue
            feats, was_imputed = wsd_features(
                t_vec, sense, model_emb, norm_emb, use_norm, norm_kind, impute)
            rows.append(feats)
            labels.append(1.0 if sense == inst.gold else 0.0)
            imputed += int(was_imputed)
    names = list(WSD_FEATURE_NAMES[:2] if use_norm else WSD_FEATURE_NAMES[:1])
    X = np.array(rows) if rows else np.empty((0, len(names)))
    return TrainingSet(X=X, y=np.array(labels), feature_names=names,
                       n_instances=len(instances), n_skipped=skipped,
                       n_imputed=imputed)


def wsd_predict(inst: WsdInstance, model: LogRegModel, ctx: ContextStore,
                model_emb: EmbeddingMatrix, norm_emb: EmbeddingMatrix | None,
                use_norm: bool, norm_kind: str = SQUARED_NORM,
                impute_value: float | None = None) -> tuple[str, bool]:
    """(sense, backed_off): the candidate with the highest positive-class
    probability; falls back to the lexicographically first candidate when
    nothing is scoreable."""
    t_vec = ctx.get(inst.instance_id)
    scored = []
    if t_vec is not None:
        for sense in inst.candidates:
            if sense not in model_emb:
                continue
            feats, _ = wsd_features(t_vec, sense, model_emb, norm_emb, use_norm,
                                    norm_kind, impute_value)
            prob = float(model.predict_proba(feats)[0])
            scored.append((-prob, sense))
    if not scored:
        return min(inst.candidates), True
    scored.sort()
    return scored[0][1], False


def resolve_sense(context_vec: np.ndarray, candidates, model_emb: EmbeddingMatrix):
    """Nearest-sense disambiguation: candidate maximizing cosine(t, s)."""
    best = None
    best_cos = -2.0
    for sense in sorted(candidates):
        vec = model_emb.get(sense)
        if vec is None:
            continue
        c = cosine(context_vec, vec)
        if c > best_cos:
            best, best_cos = sense, c
    if best is None:
        raise MissingSenseError("no candidate sense has a model vector")
    return best


WIC_FEATURE_NAMES = ("cos_s1_s2", "cos_t1_t2", "cos_s1_t1", "cos_s2_t2",
                     "sense_norm")
NORM_FROM_FIRST = "first"
NORM_FROM_MEAN = "mean"


def wic_features(pair: WicPair, ctx: ContextStore, model_emb: EmbeddingMatrix,
                 norm_emb: EmbeddingMatrix | None, inventory: SenseInventory,
                 use_norm: bool, norm_kind: str = SQUARED_NORM,
                 norm_source: str = NORM_FROM_FIRST,
                 impute_value: float | None = None) -> tuple[np.ndarray, bool]:
    """Four sense/context cosine features, plus optionally the norm feature.

    The per-context sense s_i is resolved by nearest-sense cosine against
    the model embedding.  The norm feature uses the context-1 sense by
    default, or the mean over both resolved senses.
    """
    t1 = ctx.get(pair.instance_id_1)
    t2 = ctx.get(pair.instance_id_2)
    if t1 is None or t2 is None:
        raise SensenormError(f"pair {pair.pair_id}: missing context vector")
    candidates = inventory.get((pair.lemma, pair.pos))
    if not candidates:
        raise MissingSenseError(f"no candidate senses for ({pair.lemma}, {pair.pos})")
    s1 = resolve_sense(t1, candidates, model_emb)
    s2 = resolve_sense(t2, candidates, model_emb)
    v1 = model_emb[s1]
    v2 = model_emb[s2]
    feats = [cosine(v1, v2), cosine(t1, t2), cosine(v1, t1), cosine(v2, t2)]
    imputed = False
    if use_norm:
        if norm_emb is None:
            raise ValueError("use_norm requires a norm embedding")
        val1, imp1 = norm_feature_value(norm_emb, s1, norm_kind, impute_value)
        if norm_source == NORM_FROM_MEAN:
            val2, imp2 = norm_feature_value(norm_emb, s2, norm_kind, impute_value)
            feats.append((val1 + val2) / 2.0)
            imputed = imp1 or imp2
        else:
            feats.append(val1)
            imputed = imp1
    return np.array(feats), imputed


def wic_build_training(pairs: list[WicPair], ctx: ContextStore,
                       model_emb: EmbeddingMatrix,
                       norm_emb: EmbeddingMatrix | None,
                       inventory: SenseInventory, use_norm: bool,
                       norm_kind: str = SQUARED_NORM,
                       norm_source: str = NORM_FROM_FIRST) -> TrainingSet:
    impute = mean_norm_feature(norm_emb, norm_kind) if (use_norm and norm_emb) else None
    rows, labels = [], []
    skipped = 0
    imputed = 0
    for pair in pairs:
        if pair.gold is None:
            continue
        try:
            feats, was_imputed = wic_features(pair, ctx, model_emb, norm_emb,
                                              inventory, use_norm, norm_kind,
                                              norm_source, impute)
        except SensenormError:
            skipped += 1
            continue
        rows.append(feats)
        labels.append(1.0 if pair.gold else 0.0)
        imputed += int(was_imputed)
    names = list(WIC_FEATURE_NAMES if use_norm else WIC_FEATURE_NAMES[:4])
    X = np.array(rows) if rows else np.empty((0, len(names)))
    return TrainingSet(X=X, y=np.array(labels), feature_names=names,
                       n_instances=len(pairs), n_skipped=skipped, n_imputed=imputed)


# ---------------------------------------------------------------------------
# evaluation


@dataclass
class TaskScores:
    n_instances: int
    n_correct: int

    @property
    def accuracy(self) -> float:
        return self.n_correct / self.n_instances

    precision = accuracy
    recall = accuracy
    f1 = accuracy


def evaluate_wsd(predictions: dict[str, str],
                 gold: dict[str, set[str]]) -> dict[str, TaskScores]:
    """Scores per dataset (instance-id prefix before the first dot) and ALL.

    Every instance receives a prediction (back-off included), so precision,
    recall and F1 all coincide with accuracy.
    """
    missing = set(gold) - set(predictions)
    extra = set(predictions) - set(gold)
    if missing or extra:
        raise ValueError(
            f"prediction/gold mismatch: {len(missing)} missing, {len(extra)} extra")
    groups: dict[str, TaskScores] = {}
    overall = TaskScores(0, 0)
    for instance_id, golds in gold.items():
        dataset = instance_id.split(".", 1)[0] if "." in instance_id else "default"
        scores = groups.setdefault(dataset, TaskScores(0, 0))
        correct = int(predictions[instance_id] in golds)
        scores.n_instances += 1
        scores.n_correct += correct
        overall.n_instances += 1
        overall.n_correct += correct
    groups["ALL"] = overall
    return groups


def evaluate_wic(predictions: dict[str, bool],
                 gold: dict[str, bool]) -> TaskScores:
    missing = set(gold) - set(predictions)
    extra = set(predictions) - set(gold)
    if missing or extra:
        raise ValueError(
            f"prediction/gold mismatch: {len(missing)} missing, {len(extra)} extra")
    correct = sum(int(predictions[k] == gold[k]) for k in gold)
    return TaskScores(n_instances=len(gold), n_correct=correct)


# ---------------------------------------------------------------------------
# file formats


def read_gold_keys(path) -> dict[str, set[str]]:
    """Key file: ``instance_id sense_id [sense_id ...]`` per line."""
    gold = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts or line.startswith("#"):
                continue
            if len(parts) < 2:
                raise SensenormError(f"line {line_no}: expected id and >= 1 sense")
            gold[parts[0]] = set(parts[1:])
    return gold


def write_predictions(predictions: dict[str, str], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for instance_id in sorted(predictions):
            fh.write(f"{instance_id} {predictions[instance_id]}\n")


def read_wic_pairs(tsv_path, gold_path=None, id_prefix: str = "wic") -> list[WicPair]:
    """Benchmark layout: ``word<TAB>pos<TAB>i1-i2<TAB>sentence1<TAB>sentence2``
    plus an optional gold file of T/F lines."""
    golds = None
    if gold_path is not None:
        with open(gold_path, encoding="utf-8") as fh:
            golds = [line.strip() for line in fh if line.strip()]
    pairs = []
    with open(tsv_path, encoding="utf-8") as fh:
        for row, line in enumerate(fh):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) != 5:
                raise SensenormError(
                    f"WiC row {row}: expected 5 tab-separated fields")
            word, pos, indices, sent1, sent2 = fields
            i1, i2 = indices.split("-")
            gold = None
            if golds is not None:
                label = golds[row]
                if label not in ("T", "F"):
                    raise SensenormError(f"WiC gold row {row}: expected T or F")
                gold = label == "T"
            pairs.append(WicPair(
                pair_id=f"{id_prefix}.{row}",
                lemma=word,
                pos=normalize_pos(pos),
                tokens_1=tuple(sent1.split()),
                tokens_2=tuple(sent2.split()),
                index_1=int(i1),
                index_2=int(i2),
                gold=gold,
            ))
    if golds is not None and len(golds) != len(pairs):
        raise SensenormError("WiC gold file length does not match the pair file")
    return pairs
