"""Command-line interface: one subcommand per pipeline stage.

Every run writes its outputs plus a manifest JSON recording the resolved
configuration, input hashes, seed, and wall-clock duration; re-running a
manifest's command with workers=1 reproduces the outputs byte for byte.
Logs go to stderr, data only to the declared output files.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import time

from . import SensenormError, __version__
from .corpus import build_inventory, build_vocab, parse_corpus_file, write_corpus_file
from .corpus import Corpus, Token
from .embeddings import read_vectors, write_vectors
from .glove import GloveConfig, build_cooc, train_glove, write_cooc
from .mfs import ALL_WORDS, NOUN_SAMPLE, MfsEvalConfig, evaluate_mfs, random_baseline
from .normlab import bin_analysis, norm_freq_correlation, partition_samples, write_json_report
from .senseclf import (
    LogRegConfig, NORM_FROM_FIRST, NORM_FROM_MEAN, PLAIN_NORM,
    SQUARED_NORM, TrainingSet, evaluate_wic, evaluate_wsd, mean_norm_feature,
    read_ctxstore, read_gold_keys, read_wic_pairs, train_logreg, wic_build_training,
    wic_features, write_predictions, wsd_build_training, wsd_instances_from_corpus,
    wsd_predict,
)
from .sgns import SgnsConfig, train_sgns
from .synthgen import DEFAULT_SENSES_PER_WORD, WalkParams, generate, write_ground_truth

log = logging.getLogger("sensenorm")

STREAMS = ("mixed", "sense", "word")


class CliUsageError(SensenormError):
    """Bad flag combination; reported with the usage exit code."""


def _stream_of(corpus, kind):
    return {
        "mixed": corpus.mixed_stream,
        "sense": corpus.sense_stream,
        "word": corpus.word_stream,
    }[kind]()


def _sha256(path):
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def _write_manifest(args, inputs, outputs, started):
    config = {k: v for k, v in sorted(vars(args).items())
              if k not in ("func", "manifest", "config")}
    manifest = {
        "subcommand": args.subcommand,
        "toolkit_version": __version__,
        "config": config,
        "seed": getattr(args, "seed", None),
        "inputs": {str(p): _sha256(p) for p in inputs},
        "outputs": [str(p) for p in outputs],
        "duration_seconds": round(time.monotonic() - started, 3),
    }
    path = args.manifest or f"{outputs[0]}.manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _dump_json(payload, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen(args):
    weights = tuple(float(w) for w in args.senses_per_word.split(","))
    params = WalkParams(
        dim=args.dim, n_senses=args.senses, steps=args.steps, drift=args.drift,
        vector_scale=args.scale, senses_per_word=weights, seed=args.seed)
    corpus, truth = generate(params, sentence_len=args.sentence_len)
    corpus_path = f"{args.out_prefix}.corpus.tsv"
    vec_path = f"{args.out_prefix}.senses.vec"
    map_path = f"{args.out_prefix}.sense2word.tsv"
    write_corpus_file(corpus, corpus_path)
    write_ground_truth(truth, vec_path, map_path)
    log.info("generated %d tokens over %d senses", corpus.n_tokens, args.senses)
    return [], [corpus_path, vec_path, map_path]


def cmd_train_sgns(args):
    corpus = parse_corpus_file(args.corpus)
    cfg = SgnsConfig(
        dim=args.dim, window=args.window, negatives=args.negatives,
        epochs=args.epochs, initial_lr=args.lr, min_count=args.min_count,
        subsample_threshold=args.subsample, workers=args.workers, seed=args.seed)
    emb, report = train_sgns(_stream_of(corpus, args.stream), cfg, with_report=True)
    for i, loss in enumerate(report.epoch_losses, start=1):
        log.info("epoch %d mean pair loss %.6f", i, loss)
    write_vectors(emb, args.out)
    return [args.corpus], [args.out]


def cmd_train_glove(args):
    corpus = parse_corpus_file(args.corpus)
    table = build_cooc(_stream_of(corpus, args.stream), window=args.window)
    if args.save_cooc:
        write_cooc(table, args.save_cooc)
    cfg = GloveConfig(
        dim=args.dim, window=args.window, x_max=args.x_max, alpha=args.alpha,
        epochs=args.epochs, initial_lr=args.lr, workers=args.workers,
        seed=args.seed)
    emb, report = train_glove(table, cfg, with_report=True)
    for i, loss in enumerate(report.epoch_losses, start=1):
        log.info("epoch %d weighted loss %.3f", i, loss)
    write_vectors(emb, args.out)
    outputs = [args.out] + ([args.save_cooc] if args.save_cooc else [])
    return [args.corpus], outputs


def cmd_analyze_partition(args):
    emb = read_vectors(args.vectors)
    report = partition_samples(emb, n=args.n, seed=args.seed, bins=args.bins,
                               context_scale=args.scale)
    write_json_report(report, args.out_json)
    outputs = [args.out_json]
    if args.out_csv:
        report.write_csv(args.out_csv)
        outputs.append(args.out_csv)
    log.info("partition mean %.4g cv %.4g", report.mean,
             report.coefficient_of_variation)
    return [args.vectors], outputs


def _load_freqs(args):
    if args.counts:
        freqs = {}
        with open(args.counts, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip() or line.startswith("#"):
                    continue
                key, count = line.rstrip("\n").split("\t")
                freqs[key] = int(count)
        return freqs, [args.counts]
    corpus = parse_corpus_file(args.corpus)
    vocab = build_vocab(corpus)
    freqs = vocab.sense_freq if args.key == "sense" else vocab.word_freq
    return freqs, [args.corpus]


def cmd_analyze_corr(args):
    emb = read_vectors(args.vectors)
    freqs, inputs = _load_freqs(args)
    report = norm_freq_correlation(emb, freqs, min_freq=args.min_freq)
    write_json_report(report, args.out_json)
    outputs = [args.out_json]
    if args.out_csv:
        report.write_csv(args.out_csv)
        outputs.append(args.out_csv)
    log.info("pearson rho %.4f over %d points", report.pearson_rho, report.n_points)
    return [args.vectors] + inputs, outputs


def cmd_analyze_bins(args):
    corpus = parse_corpus_file(args.corpus)
    emb = read_vectors(args.vectors)
    vocab = build_vocab(corpus)
    inventory = build_inventory(corpus)
    report = bin_analysis(inventory, vocab.sense_freq, emb, n_bins=args.bins)
    write_json_report(report, args.out_json)
    outputs = [args.out_json]
    if args.out_csv:
        report.write_csv(args.out_csv)
        outputs.append(args.out_csv)
    log.info("overall alpha ratio %.4f (%d excluded)", report.overall_ratio,
             report.excluded)
    return [args.corpus, args.vectors], outputs


def cmd_mfs(args):
    corpus = parse_corpus_file(args.corpus)
    emb = read_vectors(args.vectors)
    inventory = build_inventory(corpus)
    subset = ALL_WORDS if args.subset == "all-words" else NOUN_SAMPLE
    cfg = MfsEvalConfig(subset=subset, noun_sample_min_freq=args.min_freq,
                        seed=args.seed)
    result = evaluate_mfs(corpus, inventory, emb, cfg)
    baseline = random_baseline(corpus, inventory, cfg, trials=args.trials)
    payload = {
        "evaluation": result.to_json_dict(),
        "random_baseline": baseline.to_json_dict(),
    }
    _dump_json(payload, args.out_json)
    outputs = [args.out_json]
    if args.per_word:
        with open(args.per_word, "w", encoding="utf-8") as fh:
            fh.write("lemma\tpos\tgold\tpredicted\tcorrect\tgold_tied\n")
            for rec in result.records:
                fh.write(f"{rec.lemma}\t{rec.pos}\t{rec.gold}\t"
                         f"{rec.predicted or '-'}\t{int(rec.correct)}\t"
                         f"{int(rec.gold_tied)}\n")
        outputs.append(args.per_word)
    log.info("mfs accuracy %.4f vs random %.4f", result.accuracy,
             baseline.mean_accuracy)
    return [args.corpus, args.vectors], outputs


def _training_summary(training: TrainingSet):
    return {
        "rows": int(len(training.y)),
        "positives": int(training.y.sum()),
        "instances": training.n_instances,
        "skipped_instances": training.n_skipped,
        "imputed_rows": training.n_imputed,
    }


def cmd_wsd(args):
    use_norm = not args.no_norm
    train_corpus = parse_corpus_file(args.train_corpus)
    inventory = build_inventory(train_corpus)
    train_ctx = read_ctxstore(args.train_ctx)
    model_emb = read_vectors(args.model_vectors)
    norm_emb = read_vectors(args.norm_vectors) if args.norm_vectors else None
    if use_norm and norm_emb is None:
        raise CliUsageError("--norm-vectors is required unless --no-norm is set")

    instances = wsd_instances_from_corpus(train_corpus, inventory)
    training = wsd_build_training(instances, train_ctx, model_emb, norm_emb,
                                  use_norm, args.norm_kind)
    if len(training.y) == 0:
        raise SensenormError("no training rows could be built")
    model = train_logreg(training.X, training.y, LogRegConfig(),
                         feature_names=training.feature_names)

    eval_corpus = parse_corpus_file(args.eval_corpus)
    eval_ctx = read_ctxstore(args.eval_ctx)
    eval_instances = wsd_instances_from_corpus(eval_corpus, inventory,
                                               require_gold=False)
    impute = mean_norm_feature(norm_emb, args.norm_kind) if use_norm else None
    predictions = {}
    backoffs = 0
    for inst in eval_instances:
        sense, backed_off = wsd_predict(inst, model, eval_ctx, model_emb,
                                        norm_emb, use_norm, args.norm_kind, impute)
        predictions[inst.instance_id] = sense
        backoffs += int(backed_off)
    write_predictions(predictions, args.out_predictions)

    payload = {
        "training": _training_summary(training),
        "model": model.to_json_dict(),
        "n_predictions": len(predictions),
        "n_backoffs": backoffs,
        "use_norm": use_norm,
        "norm_kind": args.norm_kind,
    }
    inputs = [args.train_corpus, args.train_ctx, args.model_vectors,
              args.eval_corpus, args.eval_ctx]
    if args.norm_vectors:
        inputs.append(args.norm_vectors)
    if args.gold:
        gold = read_gold_keys(args.gold)
        scored = {k: v for k, v in predictions.items() if k in gold}
        unpredicted = sorted(set(gold) - set(predictions))
        extra = sorted(set(predictions) - set(gold))
        scores = evaluate_wsd(scored, {k: gold[k] for k in scored})
        payload["scores"] = {
            name: {"f1": s.f1, "n": s.n_instances} for name, s in scores.items()
        }
        payload["n_gold_unpredicted"] = len(unpredicted)
        payload["n_extra_predictions"] = len(extra)
        log.info("wsd ALL f1 %.4f", scores["ALL"].f1)
        inputs.append(args.gold)
    if args.save_model:
        _dump_json(model.to_json_dict(), args.save_model)
    _dump_json(payload, args.out_json)
    outputs = [args.out_json, args.out_predictions]
    if args.save_model:
        outputs.append(args.save_model)
    return inputs, outputs


def cmd_wic(args):
    use_norm = not args.no_norm
    inventory_corpus = parse_corpus_file(args.inventory_corpus)
    inventory = build_inventory(inventory_corpus)
    model_emb = read_vectors(args.model_vectors)
    norm_emb = read_vectors(args.norm_vectors) if args.norm_vectors else None
    if use_norm and norm_emb is None:
        raise CliUsageError("--norm-vectors is required unless --no-norm is set")

    train_pairs = read_wic_pairs(args.train, args.train_gold, id_prefix="wic.train")
    train_ctx = read_ctxstore(args.train_ctx)
    training = wic_build_training(train_pairs, train_ctx, model_emb, norm_emb,
                                  inventory, use_norm, args.norm_kind,
                                  args.norm_source)
    if len(training.y) == 0:
        raise SensenormError("no WiC training rows could be built")
    model = train_logreg(training.X, training.y, LogRegConfig(),
                         feature_names=training.feature_names)

    eval_pairs = read_wic_pairs(args.eval, args.eval_gold, id_prefix="wic.eval")
    eval_ctx = read_ctxstore(args.eval_ctx)
    impute = mean_norm_feature(norm_emb, args.norm_kind) if use_norm else None
    predictions = {}
    backoffs = 0
    for pair in eval_pairs:
        try:
            feats, _ = wic_features(pair, eval_ctx, model_emb, norm_emb, inventory,
                                    use_norm, args.norm_kind, args.norm_source,
                                    impute)
            predictions[pair.pair_id] = bool(model.predict_proba(feats)[0] >= 0.5)
        except SensenormError:
            predictions[pair.pair_id] = True
            backoffs += 1

    payload = {
        "training": _training_summary(training),
        "model": model.to_json_dict(),
        "n_predictions": len(predictions),
        "n_backoffs": backoffs,
        "use_norm": use_norm,
        "norm_kind": args.norm_kind,
        "norm_source": args.norm_source,
    }
    if args.eval_gold:
        gold = {p.pair_id: p.gold for p in eval_pairs}
        scores = evaluate_wic(predictions, gold)
        payload["accuracy"] = scores.accuracy
        payload["n_eval"] = scores.n_instances
        log.info("wic accuracy %.4f", scores.accuracy)
    _dump_json(payload, args.out_json)
    outputs = [args.out_json]
    if args.out_predictions:
        with open(args.out_predictions, "w", encoding="utf-8") as fh:
            for pair_id in sorted(predictions):
                fh.write(f"{pair_id}\t{'T' if predictions[pair_id] else 'F'}\n")
        outputs.append(args.out_predictions)
    inputs = [args.inventory_corpus, args.model_vectors, args.train,
              args.train_ctx, args.eval, args.eval_ctx]
    inputs += [p for p in (args.norm_vectors, args.train_gold, args.eval_gold) if p]
    return inputs, outputs


def _wic_to_corpus(pairs):
    sentences = []
    for pair in pairs:
        for tokens, index, instance_id in (
                (pair.tokens_1, pair.index_1, pair.instance_id_1),
                (pair.tokens_2, pair.index_2, pair.instance_id_2)):
            sentences.append([
                Token(surface=tok, lemma=pair.lemma if i == index else tok,
                      pos=pair.pos if i == index else "OTHER",
                      instance_id=instance_id if i == index else None)
                for i, tok in enumerate(tokens)
            ])
    return Corpus(sentences)


def cmd_convert(args):
    if args.mode == "wic-corpus":
        if not args.wic:
            raise CliUsageError("--wic is required for mode wic-corpus")
        pairs = read_wic_pairs(args.wic, id_prefix=args.id_prefix)
        write_corpus_file(_wic_to_corpus(pairs), args.out)
        return [args.wic], [args.out]
    if not args.corpus:
        raise CliUsageError(f"--corpus is required for mode {args.mode}")
    corpus = parse_corpus_file(args.corpus)
    if args.mode == "wsd-gold":
        with open(args.out, "w", encoding="utf-8") as fh:
            for tok in corpus.tokens():
                if tok.instance_id is not None and tok.sense_id is not None:
                    fh.write(f"{tok.instance_id} {tok.sense_id}\n")
    else:
        stream = _stream_of(corpus, args.mode.removesuffix("-stream"))
        with open(args.out, "w", encoding="utf-8") as fh:
            for sent in stream:
                fh.write(" ".join(sent) + "\n")
    return [args.corpus], [args.out]


# ---------------------------------------------------------------------------
# parser


def _add_common(parser):
    parser.add_argument("--seed", type=int, default=0,
                        help="random seed (default 0)")
    parser.add_argument("--workers", type=int, default=1,
                        help="worker threads; 1 keeps runs bit-reproducible")
    parser.add_argument("--config", default=None,
                        help="key=value file supplying defaults, overridden by flags")
    parser.add_argument("--manifest", default=None,
                        help="manifest path (default: first output + .manifest.json)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sensenorm",
        description="Sense-embedding trainers, norm/frequency diagnostics, "
                    "and sense-task baselines.")
    parser.add_argument("--version", action="version", version=__version__)
    subparsers = parser.add_subparsers(dest="subcommand", required=True)

    class sub:  # every subcommand documents its defaults in --help
        @staticmethod
        def add_parser(name, **kwargs):
            kwargs.setdefault("formatter_class",
                              argparse.ArgumentDefaultsHelpFormatter)
            return subparsers.add_parser(name, **kwargs)

    p = sub.add_parser("gen", help="generate a synthetic sense-annotated corpus")
    p.add_argument("--dim", type=int, default=10,
                   help="dimensionality of the ground-truth vectors")
    p.add_argument("--senses", type=int, default=2000,
                   help="number of senses")
    p.add_argument("--steps", type=int, default=1_000_000,
                   help="tokens to emit")
    p.add_argument("--drift", type=float, default=0.1,
                   help="context-walk drift in (0, 1]")
    p.add_argument("--scale", type=float, default=1.0,
                   help="std of the Gaussian ground-truth vectors")
    p.add_argument("--senses-per-word",
                   default=",".join(str(w) for w in DEFAULT_SENSES_PER_WORD),
                   help="comma weights for words having 1..k senses")
    p.add_argument("--sentence-len", type=int, default=50,
                   help="tokens per written sentence")
    p.add_argument("--out-prefix", required=True,
                   help="writes <prefix>.corpus.tsv, .senses.vec, .sense2word.tsv")
    _add_common(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("train-sgns", help="train skip-gram negative-sampling vectors")
    p.add_argument("--corpus", required=True, help="corpus TSV to train on")
    p.add_argument("--stream", choices=STREAMS, default="mixed",
                   help="token stream fed to the trainer")
    p.add_argument("--dim", type=int, default=300, help="vector dimensionality")
    p.add_argument("--window", type=int, default=5, help="max context window")
    p.add_argument("--negatives", type=int, default=5,
                   help="negative samples per pair")
    p.add_argument("--epochs", type=int, default=5, help="training epochs")
    p.add_argument("--lr", type=float, default=0.025, help="initial learning rate")
    p.add_argument("--min-count", type=int, default=1,
                   help="drop tokens rarer than this")
    p.add_argument("--subsample", type=float, default=1e-3,
                   help="frequent-token subsampling threshold (0 disables)")
    p.add_argument("--out", required=True, help="output embedding file")
    _add_common(p)
    p.set_defaults(func=cmd_train_sgns)

    p = sub.add_parser("train-glove", help="train GloVe vectors")
    p.add_argument("--corpus", required=True, help="corpus TSV to train on")
    p.add_argument("--stream", choices=STREAMS, default="mixed",
                   help="token stream fed to the trainer")
    p.add_argument("--dim", type=int, default=300, help="vector dimensionality")
    p.add_argument("--window", type=int, default=10, help="co-occurrence window")
    p.add_argument("--x-max", type=float, default=100.0,
                   help="weighting-function saturation point")
    p.add_argument("--alpha", type=float, default=0.75,
                   help="weighting-function exponent")
    p.add_argument("--epochs", type=int, default=30, help="training epochs")
    p.add_argument("--lr", type=float, default=0.05, help="initial learning rate")
    p.add_argument("--save-cooc", default=None,
                   help="also write the co-occurrence table as 3-column TSV")
    p.add_argument("--out", required=True, help="output embedding file")
    _add_common(p)
    p.set_defaults(func=cmd_train_glove)

    p = sub.add_parser("analyze-partition",
                       help="partition sums over random unit contexts")
    p.add_argument("--vectors", required=True, help="embedding file")
    p.add_argument("--n", type=int, default=1000, help="random contexts to draw")
    p.add_argument("--bins", type=int, default=50, help="histogram bins")
    p.add_argument("--scale", type=float, default=1.0,
                   help="norm of the random context vectors")
    p.add_argument("--out-json", required=True, help="report JSON")
    p.add_argument("--out-csv", default=None, help="histogram CSV")
    _add_common(p)
    p.set_defaults(func=cmd_analyze_partition)

    p = sub.add_parser("analyze-corr",
                       help="log-frequency vs squared-norm correlation")
    p.add_argument("--vectors", required=True, help="embedding file")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--corpus", default=None,
                        help="corpus TSV supplying the frequency table")
    source.add_argument("--counts", default=None,
                        help="2-column TSV key<TAB>count instead of --corpus")
    p.add_argument("--key", choices=("sense", "word"), default="sense",
                   help="which frequency table to take from --corpus")
    p.add_argument("--min-freq", type=int, default=1,
                   help="drop keys rarer than this")
    p.add_argument("--out-json", required=True, help="report JSON")
    p.add_argument("--out-csv", default=None, help="scatter-point CSV")
    _add_common(p)
    p.set_defaults(func=cmd_analyze_corr)

    p = sub.add_parser("analyze-bins",
                       help="frequency-binned top-sense norm dominance")
    p.add_argument("--corpus", required=True, help="corpus TSV")
    p.add_argument("--vectors", required=True, help="embedding file")
    p.add_argument("--bins", type=int, default=10, help="frequency bins")
    p.add_argument("--out-json", required=True, help="report JSON")
    p.add_argument("--out-csv", default=None, help="per-bin CSV")
    _add_common(p)
    p.set_defaults(func=cmd_analyze_bins)

    p = sub.add_parser("mfs", help="most-frequent-sense prediction by norm")
    p.add_argument("--corpus", required=True, help="corpus TSV")
    p.add_argument("--vectors", required=True, help="sense embedding file")
    p.add_argument("--subset", choices=("all-words", "noun-sample"),
                   default="all-words", help="evaluation word set")
    p.add_argument("--min-freq", type=int, default=3,
                   help="noun-sample lemma frequency threshold")
    p.add_argument("--trials", type=int, default=100,
                   help="random-baseline trials")
    p.add_argument("--per-word", default=None, help="per-word TSV output")
    p.add_argument("--out-json", required=True, help="report JSON")
    _add_common(p)
    p.set_defaults(func=cmd_mfs)

    p = sub.add_parser("wsd", help="train and run the WSD classifier")
    p.add_argument("--train-corpus", required=True,
                   help="annotated corpus TSV with instance ids")
    p.add_argument("--train-ctx", required=True,
                   help="ContextStore for the training instances")
    p.add_argument("--model-vectors", required=True,
                   help="high-coverage sense embedding file")
    p.add_argument("--norm-vectors", default=None,
                   help="corpus-trained sense embeddings for the norm feature")
    p.add_argument("--no-norm", action="store_true",
                   help="baseline: drop the sense-norm feature")
    p.add_argument("--norm-kind", choices=(SQUARED_NORM, PLAIN_NORM),
                   default=SQUARED_NORM, help="norm feature variant")
    p.add_argument("--eval-corpus", required=True,
                   help="evaluation corpus TSV with instance ids")
    p.add_argument("--eval-ctx", required=True,
                   help="ContextStore for the evaluation instances")
    p.add_argument("--gold", default=None,
                   help="gold key file; enables scoring")
    p.add_argument("--save-model", default=None, help="model JSON output")
    p.add_argument("--out-predictions", required=True,
                   help="predictions key file")
    p.add_argument("--out-json", required=True, help="report JSON")
    _add_common(p)
    p.set_defaults(func=cmd_wsd)

    p = sub.add_parser("wic", help="train and run the WiC classifier")
    p.add_argument("--train", required=True, help="training pair TSV")
    p.add_argument("--train-gold", required=True, help="training T/F labels")
    p.add_argument("--train-ctx", required=True,
                   help="ContextStore for the training pairs")
    p.add_argument("--eval", required=True, help="evaluation pair TSV")
    p.add_argument("--eval-gold", default=None,
                   help="evaluation T/F labels; enables scoring")
    p.add_argument("--eval-ctx", required=True,
                   help="ContextStore for the evaluation pairs")
    p.add_argument("--model-vectors", required=True,
                   help="high-coverage sense embedding file")
    p.add_argument("--norm-vectors", default=None,
                   help="corpus-trained sense embeddings for the norm feature")
    p.add_argument("--no-norm", action="store_true",
                   help="baseline: drop the sense-norm feature")
    p.add_argument("--norm-kind", choices=(SQUARED_NORM, PLAIN_NORM),
                   default=SQUARED_NORM, help="norm feature variant")
    p.add_argument("--norm-source", choices=(NORM_FROM_FIRST, NORM_FROM_MEAN),
                   default=NORM_FROM_FIRST,
                   help="which context resolves the norm feature sense")
    p.add_argument("--inventory-corpus", required=True,
                   help="corpus supplying candidate senses per (lemma, pos)")
    p.add_argument("--out-predictions", default=None,
                   help="pair-id<TAB>T/F predictions TSV")
    p.add_argument("--out-json", required=True, help="report JSON")
    _add_common(p)
    p.set_defaults(func=cmd_wic)

    p = sub.add_parser("convert", help="derive streams and key files from corpora")
    p.add_argument("--mode", required=True,
                   choices=("mixed-stream", "sense-stream", "word-stream",
                            "wsd-gold", "wic-corpus"),
                   help="conversion to perform")
    p.add_argument("--corpus", default=None,
                   help="corpus TSV input (stream and wsd-gold modes)")
    p.add_argument("--wic", default=None, help="WiC pair TSV (mode wic-corpus)")
    p.add_argument("--id-prefix", default="wic",
                   help="instance-id prefix for mode wic-corpus")
    p.add_argument("--out", required=True, help="output file")
    _add_common(p)
    p.set_defaults(func=cmd_convert)

    return parser


def _apply_config_file(argv):
    """Expand ``--config FILE`` into leading flags so real flags override."""
    if "--config" not in argv:
        return argv
    at = argv.index("--config")
    if at + 1 >= len(argv):
        return argv
    path = argv[at + 1]
    injected = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            flag = "--" + key.strip().replace("_", "-")
            value = value.strip()
            if value.lower() in ("true", "false"):
                if value.lower() == "true":
                    injected.append(flag)
            else:
                injected.extend([flag, value])
    # insert right after the subcommand token (the first non-flag argument)
    for i, tok in enumerate(argv):
        if not tok.startswith("-"):
            return argv[:i + 1] + injected + argv[i + 1:]
    return argv + injected


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(message)s")
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _apply_config_file(argv)
    except OSError as exc:
        print(f"sensenorm: cannot read config: {exc}", file=sys.stderr)
        return 2
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.monotonic()
    try:
        inputs, outputs = args.func(args)
    except CliUsageError as exc:
        print(f"sensenorm: usage error: {exc}", file=sys.stderr)
        return 2
    except (SensenormError, ValueError, OSError) as exc:
        print(f"sensenorm: error: {exc}", file=sys.stderr)
        return 1
    if outputs:
        _write_manifest(args, inputs, outputs, started)
    return 0


if __name__ == "__main__":
    sys.exit(main())
