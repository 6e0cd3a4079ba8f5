"""Command-line interface.

Subcommands: train, parse, eval, trace, oracle-compare, gradcheck. Exit
codes: 0 success, 2 configuration error, 3 data error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import exact, metrics, synthetic
from .checkpoint import load_checkpoint, save_checkpoint
from .config import RunConfig, parse_config_file, parse_overrides
from .errors import CapacityError, ConfigError, DataError, NumericError
from .graph import SemGraph, Sentence, Token
from .model import ModelConfig, ParserModel
from .pipeline import parse_sentence, run_inference, trace_sentence
from .sdp_io import build_vocab, load_pretrained, parse_sdp, write_sdp
from .training import TrainConfig, gradcheck, train

__all__ = ["main"]


def _resolve_config(args):
    file_values = parse_config_file(args.config) if args.config else {}
    overrides = parse_overrides(getattr(args, "set", None))
    return RunConfig.resolve(file_values, overrides)


def _load_corpus(path, what):
    if not path:
        raise ConfigError(f"no {what} corpus path configured")
    if not os.path.exists(path):
        raise DataError(f"{what} corpus not found: {path}")
    return parse_sdp(path)


def cmd_train(args):
    cfg = _resolve_config(args)
    if args.train:
        cfg.train_path = args.train
    if args.dev:
        cfg.dev_path = args.dev
    train_data = _load_corpus(cfg.train_path, "training")
    dev_data = _load_corpus(cfg.dev_path, "dev") if cfg.dev_path else train_data

    vocab = build_vocab(train_data, cfg.min_count)
    pretrained = None
    if cfg.use_pretrained:
        if not cfg.pretrained_path:
            raise ConfigError("use_pretrained=true needs pretrained_path")
        pretrained = load_pretrained(cfg.pretrained_path)
    model = ParserModel(cfg.model_config(), vocab,
                        np.random.default_rng(cfg.seed), pretrained=pretrained)

    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "resolved.cfg"), "w", encoding="utf-8") as fh:
        fh.write(cfg.to_text())

    metrics_path = os.path.join(args.out, "metrics.jsonl")
    with open(metrics_path, "w", encoding="utf-8") as log_file:
        def log(row):
            log_file.write(json.dumps(row, sort_keys=True) + "\n")

        result = train(model, train_data, dev_data, cfg.train_config(), log=log)

    save_checkpoint(os.path.join(args.out, "checkpoint.npz"), model, cfg, vocab)
    print(f"best_dev_labeled_f1={result.best_score:.6f} at step {result.best_step} "
          f"({result.steps} steps run)")
    return 0


def cmd_parse(args):
    expected = None
    if args.config:
        expected = RunConfig.resolve(parse_config_file(args.config),
                                     parse_overrides(args.set))
    model, cfg, _ = load_checkpoint(args.checkpoint, expected_config=expected)
    engine = args.engine or cfg.inference
    iterations = args.iterations or cfg.iterations
    threshold = cfg.threshold if args.threshold is None else args.threshold

    data = _load_corpus(args.input, "input")
    parsed = []
    marginal_rows = []
    for idx, (sentence, _) in enumerate(data):
        graph, state, _ = parse_sentence(model, sentence, engine, iterations,
                                         threshold, cfg.logit_clamp)
        parsed.append((sentence, graph))
        if args.marginals:
            q = state.marginals()
            marginal_rows.append({
                "sentence": idx,
                "engine": engine,
                "iterations": iterations,
                "q": {f"{h}->{d}": float(p) for (h, d), p in sorted(q.items())},
            })
    write_sdp(parsed, args.output)
    if args.marginals:
        with open(args.marginals, "w", encoding="utf-8") as fh:
            for row in marginal_rows:
                fh.write(json.dumps(row, sort_keys=True) + "\n")
    print(f"parsed {len(parsed)} sentences with {engine} (T={iterations})")
    return 0


def cmd_eval(args):
    pred = _load_corpus(args.pred, "prediction")
    gold = _load_corpus(args.gold, "gold")
    if len(pred) != len(gold):
        raise DataError(
            f"prediction has {len(pred)} sentences, gold has {len(gold)}")
    report = metrics.evaluate([g for _, g in pred], [g for _, g in gold],
                              include_top=args.include_top)
    sys.stdout.write(report.to_text())
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, sort_keys=True, indent=2)
            fh.write("\n")
    return 0


def cmd_trace(args):
    model, cfg, _ = load_checkpoint(args.checkpoint)
    data = _load_corpus(args.input, "input")
    if not 0 <= args.sentence < len(data):
        raise DataError(f"sentence index {args.sentence} out of range "
                        f"(corpus has {len(data)})")
    sentence, _ = data[args.sentence]
    engine = args.engine or cfg.inference
    iterations = args.iterations or cfg.iterations
    trace = trace_sentence(model, sentence, engine, iterations, cfg.logit_clamp)
    text = json.dumps(trace, sort_keys=True, indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_oracle_compare(args):
    rng = np.random.default_rng(args.seed)
    instances = [
        synthetic.random_potentials(args.length, rng, args.unary_scale,
                                    args.coupling_scale)
        for _ in range(args.instances)
    ]
    exacts = [exact.exact_infer(pot) for pot in instances]
    worst = 0.0
    for engine in ("mf", "lbp"):
        for iterations in (1, 2, 3):
            errors = []
            for pot, reference in zip(instances, exacts):
                state = run_inference(pot, engine, iterations)
                q = state.marginals()
                errors.extend(abs(q[e] - reference.marginals[e]) for e in pot.edges)
            mean_err, max_err = float(np.mean(errors)), float(np.max(errors))
            worst = max(worst, max_err)
            print(f"engine={engine} iterations={iterations} "
                  f"mean_abs_err={mean_err:.6f} max_abs_err={max_err:.6f}")
    print(f"instances={args.instances} length={args.length} "
          f"worst_max_abs_err={worst:.6f}")
    return 0


def cmd_gradcheck(args):
    rng = np.random.default_rng(args.seed)
    data = synthetic.toy_corpus(rng, size=1, min_len=args.length,
                                max_len=args.length)
    sentence, gold = data[0]
    vocab = build_vocab(data, min_count=1)
    model_cfg = ModelConfig(word_dim=4, pos_dim=3, encoder_layers=1,
                            encoder_hidden=4, unary_dim=5, binary_dim=4)
    model = ParserModel(model_cfg, vocab, np.random.default_rng(args.seed + 1))
    cfg = TrainConfig(seed=args.seed)
    result = gradcheck(model, sentence, gold, cfg, coords=args.coords,
                       seed=args.seed)
    for (engine, iterations), err in sorted(result.per_combo.items()):
        print(f"engine={engine} iterations={iterations} max_rel_err={err:.3e}")
    print(f"coords={result.coords_checked} overall_max_rel_err="
          f"{result.max_rel_error:.3e}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sdparse",
        description="Second-order semantic dependency parser with "
                    "differentiable mean-field / belief-propagation inference.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a parser")
    p.add_argument("--config", help="key=value configuration file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", default=[],
                   help="override a configuration value (repeatable)")
    p.add_argument("--train", help="training corpus (overrides train_path)")
    p.add_argument("--dev", help="dev corpus (overrides dev_path)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("parse", help="parse a corpus with a trained model")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--config", help="optional config checked against the checkpoint")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", default=[])
    p.add_argument("--engine", choices=["mf", "lbp"])
    p.add_argument("--iterations", type=int)
    p.add_argument("--threshold", type=float)
    p.add_argument("--marginals", help="write per-edge marginals as JSON lines")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("eval", help="score predictions against gold")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--include-top", action="store_true",
                   help="count root edges in the headline scores")
    p.add_argument("--json", help="also write the report as JSON")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("trace", help="dump per-iteration marginals and messages")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--sentence", type=int, default=0)
    p.add_argument("--engine", choices=["mf", "lbp"])
    p.add_argument("--iterations", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("oracle-compare",
                       help="compare approximate marginals to enumeration")
    p.add_argument("--instances", type=int, default=50)
    p.add_argument("--length", type=int, default=3)
    p.add_argument("--unary-scale", type=float, default=1.0)
    p.add_argument("--coupling-scale", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_oracle_compare)

    p = sub.add_parser("gradcheck",
                       help="finite-difference check of end-to-end gradients")
    p.add_argument("--length", type=int, default=3)
    p.add_argument("--coords", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gradcheck)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (DataError, CapacityError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
