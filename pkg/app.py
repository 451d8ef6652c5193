#!/usr/bin/env python3
# =============================================================================
# A3T Desk - Command-Line Entrypoint
# =============================================================================
"""
Multi-command CLI over specs, perturbation spaces, models and reports.

Run with:
    python app.py --spec "{SwapPair:1, SubAdj:1}" enumerate "abcd"
    python app.py --spec data/specs/swap_subadj.yaml train --data train.tsv --mode a3t-search \
        --split SwapPair=aug,SubAdj=abs --out runs/model.json
    python app.py --spec data/specs/swap_subadj.yaml eval --model runs/model.json --data test.tsv

Exit codes: 0 success, 1 failed self-check, 2 configuration error, 3 data error.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from config import settings

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK = 1
EXIT_CONFIG = 2
EXIT_DATA = 3


# =============================================================================
# Shared Loading
# =============================================================================

def _resources(args):
    from dsl.resources import ResourceTables
    return ResourceTables.load(args.resources) if args.resources else ResourceTables.default()


def _spec(args, required: bool = True):
    from dsl.models import AlphabetMode, SpecError
    from dsl.parser import load_spec
    if not args.spec:
        if required:
            raise SpecError("this command needs --spec")
        return None
    alphabet = AlphabetMode(args.alphabet) if args.alphabet else None
    return load_spec(args.spec, _resources(args), alphabet)


def _classifier(args):
    from nn.classifier import TextClassifier
    return TextClassifier.load(args.model)


def _dataset(args, classifier):
    from corpus.dataset import load_dataset
    dataset = load_dataset(args.data, classifier.alphabet, classifier.max_len, classifier.num_classes,
                           vocab=classifier.vocab)
    if getattr(args, "limit", None):
        dataset = dataset.head(args.limit)
    return dataset


def _tokens(spec, text: str):
    from perturb.matching import tokenize
    return tokenize(text, spec.alphabet)


def _emit(record) -> None:
    print(json.dumps(record, ensure_ascii=False))


# =============================================================================
# Commands
# =============================================================================

def cmd_enumerate(args) -> int:
    from perturb.matching import detokenize
    from perturb.space import enumerate_space
    spec = _spec(args)
    for z in enumerate_space(spec, _tokens(spec, args.text), limit=args.max):
        print(detokenize(z, spec.alphabet))
    return EXIT_OK


def cmd_count(args) -> int:
    from perturb.models import PlanCountOverflow, SpaceBudgetExceeded
    from perturb.space import count_plans, count_strings
    spec = _spec(args)
    x = _tokens(spec, args.text)
    record = {"text": args.text, "spec": spec.describe()}
    try:
        record["plans"] = count_plans(spec, x)
    except PlanCountOverflow as e:
        record["plans"] = None
        logger.warning(str(e))
    try:
        record["strings"] = count_strings(spec, x, max_space=args.max_space or settings.MAX_SPACE)
    except SpaceBudgetExceeded as e:
        record["strings"] = None
        logger.warning(str(e))
    _emit(record)
    return EXIT_OK


def cmd_sample(args) -> int:
    import numpy as np
    from perturb.matching import detokenize
    from perturb.space import sample_sequential
    spec = _spec(args)
    x = _tokens(spec, args.text)
    rng = np.random.default_rng(args.seed)
    for _ in range(args.n):
        print(detokenize(sample_sequential(spec, x, rng, args.max_space), spec.alphabet))
    return EXIT_OK


def cmd_abstract(args) -> int:
    from abstraction.hull import abstract_space
    from ibp.propagate import propagate
    classifier = _classifier(args)
    spec = _spec(args)
    x = _tokens(spec, args.text)
    box = abstract_space(spec, x, classifier.embeddings)
    record = {"text": args.text, "spec": spec.describe(), "box": box.to_dict()}
    if args.bounds:
        record["logits"] = propagate(classifier.model, box.truncate(classifier.max_len)).to_dict()
    _emit(record)
    return EXIT_OK


def _split(args, spec):
    from train.config import parse_split, split_spec
    if not args.split:
        return spec, spec.subset(())
    return split_spec(spec, parse_split(args.split))


def cmd_certify(args) -> int:
    from ibp.certify import Verdict, certify_example
    classifier = _classifier(args)
    spec = _spec(args)
    spec_aug, spec_abs = _split(args, spec)
    dataset = _dataset(args, classifier)
    counts = {verdict.value: 0 for verdict in Verdict}
    for index, example in enumerate(dataset):
        result = certify_example(classifier, spec_aug, spec_abs, example.tokens, example.label, spec, args.max_space)
        counts[result.verdict.value] += 1
        _emit({"index": index, **result.to_dict(classifier.alphabet)})
    _emit({"summary": counts, "n": len(dataset)})
    return EXIT_OK


def cmd_attack(args) -> int:
    from attack.report import attack_example
    classifier = _classifier(args)
    spec = _spec(args)
    dataset = _dataset(args, classifier)
    flipped = 0
    for index, example in enumerate(dataset):
        record = attack_example(classifier, spec, example, args.method, args.beam_k, args.max_space)
        flipped += record.flipped
        _emit({"index": index, **record.to_dict(classifier.alphabet)})
    _emit({"summary": {"flipped": flipped, "n": len(dataset)}})
    return EXIT_OK


def cmd_train(args) -> int:
    from corpus.dataset import load_dataset
    from dsl.models import AlphabetMode
    from train.config import TrainConfig, parse_split
    from train.trainer import train_classifier
    spec = _spec(args, required=args.mode != "normal")
    alphabet = spec.alphabet if spec is not None else AlphabetMode(args.alphabet or "char")
    train_set = load_dataset(args.data, alphabet, args.max_len)
    validation = load_dataset(args.val, alphabet, args.max_len, train_set.num_classes) if args.val else None
    config = TrainConfig(
        mode=args.mode,
        epochs=args.epochs,
        batch_size=args.batch,
        lr=args.lr,
        lambda_warm=args.lambda_warm,
        augment_k=args.augment_k or settings.AUGMENT_K,
        beam_k=args.beam_k or settings.TRAIN_BEAM_K,
        seed=args.seed,
        patience=args.patience,
        split=parse_split(args.split) if args.split else {},
        max_space=args.max_space,
        threads=args.threads,
    )
    result = train_classifier(
        train_set, spec, config, _resources(args), preset=args.preset, validation=validation,
        max_len=args.max_len, embeddings_path=args.embeddings, log_path=args.log,
    )
    out = Path(args.out) if args.out else settings.OUTPUT_DIR / "model.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    result.classifier.save(out, metadata={"train": config.model_dump(mode="json"), **result.to_dict()})
    logger.info(f"Saved model to {out}")
    _emit(result.to_dict())
    return EXIT_OK


def cmd_eval(args) -> int:
    from evaluation.report import run_report, save_report
    classifier = _classifier(args)
    spec = _spec(args)
    dataset = _dataset(args, classifier)
    report = run_report(classifier, spec, dataset, args.beam_k, args.max_space, args.seed, args.threads)
    print(report.format_table())
    if args.report:
        save_report(report, args.report, classifier.alphabet)
        logger.info(f"Wrote report to {args.report}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    from evaluation.sweep import format_tsv, robustness_sweep
    classifier = _classifier(args)
    spec = _spec(args)
    dataset = _dataset(args, classifier)
    deltas = [int(d) for d in args.deltas.split(",") if d.strip()]
    table = format_tsv(robustness_sweep(classifier, spec, dataset, args.rule, deltas, args.max_space, args.threads))
    if args.out:
        Path(args.out).write_text(table, encoding="utf-8")
    else:
        sys.stdout.write(table)
    return EXIT_OK


# =============================================================================
# Argument Parsing
# =============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Programmable perturbation spaces and robust training for text classifiers",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s --spec "{SwapPair:1, SubAdj:1}" count "abcde"
  %(prog)s --spec data/specs/nice.yaml enumerate "nice"
  %(prog)s --spec data/specs/swap_subadj.yaml certify --model runs/model.json --data test.tsv --split SwapPair=aug,SubAdj=abs
        """,
    )
    parser.add_argument("--spec", help="Spec file or inline '{Name:delta, ...}'")
    parser.add_argument("--resources", help="Resource directory with tables/ and classes/")
    parser.add_argument("--alphabet", choices=["char", "word"], help="Alphabet for inline specs")
    parser.add_argument("--seed", type=int, default=settings.SEED)
    parser.add_argument("--threads", type=int, default=settings.THREADS)
    parser.add_argument("--log-level", default=settings.LOG_LEVEL)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", help="List every string of S(x)")
    p.add_argument("text")
    p.add_argument("--max", type=int, help="Stop after this many strings")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("count", help="Count plans and distinct strings of S(x)")
    p.add_argument("text")
    p.add_argument("--max-space", type=int)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("sample", help="Random augmentations of x")
    p.add_argument("text")
    p.add_argument("-n", type=int, default=5)
    p.add_argument("--max-space", type=int)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("abstract", help="Interval box over the embeddings of S(x)")
    p.add_argument("text")
    p.add_argument("--model", required=True)
    p.add_argument("--bounds", action="store_true", help="Also propagate the box to logit bounds")
    p.set_defaults(func=cmd_abstract)

    for name, func, help_text in (
        ("certify", cmd_certify, "Certify, refute or give up per example"),
        ("attack", cmd_attack, "Attack every example"),
        ("eval", cmd_eval, "Normal, HotFlip and exhaustive accuracy"),
        ("sweep", cmd_sweep, "Exhaustive accuracy over one rule's budgets"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--model", required=True)
        p.add_argument("--data", required=True, help="label<TAB>text file")
        p.add_argument("--limit", type=int, help="Only the first N examples")
        p.add_argument("--max-space", type=int)
        p.set_defaults(func=func)
        if name == "certify":
            p.add_argument("--split", help="Rule assignment, e.g. SwapPair=aug,SubAdj=abs")
        if name in ("attack", "eval"):
            p.add_argument("--beam-k", type=int)
        if name == "attack":
            p.add_argument("--method", choices=["hotflip", "search"], default="hotflip")
        if name == "eval":
            p.add_argument("--report", help="Write the JSON report here")
        if name == "sweep":
            p.add_argument("--rule", required=True)
            p.add_argument("--deltas", default="0,1,2,3")
            p.add_argument("--out", help="TSV output file (default: stdout)")

    p = sub.add_parser("train", help="Train a classifier")
    p.add_argument("--data", required=True)
    p.add_argument("--val", help="Validation file (default: split off the training data)")
    p.add_argument("--mode", default="normal",
                   choices=["normal", "random-aug", "hotflip-aug", "a3t-hotflip", "a3t-search", "abstract-only"])
    p.add_argument("--split", help="Rule assignment, e.g. SwapPair=aug,SubAdj=abs")
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--batch", type=int, default=32)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--lambda-warm", type=float, default=0.5)
    p.add_argument("--augment-k", type=int)
    p.add_argument("--beam-k", type=int)
    p.add_argument("--patience", type=int, default=5)
    p.add_argument("--max-space", type=int)
    p.add_argument("--max-len", type=int, default=64)
    p.add_argument("--preset", default="desk")
    p.add_argument("--embeddings", help="Pretrained vectors (token v1 ... vd)")
    p.add_argument("--log", help="JSON-lines training log")
    p.add_argument("--out", help="Checkpoint path (default: <A3T_OUTPUT_DIR>/model.json)")
    p.set_defaults(func=cmd_train)
    return parser


# =============================================================================
# Main
# =============================================================================

def main(argv: Optional[List[str]] = None) -> int:
    from abstraction.interval import AbstractionError
    from corpus.dataset import DataError
    from dsl.models import SpecError
    from evaluation.report import EvaluationError
    from ibp.transfer import BoundError
    from nn.checkpoint import CheckpointError
    from nn.layers import ModelError
    from perturb.models import PlanError
    from train.config import TrainingError

    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    )
    for warning in settings.validate():
        logger.warning(f"Config: {warning}")

    try:
        return args.func(args)
    except (DataError, CheckpointError, OSError) as e:
        logger.error(f"Data error: {e}")
        return EXIT_DATA
    except (SpecError, ValidationError, ModelError, TrainingError, AbstractionError, BoundError, PlanError) as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    except EvaluationError as e:
        logger.error(f"Self-check failed: {e}")
        return EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
