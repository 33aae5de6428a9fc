"""Command-line entry point.

Subcommands: generate (build a dataset variant and emit JSONL splits),
solve (label one theory file), validate (re-verify an emitted split),
stats (summary statistics of a split), score (grade a prediction file).
Data and reports go to stdout or files; logs and the resolved configuration
go to stderr. Exit codes: 0 success, 2 usage/config error, 3 generation
budget exhausted, 4 validation failures found, 5 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .evaluate import DuplicateId, UnknownId, annotation_sample, score
from .knowledge import KnowledgeOracle
from .logic import literal_from_str, theory_from_dict
from .pipeline import (
    ConfigError,
    GenerationBudgetError,
    build_split,
    dataset_stats,
    emit_jsonl,
    read_jsonl,
    resolve_config,
    verify_row,
)
from .render import render_proof
from .solver import SolverError, entail
from .vocab import SPLITS

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BUDGET = 3
EXIT_VALIDATION = 4
EXIT_IO = 5


def log(message: str) -> None:
    print(message, file=sys.stderr)


def _parse_overrides(pairs: list[str]) -> dict[str, str]:
    overrides = {}
    for pair in pairs:
        key, eq, value = pair.partition("=")
        if not eq:
            raise ConfigError(f"--set expects key=value, got {pair!r}")
        overrides[key.strip()] = value.strip()
    return overrides


def cmd_generate(args: argparse.Namespace) -> int:
    overrides = _parse_overrides(args.set or [])
    if args.seed is not None:
        overrides["seed"] = str(args.seed)
    cfg = resolve_config(args.config, overrides)
    log(f"resolved config: {json.dumps(cfg.to_flat())}")
    out_dir = Path(args.out)
    try:
        for split in SPLITS:
            examples = build_split(cfg, split, jobs=args.jobs)
            path = out_dir / f"{split}.jsonl"
            emit_jsonl(examples, path)
            log(f"wrote {len(examples)} examples to {path}")
    except GenerationBudgetError as exc:
        log(f"generation budget exhausted: {exc}")
        return EXIT_BUDGET
    except OSError as exc:
        log(f"I/O error: {exc}")
        return EXIT_IO
    return EXIT_OK


def cmd_solve(args: argparse.Namespace) -> int:
    try:
        data = json.loads(Path(args.input).read_text(encoding="utf-8"))
    except OSError as exc:
        log(f"I/O error: {exc}")
        return EXIT_IO
    except json.JSONDecodeError as exc:
        log(f"not valid JSON: {exc}")
        return EXIT_CONFIG
    try:
        theory = theory_from_dict(data)
        question = literal_from_str(args.question or data["question"])
    except (KeyError, ValueError) as exc:
        log(f"bad theory file: {exc}")
        return EXIT_CONFIG
    try:
        result = entail(theory, question, KnowledgeOracle())
    except SolverError as exc:
        log(f"solver error: {exc}")
        return EXIT_CONFIG
    print(result.label.value)
    print(render_proof(result.proof, theory, question))
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        rows = read_jsonl(Path(args.input))
    except OSError as exc:
        log(f"I/O error: {exc}")
        return EXIT_IO
    oracle = KnowledgeOracle()
    failures = 0
    for row in rows:
        problems = verify_row(row, oracle)
        if problems:
            failures += 1
            for p in problems:
                log(f"{row['id']}: {p}")
    log(f"validated {len(rows)} rows: {len(rows) - failures} ok, {failures} failed")
    print(json.dumps({"rows": len(rows), "ok": len(rows) - failures,
                      "failed": failures}))
    return EXIT_VALIDATION if failures else EXIT_OK


def cmd_stats(args: argparse.Namespace) -> int:
    try:
        rows = read_jsonl(Path(args.input))
    except OSError as exc:
        log(f"I/O error: {exc}")
        return EXIT_IO
    print(json.dumps(dataset_stats(rows), indent=2, sort_keys=False))
    return EXIT_OK


def cmd_score(args: argparse.Namespace) -> int:
    try:
        gold = read_jsonl(Path(args.gold))
        predictions = read_jsonl(Path(args.pred))
    except OSError as exc:
        log(f"I/O error: {exc}")
        return EXIT_IO
    try:
        report = score(predictions, gold)
    except (DuplicateId, UnknownId) as exc:
        log(f"bad prediction file: {exc!r}")
        return EXIT_CONFIG
    output = report.to_dict()
    if args.annotate_sample:
        output["annotation_sample"] = annotation_sample(
            gold, predictions, args.annotate_sample)
    print(json.dumps(output, indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="defgame",
        description="Defeasible reasoning dataset factory and evaluation harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="build a dataset variant as JSONL splits")
    p.add_argument("--config", required=True,
                   help="preset name (e.g. main-d1) or path to a .cfg file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a config key (repeatable)")
    p.add_argument("--seed", type=int, default=None, help="override the dataset seed")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="label a theory JSON file")
    p.add_argument("--input", required=True, help="theory JSON path")
    p.add_argument("--question", default=None,
                   help="question literal, e.g. '(dog, unite with, cat)'")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("validate", help="re-verify labels and proofs of a split")
    p.add_argument("--input", required=True, help="JSONL path")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("stats", help="summary statistics of a split")
    p.add_argument("--input", required=True, help="JSONL path")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("score", help="score a prediction file against gold")
    p.add_argument("--gold", required=True, help="gold JSONL path")
    p.add_argument("--pred", required=True, help="prediction JSONL path")
    p.add_argument("--annotate-sample", type=int, default=0, metavar="N",
                   help="include N examples for manual proof annotation")
    p.set_defaults(func=cmd_score)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        log(f"config error: {exc}")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
