"""Command line interface.

Exit codes: 0 success, 1 metric or judgement mismatch (figure diffs,
contradictory verdicts), 2 rejected input, 3 nothing to do.

The engine is single-threaded; IDEVAL_THREADS, when set, must be a
positive integer and caps the workers the engine may use (today that cap
is always satisfied). An invalid value is rejected rather than ignored.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .errors import (
    ConfigError,
    IdEvalError,
    InputError,
    JudgementConflict,
    NothingToDo,
)
from .figures import FIGURE_IDS, run_figures
from .io import (
    load_inputs,
    load_run_config,
    read_clustering_tsv,
    write_assignment_tsv,
    write_materialized,
)
from .judgement import (
    estimate_quality_from_judgements,
    ingest_verdicts,
    sample_pairs,
    write_pairs_tsv,
)
from .metrics import evaluate, render_table, report_to_json_dict
from .model import KIND_HISTORICAL
from .schemes import assign_by_majority_vote, assign_fresh_ids


def _check_thread_cap() -> None:
    raw = os.environ.get("IDEVAL_THREADS")
    if raw is None:
        return
    try:
        cap = int(raw)
    except ValueError:
        cap = 0
    if cap < 1:
        raise ConfigError(
            f"IDEVAL_THREADS must be a positive integer, got {raw!r}"
        )


def _diagnostic(exc: IdEvalError) -> None:
    payload = {"error": type(exc).__name__, "detail": str(exc)}
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)


def _emit_report(report, render: str, output: Path | None) -> None:
    payload = json.dumps(report_to_json_dict(report), indent=2, sort_keys=True)
    payload += "\n"
    if output is not None:
        Path(output).write_text(payload, encoding="utf-8")
    if render in ("json", "both"):
        sys.stdout.write(payload)
    if render in ("table", "both"):
        sys.stdout.write(render_table(report))


def _add_render_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--render", choices=("json", "table", "both"), default="table",
        help="what to print on stdout (default: table)",
    )
    parser.add_argument(
        "--output", type=Path, default=None,
        help="also write the JSON report to this file",
    )


def _cmd_evaluate(args) -> int:
    config = load_run_config(args.config)
    inputs = load_inputs(config)
    report = evaluate(inputs, per_element=args.per_element)
    _emit_report(report, args.render, args.output or config.output)
    return 0


def _cmd_transform(args) -> int:
    config = load_run_config(args.config)
    if config.materialized is not None:
        raise ConfigError("transform needs a raw run config, not a materialized one")
    inputs = load_inputs(config)
    config_path = write_materialized(inputs, args.output)
    print(config_path)
    return 0


def _cmd_assign(args) -> int:
    items, item_weights = read_clustering_tsv(args.items)
    if args.scheme == "majority":
        if args.hist is None:
            raise ConfigError("--scheme majority requires --hist")
        hist, hist_weights = read_clustering_tsv(
            args.hist, kind=KIND_HISTORICAL, epoch=args.hist_epoch
        )
        result = assign_by_majority_vote(
            items, hist, hist_weights, prefix=args.prefix, start=args.start
        )
    else:
        result = assign_fresh_ids(items, prefix=args.prefix, start=args.start)
    write_assignment_tsv(args.output, result.labels, item_weights)
    print(
        f"assigned {len(result.labels.clusters)} ids "
        f"({len(result.minted)} minted, {len(result.adopted)} adopted)"
    )
    return 0


def _cmd_sample_pairs(args) -> int:
    config = load_run_config(args.config)
    inputs = load_inputs(config)
    judgements = sample_pairs(inputs, args.pairs, args.seed)
    write_pairs_tsv(args.output, judgements)
    judged = len(judgements.judged())
    print(
        f"sampled {len(judgements.pairs)} pairs "
        f"({judged} auto-judged, seed {args.seed})"
    )
    return 0


def _cmd_ingest_verdicts(args) -> int:
    config = load_run_config(args.config)
    inputs = load_inputs(config)
    judgements = ingest_verdicts(args.pairs, args.verdicts)
    report = estimate_quality_from_judgements(inputs, judgements)
    _emit_report(report, args.render, args.output or config.output)
    return 0


def _cmd_figures(args) -> int:
    ids = FIGURE_IDS if args.figure == "all" else (args.figure,)
    results = run_figures(ids)
    failed = 0
    for result in results:
        if result.ok:
            print(f"{result.figure_id}: ok ({len(result.expected)} rows)")
        else:
            failed += 1
            for row, got, want in result.mismatches:
                print(f"{result.figure_id}: {row} got {got} want {want}")
    if failed:
        print(f"{failed} of {len(results)} fixtures mismatched")
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ideval",
        description="Impact and quality metrics for cluster id assignment runs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evaluate", help="compute metrics for a run config")
    p.add_argument("--config", type=Path, required=True)
    p.add_argument(
        "--per-element", action="store_true",
        help="include per-element records in the JSON report",
    )
    _add_render_flags(p)
    p.set_defaults(handler=_cmd_evaluate)

    p = sub.add_parser(
        "transform",
        help="expand a run config into portable clustering/weight files",
    )
    p.add_argument("--config", type=Path, required=True)
    p.add_argument("--output", type=Path, required=True, help="output directory")
    p.set_defaults(handler=_cmd_transform)

    p = sub.add_parser("assign", help="label a clustering with ids")
    p.add_argument("--items", type=Path, required=True,
                   help="item<TAB>group[<TAB>weight] clustering TSV")
    p.add_argument("--scheme", choices=("fresh", "majority"), required=True)
    p.add_argument("--hist", type=Path, default=None,
                   help="historical clustering TSV (majority vote)")
    p.add_argument("--hist-epoch", default="H",
                   help="epoch label for --hist items (default: H)")
    p.add_argument("--prefix", default="id_")
    p.add_argument("--start", type=int, default=1)
    p.add_argument("--output", type=Path, required=True)
    p.set_defaults(handler=_cmd_assign)

    p = sub.add_parser("sample-pairs", help="draw pairs for human judgement")
    p.add_argument("--config", type=Path, required=True)
    p.add_argument("-n", "--pairs", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", type=Path, required=True)
    p.set_defaults(handler=_cmd_sample_pairs)

    p = sub.add_parser(
        "ingest-verdicts", help="fold verdicts into sampled pairs and estimate"
    )
    p.add_argument("--config", type=Path, required=True)
    p.add_argument("--pairs", type=Path, required=True)
    p.add_argument("--verdicts", type=Path, default=None)
    _add_render_flags(p)
    p.set_defaults(handler=_cmd_ingest_verdicts)

    p = sub.add_parser("figures", help="recompute the bundled example tables")
    p.add_argument("figure", nargs="?", default="all",
                   choices=("all",) + FIGURE_IDS)
    p.set_defaults(handler=_cmd_figures)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _check_thread_cap()
        return args.handler(args)
    except JudgementConflict as exc:
        _diagnostic(exc)
        return 1
    except NothingToDo as exc:
        _diagnostic(exc)
        return 3
    except InputError as exc:
        _diagnostic(exc)
        return 2
    except IdEvalError as exc:
        _diagnostic(exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
