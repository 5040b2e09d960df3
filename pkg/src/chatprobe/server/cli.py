"""Command-line interface: serve the API, parse one utterance, run evaluations.

Exit codes: 0 success, 1 runtime failure, 2 usage errors (argparse default).
"""

from __future__ import annotations

import argparse
import json
import sys

from ..evalharness.augment_eval import eval_augmentation
from ..evalharness.parsing_eval import build_goldset, eval_parsing, eval_parsing_sweep
from ..evalharness.report import render_report
from ..parsing.engine import ParseContext, Strategy, Unparseable
from ..workbench import default_resource_dir
from .config import AppConfig, ConfigError, build_workbench


def _add_config_arg(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="path to the TOML configuration file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chatprobe",
        description="Converse with a text-generation backend about its own behavior.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP API")
    _add_config_arg(serve)
    serve.add_argument("--host", default=None)
    serve.add_argument("--port", type=int, default=None)

    parse_cmd = sub.add_parser("parse", help="parse one utterance and print the canonical query")
    _add_config_arg(parse_cmd)
    parse_cmd.add_argument("--utterance", required=True)
    parse_cmd.add_argument("--strategy", choices=[s.value for s in Strategy], default="mp")
    parse_cmd.add_argument("--dataset-size", type=int, default=1000)

    eval_cmd = sub.add_parser("eval", help="run an evaluation")
    eval_sub = eval_cmd.add_subparsers(dest="eval_command", required=True)

    eval_parsing_cmd = eval_sub.add_parser("parsing", help="exact-match parsing accuracy")
    _add_config_arg(eval_parsing_cmd)
    eval_parsing_cmd.add_argument("--goldset", default=None, help="goldset JSONL (default: shipped)")
    eval_parsing_cmd.add_argument("--strategy", choices=[s.value for s in Strategy], default="mp")
    eval_parsing_cmd.add_argument("--max-new-tokens", type=int, default=10)
    eval_parsing_cmd.add_argument("--sweep", action="store_true",
                                  help="evaluate max_new_tokens 10 and 20")
    eval_parsing_cmd.add_argument("--format", choices=["text", "json"], default="text")

    eval_augment_cmd = eval_sub.add_parser("augment", help="augmentation consistency and fluency")
    _add_config_arg(eval_augment_cmd)
    eval_augment_cmd.add_argument("--n", type=int, default=8)
    eval_augment_cmd.add_argument("--seed", type=int, default=0)
    eval_augment_cmd.add_argument("--format", choices=["text", "json"], default="text")

    export_cmd = sub.add_parser("export", help="print the export document of a session snapshot")
    export_cmd.add_argument("--session-file", required=True)

    return parser


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .app import create_app

    config = AppConfig.load(args.config)
    workbench = build_workbench(config)
    app = create_app(workbench, snapshot_dir=config.snapshot_dir, frontend_dir=config.frontend_dir)
    uvicorn.run(app, host=args.host or config.host, port=args.port or config.port)
    return 0


def _cmd_parse(args: argparse.Namespace) -> int:
    config = AppConfig.load(args.config)
    workbench = build_workbench(config)
    ctx = ParseContext(dataset_size=args.dataset_size, max_new_tokens=config.max_new_tokens)
    try:
        result = workbench.engine.parse(
            args.utterance, workbench.prompt_store, ctx, Strategy(args.strategy)
        )
    except Unparseable as exc:
        print(f"unparseable: {exc.reason}", file=sys.stderr)
        return 1
    print(result.render(workbench.catalog))
    return 0


def _cmd_eval_parsing(args: argparse.Namespace) -> int:
    config = AppConfig.load(args.config)
    workbench = build_workbench(config)
    goldset_path = args.goldset or (default_resource_dir() / "goldset.jsonl")
    goldset = build_goldset(goldset_path, workbench.catalog)
    strategy = Strategy(args.strategy)
    if args.sweep:
        reports = eval_parsing_sweep(goldset, workbench.engine, workbench.prompt_store, strategy)
    else:
        reports = [
            eval_parsing(goldset, workbench.engine, workbench.prompt_store, strategy,
                         max_new_tokens=args.max_new_tokens)
        ]
    for report in reports:
        print(render_report(report, args.format))
    return 0


def _cmd_eval_augment(args: argparse.Namespace) -> int:
    config = AppConfig.load(args.config)
    workbench = build_workbench(config)
    report = eval_augmentation(
        workbench.dataset, workbench.executor, workbench.backends, n=args.n, seed=args.seed
    )
    print(render_report(report, args.format))
    return 0


def _cmd_export(args: argparse.Namespace) -> int:
    with open(args.session_file, "r", encoding="utf-8") as handle:
        document = json.load(handle)
    print(json.dumps(document, indent=2, ensure_ascii=False))
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "serve":
            return _cmd_serve(args)
        if args.command == "parse":
            return _cmd_parse(args)
        if args.command == "eval" and args.eval_command == "parsing":
            return _cmd_eval_parsing(args)
        if args.command == "eval" and args.eval_command == "augment":
            return _cmd_eval_augment(args)
        if args.command == "export":
            return _cmd_export(args)
    except (ConfigError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    parser.error("unknown command")
    return 2


if __name__ == "__main__":
    sys.exit(main())
