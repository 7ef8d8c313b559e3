"""Command-line interface.

Subcommands: validate, synth, warp, sync, report, bev, serve.
Exit codes: 0 success, 2 unreadable/unparsable input, 3 empty timeline,
4 frame index out of range.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bev import BevConfig, load_style, project_topdown, render_svg
from .distance import resolve_profile
from .errors import (
    DocumentError,
    EmptyTimelineError,
    GraphError,
    IndexOutOfRangeError,
    OrSceneError,
)
from .report import ReporterConfig, diff_graphs, render_report
from .sync import alignment_to_json, cost_matrix, dtw_align
from .synth import apply_time_warp, load_script, random_warp, synth_procedure
from .timeline_io import load_timeline, save_timeline

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_EMPTY = 3
EXIT_RANGE = 4


def _load(path: str):
    try:
        return load_timeline(path)
    except FileNotFoundError:
        _fail(f"cannot read {path}: no such file", EXIT_PARSE)
    except (DocumentError, GraphError, OSError) as exc:
        _fail(f"{path}: {exc}", EXIT_PARSE)


class _Exit(Exception):
    def __init__(self, code: int):
        self.code = code


def _fail(message: str, code: int):
    print(f"error: {message}", file=sys.stderr)
    raise _Exit(code)


def _cmd_validate(args) -> int:
    t = _load(args.path)
    print(f"{args.path}: timeline '{t.id}' with {len(t)} frames is valid")
    return EXIT_OK


def _cmd_synth(args) -> int:
    try:
        script = load_script(args.script)
    except FileNotFoundError:
        _fail(f"cannot read script {args.script}", EXIT_PARSE)
    except json.JSONDecodeError as exc:
        _fail(f"script {args.script}: {exc}", EXIT_PARSE)
    try:
        timeline = synth_procedure(script, seed=args.seed)
    except OrSceneError as exc:
        _fail(str(exc), EXIT_PARSE)
    save_timeline(timeline, args.out)
    print(f"wrote {len(timeline)} frames to {args.out}")
    return EXIT_OK


def _cmd_warp(args) -> int:
    t = _load(args.path)
    if len(t) == 0:
        _fail(f"{args.path}: timeline is empty", EXIT_EMPTY)
    warp = random_warp(len(t), seed=args.seed, max_repeat=args.max_repeat,
                       drop_prob=args.drop_prob)
    warped, truth = apply_time_warp(t, warp)
    save_timeline(warped, args.out)
    print(f"wrote {len(warped)} warped frames to {args.out}")
    if args.truth_out:
        Path(args.truth_out).write_text(alignment_to_json(truth), encoding="utf-8")
        print(f"wrote ground-truth alignment to {args.truth_out}")
    return EXIT_OK


def _cmd_sync(args) -> int:
    a = _load(args.path_a)
    b = _load(args.path_b)
    try:
        profile = resolve_profile(args.weights)
    except FileNotFoundError:
        _fail(f"cannot read weight profile {args.weights}", EXIT_PARSE)
    except (OrSceneError, json.JSONDecodeError, KeyError, ValueError) as exc:
        _fail(f"weight profile {args.weights}: {exc}", EXIT_PARSE)
    try:
        matrix = cost_matrix(a, b, profile)
    except EmptyTimelineError as exc:
        _fail(str(exc), EXIT_EMPTY)
    path = dtw_align(matrix, band=args.band)
    if args.out:
        Path(args.out).write_text(alignment_to_json(path), encoding="utf-8")
    print(f"total cost {path.total_cost:.6f}, path length {len(path)}")
    return EXIT_OK


def _cmd_report(args) -> int:
    t = _load(args.path)
    for idx in (args.frame_a, args.frame_b):
        if not 0 <= idx < len(t):
            _fail(f"frame {idx} out of range [0, {len(t)})", EXIT_RANGE)
    cfg = ReporterConfig(report_movement=args.movement)
    changes = diff_graphs(t.frames[args.frame_a], t.frames[args.frame_b], cfg)
    for sentence in render_report(changes):
        print(sentence)
    if args.json_out:
        Path(args.json_out).write_text(
            json.dumps(changes.to_dict(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
    return EXIT_OK


def _cmd_bev(args) -> int:
    t = _load(args.path)
    if not 0 <= args.frame < len(t):
        _fail(f"frame {args.frame} out of range [0, {len(t)})", EXIT_RANGE)
    layout = project_topdown(
        t.frames[args.frame], BevConfig(room_extent=t.room_extent)
    )
    style = load_style(args.style) if args.style else load_style()
    svg = render_svg(layout, style)
    Path(args.out).write_text(svg, encoding="utf-8")
    print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .api import create_app
    from .config import load_app_config

    try:
        config = load_app_config(args.config)
    except (OSError, json.JSONDecodeError, OrSceneError) as exc:
        _fail(f"config {args.config}: {exc}", EXIT_PARSE)
    if args.port is not None:
        from dataclasses import replace

        config = replace(config, port=args.port)
    uvicorn.run(create_app(config), host=args.host, port=config.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orscene",
        description="Scene-graph tools for OR procedures: "
        "synthesize, validate, synchronize, report, render.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and validate a timeline document")
    p.add_argument("path")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("synth", help="generate a synthetic procedure timeline")
    p.add_argument("--script", default="default", help="packaged script name or JSON path")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("warp", help="apply a seeded random time warp to a timeline")
    p.add_argument("path")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-repeat", type=int, default=3)
    p.add_argument("--drop-prob", type=float, default=0.1)
    p.add_argument("--out", required=True)
    p.add_argument("--truth-out", help="also write the ground-truth alignment JSON")
    p.set_defaults(func=_cmd_warp)

    p = sub.add_parser("sync", help="align two timelines by dynamic time warping")
    p.add_argument("path_a")
    p.add_argument("path_b")
    p.add_argument("--weights", default="sync-default", help="preset name or profile JSON path")
    p.add_argument("--band", type=int, default=None, help="optional alignment band width")
    p.add_argument("--out", help="write the alignment result JSON here")
    p.set_defaults(func=_cmd_sync)

    p = sub.add_parser("report", help="print the change report between two frames")
    p.add_argument("path")
    p.add_argument("frame_a", type=int)
    p.add_argument("frame_b", type=int)
    p.add_argument("--movement", action="store_true", help="also report node movement")
    p.add_argument("--json-out", help="write the structured change set here")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("bev", help="render the Bird's-Eye-View SVG of one frame")
    p.add_argument("path")
    p.add_argument("frame", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--style", help="style JSON overriding the packaged one")
    p.set_defaults(func=_cmd_bev)

    p = sub.add_parser("serve", help="run the HTTP API")
    p.add_argument("--config", help="service config JSON")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=None)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _Exit as exc:
        return exc.code
    except IndexOutOfRangeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RANGE
    except EmptyTimelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except OrSceneError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
