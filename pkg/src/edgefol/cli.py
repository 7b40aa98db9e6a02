"""Command-line interface: classify, trace, render, verify, survey."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .errors import ConfigError, EdgefolError
from .foliations import (
    FoliationKind,
    build_geometric_bde,
    classify_edge_foliation,
    parse_kind,
)
from .jets import load_jet
from .render import RenderStyle, curves_to_csv, portrait_to_svg, surface_view_to_svg
from .tracer import TraceConfig, project_to_surface, trace_portrait
from .verify import (
    format_survey_report,
    format_verify_report,
    run_survey,
    run_verify,
)

logger = logging.getLogger("edgefol")

_LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING,
               "info": logging.INFO, "debug": logging.DEBUG}


def _setup_logging():
    level = os.environ.get("EDGEFOL_LOG", "warn").lower()
    if level not in _LOG_LEVELS:
        level = "warn"
    logging.basicConfig(format="%(levelname)s %(name)s: %(message)s")
    logger.setLevel(_LOG_LEVELS[level])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="edgefol",
        description="Foliations of cuspidal-edge surfaces: classification, "
                    "tracing, rendering and verification.",
    )
    parser.add_argument("--json", action="store_true",
                        help="machine-readable error output")
    sub = parser.add_subparsers(dest="command", required=True)

    p_classify = sub.add_parser("classify", help="classify one foliation")
    p_classify.add_argument("--jet", required=True, help="jet JSON file")
    p_classify.add_argument("--foliation", required=True,
                            help="lc | asymptotic | characteristic")

    p_trace = sub.add_parser("trace", help="trace a portrait to CSV")
    _add_trace_args(p_trace)
    p_trace.add_argument("--out", required=True, help="output CSV path")

    p_render = sub.add_parser("render", help="render portrait SVG(s)")
    _add_trace_args(p_render)
    p_render.add_argument("--out", required=True, help="domain SVG path")
    p_render.add_argument("--surface", default=None,
                          help="optional surface-view SVG path")
    p_render.add_argument("--camera", default=None,
                          help="orthographic camera direction x,y,z")
    p_render.add_argument("--up", default=None, help="camera up-vector x,y,z")

    p_verify = sub.add_parser("verify", help="run the oracle suites")
    p_verify.add_argument("--trials", type=int, default=200)
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--tol", type=float, default=1e-8)
    p_verify.add_argument("--workers", type=int, default=1)
    p_verify.add_argument("--out", default=None, help="also write report here")

    p_survey = sub.add_parser("survey", help="class frequencies on random jets")
    p_survey.add_argument("--trials", type=int, default=200)
    p_survey.add_argument("--seed", type=int, default=0)
    p_survey.add_argument("--workers", type=int, default=1)
    p_survey.add_argument("--out", default=None, help="also write report here")
    return parser


def _add_trace_args(sub):
    sub.add_argument("--jet", required=True, help="jet JSON file")
    sub.add_argument("--foliation", required=True,
                     help="lc | asymptotic | characteristic")
    sub.add_argument("--box", type=float, default=0.5)
    sub.add_argument("--step", type=float, default=1e-3)
    sub.add_argument("--seeds-per-side", type=int, default=24)
    sub.add_argument("--max-steps", type=int, default=6000)


def _validate_numeric(args):
    for name in ("box", "step", "seeds_per_side", "max_steps", "trials",
                 "workers", "tol"):
        value = getattr(args, name, None)
        if value is not None and value <= 0:
            raise ConfigError(f"--{name.replace('_', '-')} must be positive")
    box = getattr(args, "box", None)
    if box is not None and box > 2.0:
        raise ConfigError("--box must be <= 2 (the normal form is local)")
    seed = getattr(args, "seed", None)
    if seed is not None and seed < 0:
        raise ConfigError("--seed must be nonnegative")


def _trace_setup(args):
    jet = load_jet(args.jet)
    kind = parse_kind(args.foliation)
    config = TraceConfig(box=args.box, step=args.step,
                         seeds_per_side=args.seeds_per_side,
                         max_steps=args.max_steps)
    bde = build_geometric_bde(jet, kind)
    classification = classify_edge_foliation(jet, kind)
    return jet, kind, config, bde, classification


def _parse_vec3(text, flag):
    try:
        parts = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise ConfigError(f"{flag} must be three comma-separated numbers")
    if len(parts) != 3:
        raise ConfigError(f"{flag} must be three comma-separated numbers")
    return parts


def _cmd_classify(args) -> int:
    jet = load_jet(args.jet)
    kind = parse_kind(args.foliation)
    print(classify_edge_foliation(jet, kind).to_json())
    return 0


def _cmd_trace(args) -> int:
    jet, _kind, config, bde, classification = _trace_setup(args)
    portrait = trace_portrait(bde, config)
    logger.info("traced %d curves (%d warnings)", len(portrait.curves),
                portrait.warnings)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(curves_to_csv(portrait, jet))
    print(f"wrote {args.out}: {len(portrait.curves)} curves, "
          f"top_class {classification.top_class.value}")
    return 0


def _cmd_render(args) -> int:
    jet, _kind, config, bde, classification = _trace_setup(args)
    style = RenderStyle()
    if args.camera or args.up:
        style = RenderStyle(
            camera_direction=_parse_vec3(args.camera, "--camera")
            if args.camera else RenderStyle.camera_direction,
            camera_up=_parse_vec3(args.up, "--up")
            if args.up else RenderStyle.camera_up,
        )
    portrait = trace_portrait(bde, config)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(portrait_to_svg(portrait, style,
                                 top_class=classification.top_class.value))
    written = [args.out]
    if args.surface:
        curves3d = project_to_surface(jet, portrait)
        with open(args.surface, "w", encoding="utf-8") as fh:
            fh.write(surface_view_to_svg(curves3d, style))
        written.append(args.surface)
    print("wrote " + ", ".join(written))
    return 0


def _cmd_verify(args) -> int:
    report = run_verify(args.trials, args.seed, args.tol, args.workers)
    text = format_verify_report(report)
    sys.stdout.write(text)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return 0 if report.passed else 1


def _cmd_survey(args) -> int:
    survey = run_survey(args.trials, args.seed, args.workers)
    text = format_survey_report(survey)
    sys.stdout.write(text)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return 0


_COMMANDS = {
    "classify": _cmd_classify,
    "trace": _cmd_trace,
    "render": _cmd_render,
    "verify": _cmd_verify,
    "survey": _cmd_survey,
}


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _validate_numeric(args)
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        _emit_error(args, exc)
        return 2
    except (EdgefolError, OSError, ValueError) as exc:
        _emit_error(args, exc)
        return 2 if isinstance(exc, (OSError, ValueError)) else 1
    except KeyboardInterrupt:  # pragma: no cover
        return 130


def _emit_error(args, exc):
    if getattr(args, "json", False):
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}))
    else:
        print(f"edgefol: error: {exc}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
