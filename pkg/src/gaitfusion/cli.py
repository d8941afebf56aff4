"""Command-line entry point: ``analyze``, ``generate`` and ``stream``.

Exit codes: 0 success, 2 input or validation error, 3 internal contract violation.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import yaml

from .config import Config, load_config
from .errors import GaitError, InputError
from .pipeline import analyze_session
from .report import render_plot_data, render_report
from .signal_model import parse_log, serialize_log
from .synth import generate, profile_by_name

EXIT_OK, EXIT_INPUT, EXIT_INTERNAL = 0, 2, 3


def _describe(exc: Exception) -> str:
    # lead with the contract that failed unless the message already does
    name, msg = type(exc).__name__, str(exc)
    return msg if msg.startswith(name) else f"{name}: {msg}"


def truth_path(output: Path) -> Path:
    return output.with_name(output.name + ".truth.yaml")


def cmd_analyze(args) -> int:
    cfg = load_config(args.config) if args.config else Config()
    try:
        data = Path(args.input).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read input {args.input}: {exc}") from None
    session = parse_log(data)
    analysis = analyze_session(session, cfg)
    Path(args.output).write_text(render_report(analysis, session), encoding="utf-8")
    if args.plot_data:
        Path(args.plot_data).write_text(render_plot_data(analysis, session), encoding="utf-8")
    return EXIT_OK


def cmd_generate(args) -> int:
    profile = profile_by_name(args.profile, seed=args.seed)
    session, truth = generate(profile, args.duration)
    out = Path(args.output)
    out.write_bytes(serialize_log(session))
    truth_path(out).write_text(yaml.safe_dump(truth.to_dict(), sort_keys=False, default_flow_style=None, width=120),
                               encoding="utf-8")
    return EXIT_OK


def cmd_stream(args) -> int:
    from .stream import GaitStreamServer, parse_address

    cfg = load_config(args.config) if args.config else Config()
    server = GaitStreamServer(parse_address(args.listen), args.output_dir, cfg)
    host, port = server.server_address[:2]
    print(f"listening on {host}:{port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gaitfusion", description="Two-foot IMU + pressure insole gait analysis.")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="analyze a CSV log and write a report")
    a.add_argument("--input", required=True)
    a.add_argument("--config")
    a.add_argument("--output", required=True)
    a.add_argument("--plot-data", dest="plot_data")
    a.set_defaults(func=cmd_analyze)

    g = sub.add_parser("generate", help="write a synthetic log plus its ground truth")
    g.add_argument("--profile", required=True)
    g.add_argument("--duration", type=float, required=True, help="seconds")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--output", required=True)
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("stream", help="serve the line protocol over TCP")
    s.add_argument("--listen", required=True, help="HOST:PORT")
    s.add_argument("--output-dir", dest="output_dir", required=True)
    s.add_argument("--config")
    s.set_defaults(func=cmd_stream)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {_describe(exc)}", file=sys.stderr)
        return EXIT_INPUT
    except (GaitError, ValueError) as exc:
        print(f"internal error: {_describe(exc)}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
