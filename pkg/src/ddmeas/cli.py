"""``ddmeas`` command line: verify, simulate, expand."""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import config as cfgmod
from . import protocols as pr
from . import verify

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
MAX_EXPAND = 6


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on its own; raise instead so main() owns the exit path
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _color(text: str, code: str, stream) -> str:
    if os.environ.get("NO_COLOR") or not getattr(stream, "isatty", lambda: False)():
        return text
    return f"\033[{code}m{text}\033[0m"


def _write(text: str, path) -> None:
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def report_text(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def cmd_verify(args) -> int:
    if args.scope not in verify.SCOPES:
        raise UsageError(f"unknown scope {args.scope!r}; choose from {', '.join(verify.SCOPES)}")
    report = verify.build_report(args.scope, args.seed)
    _write(report_text(report), args.out)
    err = sys.stderr
    for rec in report["records"]:
        if not rec["ok"]:
            print(_color("FAIL", "31", err), rec["check_id"], json.dumps(rec["params"], sort_keys=True),
                  f"err={rec['max_abs_error']:.3e}", file=err)
    s = report["summary"]
    status = _color("PASS", "32", err) if report["passed"] else _color("FAIL", "31", err)
    print(f"{status} scope={args.scope} seed={args.seed} checks={s['total']} failed={s['failed']} "
          f"wall={report['timing']['wall_time_s']}s", file=err)
    return EXIT_OK if report["passed"] else EXIT_FAIL


def cmd_simulate(args) -> int:
    try:
        cfg = cfgmod.load_config(args.config)
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from None
    header, rows, table = cfgmod.simulate(cfg)
    fmt = args.format or cfg.output.format
    out = args.out if args.out is not None else cfg.output.path
    if fmt == "csv":
        text = cfgmod.rows_to_csv(header, rows)
    else:
        text = cfgmod.rows_to_json(cfg, header, rows, table.meta) + "\n"
    _write(text, out)
    if table.meta.get("flag"):
        print(f"note: {table.meta['flag']}", file=sys.stderr)
    return EXIT_OK


def expand_text(n: int) -> str:
    terms = pr.dd_expansion(n)
    lines = [pr.format_expansion(terms), "", f"{'coeff':>6}  {'k':>2}  {'times':<14} term"]
    for t in terms:
        times = ",".join(f"t{s}" for s in t.slots) or "-"
        lines.append(f"{t.coefficient:>+6d}  {t.k:>2}  {times:<14} {t.label()}")
    count, weighted = pr.expansion_bookkeeping(n)
    lines += ["", f"terms: {count}  sum coeff*2^-k: {weighted:g}"]
    return "\n".join(lines) + "\n"


def cmd_expand(args) -> int:
    if not 1 <= args.n <= MAX_EXPAND:
        raise UsageError(f"n must be in 1..{MAX_EXPAND}, got {args.n}")
    _write(expand_text(args.n), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ddmeas", description="Pulse/measurement duality checks and simulations.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", help="run identity checks and write a JSON report")
    v.add_argument("--scope", default="all", help=f"one of: {', '.join(verify.SCOPES)}")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out", default=None, help="report path (default: stdout)")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("simulate", help="evaluate a protocol from a JSON config")
    s.add_argument("--config", required=True)
    s.add_argument("--out", default=None, help="overrides output.path; '-' for stdout")
    s.add_argument("--format", choices=("json", "csv"), default=None, help="overrides output.format")
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("expand", help="print the measurement expansion of an all-x pulse sequence")
    e.add_argument("n", type=int, help="number of evolution segments (1..6)")
    e.add_argument("--out", default=None)
    e.set_defaults(func=cmd_expand)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except cfgmod.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
