"""Command-line front end: run flows, verification suites, and cap tables.

Subcommands
-----------
flow      --config PATH [--out DIR] [--format csv|json] [--seed N]
verify    SUITE [--config PATH] [--out DIR] [--format csv|json] [--seed N]
captable  --theta T --n N [--r-min A --r-max B --r-count M] [--out DIR]

Exit codes: 0 success (verify: all checks passed), 1 verify found failures,
2 numerical failure, 3 malformed configuration or unknown suite.  The
environment variable CAPFLOW_THREADS sets the parallel width of suites.
Reports write delimited data (CSV/JSON) plus rendered PNG figures.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import flow, plotting, quermass, verify

SUMMARY_SCHEMA = "capflow-summary-v1"


class ConfigError(ValueError):
    pass


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


def _flow_config(cfg: dict) -> flow.FlowConfig:
    known = {
        "n", "theta", "flow_kind", "F_spec", "mode", "N_beta", "N_xi",
        "dt_safety", "t_max", "stop_min_F", "stop_max_abs_u",
        "stop_max_angle_residual", "monitor_cadence", "max_du_per_step", "initial",
    }
    unknown = set(cfg) - known - {"seed", "out", "format"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "n" not in cfg or "theta" not in cfg:
        raise ConfigError("config must set 'n' and 'theta'")
    kwargs = {k: v for k, v in cfg.items() if k in known}
    if "F_spec" in kwargs:
        kwargs["F_spec"] = tuple(kwargs["F_spec"])
    try:
        return flow.FlowConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"not serializable: {type(obj)}")


def cmd_flow(args) -> int:
    try:
        cfg = _load_config(args.config)
        fconfig = _flow_config(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    try:
        trace = flow.run(fconfig)
    except flow.FlowAborted as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3
    if trace.stop_reason in ("nonfinite", "convexity_loss"):
        print(f"numerical failure: {trace.stop_reason}", file=sys.stderr)
        return 2
    if args.format == "csv":
        (outdir / "trace.csv").write_text(trace.to_csv())
    else:
        payload = {
            "schema": flow.TRACE_SCHEMA_VERSION,
            "columns": trace.columns,
            "rows": [[float(x) for x in r] for r in trace.rows],
        }
        (outdir / "trace.json").write_text(
            json.dumps(payload, sort_keys=True, default=_json_default)
        )
    summary = {
        "schema": SUMMARY_SCHEMA,
        "config": asdict(fconfig),
        "seed": args.seed,
        "stop_reason": trace.stop_reason,
        "steps": int(len(trace.step_t)),
        "rows": trace.n_rows,
        "final": dict(zip(trace.columns, [float(x) for x in trace.rows[-1]])),
    }
    (outdir / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True, default=_json_default)
    )
    figures = plotting.render_trace_figures(trace, outdir)
    print(f"flow finished: stop={trace.stop_reason}, rows={trace.n_rows}, "
          f"wrote {args.out} (+{len(figures)} figures)")
    return 0


def cmd_verify(args) -> int:
    if args.suite not in verify.SUITES:
        print(f"unknown suite {args.suite!r}; choose from {verify.SUITES}",
              file=sys.stderr)
        return 3
    try:
        cfg = _load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    try:
        reports = verify.run_suite(args.suite, cfg or None)
    except (ValueError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3
    except (ArithmeticError, flow.FlowAborted) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    (outdir / "report.json").write_text(verify.reports_to_json(reports))
    plotting.render_report_figure(reports, outdir)
    print(verify.summary_table(reports))
    return 0 if all(r.passed for r in reports) else 1


def cmd_captable(args) -> int:
    try:
        if args.r_count < 1 or args.r_min <= 0 or args.r_max <= args.r_min:
            raise ConfigError("radius grid must be nonempty with 0 < r_min < r_max")
        if not 0.0 < args.theta <= math.pi / 2:
            raise ConfigError("theta must lie in (0, pi/2]")
        r_values = np.geomspace(args.r_min, args.r_max, args.r_count)
        table = quermass.cap_reference_f(args.theta, args.n, r_values=r_values,
                                         N_beta=args.N_beta)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "captable.csv").write_text(table.to_csv())
    plotting.render_captable_figure(table, outdir)
    print(f"cap table written to {args.out} "
          f"({args.r_count} radii + flat endpoint, n={args.n})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="capflow", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    pf = sub.add_parser("flow", help="run a curvature flow from a JSON config")
    pf.add_argument("--config", required=True)
    pf.add_argument("--out", default="out")
    pf.add_argument("--format", choices=("csv", "json"), default="csv")
    pf.add_argument("--seed", type=int, default=0)
    pf.set_defaults(func=cmd_flow)

    pv = sub.add_parser("verify", help="run a verification suite")
    pv.add_argument("suite")
    pv.add_argument("--config", default=None)
    pv.add_argument("--out", default="out")
    pv.add_argument("--format", choices=("csv", "json"), default="json")
    pv.add_argument("--seed", type=int, default=0)
    pv.set_defaults(func=cmd_verify)

    pc = sub.add_parser("captable", help="tabulate cap quermassintegrals")
    pc.add_argument("--theta", type=float, required=True)
    pc.add_argument("--n", type=int, required=True)
    pc.add_argument("--r-min", type=float, default=0.1)
    pc.add_argument("--r-max", type=float, default=50.0)
    pc.add_argument("--r-count", type=int, default=64)
    pc.add_argument("--N-beta", type=int, default=200)
    pc.add_argument("--out", default="out")
    pc.add_argument("--seed", type=int, default=0)
    pc.set_defaults(func=cmd_captable)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
