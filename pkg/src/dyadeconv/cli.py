"""Batch command-line entry point.

Subcommands:

    simulate    draw linked-triple samples, write CSV + JSON sidecar
    identify    run the three-stage identification, write curves,
                diagnostics JSON, and SVG plots
    deconvolve  invert a curve CSV to a density CSV + SVG
    report      collect a run directory into one HTML summary

Every command is deterministic: identical inputs and flags produce
byte-identical outputs (no timestamps, fixed float formatting).  Exit
status is 0 iff all requested artifacts were written.  The effective
configuration is echoed into every output sidecar.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .analytic import analytic_cf
from .cf import center, ecf
from .deconvolve import invert_cf
from .identify import DeltaSchedule, identify_from_curves, run_oracle_pipeline, run_pipeline
from .model import (
    ComponentDist,
    ModelConfig,
    read_curve_csv,
    validate_cf_curve,
    write_curve_csv,
    FreqGrid,
)
from .simulate import read_samples, sample_components, write_samples
from .svgplot import line_plot_svg


class CLIError(Exception):
    """User-facing failure with a message and nonzero exit."""


# --------------------------------------------------------------------------
# config handling
# --------------------------------------------------------------------------

_COMPONENT_FLAGS = ("alpha", "eta", "eps")


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--c", type=float, default=None, help="override intercept c")
    for name in _COMPONENT_FLAGS:
        p.add_argument(f"--{name}-kind", default=None,
                       help=f"override {name} distribution kind")
        p.add_argument(f"--{name}-scale", type=float, default=None,
                       help=f"override {name} scale")


def _effective_config(args, config_path) -> ModelConfig:
    """Config file values with flag overrides applied (flags win)."""
    if config_path is not None:
        path = Path(config_path)
        if not path.exists():
            raise CLIError(f"config file not found: {path}")
        try:
            d = ModelConfig.load(path).to_dict()
        except (ValueError, KeyError, json.JSONDecodeError) as exc:
            raise CLIError(f"invalid config {path}: {exc}") from exc
    else:
        d = {"c": 0.0,
             "alpha": {"kind": "normal", "scale": 1.0},
             "eta": {"kind": "normal", "scale": 1.0},
             "eps": {"kind": "normal", "scale": 1.0}}
    if args.c is not None:
        d["c"] = args.c
    for name in _COMPONENT_FLAGS:
        kind = getattr(args, f"{name}_kind")
        scale = getattr(args, f"{name}_scale")
        if kind is not None:
            d[name]["kind"] = kind
        if scale is not None:
            d[name]["scale"] = scale
    try:
        return ModelConfig.from_dict(d)
    except (ValueError, KeyError) as exc:
        raise CLIError(f"invalid configuration: {exc}") from exc


def _write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


# --------------------------------------------------------------------------
# simulate
# --------------------------------------------------------------------------


def _cmd_simulate(args) -> int:
    if args.n < 1:
        raise CLIError(f"invalid parameter n: must be >= 1, got {args.n}")
    config = _effective_config(args, args.config)
    samples = sample_components(config, args.n, args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    sidecar = write_samples(samples, out)
    for label, col in (("y_ij", samples.y_ij), ("y_kj", samples.y_kj),
                       ("y_il", samples.y_il)):
        print(f"{label}: mean={col.mean():.6g} var={col.var(ddof=1):.6g}")
    print(f"wrote {out} and {sidecar}")
    return 0


# --------------------------------------------------------------------------
# identify
# --------------------------------------------------------------------------


def _parse_deltas(args) -> DeltaSchedule:
    try:
        if args.deltas:
            deltas = tuple(float(t) for t in args.deltas.split(","))
            return DeltaSchedule(deltas, extrapolation=args.extrapolation)
        return DeltaSchedule.geometric(extrapolation=args.extrapolation)
    except ValueError as exc:
        raise CLIError(f"invalid delta schedule: {exc}") from exc


def _grid_from_args(args) -> FreqGrid:
    try:
        return FreqGrid(s_max=args.s_max, n_points=args.n_points)
    except ValueError as exc:
        raise CLIError(f"invalid grid: {exc}") from exc


def _diagnostics_payload(result, settings) -> dict:
    zeros, singular, traces, flags = [], [], [], []
    for stage, rep in (("alpha", result.report_alpha), ("eta", result.report_eta)):
        for z in rep.get("zeros", []):
            zeros.append({"stage": stage, **z})
        for zloc in rep.get("singular", []):
            singular.append({"stage": stage, "location": zloc})
        recon = rep.get("reconstruction", {})
        for probe in recon.get("probes", []):
            traces.append({"stage": stage, "s": probe["s"],
                           "deltas": probe["deltas"],
                           "trace_re": probe["trace_re"],
                           "trace_im": probe["trace_im"]})
            flags.append({"stage": stage, "s": probe["s"],
                          "converged": probe["converged"],
                          "last_diff": probe["last_diff"]})
    return {"settings": settings, "zeros": zeros, "singular": singular,
            "delta_trace": traces, "convergence_flags": flags}


def _cmd_identify(args) -> int:
    if (args.samples is None) == (args.oracle is None):
        raise CLIError("provide exactly one of a samples CSV or --oracle CONFIG")
    grid = _grid_from_args(args)
    schedule = _parse_deltas(args)
    truth_config = None
    settings = {"grid": {"s_max": grid.s_max, "n_points": grid.n_points},
                "deltas": list(schedule.deltas),
                "extrapolation": schedule.extrapolation}

    if args.oracle is not None:
        truth_config = _effective_config(args, args.oracle)
        settings["mode"] = "oracle"
        settings["config"] = truth_config.to_dict()
        runner = lambda: run_oracle_pipeline(truth_config, grid, schedule)  # noqa: E731
    else:
        samples_path = Path(args.samples)
        if not samples_path.exists():
            raise CLIError(f"samples file not found: {samples_path}")
        try:
            samples = read_samples(samples_path)
        except ValueError as exc:
            raise CLIError(str(exc)) from exc
        truth_config = samples.config
        settings["mode"] = "samples"
        settings["n"] = len(samples)
        settings["seed"] = samples.seed
        settings["config"] = truth_config.to_dict() if truth_config else None
        runner = lambda: run_pipeline(samples, grid, schedule)  # noqa: E731

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        result = runner()
    except Exception as exc:
        stage = getattr(exc, "_stage", "pipeline")
        raise CLIError(f"identify failed in the {stage} stage: {exc}") from exc

    diagnostics = out_dir / "diagnostics.json"
    _write_json(diagnostics, _diagnostics_payload(result, settings))

    s = grid.values
    overlay = []
    for name, curve in (("alpha", result.alpha), ("eta", result.eta),
                        ("epsilon", result.epsilon)):
        write_curve_csv(curve, out_dir / f"{name}.csv")
        series = [(f"|phi_{name}|", s, curve.modulus())]
        if truth_config is not None:
            dist = {"alpha": truth_config.dist_alpha, "eta": truth_config.dist_eta,
                    "epsilon": truth_config.dist_eps}[name]
            series.append(("truth", s, analytic_cf(dist, grid).modulus()))
        line_plot_svg(out_dir / f"{name}.svg", series,
                      title=f"{name} CF modulus", xlabel="s", ylabel="|phi|")
        overlay.append((name, s, curve.modulus()))
    line_plot_svg(out_dir / "overlay.svg", overlay,
                  title="identified CF moduli", xlabel="s", ylabel="|phi|")
    print(f"wrote curves, plots and {diagnostics}")
    return 0


# --------------------------------------------------------------------------
# deconvolve
# --------------------------------------------------------------------------


def _cmd_deconvolve(args) -> int:
    cf_path = Path(args.cf)
    if not cf_path.exists():
        raise CLIError(f"curve file not found: {cf_path}")
    try:
        curve = read_curve_csv(cf_path)
    except ValueError as exc:
        raise CLIError(str(exc)) from exc
    report = validate_cf_curve(curve, tol=0.1)
    if not report.passed:
        print(f"warning: curve fails CF validation at loose tolerance "
              f"({report.summary()}); proceeding", file=sys.stderr)
    try:
        import warnings as _warnings
        with _warnings.catch_warnings():
            _warnings.simplefilter("ignore", RuntimeWarning)
            est = invert_cf(curve, args.cutoff, args.window,
                            x_max=args.x_max, n_x=args.n_x)
    except ValueError as exc:
        raise CLIError(str(exc)) from exc
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    est.write_csv(out)
    line_plot_svg(out.with_suffix(".svg"), [("f", est.x, est.values)],
                  title=f"density (cutoff {args.cutoff:g}, {args.window})",
                  xlabel="x", ylabel="f")
    _write_json(out.with_suffix(".json"), {
        "source": cf_path.name,
        "cutoff": est.cutoff,
        "window": est.window,
        "imag_residual": est.imag_residual,
        "integral": est.integral,
        "clipped_integral": est.clipped_integral,
        "cf_validation": {"passed": report.passed, "summary": report.summary()},
    })
    print(f"wrote {out}, {out.with_suffix('.svg')} and {out.with_suffix('.json')}")
    return 0


# --------------------------------------------------------------------------
# report
# --------------------------------------------------------------------------

_EXPECTED = ("alpha.csv", "eta.csv", "epsilon.csv", "diagnostics.json")


def _cmd_report(args) -> int:
    run_dir = Path(args.run_dir)
    if not run_dir.is_dir():
        raise CLIError(f"not a directory: {run_dir}")
    svgs = sorted(run_dir.glob("*.svg"))
    csvs = sorted(run_dir.glob("*.csv"))
    diag_path = run_dir / "diagnostics.json"
    if not svgs and not csvs and not diag_path.exists():
        raise CLIError(f"no artifacts found in {run_dir}")

    missing = [name for name in _EXPECTED if not (run_dir / name).exists()]
    density_csvs = [p for p in csvs if p.with_suffix(".json").exists()
                    and p.name not in _EXPECTED]

    parts = ["<html><head><meta charset='utf-8'><title>run report</title></head><body>",
             f"<h1>Run report: {run_dir.name}</h1>"]
    if missing:
        parts.append("<h2>Missing artifacts</h2><ul>")
        parts.extend(f"<li>{name}</li>" for name in missing)
        parts.append("</ul>")

    diag = None
    if diag_path.exists():
        diag = json.loads(diag_path.read_text())
        parts.append("<h2>Zeros and singular points</h2>")
        parts.append("<table border='1' cellpadding='4'>"
                     "<tr><th>stage</th><th>location</th><th>modulus</th>"
                     "<th>singular</th></tr>")
        for z in diag.get("zeros", []):
            parts.append(f"<tr><td>{z['stage']}</td><td>{z['location']:.6g}</td>"
                         f"<td>{z['modulus']:.3g}</td><td>{z['singular']}</td></tr>")
        parts.append("</table>")
        flags = diag.get("convergence_flags", [])
        if flags:
            parts.append("<h2>Delta convergence</h2><table border='1' cellpadding='4'>"
                         "<tr><th>stage</th><th>s</th><th>converged</th>"
                         "<th>last diff</th></tr>")
            for f in flags:
                parts.append(f"<tr><td>{f['stage']}</td><td>{f['s']:.6g}</td>"
                             f"<td>{f['converged']}</td><td>{f['last_diff']:.3g}</td></tr>")
            parts.append("</table>")

        truth = (diag.get("settings") or {}).get("config")
        if truth:
            try:
                config = ModelConfig.from_dict(truth)
                rows = []
                for name, dist in (("alpha", config.dist_alpha),
                                   ("eta", config.dist_eta),
                                   ("epsilon", config.dist_eps)):
                    path = run_dir / f"{name}.csv"
                    if not path.exists():
                        continue
                    curve = read_curve_csv(path)
                    truth_vals = analytic_cf(dist, curve.grid).values
                    sup = float(np.max(np.abs(curve.values - truth_vals)))
                    rows.append((name, sup))
                if rows:
                    parts.append("<h2>Error vs truth</h2><table border='1' "
                                 "cellpadding='4'><tr><th>curve</th>"
                                 "<th>sup error</th></tr>")
                    parts.extend(f"<tr><td>{n}</td><td>{e:.4g}</td></tr>"
                                 for n, e in rows)
                    parts.append("</table>")
            except ValueError:
                parts.append("<p>truth config present but unusable</p>")

    if svgs:
        parts.append("<h2>Plots</h2>")
        for svg in svgs:
            parts.append(f"<h3>{svg.name}</h3>")
            parts.append(svg.read_text())
    if density_csvs:
        parts.append("<h2>Densities</h2><ul>")
        parts.extend(f"<li>{p.name}</li>" for p in density_csvs)
        parts.append("</ul>")
    parts.append("</body></html>")

    out = run_dir / "report.html"
    out.write_text("\n".join(parts) + "\n")
    print(f"wrote {out}" + (f" (missing: {', '.join(missing)})" if missing else ""))
    return 0


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dyadeconv",
        description="Deconvolution of two-way dyadic error components",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="draw linked-triple samples")
    p.add_argument("--config", required=True, help="model config JSON")
    p.add_argument("--n", type=int, required=True, help="number of replicates")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output CSV path")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("identify", help="identify the three component CFs")
    p.add_argument("samples", nargs="?", default=None, help="samples CSV")
    p.add_argument("--oracle", default=None,
                   help="run on exact slices for this config instead of samples")
    p.add_argument("--s-max", type=float, default=3.0)
    p.add_argument("--n-points", type=int, default=601)
    p.add_argument("--deltas", default=None,
                   help="comma-separated decreasing excision widths")
    p.add_argument("--extrapolation", choices=("last_value", "richardson"),
                   default="last_value")
    p.add_argument("--out-dir", required=True)
    _add_config_flags(p)
    p.set_defaults(func=_cmd_identify)

    p = sub.add_parser("deconvolve", help="invert a curve CSV to a density")
    p.add_argument("cf", help="curve CSV (columns s,re,im)")
    p.add_argument("--cutoff", type=float, required=True)
    p.add_argument("--window", choices=("sharp", "cosine_taper"),
                   default="cosine_taper")
    p.add_argument("--x-max", type=float, default=8.0)
    p.add_argument("--n-x", type=int, default=1601)
    p.add_argument("--out", required=True, help="output density CSV path")
    p.set_defaults(func=_cmd_deconvolve)

    p = sub.add_parser("report", help="summarize a run directory")
    p.add_argument("run_dir")
    p.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CLIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # surface unexpected failures with a message
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
