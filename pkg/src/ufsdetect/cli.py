"""Command-line front end: ``ufsdetect simulate | analytic | plot``.

All power knobs are in dB (``snr_db`` is P_B/sigma^2, ``power_ratio_db``
is P_B/P_E); they are converted to linear values internally with
``10^(dB/10)``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path

from . import analytics
from .config import ConfigError, load, resolve, to_experiment
from .errors import InvalidParameterError
from .montecarlo import SweepResult, run_sweep
from .svgplot import Series, line_chart

log = logging.getLogger("ufsdetect")

CSV_COLUMNS = (
    "sweep_value", "miss_rate", "miss_ci_lo", "miss_ci_hi",
    "false_alarm_rate", "fa_ci_lo", "fa_ci_hi",
    "channel_mse", "cfo_mse", "trials", "failures",
)
EXIT_OK, EXIT_USAGE, EXIT_FAILURES = 0, 2, 3

AXIS_LABELS = {
    "power_ratio_db": "P_B/P_E (dB)",
    "snr_db": "P_B/sigma^2 (dB)",
    "phi_max": "maximum artificial CFO",
    "pilot_length": "pilot length N",
    "segments": "segments K",
}
METRIC_LABELS = {
    "miss_rate": "miss detection probability",
    "false_alarm_rate": "false alarm probability",
    "channel_mse": "channel estimation MSE",
    "cfo_mse": "CFO estimation MSE",
}


def _num(x) -> str:
    return repr(float(x))


def format_csv(resolved: dict, result: SweepResult) -> str:
    """CSV text: a ``#`` line with the resolved config, a header, one row per point."""
    buf = io.StringIO()
    buf.write("# " + json.dumps(resolved, sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for p in result.points:
        writer.writerow([
            _num(p.value), _num(p.miss_rate), _num(p.miss_ci[0]), _num(p.miss_ci[1]),
            _num(p.false_alarm_rate), _num(p.fa_ci[0]), _num(p.fa_ci[1]),
            _num(p.channel_mse), _num(p.cfo_mse), str(p.trials), str(p.failures),
        ])
    return buf.getvalue()


def read_csv(path) -> tuple[dict | None, list[dict]]:
    """Parses a ``simulate`` CSV.

    Raises:
        InvalidParameterError: if the header does not match the schema, a
            value does not parse, or there are no data rows.
    """
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    resolved = None
    body = []
    for line in lines:
        if line.startswith("#"):
            if resolved is None:
                try:
                    resolved = json.loads(line[1:])
                except json.JSONDecodeError:
                    resolved = None
        elif line.strip():
            body.append(line)
    if not body:
        raise InvalidParameterError("CSV has no header row")
    rows = list(csv.reader(body))
    if tuple(rows[0]) != CSV_COLUMNS:
        raise InvalidParameterError(f"CSV header {rows[0]} does not match the expected columns")
    if len(rows) < 2:
        raise InvalidParameterError("CSV has no data rows")
    records = []
    for row in rows[1:]:
        if len(row) != len(CSV_COLUMNS):
            raise InvalidParameterError(f"CSV row has {len(row)} fields, expected {len(CSV_COLUMNS)}")
        try:
            records.append({k: float(v) for k, v in zip(CSV_COLUMNS, row)})
        except ValueError as exc:
            raise InvalidParameterError(f"unparseable CSV value: {exc}") from exc
    return resolved, records


def cmd_simulate(config_path, out_path, workers: int = 1, seed: int | None = None) -> int:
    """Runs the configured sweep and writes its CSV."""
    try:
        resolved, cfg = load(config_path, seed=seed)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    log.info("master_seed=%d config=%s", cfg.master_seed, json.dumps(resolved, sort_keys=True))
    result = run_sweep(cfg, parallelism=workers)
    Path(out_path).write_text(format_csv(resolved, result), encoding="utf-8", newline="\n")
    failures = sum(p.failures for p in result.points)
    if failures:
        print(f"error: {failures} trials failed numerically", file=sys.stderr)
        return EXIT_FAILURES
    return EXIT_OK


ANALYTIC_PARAMS = {
    "lemma1-cfo": ("Q", "noise_var"),
    "lemma1-mse": ("N", "Q", "M", "noise_var"),
    "sync": ("M", "N", "noise_var"),
    "rho": ("delta_phi", "Q"),
    "pth": ("M", "Q", "noise_var"),
    "miss-bound": ("p_bob", "p_eve", "noise_var", "M", "Q", "K", "phi_max"),
    "miss-lb": ("p_bob", "Q", "phi_max", "K"),
}
_INT_PARAMS = ("M", "N", "Q", "K")


def evaluate_analytic(kind: str, params: dict) -> str:
    """Evaluates one closed-form expression and formats the printed line."""
    missing = [p for p in ANALYTIC_PARAMS[kind] if params.get(p) is None]
    if kind == "miss-lb" and params.get("p_th") is None:
        missing += [p for p in ("M", "noise_var") if params.get(p) is None]
    if missing:
        raise InvalidParameterError(f"{kind} needs parameters: " + ", ".join("--" + m.replace("_", "-") for m in missing))
    p = dict(params)
    for name in _INT_PARAMS:
        if p.get(name) is not None:
            if not float(p[name]).is_integer():
                raise InvalidParameterError(f"--{name} must be an integer, got {p[name]}")
            p[name] = int(p[name])
    if kind == "lemma1-cfo":
        h2 = 1.0 if p.get("h_norm_sq") is None else p["h_norm_sq"]
        return f"{analytics.lemma1_cfo_mse(p['Q'], p['noise_var'], h2):.12g}"
    if kind == "lemma1-mse":
        return f"{analytics.lemma1_channel_mse(p['N'], p['Q'], p['M'], p['noise_var']):.12g}"
    if kind == "sync":
        return f"{analytics.sync_benchmark_mse(p['M'], p['N'], p['noise_var']):.12g}"
    if kind == "rho":
        r = analytics.rho(p["delta_phi"], p["Q"])
        return f"{r.real:.12g} {r.imag:.12g}"
    if kind == "pth":
        return f"{analytics.power_threshold(p['M'], p['Q'], p['noise_var']):.12g}"
    if kind == "miss-bound":
        b = analytics.miss_prob_bound(analytics.MissBoundInput(
            p["p_bob"], p["p_eve"], p["noise_var"], p["M"], p["Q"], p["K"], p["phi_max"]))
    else:
        pth = p["p_th"] if p.get("p_th") is not None else analytics.power_threshold(p["M"], p["Q"], p["noise_var"])
        b = analytics.miss_prob_lower_bound(p["p_bob"], pth, p["Q"], p["phi_max"], p["K"])
    return f"{b.value:.12g} clamped={str(b.clamped).lower()}"


def cmd_analytic(kind: str, params: dict) -> int:
    try:
        print(evaluate_analytic(kind, params))
    except InvalidParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def _overlay(metric, resolved, xs):
    cfg = to_experiment(resolve({k: v for k, v in resolved.items()}))
    first, second = [], []
    for i in range(len(xs)):
        scn = cfg.scenario_at(i)
        if metric == "miss_rate":
            pth = analytics.power_threshold(scn.M, scn.Q, scn.noise_var)
            if scn.phi_max == 0:
                first.append(1.0)
                second.append(1.0)
                continue
            first.append(analytics.miss_prob_bound(analytics.MissBoundInput(
                scn.p_bob, scn.p_eve, scn.noise_var, scn.M, scn.Q, scn.K, scn.phi_max)).value)
            second.append(analytics.miss_prob_lower_bound(scn.p_bob, pth, scn.Q, scn.phi_max, scn.K).value)
        elif metric == "channel_mse":
            rel = scn.noise_var / scn.p_bob
            first.append(analytics.lemma1_channel_mse(scn.N, scn.Q, scn.M, rel))
            second.append(analytics.sync_benchmark_mse(scn.M, scn.N, rel))
        elif metric == "cfo_mse":
            first.append(analytics.lemma1_cfo_mse(scn.Q, scn.noise_var / scn.p_bob))
    names = {
        "miss_rate": ("miss bound", "large-P_E lower bound"),
        "channel_mse": ("analytic MSE", "SYNC"),
        "cfo_mse": ("analytic CFO MSE", ""),
    }.get(metric)
    if names is None:
        return []
    out = [Series(names[0], list(xs), first, style="dashed", markers=False)]
    if second:
        out.append(Series(names[1], list(xs), second, style="dotted", markers=False))
    return out


def cmd_plot(csv_path, out_svg, log_y: bool = False, overlay_bound: bool = False, metric: str | None = None) -> int:
    """Renders a ``simulate`` CSV as an SVG line chart."""
    try:
        resolved, rows = read_csv(csv_path)
    except (InvalidParameterError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if metric is None:
        metric = next(
            (m for m in ("miss_rate", "false_alarm_rate") if any(math.isfinite(r[m]) for r in rows)),
            "channel_mse",
        )
    if metric not in METRIC_LABELS:
        print(f"error: unknown metric {metric!r}", file=sys.stderr)
        return EXIT_USAGE
    xs = [r["sweep_value"] for r in rows]
    ci = {"miss_rate": ("miss_ci_lo", "miss_ci_hi"), "false_alarm_rate": ("fa_ci_lo", "fa_ci_hi")}.get(metric)
    label = resolved.get("scheme", "simulated").upper() if resolved else "simulated"
    series = [Series(
        f"{label} sim",
        xs,
        [r[metric] for r in rows],
        lo=[r[ci[0]] for r in rows] if ci else None,
        hi=[r[ci[1]] for r in rows] if ci else None,
    )]
    if overlay_bound:
        if resolved is None:
            print("error: overlay needs the config comment line written by simulate", file=sys.stderr)
            return EXIT_USAGE
        try:
            series += _overlay(metric, resolved, xs)
        except InvalidParameterError as exc:
            print(f"error: cannot evaluate overlay: {exc}", file=sys.stderr)
            return EXIT_USAGE
    axis = resolved.get("sweep_axis", "") if resolved else ""
    svg = line_chart(
        series,
        title=METRIC_LABELS[metric],
        xlabel=AXIS_LABELS.get(axis, axis or "sweep value"),
        ylabel=METRIC_LABELS[metric],
        log_y=log_y,
    )
    Path(out_svg).write_text(svg, encoding="utf-8")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ufsdetect",
        description="Pilot contamination attack detection with uncoordinated frequency shifts.",
        epilog="Powers are given in dB (snr_db = P_B/sigma^2, power_ratio_db = P_B/P_E) "
        "and converted to linear values as 10^(dB/10).",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a Monte Carlo sweep and write CSV")
    sim.add_argument("--config", required=True, help="JSON config path, or fig2..fig5 for a bundled one")
    sim.add_argument("--out", required=True, help="output CSV path")
    sim.add_argument("--workers", type=int, default=1, help="worker processes (results do not depend on it)")
    sim.add_argument("--seed", type=int, default=None, help="override master_seed")

    ana = sub.add_parser("analytic", help="evaluate a closed-form expression")
    ana.add_argument("kind", choices=sorted(ANALYTIC_PARAMS))
    for name in ("M", "N", "Q", "K"):
        ana.add_argument(f"--{name}", type=float, default=None)
    for name in ("noise-var", "h-norm-sq", "delta-phi", "p-bob", "p-eve", "phi-max", "p-th"):
        ana.add_argument(f"--{name}", type=float, default=None, dest=name.replace("-", "_"))

    plot = sub.add_parser("plot", help="render a simulate CSV as SVG")
    plot.add_argument("csv_path", metavar="CSV", help="CSV written by simulate")
    plot.add_argument("--out", required=True, help="output SVG path")
    plot.add_argument("--log-y", action="store_true")
    plot.add_argument("--overlay-bound", action="store_true", help="draw the analytic curves")
    plot.add_argument("--metric", choices=sorted(METRIC_LABELS), default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.command == "simulate":
        if args.workers < 1:
            print("error: --workers must be >= 1", file=sys.stderr)
            return EXIT_USAGE
        return cmd_simulate(args.config, args.out, args.workers, args.seed)
    if args.command == "analytic":
        params = {k: getattr(args, k) for k in
                  ("M", "N", "Q", "K", "noise_var", "h_norm_sq", "delta_phi", "p_bob", "p_eve", "phi_max", "p_th")}
        return cmd_analytic(args.kind, params)
    return cmd_plot(args.csv_path, args.out, args.log_y, args.overlay_bound, args.metric)


if __name__ == "__main__":
    sys.exit(main())
