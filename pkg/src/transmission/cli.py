"""Command-line front end: run a named experiment and write CSV, JSON and SVG reports.

Exit codes: 0 when every thresholded metric passes, 1 when any fails,
2 on a configuration error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

from . import __version__
from .experiments import EXPERIMENTS, ConfigError, ExperimentConfig, Outcome, run_experiment
from .maps import MapError

log = logging.getLogger("transmission")

CSV_COLUMNS = ("experiment", "gallery", "param", "mu", "L", "N", "metric", "value", "threshold", "pass")

# config-file keys and their types; flags override file values
_KEYS = {
    "experiment": str,
    "gallery": str,
    "mu": float,
    "epsilon": float,
    "alpha": float,
    "theta": float,
    "half_width": float,
    "count": int,
    "out": str,
    "svg": lambda s: s.strip().lower() in ("1", "true", "yes", "on"),
    "json_only": lambda s: s.strip().lower() in ("1", "true", "yes", "on"),
}


def read_config_file(path: str) -> dict:
    """Parse ``key=value`` lines (``#`` comments, blank lines ignored)."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            out[key] = _KEYS[key](value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {value!r}") from exc
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="transmission-report",
        description="Run a half-plane transmission experiment and write CSV/JSON/SVG reports.",
    )
    p.add_argument("--config", help="optional file of key=value lines; flags override it")
    p.add_argument("--experiment", choices=EXPERIMENTS)
    p.add_argument("--gallery", help="gallery id, e.g. identity, perturbed:1, cone:0.5, staircase")
    p.add_argument("--mu", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--theta", type=float)
    p.add_argument("--half-width", dest="half_width", type=float)
    p.add_argument("--count", type=int)
    p.add_argument("--out", help="output directory (default: results)")
    p.add_argument("--svg", action="store_true", default=None, help="also write plot.svg")
    p.add_argument("--json-only", dest="json_only", action="store_true", default=None,
                   help="write summary.json only")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    values = read_config_file(args.config) if args.config else {}
    for key in _KEYS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    if "experiment" not in values:
        raise ConfigError("no experiment given (use --experiment or an experiment= line)")
    out = values.pop("out", "results")
    cfg = ExperimentConfig(output_dir=out, **{k: v for k, v in values.items()})
    cfg.svg = bool(cfg.svg)
    cfg.json_only = bool(cfg.json_only)
    cfg.validate()
    return cfg


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def write_csv(path: Path, outcome: Outcome):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in outcome.rows:
            w.writerow([_fmt(x) for x in (r.experiment, r.gallery, r.param, r.mu, r.L, r.N,
                                          r.metric, r.value, r.threshold, r.passed)])


def _json_safe(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, dict):
        return {k: _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    if hasattr(v, "item"):
        return _json_safe(v.item())
    return v


def summary(cfg: ExperimentConfig, outcome: Outcome) -> dict:
    checked = [r for r in outcome.rows if r.passed is not None]
    return _json_safe({
        "version": __version__,
        "config": cfg.to_dict(),
        "passed": all(r.passed for r in checked),
        "thresholds": {f"{r.gallery}/{r.param}/{r.metric}/N={r.N}": r.threshold for r in checked},
        "constants": outcome.constants,
        "results": [
            {"gallery": r.gallery, "param": r.param, "mu": r.mu, "L": r.L, "N": r.N,
             "metric": r.metric, "value": r.value, "threshold": r.threshold, "pass": r.passed}
            for r in outcome.rows
        ],
        **outcome.constants,
    })


def render_svg(curves: dict, title: str, width: int = 640, height: int = 420) -> str:
    """Log-log plot of value against resolution, one polyline per curve."""
    pts = [(n, v) for c in curves.values() for n, v in c if n > 0 and v > 0]
    margin = 60
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">\n'
            f'<rect width="100%" height="100%" fill="white"/>\n'
            f'<text x="{width / 2:.0f}" y="24" text-anchor="middle" font-family="sans-serif" '
            f'font-size="15">{title}</text>\n')
    if not pts:
        return head + "</svg>\n"
    lx = [math.log10(n) for n, _ in pts]
    ly = [math.log10(v) for _, v in pts]
    x0, x1 = min(lx), max(lx)
    y0, y1 = math.floor(min(ly)), math.ceil(max(ly))
    x1 = x1 if x1 > x0 else x0 + 1
    y1 = y1 if y1 > y0 else y0 + 1

    def X(n):
        return margin + (math.log10(n) - x0) / (x1 - x0) * (width - 2 * margin)

    def Y(v):
        return height - margin - (math.log10(v) - y0) / (y1 - y0) * (height - 2 * margin)

    body = [f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" y2="{height - margin}" stroke="black"/>',
            f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" stroke="black"/>']
    for e in range(y0, y1 + 1):
        y = Y(10.0 ** e)
        body.append(f'<text x="{margin - 6}" y="{y + 4:.1f}" text-anchor="end" font-family="sans-serif" '
                    f'font-size="11">1e{e}</text>')
    ns = sorted({n for n, _ in pts})
    for n in ns:
        body.append(f'<text x="{X(n):.1f}" y="{height - margin + 16}" text-anchor="middle" '
                    f'font-family="sans-serif" font-size="11">{n}</text>')
    colours = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")
    for i, (name, c) in enumerate(curves.items()):
        col = colours[i % len(colours)]
        good = [(n, v) for n, v in c if n > 0 and v > 0]
        if not good:
            continue
        path = " ".join(f"{X(n):.1f},{Y(v):.1f}" for n, v in good)
        body.append(f'<polyline fill="none" stroke="{col}" stroke-width="2" points="{path}"/>')
        for n, v in good:
            body.append(f'<circle cx="{X(n):.1f}" cy="{Y(v):.1f}" r="3" fill="{col}"/>')
        body.append(f'<text x="{width - margin}" y="{margin + 14 * i}" text-anchor="end" fill="{col}" '
                    f'font-family="sans-serif" font-size="12">{name}</text>')
    body.append(f'<text x="{width / 2:.0f}" y="{height - 12}" text-anchor="middle" '
                f'font-family="sans-serif" font-size="12">N</text>')
    return head + "\n".join(body) + "\n</svg>\n"


def run(cfg: ExperimentConfig) -> int:
    outcome = run_experiment(cfg)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    if not cfg.json_only:
        write_csv(out / "results.csv", outcome)
    summ = summary(cfg, outcome)
    (out / "summary.json").write_text(json.dumps(summ, indent=2, sort_keys=True) + "\n")
    if cfg.svg and not cfg.json_only:
        (out / "plot.svg").write_text(render_svg(outcome.curves, cfg.experiment))
    for r in outcome.rows:
        if r.passed is False:
            log.error("FAIL %s %s %s N=%s: %.3e vs %.3e", r.experiment, r.gallery, r.metric, r.N,
                      r.value, r.threshold)
    return 0 if summ["passed"] else 1


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        cfg = resolve_config(args)
    except (ConfigError, OSError, TypeError) as exc:
        log.error("configuration error: %s", exc)
        return 2
    try:
        return run(cfg)
    except (ConfigError, MapError) as exc:
        log.error("configuration error: %s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
