#!/usr/bin/env python3
"""Render figures from curve CSVs and family report JSON files.

Three plot kinds, all fed by files the command-line tool writes (this script
never calls the library in-process; the CSV/JSON schema is the interface):

  curves         overlay `t,value[,state]` CSVs, one line per file; --rescale
                 divides each file's time axis by that curve's t(0.25)
  ratios         mixing-time ratio trends r_n(eta, eps) from a family report
  product-trend  lambda_n * t_n(eps) growth curves from a family report

Inputs whose header or top-level keys do not match those schemas are refused
with SchemaMismatch; headers without data rows raise EmptyInput. Both exit
nonzero. Figures are deterministic: fixed palette, fixed ordering, metadata
timestamps suppressed. PNG and SVG outputs are supported.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "render"
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


class RenderError(Exception):
    """Base for input problems; the CLI maps these to a nonzero exit."""


class SchemaMismatch(RenderError):
    """Input header or structure differs from the documented schema."""


class EmptyInput(RenderError):
    """Input parses but carries no data rows."""


PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")

CURVE_HEADERS = (["t", "value"], ["t", "value", "state"])
REPORT_KEYS = {"family", "spec", "eps_grid", "table", "ratios", "verdict"}


def read_curve_csv(path: Path) -> tuple[list[float], list[float]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise EmptyInput(f"{path}: file is empty")
    if rows[0] not in CURVE_HEADERS:
        raise SchemaMismatch(
            f"{path}: header {','.join(rows[0])!r} is not t,value[,state]")
    ts, vals = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(rows[0]):
            raise SchemaMismatch(f"{path}:{lineno}: wrong column count")
        try:
            ts.append(float(row[0]))
            vals.append(float(row[1]))
        except ValueError as err:
            raise SchemaMismatch(f"{path}:{lineno}: {err}") from err
    if not ts:
        raise EmptyInput(f"{path}: no data rows")
    return ts, vals


def read_family_report(path: Path) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as err:
        raise SchemaMismatch(f"{path}: not JSON ({err})") from err
    if not isinstance(doc, dict) or not REPORT_KEYS.issubset(doc):
        raise SchemaMismatch(
            f"{path}: missing family-report keys "
            f"{sorted(REPORT_KEYS - set(doc)) if isinstance(doc, dict) else REPORT_KEYS}")
    if not doc["table"]:
        raise EmptyInput(f"{path}: family table is empty")
    return doc


def crossing_time(ts, vals, level: float) -> float:
    """First time the sampled curve reaches `level`, linearly interpolated."""
    for i, v in enumerate(vals):
        if v <= level:
            if i == 0 or vals[i - 1] == v:
                return ts[i]
            frac = (vals[i - 1] - level) / (vals[i - 1] - v)
            return ts[i - 1] + frac * (ts[i] - ts[i - 1])
    raise RenderError(
        f"curve never falls to {level}; cannot rescale its time axis")


def new_axes():
    fig, ax = plt.subplots(figsize=(6.4, 4.4), dpi=100)
    ax.grid(True, alpha=0.3)
    return fig, ax


def render_curves(paths, out: Path, rescale: bool, logy: bool) -> None:
    fig, ax = new_axes()
    for i, path in enumerate(paths):
        ts, vals = read_curve_csv(path)
        if rescale:
            t025 = crossing_time(ts, vals, 0.25)
            ts = [t / t025 for t in ts]
        ax.plot(ts, vals, color=PALETTE[i % len(PALETTE)],
                label=path.stem, linewidth=1.5)
    ax.set_xlabel("t / t(0.25)" if rescale else "t")
    ax.set_ylabel("divergence")
    if logy:
        ax.set_yscale("log")
    ax.legend(loc="upper right", fontsize=8)
    save(fig, out)


def valid_rows(doc) -> list[dict]:
    return [row for row in doc["table"] if not row.get("missing")]


def render_ratios(paths, out: Path) -> None:
    if len(paths) != 1:
        raise SchemaMismatch("ratios wants exactly one family report")
    doc = read_family_report(paths[0])
    ns = [row["n"] for row in valid_rows(doc)]
    if not doc["ratios"]:
        raise EmptyInput(f"{paths[0]}: no ratio pairs in report")
    fig, ax = new_axes()
    for i, pair in enumerate(doc["ratios"]):
        if len(pair["values"]) != len(ns):
            raise SchemaMismatch(
                f"{paths[0]}: ratio series length {len(pair['values'])} "
                f"!= {len(ns)} valid rows")
        ax.plot(ns, pair["values"], "o-", color=PALETTE[i % len(PALETTE)],
                label=f"t({pair['eta']:g}) / t({pair['eps']:g})")
    ax.axhline(1.0, color="black", linewidth=0.8, linestyle="--")
    ax.set_xlabel("n")
    ax.set_ylabel("mixing-time ratio")
    ax.set_title(f"{doc['family']} ({doc['spec']}): verdict {doc['verdict']}")
    ax.legend(loc="upper right", fontsize=8)
    save(fig, out)


def render_product_trend(paths, out: Path) -> None:
    if len(paths) != 1:
        raise SchemaMismatch("product-trend wants exactly one family report")
    doc = read_family_report(paths[0])
    trend = doc.get("product_trend")
    if trend is None:
        raise SchemaMismatch(f"{paths[0]}: report has no product_trend entry")
    if not trend:
        raise EmptyInput(f"{paths[0]}: product_trend is empty")
    ns = [row["n"] for row in valid_rows(doc)]
    fig, ax = new_axes()
    for i, (eps, series) in enumerate(trend.items()):
        if len(series) != len(ns):
            raise SchemaMismatch(
                f"{paths[0]}: trend series for eps={eps} has "
                f"{len(series)} points, expected {len(ns)}")
        ax.plot(ns, series, "s-", color=PALETTE[i % len(PALETTE)],
                label=f"eps = {eps}")
    ax.set_xlabel("n")
    ax.set_ylabel("rate * t(eps)")
    ax.set_title(f"{doc['family']}: product condition "
                 f"{doc.get('product_condition')}")
    ax.legend(loc="upper left", fontsize=8)
    save(fig, out)


def save(fig, out: Path) -> None:
    suffix = out.suffix.lower()
    if suffix == ".png":
        # drop the Software tag so rerenders are byte-identical
        fig.savefig(out, format="png", metadata={"Software": None})
    elif suffix == ".svg":
        fig.savefig(out, format="svg",
                    metadata={"Date": None, "Creator": None})
    else:
        raise SchemaMismatch(f"unsupported output format {suffix!r}; "
                             "use .png or .svg")
    plt.close(fig)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="Render figures from curve CSVs or family report JSON.")
    parser.add_argument("--kind", required=True,
                        choices=("curves", "ratios", "product-trend"))
    parser.add_argument("--in", dest="inputs", nargs="+", required=True,
                        metavar="FILE")
    parser.add_argument("--out", required=True, type=Path)
    parser.add_argument("--rescale", action="store_true",
                        help="divide each curve's time axis by its t(0.25)")
    parser.add_argument("--logy", action="store_true",
                        help="log-scale the value axis (curves only)")
    args = parser.parse_args(argv)

    paths = [Path(p) for p in args.inputs]
    for p in paths:
        if not p.exists():
            parser.error(f"input {p} does not exist")
    try:
        if args.kind == "curves":
            render_curves(paths, args.out, args.rescale, args.logy)
        elif args.kind == "ratios":
            render_ratios(paths, args.out)
        else:
            render_product_trend(paths, args.out)
    except RenderError as err:
        print(f"{type(err).__name__}: {err}", file=sys.stderr)
        return 2
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
