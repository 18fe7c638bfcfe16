#!/usr/bin/env python3
"""Render one figure from a JSON spec describing committed CSV results.

The renderer is a read-only consumer of the experiment CSV contract:
every plotted series is a column pulled verbatim from the referenced
files, nothing is recomputed, and re-rendering a spec yields identical
plotted data.  One spec per figure is checked in under figures/.

Spec fields: "kind" (one of h_loglog, p_semilog, hp_sqrtdof, cond_curve,
field_contour), "inputs" (CSV paths with optional labels), "x"/"series"
column selections, optional "slopes" for reference-order triangles, and
axis labels.  Relative CSV paths resolve against the spec's directory,
then its parent, so specs under figures/ can name results/ directly.
"""

from __future__ import annotations

import argparse
import json
import pathlib
import sys

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import matplotlib.tri as mtri
import numpy as np

KINDS = {}


def plot_kind(name):
    def register(fn):
        KINDS[name] = fn
        return fn

    return register


def read_table(path):
    """CSV as {column: list of raw cell strings}.

    Rows whose status column reads anything but "ok" are dropped; their
    error cells are empty and cannot be plotted.
    """
    lines = pathlib.Path(path).read_text().splitlines()
    if len(lines) < 2:
        raise ValueError(f"empty CSV: {path}")
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:]]
    if "status" in header:
        keep = header.index("status")
        rows = [r for r in rows if r[keep] == "ok"]
    if not rows:
        raise ValueError(f"empty CSV: {path}")
    return {name: [r[i] for r in rows] for i, name in enumerate(header)}


def floats(table, column, path):
    if column not in table:
        raise ValueError(f"missing column {column!r} in {path}")
    return [float(cell) for cell in table[column]]


def resolve(csv_path, base):
    p = pathlib.Path(csv_path)
    if p.is_absolute():
        return p
    for root in (base, base.parent):
        if (root / p).exists():
            return root / p
    return p


def line_series(spec, base):
    """[{label, x, y}] for every input/series combination.

    A series with a "group" key fans out into one line per distinct
    value of that column (e.g. one conditioning curve per q).
    """
    out = []
    xcol = spec["x"]["column"]
    for inp in spec["inputs"]:
        path = resolve(inp["csv"], base)
        table = read_table(path)
        xs = floats(table, xcol, path)
        for ser in spec["series"]:
            ys = floats(table, ser["column"], path)
            if "group" in ser:
                gvals = floats(table, ser["group"], path)
                for g in sorted(set(gvals)):
                    pick = [i for i, v in enumerate(gvals) if v == g]
                    out.append({"label": f"{ser['group']}={g:g}",
                                "x": [xs[i] for i in pick],
                                "y": [ys[i] for i in pick]})
            else:
                parts = [inp.get("label", ""), ser.get("label", "")]
                label = " ".join(p for p in parts if p) or ser["column"]
                out.append({"label": label, "x": xs, "y": ys})
    return out


def draw_lines(ax, series):
    markers = "osd^v*"
    for i, s in enumerate(series):
        line, = ax.plot(s["x"], s["y"], marker=markers[i % len(markers)],
                        markersize=4, label=s["label"])
        line.set_gid(f"series:{s['label']}")


def draw_slope_guides(ax, spec, series):
    """Reference-order triangles beside the configured series."""
    for guide in spec.get("slopes", []):
        order = guide["order"]
        target = next(s for s in series if s["label"] == guide["series"])
        i0, i1 = guide.get("anchor", [len(target["x"]) - 2,
                                      len(target["x"]) - 1])
        x0, x1 = target["x"][i0], target["x"][i1]
        yb = 0.5 * target["y"][i1]
        ya = yb * (x0 / x1) ** order
        tri, = ax.plot([x0, x1, x0, x0], [ya, yb, yb, ya],
                       color="0.45", linewidth=0.9)
        tri.set_gid("guide")
        ax.annotate(guide.get("text", f"{order:g}"),
                    (x0, (ya * yb) ** 0.5), textcoords="offset points",
                    xytext=(-4, 0), ha="right", va="center",
                    fontsize=9, color="0.3")


@plot_kind("h_loglog")
def render_h_loglog(spec, ax, base):
    series = line_series(spec, base)
    draw_lines(ax, series)
    ax.set_xscale("log")
    ax.set_yscale("log")
    draw_slope_guides(ax, spec, series)
    return {"series": series}


@plot_kind("p_semilog")
def render_p_semilog(spec, ax, base):
    series = line_series(spec, base)
    draw_lines(ax, series)
    ax.set_yscale("log")
    return {"series": series}


# same axes as p_semilog; a separate kind keeps the specs declarative
@plot_kind("hp_sqrtdof")
def render_hp_sqrtdof(spec, ax, base):
    return render_p_semilog(spec, ax, base)


@plot_kind("cond_curve")
def render_cond_curve(spec, ax, base):
    series = line_series(spec, base)
    draw_lines(ax, series)
    ax.set_xscale("log")
    ax.set_yscale("log")
    return {"series": series}


@plot_kind("field_contour")
def render_field_contour(spec, ax, base):
    inp = spec["inputs"][0]
    path = resolve(inp["csv"], base)
    table = read_table(path)
    xs = floats(table, spec["x"]["column"], path)
    ys = floats(table, spec["y"]["column"], path)
    vals = floats(table, spec["value"]["column"], path)
    tri = mtri.Triangulation(xs, ys)
    # hide sliver triangles bridging the unsampled scatterer region
    px, py = np.asarray(xs), np.asarray(ys)
    t = tri.triangles
    longest = np.max([np.hypot(px[t[:, i]] - px[t[:, j]],
                               py[t[:, i]] - py[t[:, j]])
                      for i, j in ((0, 1), (1, 2), (2, 0))], axis=0)
    factor = spec.get("mask_edge_factor", 3.0)
    tri.set_mask(longest > factor * np.median(longest))
    cs = ax.tricontourf(tri, vals, levels=spec.get("levels", 41),
                        cmap="RdBu_r")
    ax.figure.colorbar(cs, ax=ax, label=spec["value"].get("label", ""))
    ax.set_aspect("equal")
    return {"field": {"x": xs, "y": ys, "value": vals}}


def render(spec_path):
    """Build the figure for one spec; returns (figure, plotted payload)."""
    spec_path = pathlib.Path(spec_path)
    spec = json.loads(spec_path.read_text())
    kind = spec.get("kind")
    if kind not in KINDS:
        raise ValueError(f"unknown plot kind: {kind!r}")
    fig, ax = plt.subplots(figsize=tuple(spec.get("figsize", [6.0, 4.5])))
    payload = KINDS[kind](spec, ax, spec_path.parent)
    for axis, key in ((ax.set_xlabel, "x"), (ax.set_ylabel, "y")):
        if key in spec and "label" in spec[key]:
            axis(spec[key]["label"])
    if "y_label" in spec:
        ax.set_ylabel(spec["y_label"])
    if spec.get("title"):
        ax.set_title(spec["title"], fontsize=11)
    if payload.get("series"):
        ax.grid(True, which="both", alpha=0.25)
        ax.legend(fontsize=9)
    fig.tight_layout()
    return fig, payload


def main(argv=None):
    parser = argparse.ArgumentParser(
        description="Render a figure from a JSON plot spec.")
    parser.add_argument("--spec", required=True, help="path to the spec file")
    parser.add_argument("--out", default=None,
                        help="output image (default: spec stem + .svg)")
    args = parser.parse_args(argv)
    fig, _ = render(args.spec)
    out = args.out or pathlib.Path(args.spec).stem + ".svg"
    fig.savefig(out)
    plt.close(fig)
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
