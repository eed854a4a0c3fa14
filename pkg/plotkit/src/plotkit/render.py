"""Render simulation CSV outputs as figures.

One panel kind per invocation::

    render.py --panel heatmap --in sweep.csv --out fig2a.png

Panel kinds and the CSV headers they require:

==============  =====================================
panel           columns
==============  =====================================
heatmap         <x>_mhz, <y>_mhz, F  (any two *_mhz axes)
dynamics        t_ns, P0, P1, F
cp-dynamics     t_ns, P00, P01, P10, P11, Pa, F_S
curve           beta, F
surface         gamma_rad, ratio, tau2_omega
==============  =====================================

The input file is never modified.  A header that does not match the panel's
schema aborts with exit status 2 and a column diff on stderr.  Cells whose
value is not a number (infeasible points in the surface panel) are masked,
never painted as zeros.
"""

from __future__ import annotations

import argparse
import sys

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

PANELS = ("heatmap", "dynamics", "cp-dynamics", "curve", "surface")

EXACT_SCHEMAS = {
    "dynamics": ["t_ns", "P0", "P1", "F"],
    "cp-dynamics": ["t_ns", "P00", "P01", "P10", "P11", "Pa", "F_S"],
    "curve": ["beta", "F"],
    "surface": ["gamma_rad", "ratio", "tau2_omega"],
}


class SchemaError(Exception):
    """Input header does not match the panel schema."""


def _check_schema(panel: str, columns: list[str]) -> None:
    if panel == "heatmap":
        ok = (len(columns) == 3 and columns[2] == "F"
              and all(c.endswith("_mhz") for c in columns[:2]))
        expected = ["<x>_mhz", "<y>_mhz", "F"]
    else:
        expected = EXACT_SCHEMAS[panel]
        ok = columns == expected
    if ok:
        return
    missing = [c for c in expected if c not in columns]
    unexpected = [c for c in columns if c not in expected]
    raise SchemaError(
        f"header mismatch for panel '{panel}':\n"
        f"  expected: {','.join(expected)}\n"
        f"  found:    {','.join(columns)}\n"
        f"  missing:  {','.join(missing) or '-'}\n"
        f"  extra:    {','.join(unexpected) or '-'}")


def _grid(df: pd.DataFrame, xcol: str, ycol: str, vcol: str):
    """Pivot long-form (x, y, value) rows into a masked 2D array."""
    xs = np.unique(df[xcol].to_numpy())
    ys = np.unique(df[ycol].to_numpy())
    grid = np.full((ys.size, xs.size), np.nan)
    xi = np.searchsorted(xs, df[xcol].to_numpy())
    yi = np.searchsorted(ys, df[ycol].to_numpy())
    grid[yi, xi] = df[vcol].to_numpy()
    return xs, ys, np.ma.masked_invalid(grid)


def _axis_label(column: str) -> str:
    stem = column[:-len("_mhz")]
    pretty = {"delta12": r"$\Delta_{12}/2\pi$", "delta24": r"$\Delta_{24}/2\pi$",
              "g12": r"$g_{12}/2\pi$", "g24": r"$g_{24}/2\pi$"}
    return f"{pretty.get(stem, stem)} (MHz)"


def render_heatmap(df: pd.DataFrame, ax) -> None:
    xcol, ycol = df.columns[0], df.columns[1]
    xs, ys, grid = _grid(df, xcol, ycol, "F")
    mesh = ax.pcolormesh(xs, ys, grid, shading="nearest", cmap="viridis")
    ax.figure.colorbar(mesh, ax=ax, label="gate fidelity")
    ax.set_xlabel(_axis_label(xcol))
    ax.set_ylabel(_axis_label(ycol))
    ax.set_title("Gate fidelity")


def render_dynamics(df: pd.DataFrame, ax) -> None:
    t = df["t_ns"]
    ax.plot(t, df["P0"], label="P0")
    ax.plot(t, df["P1"], label="P1")
    ax.plot(t, df["F"], label="F", linestyle="--")
    ax.set_xlabel("t (ns)")
    ax.set_ylabel("population / fidelity")
    ax.set_ylim(-0.02, 1.02)
    ax.legend()
    ax.set_title("Gate dynamics")


def render_cp_dynamics(df: pd.DataFrame, ax) -> None:
    t = df["t_ns"]
    for col in ("P00", "P01", "P10", "P11", "Pa"):
        ax.plot(t, df[col], label=col)
    ax.plot(t, df["F_S"], label="F_S", linestyle="--", color="black")
    ax.set_xlabel("t (ns)")
    ax.set_ylabel("population / state fidelity")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(ncols=2, fontsize="small")
    ax.set_title("Conditional-phase gate dynamics")


def render_curve(df: pd.DataFrame, ax) -> None:
    ax.plot(df["beta"], df["F"], marker="o", markersize=3)
    ax.set_xlabel(r"drift strength $\beta$")
    ax.set_ylabel("gate fidelity")
    ax.set_title("Drift robustness")


def render_surface(df: pd.DataFrame, ax) -> None:
    xs, ys, grid = _grid(df, "ratio", "gamma_rad", "tau2_omega")
    mesh = ax.pcolormesh(xs, ys, grid, shading="nearest", cmap="magma")
    ax.figure.colorbar(mesh, ax=ax, label=r"$\tau_2\,\Omega$")
    ax.set_xlabel(r"$\delta_2/\Omega$")
    ax.set_ylabel(r"$\gamma$ (rad)")
    ax.set_title("Conditional-phase gate time")


RENDERERS = {
    "heatmap": render_heatmap,
    "dynamics": render_dynamics,
    "cp-dynamics": render_cp_dynamics,
    "curve": render_curve,
    "surface": render_surface,
}


def render(panel: str, in_path: str, out_path: str, dpi: int = 150) -> None:
    """Read one CSV and write one image; raises SchemaError on a bad header."""
    df = pd.read_csv(in_path)
    _check_schema(panel, list(df.columns))
    fig, ax = plt.subplots(figsize=(6.0, 4.5), constrained_layout=True)
    try:
        RENDERERS[panel](df, ax)
        fig.savefig(out_path, dpi=dpi)
    finally:
        plt.close(fig)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="render.py",
        description="Render a simulation CSV as a figure panel.")
    ap.add_argument("--panel", required=True, choices=PANELS)
    ap.add_argument("--in", dest="in_path", required=True, metavar="CSV")
    ap.add_argument("--out", dest="out_path", required=True, metavar="IMAGE")
    ap.add_argument("--dpi", type=int, default=150)
    args = ap.parse_args(argv)
    try:
        render(args.panel, args.in_path, args.out_path, dpi=args.dpi)
    except SchemaError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"input not found: {exc.filename}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
