#!/usr/bin/env python3
"""Render standard figures from rollctl scenario CSV files.

Usage:
    python render.py <csv> <kind> <out>

Kinds: omega, er, torque, theta, gamma, xy. Each call writes <out>.png and
<out>.svg. The xy phase plane overlays the reference curve when the
scenario's summary file (``<name>_summary.txt``) sits next to the CSV and
describes a circle or line reference. Only the CSV and summary files are
read; this tool does not depend on the simulator package.
"""

from __future__ import annotations

import argparse
import re
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

KINDS = ("omega", "er", "torque", "theta", "gamma", "xy")

_REQUIRED = {
    "omega": ["t", "w1", "w2", "w3"],
    "er": ["t", "E_R"],
    "torque": ["t", "u1", "u2", "u3"],
    "theta": ["t", "th1", "th2", "th3"],
    "gamma": ["t", "g1", "g2", "g3"],
    "xy": ["x", "y"],
}


class SchemaError(ValueError):
    """CSV does not carry the columns the requested figure needs."""


def load_csv(path: Path) -> dict[str, np.ndarray]:
    data = np.genfromtxt(path, delimiter=",", names=True)
    data = np.atleast_1d(data)
    if data.dtype.names is None:
        raise SchemaError(f"{path}: no header row")
    return {name: np.asarray(data[name], dtype=float) for name in data.dtype.names}


def check_columns(cols: dict, kind: str, path) -> None:
    for name in _REQUIRED[kind]:
        if name not in cols:
            raise SchemaError(f"{path}: missing column {name!r} required by {kind!r}")


def load_reference(csv_path: Path) -> dict | None:
    """Parse the reference description out of the neighbouring summary file."""
    summary = csv_path.with_name(csv_path.stem + "_summary.txt")
    if not summary.exists():
        return None
    text = summary.read_text()
    m = re.search(r"^reference:\s*(.+)$", text, re.MULTILINE)
    if not m:
        return None
    desc = m.group(1).strip()
    kind = desc.split()[0]
    params = dict(re.findall(r"(\w+)=([^\s]+)", desc))
    try:
        if kind == "circle":
            cx, cy = (float(v) for v in params["center"].split(","))
            return {
                "kind": "circle",
                "radius": float(params["radius"]),
                "rate": float(params["rate"]),
                "center": (cx, cy),
            }
        if kind == "line":
            vx, vy = (float(v) for v in params["velocity"].split(","))
            x0, y0 = (float(v) for v in params["offset"].split(","))
            return {"kind": "line", "velocity": (vx, vy), "offset": (x0, y0)}
    except (KeyError, ValueError):
        return None
    return None


def reference_xy(ref: dict, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if ref["kind"] == "circle":
        a, w = ref["radius"], ref["rate"]
        cx, cy = ref["center"]
        return cx + a * np.sin(w * t), cy + a * np.cos(w * t)
    vx, vy = ref["velocity"]
    x0, y0 = ref["offset"]
    return x0 + vx * t, y0 + vy * t


def build_figure(cols: dict, kind: str, reference: dict | None = None):
    """Return a matplotlib figure for the requested kind."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0), constrained_layout=True)
    t = cols.get("t")

    if kind == "omega":
        for k, style in zip(("w1", "w2", "w3"), ("-", "--", "-.")):
            ax.plot(t, cols[k], style, label=k)
        ax.set_ylabel("angular velocity [rad/s]")
    elif kind == "er":
        ax.plot(t, cols["E_R"], "-", label="E_R")
        ax.set_ylabel("attitude error norm [-]")
    elif kind == "torque":
        for k, style in zip(("u1", "u2", "u3"), ("-", "--", "-.")):
            ax.plot(t, cols[k], style, label=k)
        ax.set_ylabel("rotor torque [N m]")
    elif kind == "theta":
        for k, style in zip(("th1", "th2", "th3"), ("-", "--", "-.")):
            ax.plot(t, cols[k], style, label=k)
        ax.set_ylabel("rotor angle [rad]")
    elif kind == "gamma":
        for k, style in zip(("g1", "g2", "g3"), ("-", "--", "-.")):
            ax.plot(t, cols[k], style, label=k)
        ax.set_ylabel("body-frame vertical component [-]")
    elif kind == "xy":
        ax.plot(cols["x"], cols["y"], "-", label="trajectory")
        if reference is not None and t is not None:
            rx, ry = reference_xy(reference, t)
            ax.plot(rx, ry, ":", color="k", label="reference")
        ax.set_xlabel("x [m]")
        ax.set_ylabel("y [m]")
        ax.set_aspect("equal", adjustable="datalim")
        ax.legend(loc="best")
        ax.grid(True, alpha=0.3)
        return fig
    else:
        raise ValueError(f"unknown figure kind {kind!r}; choose from {KINDS}")

    ax.set_xlabel("t [s]")
    ax.legend(loc="best")
    ax.grid(True, alpha=0.3)
    return fig


def render(csv_path, kind: str, out_base) -> list[Path]:
    """Render one figure kind to <out_base>.png and <out_base>.svg."""
    csv_path = Path(csv_path)
    if kind not in KINDS:
        raise ValueError(f"unknown figure kind {kind!r}; choose from {KINDS}")
    cols = load_csv(csv_path)
    check_columns(cols, kind, csv_path)
    reference = load_reference(csv_path) if kind == "xy" else None
    fig = build_figure(cols, kind, reference)
    out_base = Path(out_base)
    if out_base.suffix in (".png", ".svg"):
        out_base = out_base.with_suffix("")
    out_base.parent.mkdir(parents=True, exist_ok=True)
    written = []
    for ext in (".png", ".svg"):
        target = out_base.with_suffix(ext)
        fig.savefig(target, dpi=120, metadata={"Date": None} if ext == ".svg" else None)
        written.append(target)
    plt.close(fig)
    return written


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("csv", help="scenario CSV produced by the simulator")
    ap.add_argument("kind", choices=KINDS, help="figure kind")
    ap.add_argument("out", help="output path base (.png and .svg are written)")
    args = ap.parse_args(argv)
    try:
        written = render(args.csv, args.kind, args.out)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for p in written:
        print(f"wrote {p}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
