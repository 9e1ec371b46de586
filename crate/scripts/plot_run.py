#!/usr/bin/env python3
"""Render run CSVs produced by `dpds run`.

Produces a semilog residual plot, and per-agent primal/dual trajectory
plots when the run was recorded with `output.per_agent = true`.

Usage:
    python3 scripts/plot_run.py run.csv --out-prefix figs/run
"""

import argparse
import csv
import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def load(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    cols = {name: [float(r[name]) for r in rows] for name in reader.fieldnames}
    return reader.fieldnames, cols


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv_path")
    ap.add_argument("--out-prefix", default=None, help="prefix for the PNG files")
    args = ap.parse_args()

    prefix = args.out_prefix or pathlib.Path(args.csv_path).with_suffix("")
    prefix = pathlib.Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)

    fields, cols = load(args.csv_path)
    idx = cols["index"]

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(idx, [max(r, 1e-300) for r in cols["residual"]])
    ax.set_xlabel("iteration")
    ax.set_ylabel("residual")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(f"{prefix}_residual.png", dpi=150)
    print(f"wrote {prefix}_residual.png")

    x_cols = [f for f in fields if f.startswith("x_")]
    v_cols = [f for f in fields if f.startswith("v_")]
    for name, group in (("primal", x_cols), ("dual", v_cols)):
        if not group:
            continue
        fig, ax = plt.subplots(figsize=(6, 4))
        for col in group:
            ax.plot(idx, cols[col], lw=0.8, label=col)
        ax.set_xlabel("iteration")
        ax.set_ylabel(name)
        if len(group) <= 12:
            ax.legend(fontsize=6, ncol=2)
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        fig.savefig(f"{prefix}_{name}.png", dpi=150)
        print(f"wrote {prefix}_{name}.png")

    if "V" in fields:
        fig, ax = plt.subplots(figsize=(6, 4))
        for col in ("V1", "V2", "V3", "V"):
            if col in fields:
                ax.plot(idx, cols[col], lw=0.9, label=col)
        ax.set_xlabel("iteration")
        ax.set_ylabel("Lyapunov value")
        ax.legend(fontsize=8)
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        fig.savefig(f"{prefix}_lyapunov.png", dpi=150)
        print(f"wrote {prefix}_lyapunov.png")


if __name__ == "__main__":
    main()
