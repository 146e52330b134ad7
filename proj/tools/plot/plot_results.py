#!/usr/bin/env python3
"""Render the CSV artifacts of an `asce` output directory to PNG figures.

Usage: plot_results.py RESULTS_DIR [-o OUT_DIR]

One figure per artifact kind found in the directory:
  mse_<algo>.csv             -> mse.png              (log-y trace per algorithm)
  trace-step-size_<algo>.csv -> step_size.png        (applied step per algorithm)
  ber_<algo>.csv             -> ber.png              (log-y BER vs SNR)
  sweep_<algo>.csv           -> sweep_<algo>.png     (steady error vs SNR per sparsity)
"""

import argparse
import csv
import sys
from collections import defaultdict
from pathlib import Path

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    sys.exit("matplotlib is required: pip install matplotlib")


def read_rows(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def algo_of(path, prefix):
    return path.name[len(prefix) : -len(".csv")]


def plot_traces(files, prefix, ylabel, logy, out_path):
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for path in files:
        rows = read_rows(path)
        xs = [int(r["iteration"]) for r in rows]
        key = "mse" if "mse" in rows[0] else "mu"
        ys = [float(r[key]) for r in rows]
        ax.plot(xs, ys, label=algo_of(path, prefix), linewidth=1.2)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel("iteration")
    ax.set_ylabel(ylabel)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    print(f"wrote {out_path}")


def plot_ber(files, out_path):
    # one line per (constellation, algorithm)
    curves = defaultdict(list)
    for path in files:
        for r in read_rows(path):
            label = f"{r['order']}{r['scheme']} {r['algorithm']}"
            curves[label].append((float(r["snr_db"]), float(r["ber"])))
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for label, pts in sorted(curves.items()):
        pts.sort()
        ax.semilogy([p[0] for p in pts], [p[1] for p in pts], marker="o", label=label)
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("bit error rate")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    print(f"wrote {out_path}")


def plot_sweep(path, out_path):
    by_sparsity = defaultdict(list)
    for r in read_rows(path):
        by_sparsity[int(r["sparsity"])].append(
            (float(r["snr_db"]), float(r["steady_state_mse"]))
        )
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for t, pts in sorted(by_sparsity.items()):
        pts.sort()
        ax.semilogy([p[0] for p in pts], [p[1] for p in pts], marker="s", label=f"T={t}")
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("steady-state MSE")
    ax.set_title(algo_of(path, "sweep_"))
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    print(f"wrote {out_path}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("results_dir", type=Path)
    ap.add_argument("-o", "--out", type=Path, default=None, help="figure directory")
    args = ap.parse_args()

    out = args.out or args.results_dir
    out.mkdir(parents=True, exist_ok=True)
    csvs = sorted(args.results_dir.glob("*.csv"))
    if not csvs:
        sys.exit(f"no CSV artifacts in {args.results_dir}")

    mse = [p for p in csvs if p.name.startswith("mse_")]
    steps = [p for p in csvs if p.name.startswith("trace-step-size_")]
    ber = [p for p in csvs if p.name.startswith("ber_")]
    sweeps = [p for p in csvs if p.name.startswith("sweep_")]

    if mse:
        plot_traces(mse, "mse_", "MSE", True, out / "mse.png")
    if steps:
        plot_traces(steps, "trace-step-size_", "applied step-size", False, out / "step_size.png")
    if ber:
        plot_ber(ber, out / "ber.png")
    for p in sweeps:
        plot_sweep(p, out / (p.stem + ".png"))


if __name__ == "__main__":
    main()
