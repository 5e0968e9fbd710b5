"""Plots the tables written by make_csv.sh (requires numpy, matplotlib)."""

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

HERE = Path(__file__).resolve().parent
DATA = HERE / "data"


def load(name):
    """Numeric columns by header name; `#` lines are metadata."""
    with open(DATA / name, newline="") as f:
        rows = list(csv.reader(line for line in f if not line.startswith("#")))
    header, body = rows[0], rows[1:]
    cols = {}
    for i, key in enumerate(header):
        try:
            cols[key] = np.array([float(r[i]) for r in body])
        except ValueError:
            cols[key] = [r[i] for r in body]
    return cols


def footer(name):
    for line in (DATA / name).read_text().splitlines()[::-1]:
        if line.startswith("# truncation_x:"):
            return dict(
                (k.strip(), float(v)) for k, v in (f.split(":") for f in line[1:].split(","))
            )
    return {}


def plateau(ax):
    t = load("plateau.csv")
    ax.plot(t["x"], t["even"], label="W(Rc, C)")
    ax.plot(t["x"], t["odd"], label="W(Rc, S)")
    ax.set(xlabel="x", ylabel="Wronskian", title="Poschl-Teller v0=2.5, eps=-1")
    ax.legend()


def energy_scan(ax):
    t = load("energy_scan.csv")
    scale = np.abs(np.concatenate([t["even"], t["odd"]])).max()
    ax.plot(t["energy"], t["even"] / scale, label="even")
    ax.plot(t["energy"], t["odd"] / scale, label="odd")
    exact = load("exact_levels.csv")
    ax.plot(exact["energy"], np.zeros(len(exact["energy"])), "s", label="exact")
    ax.axhline(0, color="k", lw=0.5)
    ax.set(xlabel="energy", ylabel="condition (scaled)", title="Poschl-Teller v0=6")
    ax.legend()


def coupling(ax, name, title):
    t = load(name)
    ax.plot(t["v0"], t["even"], label="even")
    ax.plot(t["v0"], t["odd"], label="odd")
    ax.axhline(0, color="k", lw=0.5)
    ax.set(xlabel="v0", ylabel="condition at threshold", title=title)
    ax.legend()


def wavefunction(ax):
    t = load("wavefunction.csv")
    info = footer("wavefunction.csv")
    ax.semilogy(t["x"], np.abs(t["phi"]), label="|phi|")
    if "truncation_x" in info:
        ax.axvline(info["truncation_x"], ls="--", color="gray", label="truncation")
    ax.set(xlabel="x", ylabel="|phi|", title=f"Gaussian v0=5, k={info.get('k', float('nan')):.4f}")
    ax.legend()


def main():
    fig, axes = plt.subplots(2, 3, figsize=(15, 8))
    plateau(axes[0, 0])
    energy_scan(axes[0, 1])
    wavefunction(axes[0, 2])
    coupling(axes[1, 0], "coupling_poschl_teller.csv", "Poschl-Teller, eps = 0")
    coupling(axes[1, 1], "coupling_gaussian.csv", "Gaussian, eps = 0")
    axes[1, 2].axis("off")
    fig.tight_layout()
    out = HERE / "figures.png"
    fig.savefig(out, dpi=120)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
