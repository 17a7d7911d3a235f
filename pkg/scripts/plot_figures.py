#!/usr/bin/env python3
"""Plot the CSV datasets written by the irtr-lab runners.

Usage: plot_figures.py RUN_DIR [RUN_DIR ...]

Each run directory is inspected for the known CSV names and a PNG is saved
next to each dataset.  Requires matplotlib, which the library itself does
not depend on.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    sys.exit("matplotlib is required for plotting; pip install matplotlib")


def read_table(path: Path):
    metadata = {}
    with path.open(encoding="utf-8") as stream:
        for line in stream:
            if not line.startswith("#"):
                header = line.strip().split(",")
                break
            key, _, value = line[1:].strip().partition("=")
            metadata[key.strip()] = value.strip()
        else:
            header = []
        rows = [line.strip().split(",") for line in stream if line.strip()]
    return metadata, header, rows


def column(header, rows, name, kind=float):
    index = header.index(name)
    return np.array([kind(row[index]) for row in rows])


def save(figure, path: Path):
    figure.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(figure)
    print(path)


def plot_fig1(path: Path):
    _, header, rows = read_table(path)
    ratio = column(header, rows, "theta2_over_sigma")
    figure, axes = plt.subplots()
    axes.plot(ratio, column(header, rows, "c_tilde_closed_form"), label="closed form")
    axes.plot(
        ratio,
        column(header, rows, "c_tilde_quadrature"),
        "--",
        label="quadrature",
    )
    axes.set_xlabel("separation / sigma")
    axes.set_ylabel("incompatibility coefficient")
    axes.legend()
    save(figure, path.with_suffix(".png"))


def plot_regret_sweep(path: Path, x_name: str, x_label: str):
    _, header, rows = read_table(path)
    x = column(header, rows, x_name)
    figure, axes = plt.subplots()
    axes.plot(x, column(header, rows, "delta1"), label="delta1")
    axes.plot(x, column(header, rows, "delta2"), label="delta2")
    axes.set_xlabel(x_label)
    axes.set_ylabel("NSR information regret")
    axes.legend()
    save(figure, path.with_suffix(".png"))


def plot_frontier_panel(path: Path):
    metadata, header, rows = read_table(path)
    figure, axes = plt.subplots()
    if rows:
        axes.plot(
            column(header, rows, "delta1"),
            column(header, rows, "delta2"),
            "r-",
            label="frontier",
        )
    if "di_delta1" in metadata:
        axes.plot(
            float(metadata["di_delta1"]),
            float(metadata["di_delta2"]),
            "ko",
            label="direct imaging",
        )
    axes.set_xlim(0, 1)
    axes.set_ylim(0, 1)
    axes.set_xlabel("delta1")
    axes.set_ylabel("delta2")
    axes.set_title(f"theta2/sigma = {metadata.get('theta2_over_sigma', '?')}")
    axes.legend()
    save(figure, path.with_suffix(".png"))


def plot_fig5(samples_path: Path, frontier_path: Path):
    _, header, rows = read_table(samples_path)
    figure, axes = plt.subplots()
    axes.plot(
        column(header, rows, "delta1"),
        column(header, rows, "delta2"),
        ".",
        markersize=2,
        alpha=0.3,
        label="random measurements",
    )
    if frontier_path.is_file():
        _, fheader, frows = read_table(frontier_path)
        if frows:
            axes.plot(
                column(fheader, frows, "delta1"),
                column(fheader, frows, "delta2"),
                "r-",
                label="frontier",
            )
    axes.set_xlabel("delta1")
    axes.set_ylabel("delta2")
    axes.legend()
    save(figure, samples_path.with_suffix(".png"))


def plot_run_dir(run_dir: Path):
    if (run_dir / "fig1.csv").is_file():
        plot_fig1(run_dir / "fig1.csv")
    if (run_dir / "fig2.csv").is_file():
        plot_regret_sweep(run_dir / "fig2.csv", "theta2_over_sigma", "separation / sigma")
    for panel in sorted(run_dir.glob("fig3_panel_*.csv")):
        plot_frontier_panel(panel)
    if (run_dir / "fig4.csv").is_file():
        plot_regret_sweep(run_dir / "fig4.csv", "theta1_over_sigma", "misalignment / sigma")
    if (run_dir / "fig5_samples.csv").is_file():
        plot_fig5(run_dir / "fig5_samples.csv", run_dir / "fig5_frontier.csv")


def main(argv):
    if len(argv) < 2:
        sys.exit(__doc__.strip())
    for argument in argv[1:]:
        plot_run_dir(Path(argument))


if __name__ == "__main__":
    main(sys.argv)
