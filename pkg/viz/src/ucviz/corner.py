"""Corner plot: marginal histograms on the diagonal, pairwise joints below."""

from __future__ import annotations

import argparse

import matplotlib.pyplot as plt
import numpy as np

from . import save_figure
from .io import read_corner


def render(doc: dict):
    d = doc["dims"]
    hist1d = doc["hist1d"]
    hist2d = {(h["i"], h["j"]): np.asarray(h["probs"]) for h in doc["hist2d"]}
    theta_star = doc.get("theta_star")
    fig, axes = plt.subplots(d, d, figsize=(2.2 * d, 2.2 * d), squeeze=False)
    for i in range(d):
        for j in range(d):
            ax = axes[i][j]
            if j > i:
                ax.axis("off")
                continue
            if i == j:
                edges = np.asarray(hist1d[i]["edges"])
                probs = np.asarray(hist1d[i]["probs"])
                ax.stairs(probs, edges, fill=True, color="tab:blue",
                          alpha=0.7)
                if theta_star is not None:
                    ax.axvline(theta_star[i], color="black", linewidth=1)
            else:
                # stored as (row dim j', col dim i') with j' < i'; here
                # row index i is the y dimension and column j the x one
                mat = hist2d[(j, i)]
                x_edges = np.asarray(hist1d[j]["edges"])
                y_edges = np.asarray(hist1d[i]["edges"])
                ax.pcolormesh(x_edges, y_edges, mat.T, cmap="Blues")
                if theta_star is not None:
                    ax.plot([theta_star[j]], [theta_star[i]], marker="o",
                            color="black", markersize=4)
            if i == d - 1:
                ax.set_xlabel(f"theta_{j}")
            if j == 0 and i > 0:
                ax.set_ylabel(f"theta_{i}")
    fig.tight_layout()
    return fig


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--in", dest="in_path", required=True,
                        help="corner histogram JSON")
    parser.add_argument("--out", required=True, help="output .png or .svg")
    args = parser.parse_args(argv)
    fig = render(read_corner(args.in_path))
    save_figure(fig, args.out)
    plt.close(fig)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
