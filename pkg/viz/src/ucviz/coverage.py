"""Coverage plot: empirical expected coverage against the credibility level."""

from __future__ import annotations

import argparse

import matplotlib.pyplot as plt

from . import save_figure
from .io import read_coverage


def render(data: dict):
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.plot([0, 1], [0, 1], color="black", linestyle="--", linewidth=1,
            label="perfect calibration")
    ax.fill_between(data["level"], data["ci_low"], data["ci_high"],
                    alpha=0.25, color="tab:blue", linewidth=0)
    ax.plot(data["level"], data["coverage"], color="tab:blue", marker="o",
            markersize=3, label="empirical coverage")
    ax.set_xlabel("credibility level")
    ax.set_ylabel("expected coverage")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.legend(loc="upper left", frameon=False)
    fig.tight_layout()
    return fig


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--in", dest="in_path", required=True,
                        help="coverage CSV (level,coverage,ci_low,ci_high)")
    parser.add_argument("--out", required=True, help="output .png or .svg")
    args = parser.parse_args(argv)
    fig = render(read_coverage(args.in_path))
    save_figure(fig, args.out)
    plt.close(fig)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
