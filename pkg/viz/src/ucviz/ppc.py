"""Posterior-predictive dispatch bands against the observed schedule."""

from __future__ import annotations

import argparse
import math

import matplotlib.pyplot as plt

from . import save_figure
from .io import read_ppc

BANDS = (("q_lo_3s", "q_hi_3s", 0.15, "99.7%"),
         ("q_lo_2s", "q_hi_2s", 0.25, "95.5%"),
         ("q_lo_1s", "q_hi_1s", 0.40, "68.7%"))


def render(per_unit: dict):
    n = len(per_unit)
    ncols = min(2, n)
    nrows = math.ceil(n / ncols)
    fig, axes = plt.subplots(nrows, ncols, figsize=(6 * ncols, 3 * nrows),
                             squeeze=False)
    for k, (unit, data) in enumerate(sorted(per_unit.items())):
        ax = axes[k // ncols][k % ncols]
        t = data["t"]
        for lo, hi, alpha, label in BANDS:
            ax.fill_between(t, data[lo], data[hi], alpha=alpha,
                            color="tab:blue", linewidth=0, label=label)
        ax.plot(t, data["median"], color="tab:blue", linewidth=1,
                label="median")
        ax.plot(t, data["mean"], color="tab:cyan", linewidth=1,
                linestyle="--", label="mean")
        ax.plot(t, data["g_true"], color="black", linewidth=1.2,
                label="observed")
        ax.set_title(f"unit {unit}")
        ax.set_xlabel("hour")
        ax.set_ylabel("dispatch [MW]")
        if k == 0:
            ax.legend(frameon=False, fontsize=8)
    for k in range(n, nrows * ncols):
        axes[k // ncols][k % ncols].axis("off")
    fig.tight_layout()
    return fig


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--in", dest="in_path", required=True,
                        help="ppc CSV (unit,t,quantile bands,...)")
    parser.add_argument("--out", required=True, help="output .png or .svg")
    args = parser.parse_args(argv)
    fig = render(read_ppc(args.in_path))
    save_figure(fig, args.out)
    plt.close(fig)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
