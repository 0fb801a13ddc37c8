"""Learning-curve plot: training and validation NLL per epoch."""

from __future__ import annotations

import argparse

import matplotlib.pyplot as plt
import numpy as np

from . import save_figure
from .io import read_curves


def render(data: dict):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(data["epoch"], data["train_nll"], label="train", color="tab:blue")
    ax.plot(data["epoch"], data["val_nll"], label="validation",
            color="tab:orange")
    chosen = np.flatnonzero(data["selected"] > 0)
    if chosen.size:
        e = data["epoch"][chosen[0]]
        ax.axvline(e, color="gray", linestyle=":", linewidth=1)
        ax.plot([e], [data["val_nll"][chosen[0]]], marker="*",
                color="tab:red", markersize=10, label="selected epoch")
    ax.set_xlabel("epoch")
    ax.set_ylabel("negative log likelihood")
    ax.legend(frameon=False)
    fig.tight_layout()
    return fig


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--in", dest="in_path", required=True,
                        help="learning-curve CSV (epoch,train_nll,val_nll,selected)")
    parser.add_argument("--out", required=True, help="output .png or .svg")
    args = parser.parse_args(argv)
    fig = render(read_curves(args.in_path))
    save_figure(fig, args.out)
    plt.close(fig)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
