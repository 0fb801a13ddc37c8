"""Figure rendering for unit-commitment inference outputs.

Four script entry points (corner, coverage, curves, ppc), each consuming the
pipeline's documented CSV/JSON files and writing PNG or SVG. Rendering is
deterministic: a fixed svg hash salt and pinned metadata keep repeated runs
byte-identical.
"""

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "ucviz"

__version__ = "0.1.0"


def save_figure(fig, out_path) -> None:
    """Write PNG/SVG (by extension) with reproducible metadata."""
    out_path = str(out_path)
    if out_path.endswith(".svg"):
        fig.savefig(out_path, metadata={"Date": None})
    elif out_path.endswith(".png"):
        fig.savefig(out_path, metadata={"Software": "ucviz"}, dpi=120)
    else:
        raise ValueError(f"unsupported image format: {out_path}")
