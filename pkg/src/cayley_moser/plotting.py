"""SVG overlays of empirical against analytic laws."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# fixed element ids and no timestamp, so identical data gives identical files
matplotlib.rcParams["svg.hashsalt"] = "cayley-moser"


def overlay_svg(path, panels, title: str | None = None) -> None:
    """Write one row of overlay panels.

    Each panel is a dict with ``x``, ``analytic``, ``empirical``, ``label``
    and ``kind``: ``"cdf"`` draws two step/line curves, ``"density"`` draws
    the empirical values as a histogram-style step and the analytic density
    as a line.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, axes = plt.subplots(1, len(panels), figsize=(4.5 * len(panels), 3.6), squeeze=False)
    for ax, p in zip(axes[0], panels):
        if p.get("kind") == "density":
            ax.step(p["x"], p["empirical"], where="mid", color="0.6", label="simulated")
        else:
            ax.plot(p["x"], p["empirical"], color="0.6", lw=2.5, label="simulated")
        ax.plot(p["x"], p["analytic"], color="C3", lw=1.2, label="analytic")
        ax.set_title(p.get("label", ""))
        ax.set_xlabel(p.get("xlabel", "x"))
        ax.legend(frameon=False)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
