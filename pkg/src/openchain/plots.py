"""Matplotlib rendering for the CLI figure path.

The CSV files are the contract; these PNGs are a convenience rendered
alongside them. Matplotlib is imported lazily with the Agg backend so the
library never requires a display.
"""

from __future__ import annotations


def save_line_plot(path, x, series, xlabel, ylabel, title=None, logx=False):
    """Render one figure with a curve per (label, y) pair in ``series``."""
    import matplotlib
    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7.0, 4.4))
    for label, y in series:
        ax.plot(x, y, lw=1.5, label=label)
    if logx:
        ax.set_xscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.legend(fontsize=9)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
