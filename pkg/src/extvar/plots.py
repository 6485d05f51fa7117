"""Best-effort SVG line plots for experiment curves.

Decoration only: every acceptance check reads the CSV tables, never a
plot. Matplotlib is imported lazily so the rest of the package works
without a drawing stack.
"""

from __future__ import annotations

from typing import Mapping, Sequence

from .storage import atomic_write


def line_plot(
    path: str,
    xs: Sequence[float],
    series: Mapping[str, Sequence[float]],
    xlabel: str,
    ylabel: str,
    title: str,
    logx: bool = False,
    logy: bool = False,
) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for name, ys in series.items():
        ax.plot(list(xs), list(ys), marker="o", linewidth=1.2, label=name)
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    if len(series) > 1:
        ax.legend()
    fig.tight_layout()
    with atomic_write(path) as handle:
        fig.savefig(handle, format="svg")
    plt.close(fig)
