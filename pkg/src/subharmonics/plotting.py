"""Static SVG figures: root ladder, 2T curve and bifurcation diagrams."""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# fixed hash salt and no timestamp: identical input gives identical SVG bytes
plt.rcParams.update({
    "svg.hashsalt": "subharmonics",
    "svg.fonttype": "path",
    "font.size": 9,
    "axes.linewidth": 0.8,
    "lines.linewidth": 1.0,
    "figure.dpi": 100,
})

_SIDE_COLORS = {1: "#1f5fa8", -1: "#b8332c"}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None}, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_root_ladder(table, path, title: Optional[str] = None) -> Path:
    """Positive roots of p_n at height n; the root 2 of even n drawn hollow."""
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    for n in table:
        xs = [float(r.mid) for r in table[n] if not r.is_exact_two]
        ax.plot(xs, [n] * len(xs), "o", ms=3.5, color="black")
        twos = [2.0 for r in table[n] if r.is_exact_two]
        ax.plot(twos, [n] * len(twos), "o", ms=3.5, mfc="white", color="black")
    levels = list(table)
    ax.set_yticks(levels)
    ax.set_xlim(0, 2.1)
    ax.set_xlabel("A")
    ax.set_ylabel("n")
    ax.grid(axis="y", lw=0.3, alpha=0.5)
    if title:
        ax.set_title(title)
    return _save(fig, path)


def plot_two_periodic(curve, path, title: Optional[str] = None) -> Path:
    """Both half-branches of 2T states against B, with the trivial line x = 1."""
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    lower = curve.lower_branch()
    upper = curve.upper_branch()
    Bc = 4 / float(curve.A)
    B_end = max([float(b) for b, _ in lower + upper] + [Bc * 2])
    ax.plot([0, B_end], [1, 1], color="gray", lw=0.8)
    for pts, color in ((lower, _SIDE_COLORS[-1]), (upper, _SIDE_COLORS[1])):
        if pts:
            ax.plot([Bc] + [float(b) for b, _ in pts], [1.0] + [float(z) for _, z in pts], color=color)
    ax.plot([Bc], [1], "o", ms=4, color="black")
    ax.set_xlim(0, B_end)
    ax.set_ylim(0, 2)
    ax.set_xlabel("B")
    ax.set_ylabel("x")
    if title:
        ax.set_title(title)
    return _save(fig, path)


def plot_branches(branches: Sequence, path, A_max: Optional[float] = None, title: Optional[str] = None,
                  label_orders: bool = True) -> Path:
    """A horizontal, x vertical; one polyline per half-branch, seeds marked on x = 1."""
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    A_hi = A_max or max((max(s.A for s in b.samples) for b in branches), default=3.0)
    ax.plot([0, A_hi], [1, 1], color="gray", lw=0.8)
    orders = sorted({b.n for b in branches})
    cmap = plt.get_cmap("viridis", max(len(orders), 2))
    color = {n: cmap(i) for i, n in enumerate(orders)}
    seen = set()
    for b in branches:
        A = [s.A for s in b.samples]
        x = [s.x for s in b.samples]
        lab = f"n = {b.n}" if (label_orders and b.n not in seen) else None
        seen.add(b.n)
        ax.plot(A, x, color=color[b.n], label=lab)
        for i in b.folds:
            ax.plot([b.samples[i].A], [b.samples[i].x], "s", ms=2.5, color=color[b.n])
    seeds = sorted({round(b.r, 12) for b in branches})
    ax.plot(seeds, [1] * len(seeds), "o", ms=3.5, color="black", zorder=5)
    top = max((max(s.x for s in b.samples) for b in branches), default=2.0)
    ax.set_xlim(0, A_hi)
    ax.set_ylim(0, max(2.0, top * 1.05))
    ax.set_xlabel("A")
    ax.set_ylabel("x")
    if label_orders and branches:
        ax.legend(loc="upper left", frameon=False, fontsize=7)
    if title:
        ax.set_title(title)
    return _save(fig, path)


def plot_atlas(atlas, path, title: Optional[str] = None) -> Path:
    return plot_branches(atlas.branches(), path, A_max=atlas.A_max, title=title)
