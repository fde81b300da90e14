"""Static SVG renderings of result tables (convenience only)."""

from __future__ import annotations

import math
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .io import ResultTable  # noqa: E402

plt.rcParams["svg.hashsalt"] = "codesign"


def _finite(xs, ys):
    pts = [(x, y) for x, y in zip(xs, ys) if math.isfinite(y)]
    return [p[0] for p in pts], [p[1] for p in pts]


def plot_table(t: ResultTable, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    kind = t.schema.split("/")[0]
    if kind == "tradeoff":
        by = defaultdict(list)
        for r in t.rows:
            by[r[0]].append(r[1:3])
        for name, pts in by.items():
            ax.plot(*_finite(*zip(*pts)), marker="o", label=name)
        ax.set_ylabel("minimal lifetime cost [$]")
        ax.legend()
    elif kind in ("violin", "adaptive"):
        groups = defaultdict(list)
        for r in t.rows:
            key = (r[0], r[1]) if kind == "adaptive" else (None, r[0])
            if math.isfinite(r[-1]):
                groups[key].append(r[-1])
        levels = sorted({k[0] for k in groups}, key=str)
        width = 400.0 / max(1, len(levels))
        for j, lev in enumerate(levels):
            keys = [k for k in groups if k[0] == lev and groups[k]]
            if keys:
                pos = [k[1] + (j - (len(levels) - 1) / 2) * width for k in keys]
                ax.violinplot([groups[k] for k in keys], positions=pos, widths=width * 0.9, showmedians=True)
        ax.set_ylabel("lifetime cost [$]")
    elif kind == "bounds":
        w = t.column("payload")
        ax.plot(*_finite(w, t.column("lower_cost")), marker="v", label="optimistic endpoint")
        ax.plot(*_finite(w, t.column("upper_cost")), marker="^", label="pessimistic endpoint")
        ax.set_ylabel("lifetime cost [$]")
        ax.legend()
    elif kind == "choices":
        by = defaultdict(dict)
        for w, a, b, p in t.rows:
            by[f"{a}/{b}" if a else "infeasible"][w] = p
        ws = sorted({r[0] for r in t.rows})
        bottom = [0.0] * len(ws)
        for lab, d in sorted(by.items()):
            h = [d.get(x, 0.0) for x in ws]
            ax.bar(range(len(ws)), h, bottom=bottom, label=lab)
            bottom = [u + v for u, v in zip(bottom, h)]
        ax.set_xticks(range(len(ws)), [f"{x:g}" for x in ws])
        ax.set_ylabel("probability of being optimal")
        ax.legend(fontsize=6)
    else:
        ax.axis("off")
        ax.text(0.02, 0.98, "\n".join(" | ".join(map(str, r)) for r in t.rows[:40]), va="top", fontsize=6,
                family="monospace", transform=ax.transAxes)
    if kind not in ("choices",) and ax.axison:
        ax.set_xlabel("payload [g]")
    ax.set_title(t.name)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
