"""Figure rendering for benchmark sweeps and advisor profiles.

Every report path that writes a delimited results table also renders the
matching figures to PNG files next to it; plotting is headless (Agg).
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

__all__ = ["plot_sweep", "plot_advice"]

_STYLE = {
    "bitpacked": dict(color="#888888", marker="v"),
    "byteslice": dict(color="#1f77b4", marker="o"),
    "vbp": dict(color="#2ca02c", marker="s"),
    "pevbp": dict(color="#d62728", marker="^"),
    "ppvbs": dict(color="#9467bd", marker="D"),
}


def _by_layout(rows, key):
    out = {}
    for r in rows:
        out.setdefault(r["layout"], []).append((r["s"], r[key]))
    for pts in out.values():
        pts.sort()
    return out


def _curve_figure(rows, key, ylabel, title, path):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for layout, pts in _by_layout(rows, key).items():
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        ax.plot(xs, ys, label=layout, **_STYLE.get(layout, {}))
    ax.set_xlabel("skew factor s")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_sweep(rows, out_dir) -> list:
    """Render scan/lookup/memory curves; returns the written paths."""
    import os

    written = []
    for key, ylabel, name in [
        ("scan_ns_per_code", "scan ns/code", "scan"),
        ("lookup_ns_per_code", "lookup ns/code", "lookup"),
        ("bits_per_code", "bits/code", "memory"),
    ]:
        path = os.path.join(out_dir, f"sweep_{name}.png")
        _curve_figure(rows, key, ylabel, f"{name} vs skew", path)
        written.append(path)
    return written


def plot_advice(advice, out_dir) -> str:
    """Selectivity/cost profile of both encodings for one column."""
    import os

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, pts, style in [
        ("byteslice", advice.points_byteslice, _STYLE["byteslice"]),
        ("ppvbs", advice.points_ppvbs, _STYLE["ppvbs"]),
    ]:
        pairs = sorted((p.selectivity, p.time) for p in pts)
        ax.plot([p[0] for p in pairs], [p[1] for p in pairs],
                label=f"{label} (AUC {getattr(advice, 'auc_' + label):.3g})",
                **style)
    ax.set_xlabel("selectivity")
    ax.set_ylabel("cost per scan")
    ax.set_title(f"{advice.column}: chosen {advice.chosen}")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    path = os.path.join(out_dir, f"advise_{advice.column}.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
