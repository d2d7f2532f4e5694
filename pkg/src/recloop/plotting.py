"""SVG line plots from sweep CSVs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .sweep import read_sweep_csv  # noqa: E402

KINDS = {
    "omega-phi": ("phi", ["omega"]),
    "auc-phi": ("phi", ["auc_est", "auc_real"]),
    "omega1-f1": ("f1", ["omega1"]),
}


def _float(v):
    return float(v) if v not in ("", None) else float("nan")


def _group_column(rows, x):
    for col in ("G", "k", "b", "similarity", "f1", "phi"):
        if col != x and len({r[col] for r in rows}) > 1:
            return col
    return None


def render_plots(csv_path, kind: str, output: str, by: str | None = None) -> str:
    """Plot the mean rows of a sweep CSV; returns the SVG path.

    ``omega-phi`` draws omega against phi, ``auc-phi`` both AUCs against
    phi, ``omega1-f1`` the taste-1 fraction against f1 with the y = x line.
    One line per value of ``by`` (default: the first other swept column).
    """
    if kind not in KINDS:
        raise ValueError(f"unknown figure kind {kind!r}; choose from {sorted(KINDS)}")
    x, ys = KINDS[kind]
    rows = read_sweep_csv(csv_path)
    missing = {x, *ys, "instance"} - set(rows[0])
    if missing:
        raise ValueError(f"{csv_path}: missing columns {sorted(missing)}")
    means = [r for r in rows if r["instance"] == "mean"]
    ses = [r for r in rows if r["instance"] == "stderr"]
    if not means:
        means, ses = rows, [{} for _ in rows]
    by = by or _group_column(means, x)
    groups = {}
    for m, s in zip(means, ses):
        groups.setdefault(m[by] if by else "", []).append((m, s))

    plt.rcParams["svg.hashsalt"] = "recloop"
    fig, ax = plt.subplots(figsize=(5, 4))
    for key, pts in groups.items():
        pts.sort(key=lambda p: _float(p[0][x]))
        xs = [_float(m[x]) for m, _ in pts]
        for y in ys:
            label = " ".join(s for s in (y if len(ys) > 1 else "", f"{by}={key}" if by else "") if s)
            err = [_float(s.get(y, "")) for _, s in pts]
            ax.errorbar(xs, [_float(m[y]) for m, _ in pts], yerr=err, marker="o", ms=3,
                        capsize=2, label=label or None)
    if kind == "omega1-f1":
        ax.plot([0, 1], [0, 1], ls="--", color="gray", label="optimal")
    ax.set_xlabel({"phi": "phi (deliberate selection frequency)", "f1": "f1"}[x])
    ax.set_ylabel({"omega-phi": "omega", "auc-phi": "AUC", "omega1-f1": "omega1"}[kind])
    if ax.get_legend_handles_labels()[0]:
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(output, format="svg", metadata={"Date": None})
    plt.close(fig)
    return output

