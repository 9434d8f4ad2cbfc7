"""Figures rendered from the CSV outputs (the CSVs are the contract; images are a convenience)."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .report import read_csv_rows  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "figure.dpi": 120,
    "savefig.bbox": "tight",
}
COLORS = {"ld": "#1b9e77", "rf": "#d95f02", "mlp": "#7570b3"}


def _baseline(ax, y=0.5):
    ax.axhline(y, color="0.4", lw=0.8, ls=":")


def plot_early(curves_csv, out_dir) -> list[Path]:
    rows = read_csv_rows(curves_csv)
    data: dict = {}
    for r in rows:
        if r["value"] == "":
            continue
        data.setdefault((r["classifier"], r["metric"]), []).append(
            (int(r["delta"]) / 60.0, float(r["value"])))
    kinds = sorted({k for k, _ in data}, key=lambda k: list(COLORS).index(k) if k in COLORS else 9)
    out_dir = Path(out_dir)
    written = []
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5, 3))
        for kind in kinds:
            for metric, ls in (("auc", "-"), ("kappa_scaled", "--")):
                pts = data.get((kind, metric), [])
                if pts:
                    xs, ys = zip(*pts)
                    ax.plot(xs, ys, ls, color=COLORS.get(kind), label=f"{kind.upper()} {metric}")
        _baseline(ax)
        ax.set_xlabel("hours since publication")
        ax.set_ylabel("score")
        ax.set_ylim(0, 1)
        ax.legend(ncol=2, frameon=False)
        written.append(out_dir / "early_auc_kappa.png")
        fig.savefig(written[-1])
        plt.close(fig)

        fig, ax = plt.subplots(figsize=(5, 3))
        for kind in kinds:
            pts = data.get((kind, "f1"), [])
            if pts:
                xs, ys = zip(*pts)
                ax.plot(xs, ys, color=COLORS.get(kind), label=kind.upper())
        _baseline(ax)
        ax.set_xlabel("hours since publication")
        ax.set_ylabel("F1 (balanced)")
        ax.set_ylim(0, 1)
        ax.legend(frameon=False)
        written.append(out_dir / "early_f1.png")
        fig.savefig(written[-1])
        plt.close(fig)
    return written


def plot_roc(roc_csv, out_dir) -> Path:
    curves: dict = {}
    for r in read_csv_rows(roc_csv):
        curves.setdefault(r["classifier"], []).append((float(r["fpr"]), float(r["tpr"])))
    path = Path(out_dir) / "roc.png"
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(3.5, 3.5))
        for kind, pts in curves.items():
            xs, ys = zip(*pts)
            ax.plot(xs, ys, color=COLORS.get(kind), label=kind.upper())
        ax.plot([0, 1], [0, 1], color="0.4", lw=0.8, ls=":")
        ax.set_xlabel("false positive rate")
        ax.set_ylabel("true positive rate")
        ax.set_aspect("equal")
        ax.legend(frameon=False, loc="lower right")
        fig.savefig(path)
        plt.close(fig)
    return path


def plot_table(table_csv, out_dir) -> Path:
    rows = read_csv_rows(table_csv)
    metrics = ("precision", "recall", "accuracy", "f1")
    path = Path(out_dir) / "final_metrics.png"
    width = 0.8 / max(len(rows), 1)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5, 3))
        for i, r in enumerate(rows):
            vals = [float(r[m]) if r[m] else 0.0 for m in metrics]
            xs = [j + (i - (len(rows) - 1) / 2) * width for j in range(len(metrics))]
            ax.bar(xs, vals, width, color=COLORS.get(r["classifier"]), label=r["classifier"].upper())
        _baseline(ax)
        ax.set_xticks(range(len(metrics)))
        ax.set_xticklabels(metrics)
        ax.set_ylim(0, 1)
        ax.legend(frameon=False, ncol=3)
        fig.savefig(path)
        plt.close(fig)
    return path


def render_all(out_dir) -> list[Path]:
    """Render every figure whose source CSV exists in ``out_dir``."""
    out_dir = Path(out_dir)
    written = []
    if (out_dir / "curves_early.csv").exists():
        written += plot_early(out_dir / "curves_early.csv", out_dir)
    if (out_dir / "roc.csv").exists():
        written.append(plot_roc(out_dir / "roc.csv", out_dir))
    if (out_dir / "table.csv").exists():
        written.append(plot_table(out_dir / "table.csv", out_dir))
    return written
