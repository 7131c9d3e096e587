"""Figures for the benchmark and correctness-experiment reports."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "figure.figsize": (6.0, 3.8),
    "axes.spines.top": False,
    "axes.spines.right": False,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 10,
}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_bench(rows, path) -> Path:
    """Grouped bars of median wall time per operation, one group per profile."""
    profiles = sorted({r.profile for r in rows})
    ops = list(dict.fromkeys(r.op for r in rows))
    width = 0.8 / max(len(profiles), 1)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for k, prof in enumerate(profiles):
            times = {r.op: r.median_s for r in rows if r.profile == prof}
            xs = [i + k * width for i in range(len(ops))]
            ax.bar(xs, [times.get(op, 0.0) * 1e3 for op in ops], width, label=prof)
        ax.set_xticks([i + width * (len(profiles) - 1) / 2 for i in range(len(ops))], ops)
        ax.set_yscale("log")
        ax.set_ylabel("median time (ms)")
        ax.legend(frameon=False)
        return _save(fig, path)


def plot_update_writes(ells, writes, path) -> Path:
    """Node labels written by one leaf update against tree depth."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.plot(ells, writes, "o-", label="measured")
        ax.plot(ells, [e + 1 for e in ells], "k--", lw=1, label="ell + 1")
        ax.set_xlabel("tree depth ell")
        ax.set_ylabel("labels written")
        ax.legend(frameon=False)
        return _save(fig, path)


def plot_corr(report, path) -> Path:
    """Per-operation timing distributions and mean object sizes from a correctness run."""
    ops = [op for op in ("sign", "verify", "trace", "judge", "dtrace", "djudge") if op in report.timings]
    with plt.rc_context({**STYLE, "figure.figsize": (9.0, 3.6)}):
        fig, (left, right) = plt.subplots(1, 2, gridspec_kw={"width_ratios": [3, 2]})
        left.boxplot([[t * 1e3 for t in report.timings[op]] for op in ops])
        left.set_xticks(range(1, len(ops) + 1), ops)
        left.set_ylabel("time (ms)")
        left.set_title(f"{report.profile}: {report.trials} trials, {len(report.failures)} failures", fontsize=10)
        names = sorted(report.sizes)
        means = [sum(report.sizes[n]) / len(report.sizes[n]) / 1024 for n in names]
        right.barh(names, means, color="tab:gray")
        right.set_xlabel("mean size (KiB)")
        return _save(fig, path)
