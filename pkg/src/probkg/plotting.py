"""Figures for benchmark reports, written to files next to the CSV output."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib as mpl  # noqa: E402
import matplotlib.pyplot as plt  # noqa: E402

from .bench import PERCENTILES, BenchResult, percentile_gain  # noqa: E402

ENGINE_COLORS = {
    "semiring": "#1b9e77",
    "oracle": "#7570b3",
    "kc": "#d95f02",
    "adaptive": "#444444",
}

STYLE = {
    "axes.labelsize": 10,
    "axes.titlesize": 11,
    "font.size": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}


def plot_bucket_times(result: BenchResult, path):
    """Grouped bars of per-bucket median time per engine, log scale."""
    buckets = result.config.buckets
    engines = result.config.engines
    width = 0.8 / len(engines)
    with mpl.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(7.5, 3.4))
        for k, eng in enumerate(engines):
            medians = result.bucket_medians(eng)
            xs = [i + (k - (len(engines) - 1) / 2) * width for i in medians]
            ys = [medians[i] * 1e6 for i in medians]
            ax.bar(xs, ys, width, label=eng, color=ENGINE_COLORS.get(eng))
        ax.set_yscale("log")
        ax.set_xticks(range(len(buckets)))
        ax.set_xticklabels([b.label for b in buckets], rotation=25, ha="right")
        ax.set_ylabel("median time per answer (µs)")
        ax.legend(ncol=len(engines), frameon=False, loc="upper left")
        fig.savefig(path)
        plt.close(fig)
    return path


def plot_percentile_gains(result: BenchResult, path, methods=("oracle", "kc")):
    """Percentile-gain curves of the semiring engine, one panel per compared method."""
    methods = [m for m in methods if m in result.config.engines]
    buckets = result.config.buckets
    with mpl.rc_context(STYLE):
        fig, axes = plt.subplots(1, max(1, len(methods)), figsize=(4 * max(1, len(methods)), 3.2),
                                 sharey=True, squeeze=False)
        for ax, method in zip(axes[0], methods):
            for bi, gains in sorted(result.gains(method).items()):
                ys = [100 * percentile_gain(gains, p) for p in PERCENTILES]
                ax.plot(PERCENTILES, ys, marker="o", lw=1.2, ms=3, label=buckets[bi].label)
            ax.axhline(0, color="0.6", lw=0.8)
            ax.set_title(f"semiring vs {method}")
            ax.set_xlabel("percentile of answers")
        axes[0][0].set_ylabel("gain (%)")
        axes[0][-1].legend(frameon=False, fontsize=7)
        fig.savefig(path)
        plt.close(fig)
    return path
