"""File-output matplotlib helpers for the reporting CLI.

Everything renders through the Agg backend straight to disk; no figure is
ever shown interactively.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["save_report_figure", "save_trace_figure", "save_path_figure"]


def save_report_figure(aggregates: dict[str, dict[str, float]], path, title: str = "") -> str:
    """Bar panels of mean SPE (with standard-error whiskers) and mean FSE."""
    names = list(aggregates)
    spe = [aggregates[n]["spe_mean"] for n in names]
    spe_se = [aggregates[n]["spe_se"] for n in names]
    fse = [aggregates[n]["fse_mean"] for n in names]
    fse_se = [aggregates[n]["fse_se"] for n in names]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.0, 3.2))
    x = np.arange(len(names))
    ax1.bar(x, spe, yerr=spe_se, capsize=3, color="#4878a8")
    ax1.set_xticks(x, names)
    ax1.set_ylabel("SPE")
    ax2.bar(x, fse, yerr=fse_se, capsize=3, color="#b26e63")
    ax2.set_xticks(x, names)
    ax2.set_ylabel("FSE")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def save_trace_figure(traces: dict[str, list[float]], path, title: str = "") -> str:
    """Objective gap per sweep on a log scale, one line per labelled trace."""
    fig, ax = plt.subplots(figsize=(5.4, 3.6))
    for label, trace in traces.items():
        values = np.asarray(trace, dtype=float)
        gap = values - values.min()
        ax.semilogy(np.arange(1, values.size + 1), gap + 1e-16, marker=".", label=label)
    ax.set_xlabel("sweep")
    ax.set_ylabel("objective gap")
    ax.legend(frameon=False)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def save_path_figure(lambdas, coefs: np.ndarray, path, title: str = "") -> str:
    """Coefficient trajectories against log10(lambda); one line per feature."""
    fig, ax = plt.subplots(figsize=(5.4, 3.6))
    logl = np.log10(np.asarray(lambdas, dtype=float))
    for j in range(coefs.shape[1]):
        ax.plot(logl, coefs[:, j], linewidth=0.9)
    ax.set_xlabel("log10(lambda)")
    ax.set_ylabel("coefficient")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)
