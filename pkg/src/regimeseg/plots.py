"""Optional figure rendering for the CLI report paths.

Every function writes a PNG next to the delimited output it illustrates and
returns the path. Matplotlib runs on the Agg backend so rendering works in
headless environments.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

DPI = 150


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    return path


def plot_series(values: np.ndarray, path, labels=None, truth=None, title=None):
    """Series traces with the decoded labels (and true boundaries, if known)."""
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    if values.shape[0] < values.shape[1]:
        values = values.T
    fig, ax = plt.subplots(figsize=(9, 3.5))
    t = np.arange(1, values.shape[0] + 1)
    for j in range(values.shape[1]):
        ax.plot(t, values[:, j], lw=0.5, alpha=0.7)
    if labels is not None:
        labels = np.asarray(labels)
        span = values.max() - values.min()
        ax.step(t, values.min() - 0.1 * span + 0.15 * span * labels, where="post", color="red", lw=1.2)
    if truth is not None:
        for cp in np.flatnonzero(np.diff(np.asarray(truth))) + 1:
            ax.axvline(cp, color="gray", ls="--", lw=0.6)
    if title:
        ax.set_title(title)
    ax.set_xlabel("time")
    return _finish(fig, path)


def plot_pp(pairs: np.ndarray, path, title=None):
    """P-P scatter against the diagonal."""
    pairs = np.asarray(pairs, dtype=np.float64)
    fig, ax = plt.subplots(figsize=(4, 4))
    ax.plot([0, 1], [0, 1], color="gray", lw=0.8)
    ax.plot(pairs[:, 0], pairs[:, 1], "o", ms=3)
    ax.set_xlabel("empirical CDF")
    ax.set_ylabel("model CDF")
    if title:
        ax.set_title(title)
    return _finish(fig, path)


def plot_kde(grid: np.ndarray, curves: dict[str, np.ndarray], path, title=None):
    """Per-state density curves on a common grid."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for name, dens in curves.items():
        ax.plot(grid, dens, label=name, lw=1.2)
    ax.legend()
    ax.set_xlabel("value")
    ax.set_ylabel("density")
    if title:
        ax.set_title(title)
    return _finish(fig, path)


def plot_weights(weights: np.ndarray, path, title=None):
    """Final feature weights by ball index."""
    weights = np.asarray(weights, dtype=np.float64)
    fig, ax = plt.subplots(figsize=(7, 3))
    ax.bar(np.arange(1, weights.shape[0] + 1), weights, width=1.0)
    ax.axhline(1.0 / weights.shape[0], color="gray", ls="--", lw=0.8)
    ax.set_xlabel("feature")
    ax.set_ylabel("weight")
    if title:
        ax.set_title(title)
    return _finish(fig, path)


def plot_accuracy_table(rows: list[str], cols: list[str], means: np.ndarray, path, title=None):
    """Grouped bars of mean accuracy, one group per scenario."""
    means = np.asarray(means, dtype=np.float64)
    fig, ax = plt.subplots(figsize=(1.8 * max(4, len(rows)), 3.5))
    width = 0.8 / len(cols)
    xs = np.arange(len(rows))
    for m, col in enumerate(cols):
        ax.bar(xs + m * width, means[:, m], width=width, label=col)
    ax.set_xticks(xs + 0.4 - width / 2)
    ax.set_xticklabels(rows)
    ax.set_ylim(0.5, 1.0)
    ax.set_ylabel("mean accuracy")
    ax.legend(ncols=min(4, len(cols)), fontsize=8)
    if title:
        ax.set_title(title)
    return _finish(fig, path)
