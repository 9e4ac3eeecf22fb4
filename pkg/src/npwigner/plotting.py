"""File-based figure rendering for the command-line reports.

Everything draws with the Agg backend and writes straight to disk; there
is no interactive mode.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_grid_heatmap(path, n_values, thetas, values, title, cbar_label):
    """Pseudocolor map of grid values over (theta, n)."""
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    data = np.real(np.asarray(values))
    mesh = ax.pcolormesh(np.asarray(thetas), np.asarray(n_values), data,
                         shading="nearest", cmap="RdBu_r",
                         vmin=-np.max(np.abs(data)) or -1.0,
                         vmax=np.max(np.abs(data)) or 1.0)
    ax.set_xlabel(r"$\theta$")
    ax.set_ylabel("n")
    ax.set_title(title)
    fig.colorbar(mesh, ax=ax, label=cbar_label)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_columns(path, x, series, xlabel, title):
    """Line plot of the tabulated columns against x."""
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    for label, y in series.items():
        ax.plot(x, y, lw=1.2, label=label)
    ax.set_xlabel(xlabel)
    ax.set_title(title)
    ax.legend(loc="best", fontsize=9)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_base_magnitude(path, window_values, base, title):
    """Log-magnitude image of a kernel base matrix."""
    fig, ax = plt.subplots(figsize=(5.4, 4.6))
    mag = np.abs(np.asarray(base))
    floor = max(mag.max() * 1e-16, 1e-300)
    img = ax.imshow(np.log10(mag + floor), origin="lower",
                    extent=(window_values[0], window_values[-1],
                            window_values[0], window_values[-1]),
                    cmap="viridis")
    ax.set_xlabel("column index")
    ax.set_ylabel("row index")
    ax.set_title(title)
    fig.colorbar(img, ax=ax, label="log10 |base|")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_report_bars(path, report):
    """Residuals against thresholds for every check in a condition report."""
    ids = [e.id for e in report.entries]
    res = np.array([max(e.residual, 1e-18) for e in report.entries])
    thr = np.array([max(e.threshold, 1e-18) for e in report.entries])
    colors = ["tab:green" if e.as_expected else "tab:red" for e in report.entries]
    x = np.arange(len(ids))
    fig, ax = plt.subplots(figsize=(8.0, 4.2))
    ax.bar(x, res, color=colors, width=0.6, label="residual")
    ax.plot(x, thr, "k_", markersize=14, label="threshold")
    ax.set_yscale("log")
    ax.set_xticks(x, ids)
    ax.set_ylabel("residual")
    ax.set_title(f"condition residuals, variant {report.variant}")
    ax.legend(loc="upper right", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
