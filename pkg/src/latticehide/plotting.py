"""Figure rendering for simulation sweep series.

Figures are written to files next to the CSV series output; nothing is
shown interactively.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

__all__ = ["render_series_figure", "render_signal_overlay"]


def render_series_figure(rows, param: str, path) -> None:
    """Plot simulated vs theoretical MSE curves over a sweep parameter."""
    x = [row[param] for row in rows]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    series = [
        ("qim_mse", "QIM (simulated)", "o-", "tab:blue"),
        ("qim_mse_theory", "QIM (theory)", "--", "tab:blue"),
        ("mdqim_mse", "MD-QIM (simulated)", "s-", "tab:red"),
        ("mdqim_mse_bound", "MD-QIM (printed bound)", "--", "tab:red"),
        ("mdqim_mse_oracle", "MD-QIM (MC oracle)", ":", "tab:green"),
    ]
    for key, label, style, color in series:
        if key in rows[0]:
            ax.plot(x, [row[key] for row in rows], style, color=color,
                    label=label, markersize=4)
    ax.set_xlabel(param)
    ax.set_ylabel("MSE per dimension")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_signal_overlay(host_samples, embedded_samples, path,
                          max_samples: int = 2000) -> None:
    """Overlay of host and embedded signal over the first max_samples samples."""
    n = min(len(host_samples), max_samples)
    fig, ax = plt.subplots(figsize=(8.0, 3.0))
    ax.plot(host_samples[:n], lw=0.8, label="host")
    ax.plot(embedded_samples[:n], lw=0.8, alpha=0.7, label="embedded")
    ax.set_xlabel("sample")
    ax.set_ylabel("amplitude")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
