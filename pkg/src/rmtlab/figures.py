"""Figure rendering for persisted runs.

Every plot is rebuilt from the per-trial CSV rows, never from the JSON
aggregates, so a figure is also a visual audit of the persisted data.
Files land next to the run's trials.csv.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from . import edgestats  # noqa: E402

__all__ = ["render"]

_DPI = 150


def _metric(rows, name: str) -> np.ndarray:
    return np.asarray([v for _, m, v in rows if m == name], dtype=float)


def _frequency_figure(rows, summary, metric: str, xlabel: str, path: Path) -> None:
    values = _metric(rows, metric)
    envelope = summary["aggregates"]["envelope"]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(values, bins=min(40, max(10, len(values) // 5)), color="tab:blue", alpha=0.8)
    ax.axvline(envelope, color="tab:red", ls="--", label=f"envelope {envelope:.1f}")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("trials")
    ax.set_title(f"{summary['experiment']}: {metric}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def _edge_figure(rows, summary, path: Path) -> None:
    fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharey=True)
    grid = np.linspace(-6, 4, 400)
    for ax, side in zip(axes, edgestats.SIDES):
        for label, metric, color in (("correlation", f"corr_{side}_1", "tab:blue"),
                                     ("covariance", f"cov_{side}_1", "tab:orange")):
            sample = np.sort(_metric(rows, metric))
            ax.step(sample, np.arange(1, len(sample) + 1) / len(sample),
                    where="post", label=label, color=color)
        ax.plot(grid, edgestats.tw1_cdf(grid), "k--", lw=1, label="reference CDF")
        ax.set_title(f"{side} edge, rescaled")
        ax.set_xlabel("rescaled extreme eigenvalue")
        ax.legend(fontsize=8)
    axes[0].set_ylabel("empirical CDF")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def _greencmp_figure(rows, summary, path: Path) -> None:
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    resid = _metric(rows, "identity_residual_max")
    axes[0].semilogy(np.arange(len(resid)), np.maximum(resid, 1e-18), ".", ms=3)
    axes[0].axhline(1e-8, color="tab:red", ls="--", label="gate 1e-8")
    axes[0].set_xlabel("trial")
    axes[0].set_ylabel("max identity residual")
    axes[0].legend()
    steps = _metric(rows, "telescope_step")
    axes[1].hist(steps, bins=min(40, max(10, len(steps) // 5)), color="tab:green", alpha=0.8)
    axes[1].axvline(steps.mean(), color="k", label=f"mean {steps.mean():.2e}")
    axes[1].set_xlabel("coupled telescoping step")
    axes[1].legend()
    fig.suptitle("resolvent identities and telescoping step")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def _moments_figure(rows, summary, path: Path) -> None:
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    diffs = _metric(rows, "quartic_difference")
    exact = summary["aggregates"]["quartic_exact_gaussian"]
    axes[0].hist(diffs, bins=min(50, max(10, len(diffs) // 20)), color="tab:blue", alpha=0.8)
    axes[0].axvline(diffs.mean(), color="k", label=f"mean {diffs.mean():.2e}")
    axes[0].axvline(exact, color="tab:red", ls="--", label=f"exact {exact:.2e}")
    axes[0].set_xlabel("coupled quartic difference")
    axes[0].legend(fontsize=8)
    names = sorted({m for _, m, _ in rows if m.startswith("kernel_ratio_")})
    max_ratio = [max(v for _, m, v in rows if m == name) for name in names]
    axes[1].bar(np.arange(len(names)), max_ratio, color="tab:purple", alpha=0.8)
    axes[1].axhline(summary["config"]["kernel_ratio_gate"], color="tab:red", ls="--",
                    label="gate")
    axes[1].set_xlabel("partition case")
    axes[1].set_ylabel("kernel sum / structured bound")
    axes[1].legend()
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def render(loaded: dict) -> list[Path]:
    """Render the figures for one loaded run; returns the written paths."""
    summary, rows, run_dir = loaded["summary"], loaded["rows"], Path(loaded["dir"])
    experiment = summary["experiment"]
    out = run_dir / f"{experiment}.png"
    if experiment == "localaw":
        _frequency_figure(rows, summary, "sup_normalized_deviation",
                          "sup of N eta |m - m_ref| over the grid", out)
    elif experiment == "rigidity":
        _frequency_figure(rows, summary, "max_normalized_deviation",
                          "max normalized eigenvalue deviation", out)
    elif experiment == "edge":
        _edge_figure(rows, summary, out)
    elif experiment == "greencmp":
        _greencmp_figure(rows, summary, out)
    elif experiment == "moments":
        _moments_figure(rows, summary, out)
    else:
        return []
    return [out]
