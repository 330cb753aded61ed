"""Figure rendering for the report paths, written alongside the CSV output.

Uses the non-interactive Agg backend and strips volatile PNG metadata so
that identical inputs produce byte-identical image files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["save_mgf_curve_figure", "save_sweep_figure"]

# Date and Software vary between runs and environments; dropping them
# keeps the PNG bytes reproducible
_PNG_METADATA = {"Date": None, "Software": None}


def _save(fig, path: str) -> None:
    fig.savefig(path, dpi=120, metadata=_PNG_METADATA)
    plt.close(fig)


def save_mgf_curve_figure(
    path: str,
    s_values: np.ndarray,
    oracle: np.ndarray,
    printed: np.ndarray,
    title: str,
) -> None:
    """Oracle and printed MGF curves over s, on a log ordinate."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    ax.plot(s_values, oracle, label="numeric oracle", lw=1.8)
    ax.plot(s_values, printed, label="printed closed form", lw=1.2, ls="--")
    ax.set_xlabel("s")
    ax.set_ylabel("age MGF")
    ax.set_yscale("log")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    _save(fig, path)


def save_sweep_figure(path: str, groups: dict, title: str) -> None:
    """Mean age with a +-1 std band per policy over the rate split.

    groups maps a policy label to (lambda1, mean, std) arrays.
    """
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for label, (lam1, mean, std) in sorted(groups.items()):
        (line,) = ax.plot(lam1, mean, label=f"{label} mean", lw=1.8)
        color = line.get_color()
        ax.plot(lam1, mean + std, color=color, lw=0.9, ls="--")
        ax.plot(lam1, mean - std, color=color, lw=0.9, ls="--")
    ax.set_xlabel("lambda1 (source-1 share of the total rate)")
    ax.set_ylabel("age of source 1")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    _save(fig, path)
