"""PNG figures for experiment tables.

Figures are built on the Agg canvas directly, so importing this module
never touches the global pyplot backend. PNG metadata that would vary
between runs (software version stamps) is stripped.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .experiments import PhaseTransitionResult, SnrResult

_PNG_META = {"Software": None}


def _save(fig: Figure, path) -> Path:
    path = Path(path)
    FigureCanvasAgg(fig)
    fig.savefig(path, format="png", dpi=100, metadata=_PNG_META)
    return path


def plot_phase_transition(result: PhaseTransitionResult, path, title: str | None = None) -> Path:
    """Recovery fraction against m, one curve per k."""
    spec = result.spec
    fig = Figure(figsize=(6, 4))
    ax = fig.add_subplot()
    m = np.array(spec.m_values)
    for k in spec.k_values:
        ax.plot(m, 100.0 * result.curve(k), marker="o", label=f"k = {k}")
    ax.set_xlabel("measurements m")
    ax.set_ylabel("recovered (%)")
    ax.set_ylim(-2, 102)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="lower right")
    if title is None:
        rule = spec.rule
        title = f"{spec.algorithm.value}, {rule.kind.value} rule, alpha = {rule.alpha:g}, N = {spec.N}"
        if spec.prune_to_k:
            title += ", pruned to k"
    ax.set_title(title)
    fig.tight_layout()
    return _save(fig, path)


def plot_snr(results: Sequence[SnrResult], path) -> Path:
    """Mean SNR per solver as a bar chart."""
    fig = Figure(figsize=(6, 4))
    ax = fig.add_subplot()
    names = [r.solver for r in results]
    # a perfect reconstruction has infinite SNR; it is left without a bar
    vals = [r.snr_db if np.isfinite(r.snr_db) else np.nan for r in results]
    ax.bar(range(len(names)), vals)
    ax.set_xticks(range(len(names)), names)
    ax.set_ylabel("mean SNR (dB)")
    if results:
        r0 = results[0]
        ax.set_title(f"N = {r0.N}, m = {r0.m}, p = {r0.decay_p:g}, {r0.trials} trials")
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    return _save(fig, path)
