"""Index-selection rules shared by all pursuit variants.

Both rules keep every index whose proxy magnitude reaches the threshold
(inclusive comparison, exact floating point, no cap on the set size).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "RuleKind",
    "SelectionRule",
    "SelectionOutcome",
    "ProxyVanished",
    "ResidualVanished",
    "select_weak",
    "select_relaxed",
    "select",
    "relaxed_nonempty_bound",
]


class RuleKind(str, enum.Enum):
    WEAK = "weak"
    RELAXED = "relaxed"


class ProxyVanished(Exception):
    """``Phi^T r`` is identically zero: nothing left to select."""


class ResidualVanished(Exception):
    """The residual norm is zero: the fit is exact."""


@dataclass(frozen=True)
class SelectionRule:
    """Stagewise weak rule (``0 < alpha <= 1``) or relaxed weak rule (``alpha > 0``)."""

    kind: RuleKind
    alpha: float

    def __post_init__(self):
        object.__setattr__(self, "kind", RuleKind(self.kind))
        if not math.isfinite(self.alpha) or self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.kind is RuleKind.WEAK and self.alpha > 1:
            raise ValueError(f"the stagewise weak rule needs alpha <= 1, got {self.alpha}")

    @classmethod
    def weak(cls, alpha: float = 1.0) -> "SelectionRule":
        return cls(RuleKind.WEAK, alpha)

    @classmethod
    def relaxed(cls, alpha: float) -> "SelectionRule":
        return cls(RuleKind.RELAXED, alpha)


@dataclass(frozen=True)
class SelectionOutcome:
    indices: np.ndarray
    threshold: float
    proxy_max: float
    residual_norm: float

    @property
    def empty(self) -> bool:
        return self.indices.size == 0


def select_weak(g: np.ndarray, alpha: float, residual_norm: float = float("nan")) -> SelectionOutcome:
    """``{i : |g_i| >= alpha * max_j |g_j|}``; never empty."""
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    mag = np.abs(g)
    top = float(mag.max())
    if top == 0.0:
        raise ProxyVanished("residual proxy vanished")
    threshold = alpha * top
    return SelectionOutcome(np.flatnonzero(mag >= threshold), threshold, top, residual_norm)


def select_relaxed(g: np.ndarray, r_norm: float, alpha_tilde: float) -> SelectionOutcome:
    """``{i : |g_i| >= alpha~ * ||r||_2}``; may be empty."""
    if alpha_tilde <= 0:
        raise ValueError(f"alpha~ must be positive, got {alpha_tilde}")
    if r_norm <= 0:
        raise ResidualVanished("residual norm is zero")
    mag = np.abs(g)
    threshold = alpha_tilde * r_norm
    return SelectionOutcome(np.flatnonzero(mag >= threshold), threshold, float(mag.max()), r_norm)


def select(rule: SelectionRule, g: np.ndarray, r_norm: float) -> SelectionOutcome:
    if rule.kind is RuleKind.WEAK:
        return select_weak(g, rule.alpha, r_norm)
    return select_relaxed(g, r_norm, rule.alpha)


def relaxed_nonempty_bound(delta_k: float, k: int) -> float:
    """Largest alpha~ for which the relaxed rule is guaranteed nonempty: sqrt(1 - delta_k) / sqrt(k)."""
    if not 0 <= delta_k < 1:
        raise ValueError(f"delta_k must lie in [0, 1), got {delta_k}")
    if k < 1:
        raise ValueError("k must be positive")
    return math.sqrt(1.0 - delta_k) / math.sqrt(k)
