"""Greedy pursuit algorithms over one iteration skeleton.

Every run repeats proxy -> select -> update -> stop-check:

* proxy ``g = Phi^T r``;
* selection by the configured rule (stagewise weak or relaxed weak);
* update by the algorithm family:

  - MP accumulates ``x_i += g_i`` for every selected ``i`` and subtracts
    ``sum g_i phi_i`` from the residual;
  - OMP grows the support and re-solves least squares on it from scratch
    (optionally pruning to the k largest coefficients);
  - GP grows the support and takes an exact line-search step along
    ``d = Phi_S^T r``.

With ``alpha = 1`` in the weak rule these are classical MP, OMP and GP.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .constants import DEFAULT_RESIDUAL_TOL, TAU_ORTH, TAU_RESIDUAL_IDENTITY
from .linalg import DimensionError, as_support, least_squares
from .selection import (
    ProxyVanished,
    ResidualVanished,
    SelectionRule,
    select,
)

__all__ = [
    "Algorithm",
    "Status",
    "NumericalError",
    "PursuitConfig",
    "PursuitState",
    "IterationRecord",
    "PursuitTrace",
    "SparseSignal",
    "run_pursuit",
    "run_mp",
    "run_omp",
    "run_gp",
    "recover_on_support",
    "exact_recovery_check",
]

TRACE_COLUMNS = ("n", "residual_norm", "selected_count", "support_size", "step", "contraction_ratio")


class Algorithm(str, enum.Enum):
    MP = "mp"
    OMP = "omp"
    GP = "gp"


class Status(str, enum.Enum):
    CONVERGED = "converged"
    MAX_ITERATIONS = "max_iterations"
    STALLED = "stalled"


class NumericalError(ArithmeticError):
    """An invariant that holds in exact arithmetic failed beyond tolerance."""


@dataclass(frozen=True)
class PursuitConfig:
    algorithm: Algorithm
    rule: SelectionRule = field(default_factory=SelectionRule.weak)
    max_iterations: int | None = None
    residual_tol: float = DEFAULT_RESIDUAL_TOL
    sparsity_k: int | None = None
    prune_to_k: bool = False

    def __post_init__(self):
        object.__setattr__(self, "algorithm", Algorithm(self.algorithm))
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.residual_tol < 0:
            raise ValueError("residual_tol must be non-negative")
        if self.sparsity_k is not None and self.sparsity_k < 1:
            raise ValueError("sparsity_k must be positive")
        if self.prune_to_k and (self.sparsity_k is None or self.algorithm is not Algorithm.OMP):
            raise ValueError("prune_to_k requires sparsity_k and the OMP algorithm")

    def iteration_cap(self, m: int) -> int:
        if self.max_iterations is not None:
            return self.max_iterations
        if self.sparsity_k is not None:
            return 2 * self.sparsity_k
        return m


@dataclass
class PursuitState:
    n: int
    residual: np.ndarray
    estimate: np.ndarray
    support: np.ndarray
    approximation: np.ndarray


@dataclass(frozen=True)
class IterationRecord:
    n: int
    residual_norm: float
    selected: np.ndarray
    support: np.ndarray
    step: float
    contraction_ratio: float

    @property
    def support_size(self) -> int:
        return int(self.support.size)

    def row(self) -> tuple:
        return (self.n, self.residual_norm, int(self.selected.size), self.support_size,
                self.step, self.contraction_ratio)


@dataclass
class PursuitTrace:
    initial_residual_norm: float
    records: list[IterationRecord] = field(default_factory=list)
    status: Status | None = None
    reason: str = ""

    @property
    def iterations(self) -> int:
        return len(self.records)

    @property
    def residual_norms(self) -> np.ndarray:
        return np.array([self.initial_residual_norm] + [r.residual_norm for r in self.records])

    @property
    def selections(self) -> list[np.ndarray]:
        return [r.selected for r in self.records]

    def rows(self) -> list[tuple]:
        return [r.row() for r in self.records]


@dataclass(frozen=True)
class SparseSignal:
    """A k-sparse vector of length N given by its support and nonzero values."""

    N: int
    support: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        support = as_support(self.support, self.N)
        values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if support.size != np.asarray(self.support).size or values.size != support.size:
            raise ValueError("support and values must have equal length without duplicate indices")
        if np.any(values == 0):
            raise ValueError("values on the support must be nonzero")
        order = np.argsort(np.asarray(self.support, dtype=np.int64))
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "values", values[order])

    @property
    def k(self) -> int:
        return int(self.support.size)

    def to_dense(self) -> np.ndarray:
        x = np.zeros(self.N)
        x[self.support] = self.values
        return x

    @classmethod
    def from_dense(cls, x) -> "SparseSignal":
        x = np.asarray(x, dtype=np.float64)
        idx = np.flatnonzero(x)
        return cls(x.size, idx, x[idx])


class _Stall(Exception):
    pass


def _update_mp(Phi, y, state, selected, cfg):
    g = Phi[:, selected].T @ state.residual
    state.estimate[selected] += g
    delta = Phi[:, selected] @ g
    state.approximation += delta
    state.residual -= delta
    state.support = np.union1d(state.support, selected)
    return float("nan")


def _update_omp(Phi, y, state, selected, cfg):
    support = np.union1d(state.support, selected)
    z = least_squares(Phi[:, support], y, support)
    if cfg.prune_to_k and support.size > cfg.sparsity_k:
        keep = np.sort(np.argsort(-np.abs(z), kind="stable")[: cfg.sparsity_k])
        support = support[keep]
        z = least_squares(Phi[:, support], y, support)
    state.support = support
    state.estimate = np.zeros(Phi.shape[1])
    state.estimate[support] = z
    state.approximation = Phi[:, support] @ z
    state.residual = y - state.approximation
    col_norms = np.linalg.norm(Phi[:, support], axis=0)
    corr = np.abs(Phi[:, support].T @ state.residual)
    limit = TAU_ORTH * np.linalg.norm(y) * col_norms
    if np.any(corr > limit):
        raise NumericalError(
            f"least-squares residual not orthogonal to the support at iteration {state.n}: "
            f"max |<phi_j, r>| = {corr.max():.3e}"
        )
    return float("nan")


def _update_gp(Phi, y, state, selected, cfg):
    support = np.union1d(state.support, selected)
    sub = Phi[:, support]
    d = sub.T @ state.residual
    c = sub @ d
    cc = float(c @ c)
    if cc == 0.0:
        raise _Stall("degenerate direction: Phi_S d = 0")
    a = float(state.residual @ c) / cc
    state.support = support
    state.estimate[support] += a * d
    state.approximation += a * c
    state.residual -= a * c
    return a


_UPDATERS = {Algorithm.MP: _update_mp, Algorithm.OMP: _update_omp, Algorithm.GP: _update_gp}


def run_pursuit(Phi: np.ndarray, y: np.ndarray, cfg: PursuitConfig,
                selections: Sequence[Sequence[int]] | None = None,
                check_invariants: bool = True) -> tuple[PursuitState, PursuitTrace]:
    """Run ``cfg.algorithm`` on ``y`` with sensing matrix ``Phi``.

    If ``selections`` is given, iteration ``n`` uses ``selections[n-1]``
    instead of the rule; the run stops when they are exhausted. This replays
    one algorithm's choices through another algorithm's update.
    """
    m, N = Phi.shape
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (m,):
        raise DimensionError(f"y has shape {y.shape}, expected ({m},)")
    update = _UPDATERS[cfg.algorithm]
    state = PursuitState(0, y.copy(), np.zeros(N), np.zeros(0, dtype=np.int64), np.zeros(m))
    y_norm = float(np.linalg.norm(y))
    trace = PursuitTrace(y_norm)
    tol = cfg.residual_tol * y_norm
    cap = cfg.iteration_cap(m) if selections is None else len(selections)

    r_norm = y_norm
    if r_norm <= tol:
        trace.status, trace.reason = Status.CONVERGED, "residual below tolerance"
        return state, trace

    for n in range(1, cap + 1):
        g = Phi.T @ state.residual
        if selections is not None:
            chosen = as_support(selections[n - 1], N)
        else:
            try:
                outcome = select(cfg.rule, g, r_norm)
            except ProxyVanished:
                trace.status, trace.reason = Status.CONVERGED, "residual proxy vanished"
                return state, trace
            except ResidualVanished:
                trace.status, trace.reason = Status.CONVERGED, "residual vanished"
                return state, trace
            if outcome.empty:
                trace.status, trace.reason = Status.STALLED, "stalled: relaxed rule empty"
                return state, trace
            chosen = outcome.indices

        state.n = n
        try:
            step = update(Phi, y, state, chosen, cfg)
        except _Stall as exc:
            state.n = n - 1
            trace.status, trace.reason = Status.STALLED, str(exc)
            return state, trace

        if check_invariants:
            gap = np.linalg.norm(state.residual - (y - state.approximation))
            if gap > TAU_RESIDUAL_IDENTITY * y_norm:
                raise NumericalError(f"r^n != y - y^n at iteration {n} (gap {gap:.3e})")

        new_norm = float(np.linalg.norm(state.residual))
        trace.records.append(IterationRecord(n, new_norm, chosen, state.support.copy(), step,
                                             new_norm / r_norm))
        r_norm = new_norm
        if r_norm <= tol:
            trace.status, trace.reason = Status.CONVERGED, "residual below tolerance"
            return state, trace

    trace.status = Status.MAX_ITERATIONS
    trace.reason = "selections exhausted" if selections is not None else "iteration cap reached"
    return state, trace


def _require(cfg: PursuitConfig, algorithm: Algorithm):
    if cfg.algorithm is not algorithm:
        raise ValueError(f"config is for {cfg.algorithm.value}, expected {algorithm.value}")


def run_mp(Phi, y, cfg, **kw):
    _require(cfg, Algorithm.MP)
    return run_pursuit(Phi, y, cfg, **kw)


def run_omp(Phi, y, cfg, **kw):
    _require(cfg, Algorithm.OMP)
    return run_pursuit(Phi, y, cfg, **kw)


def run_gp(Phi, y, cfg, **kw):
    _require(cfg, Algorithm.GP)
    return run_pursuit(Phi, y, cfg, **kw)


def recover_on_support(Phi: np.ndarray, y: np.ndarray, support) -> np.ndarray:
    """Least-squares coefficients on ``support`` embedded in a length-N vector."""
    m, N = Phi.shape
    support = as_support(support, N)
    if support.size > m:
        raise ValueError(f"support of size {support.size} exceeds the {m} measurements")
    x = np.zeros(N)
    x[support] = least_squares(Phi[:, support], np.asarray(y, dtype=np.float64), support)
    return x


def exact_recovery_check(x_true: SparseSignal, x_hat: np.ndarray, tol: float) -> bool:
    """Whether ``x_hat`` recovers ``x_true`` to ``tol`` (inclusive), with matching supports above ``tol``."""
    x = x_true.to_dense()
    x_hat = np.asarray(x_hat, dtype=np.float64)
    if x_hat.shape != x.shape:
        raise DimensionError(f"x_hat has shape {x_hat.shape}, expected {x.shape}")
    if np.linalg.norm(x_hat - x) > tol * max(1.0, float(np.linalg.norm(x))):
        return False
    return bool(np.array_equal(np.abs(x_hat) > tol, np.abs(x) > tol))
