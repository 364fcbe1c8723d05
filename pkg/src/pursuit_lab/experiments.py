"""Phase-transition sweeps and compressible-signal SNR studies.

Seeding: the sensing matrix for a given ``m`` comes from
``derive_seed(base_seed, MATRIX, m)`` and is shared by every ``k`` and
trial at that ``m``; the signal for trial ``t`` of cell ``(m, k)`` comes
from the stream ``(base_seed, SIGNAL, m, k, t)``. Cells are therefore
independent and can run in any order (or in worker processes) while the
reduced tables stay byte-identical.
"""

from __future__ import annotations

import configparser
import enum
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .constants import DEFAULT_RECOVERY_TOL, DEFAULT_RESIDUAL_TOL
from .ensembles import Ensemble, EnsembleSpec, generate
from .io import write_table
from .linalg import RankDeficientError
from .pursuit import (
    Algorithm,
    NumericalError,
    PursuitConfig,
    SparseSignal,
    exact_recovery_check,
    run_pursuit,
)
from .rng import Domain, Stream, derive_seed
from .selection import SelectionRule

SUMMARY_COLUMNS = ("m", "k", "recovery_fraction", "trials")
TRIAL_COLUMNS = ("m", "k", "trial_index", "recovered", "iterations_used", "final_residual_norm", "status")
SNR_COLUMNS = ("solver", "N", "m", "decay_p", "trials", "mean_snr_db", "min_snr_db", "max_snr_db")


class Amplitudes(str, enum.Enum):
    NORMAL = "normal"
    SIGN = "sign"


@dataclass(frozen=True)
class PhaseTransitionSpec:
    N: int
    m_values: tuple[int, ...]
    k_values: tuple[int, ...]
    trials_per_cell: int
    algorithm: Algorithm = Algorithm.OMP
    rule: SelectionRule = field(default_factory=lambda: SelectionRule.relaxed(0.125))
    prune_to_k: bool = False
    base_seed: int = 0
    recovery_tol: float = DEFAULT_RECOVERY_TOL
    residual_tol: float = DEFAULT_RESIDUAL_TOL
    amplitudes: Amplitudes = Amplitudes.NORMAL

    def __post_init__(self):
        object.__setattr__(self, "m_values", tuple(int(m) for m in self.m_values))
        object.__setattr__(self, "k_values", tuple(int(k) for k in self.k_values))
        object.__setattr__(self, "algorithm", Algorithm(self.algorithm))
        object.__setattr__(self, "amplitudes", Amplitudes(self.amplitudes))
        if self.N < 1:
            raise ValueError("N must be positive")
        if not self.m_values or not self.k_values:
            raise ValueError("m_values and k_values must be nonempty")
        if any(m < 1 or m > self.N for m in self.m_values):
            raise ValueError(f"every m must lie in [1, N={self.N}], got {self.m_values}")
        if any(k < 1 for k in self.k_values):
            raise ValueError("every k must be positive")
        if max(self.k_values) >= min(self.m_values):
            raise ValueError(
                f"every k must be below min(m_values) = {min(self.m_values)}, got k = {max(self.k_values)}"
            )
        if self.trials_per_cell < 1:
            raise ValueError("trials_per_cell must be at least 1")
        if not 0 <= self.base_seed < 2**64:
            raise ValueError("base_seed must be an unsigned 64-bit integer")
        if self.recovery_tol <= 0:
            raise ValueError("recovery_tol must be positive")
        if self.prune_to_k and self.algorithm is not Algorithm.OMP:
            raise ValueError("prune_to_k is only defined for OMP")

    def solver_config(self, k: int) -> PursuitConfig:
        """The solver for sparsity ``k``: at most ``k`` iterations."""
        return PursuitConfig(self.algorithm, self.rule, max_iterations=k,
                             residual_tol=self.residual_tol, sparsity_k=k,
                             prune_to_k=self.prune_to_k)


@dataclass(frozen=True)
class TrialResult:
    m: int
    k: int
    trial_index: int
    recovered: bool
    iterations_used: int
    final_residual_norm: float
    wall_time: float
    status: str

    def row(self) -> tuple:
        return (self.m, self.k, self.trial_index, self.recovered, self.iterations_used,
                self.final_residual_norm, self.status)


@dataclass(frozen=True)
class CellSummary:
    m: int
    k: int
    recovery_fraction: float
    trials: int

    def row(self) -> tuple:
        return (self.m, self.k, self.recovery_fraction, self.trials)


@dataclass
class PhaseTransitionResult:
    spec: PhaseTransitionSpec
    cells: list[CellSummary]
    trials: list[TrialResult]

    def fraction(self, m: int, k: int) -> float:
        for c in self.cells:
            if c.m == m and c.k == k:
                return c.recovery_fraction
        raise KeyError((m, k))

    def curve(self, k: int) -> np.ndarray:
        """Recovery fractions for sparsity ``k`` in ``m_values`` order."""
        return np.array([self.fraction(m, k) for m in self.spec.m_values])


def phase_matrix(N: int, m: int, base_seed: int) -> np.ndarray:
    return generate(EnsembleSpec(Ensemble.GAUSSIAN, m, N, derive_seed(base_seed, Domain.MATRIX, m)))


def random_sparse_signal(stream: Stream, N: int, k: int,
                         amplitudes: Amplitudes = Amplitudes.NORMAL) -> SparseSignal:
    support = stream.child(0).sample_without_replacement(N, k)
    values = stream.child(1).normal(k) if amplitudes is Amplitudes.NORMAL else stream.child(1).signs(k)
    return SparseSignal(N, support, values)


def _run_trial(Phi, signal: SparseSignal, cfg: PursuitConfig, tol: float):
    y = Phi @ signal.to_dense()
    try:
        state, trace = run_pursuit(Phi, y, cfg)
    except RankDeficientError:
        # the selected support outgrew the column rank of Phi: not a recovery
        return False, -1, float("nan"), "rank_deficient"
    except NumericalError:
        return False, -1, float("nan"), "numerical_error"
    ok = exact_recovery_check(signal, state.estimate, tol)
    return ok, trace.iterations, float(np.linalg.norm(state.residual)), trace.status.value


def _run_m_group(spec: PhaseTransitionSpec, m: int) -> list[TrialResult]:
    Phi = phase_matrix(spec.N, m, spec.base_seed)
    out = []
    for k in spec.k_values:
        cfg = spec.solver_config(k)
        for t in range(spec.trials_per_cell):
            signal = random_sparse_signal(Stream(spec.base_seed, Domain.SIGNAL, m, k, t),
                                          spec.N, k, spec.amplitudes)
            start = time.perf_counter()
            ok, iters, res, status = _run_trial(Phi, signal, cfg, spec.recovery_tol)
            out.append(TrialResult(m, k, t, ok, iters, res, time.perf_counter() - start, status))
    return out


def run_phase_transition(spec: PhaseTransitionSpec, workers: int = 1) -> PhaseTransitionResult:
    """Recovery fraction for every ``(m, k)`` cell of ``spec``.

    ``workers > 1`` spreads the ``m`` groups over processes; the result does
    not depend on it.
    """
    if workers > 1 and len(spec.m_values) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            groups = list(pool.map(_run_m_group, [spec] * len(spec.m_values), spec.m_values))
    else:
        groups = [_run_m_group(spec, m) for m in spec.m_values]
    trials = [t for g in groups for t in g]
    cells = []
    for m, group in zip(spec.m_values, groups):
        for k in spec.k_values:
            hits = [t.recovered for t in group if t.k == k]
            cells.append(CellSummary(m, k, sum(hits) / len(hits), len(hits)))
    return PhaseTransitionResult(spec, cells, trials)


def write_phase_outputs(result: PhaseTransitionResult, out_dir, per_trial: bool = True) -> list[Path]:
    """``summary.csv`` and, optionally, ``trials.csv`` (timings are left out so reruns are byte-identical)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = [out_dir / "summary.csv"]
    write_table(paths[0], SUMMARY_COLUMNS, (c.row() for c in result.cells))
    if per_trial:
        paths.append(out_dir / "trials.csv")
        write_table(paths[1], TRIAL_COLUMNS, (t.row() for t in result.trials))
    return paths


def oversampling_cells(result: PhaseTransitionResult, C: float = 4.0) -> list[CellSummary]:
    """Cells with ``m >= C k log2(N / k)``, where OMP-type solvers are expected to succeed."""
    N = result.spec.N
    return [c for c in result.cells if c.m >= C * c.k * math.log2(N / c.k)]


# ---------------------------------------------------------------- SNR studies

def snr(x, a) -> float:
    """``10 log10(||x|| / ||x - a||)`` in dB; ``+inf`` for a perfect match."""
    x = np.asarray(x, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    if x.shape != a.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {a.shape}")
    err = float(np.linalg.norm(x - a))
    if err == 0.0:
        return math.inf
    nx = float(np.linalg.norm(x))
    if nx == 0.0:
        return -math.inf
    return 10.0 * math.log10(nx / err)


def power_law_signal(stream: Stream, N: int, decay_p: float) -> np.ndarray:
    """``+-i^(-1/p)`` for ``i = 1..N`` with random signs, placed in random order."""
    mags = np.arange(1, N + 1, dtype=np.float64) ** (-1.0 / decay_p)
    x = np.empty(N)
    x[stream.child(0).sample_without_replacement(N, N)] = mags * stream.child(1).signs(N)
    return x


def best_k_term(x, k: int) -> np.ndarray:
    """Keep the ``k`` largest-magnitude entries of ``x``."""
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    keep = np.argsort(-np.abs(x), kind="stable")[:k]
    out[keep] = x[keep]
    return out


ORACLE_NAME = "best_k_oracle"


@dataclass(frozen=True)
class CompressibleSpec:
    N: int
    m: int
    decay_p: float
    solvers: Mapping[str, PursuitConfig]
    trials: int = 20
    seed: int = 0
    oracle_k: int | None = None

    def __post_init__(self):
        if not 0 < self.decay_p <= 1:
            raise ValueError(f"decay_p must lie in (0, 1], got {self.decay_p}")
        if not 1 <= self.m <= self.N:
            raise ValueError(f"need 1 <= m <= N, got m={self.m}, N={self.N}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not self.solvers:
            raise ValueError("at least one solver is required")
        if ORACLE_NAME in self.solvers:
            raise ValueError(f"{ORACLE_NAME!r} is reserved")
        if self.oracle_k is not None and not 1 <= self.oracle_k <= self.N:
            raise ValueError("oracle_k must lie in [1, N]")


@dataclass(frozen=True)
class SnrResult:
    solver: str
    snr_db: float
    min_snr_db: float
    max_snr_db: float
    trials: int
    N: int
    m: int
    decay_p: float
    per_trial: tuple[float, ...] = ()

    def row(self) -> tuple:
        return (self.solver, self.N, self.m, self.decay_p, self.trials,
                self.snr_db, self.min_snr_db, self.max_snr_db)


def run_compressible_study(spec: CompressibleSpec, Phi: np.ndarray | None = None) -> list[SnrResult]:
    """Mean SNR per solver on power-law signals; every solver sees the same instances.

    ``Phi`` overrides the Gaussian matrix drawn from ``spec.seed``.
    """
    if Phi is None:
        Phi = phase_matrix(spec.N, spec.m, spec.seed)
    elif Phi.shape != (spec.m, spec.N):
        raise ValueError(f"Phi has shape {Phi.shape}, expected ({spec.m}, {spec.N})")
    names = list(spec.solvers)
    scores = {name: [] for name in names}
    if spec.oracle_k is not None:
        scores[ORACLE_NAME] = []
    for t in range(spec.trials):
        x = power_law_signal(Stream(spec.seed, Domain.SIGNAL, spec.m, t), spec.N, spec.decay_p)
        y = Phi @ x
        for name in names:
            try:
                state, _ = run_pursuit(Phi, y, spec.solvers[name])
                estimate = state.estimate
            except RankDeficientError:
                estimate = np.zeros(spec.N)
            scores[name].append(snr(x, estimate))
        if spec.oracle_k is not None:
            scores[ORACLE_NAME].append(snr(x, best_k_term(x, spec.oracle_k)))
    out = []
    for name, vals in scores.items():
        arr = np.array(vals)
        out.append(SnrResult(name, float(arr.mean()), float(arr.min()), float(arr.max()), spec.trials,
                             spec.N, spec.m, spec.decay_p, tuple(vals)))
    return out


def write_snr_table(results: Sequence[SnrResult], path) -> None:
    write_table(path, SNR_COLUMNS, (r.row() for r in results))


# ---------------------------------------------------------------- config files

def parse_int_list(text: str) -> tuple[int, ...]:
    """``"40, 80, 120"`` or the inclusive range ``"40:240:40"``."""
    text = text.strip()
    if ":" in text:
        parts = [int(p) for p in text.split(":")]
        if len(parts) not in (2, 3):
            raise ValueError(f"bad range {text!r}; use start:stop or start:stop:step")
        start, stop = parts[0], parts[1]
        step = parts[2] if len(parts) == 3 else 1
        if step <= 0:
            raise ValueError("range step must be positive")
        return tuple(range(start, stop + 1, step))
    return tuple(int(p) for p in text.split(",") if p.strip())


def _parser() -> configparser.ConfigParser:
    return configparser.ConfigParser(inline_comment_prefixes=("#", ";"))


def _rule(kind: str, alpha: float) -> SelectionRule:
    return SelectionRule(kind.strip().lower(), alpha)


def _solver_from_section(sec) -> PursuitConfig:
    max_iter = sec.get("max_iterations")
    k = sec.get("k")
    return PursuitConfig(
        algorithm=sec.get("algorithm", "omp").strip().lower(),
        rule=_rule(sec.get("rule", "weak"), sec.getfloat("alpha", 1.0)),
        max_iterations=int(max_iter) if max_iter else None,
        residual_tol=sec.getfloat("residual_tol", DEFAULT_RESIDUAL_TOL),
        sparsity_k=int(k) if k else None,
        prune_to_k=sec.getboolean("prune", False),
    )


_PHASE_KEYS = {"n", "m_values", "k_values", "trials_per_cell", "algorithm", "rule", "alpha", "prune",
               "base_seed", "recovery_tol", "residual_tol", "amplitudes"}


def parse_phase_config(text: str) -> PhaseTransitionSpec:
    """Build a spec from ``key = value`` lines (``#`` comments allowed).

    Keys: ``N``, ``m_values``, ``k_values``, ``trials_per_cell`` (required);
    ``algorithm`` (mp|omp|gp, default omp), ``rule`` (weak|relaxed, default
    relaxed), ``alpha`` (default 0.125), ``prune`` (default false),
    ``base_seed`` (0), ``recovery_tol`` (1e-4), ``residual_tol`` (1e-6),
    ``amplitudes`` (normal|sign).
    """
    cp = _parser()
    cp.read_string("[phase]\n" + text)
    sec = cp["phase"]
    unknown = set(sec) - _PHASE_KEYS
    if unknown:
        raise ValueError(f"unknown phase config keys: {sorted(unknown)}")
    missing = [k for k in ("n", "m_values", "k_values", "trials_per_cell") if k not in sec]
    if missing:
        raise ValueError(f"missing phase config keys: {missing}")
    return PhaseTransitionSpec(
        N=sec.getint("n"),
        m_values=parse_int_list(sec["m_values"]),
        k_values=parse_int_list(sec["k_values"]),
        trials_per_cell=sec.getint("trials_per_cell"),
        algorithm=sec.get("algorithm", "omp").strip().lower(),
        rule=_rule(sec.get("rule", "relaxed"), sec.getfloat("alpha", 0.125)),
        prune_to_k=sec.getboolean("prune", False),
        base_seed=sec.getint("base_seed", 0),
        recovery_tol=sec.getfloat("recovery_tol", DEFAULT_RECOVERY_TOL),
        residual_tol=sec.getfloat("residual_tol", DEFAULT_RESIDUAL_TOL),
        amplitudes=sec.get("amplitudes", "normal").strip().lower(),
    )


def parse_compressible_config(text: str) -> CompressibleSpec:
    """Build a study from a ``[study]`` section and one ``[solver NAME]`` section per solver.

    ``[study]`` keys: ``N``, ``m``, ``decay_p``, ``trials`` (20), ``seed``
    (0), ``oracle_k`` (none). Solver keys: ``algorithm``, ``rule``,
    ``alpha``, ``max_iterations``, ``k``, ``prune``, ``residual_tol``.
    """
    cp = _parser()
    cp.read_string(text)
    if "study" not in cp:
        raise ValueError("compressible config needs a [study] section")
    st = cp["study"]
    solvers = {}
    for name in cp.sections():
        if name.startswith("solver "):
            solvers[name[len("solver "):].strip()] = _solver_from_section(cp[name])
    oracle_k = st.get("oracle_k")
    return CompressibleSpec(
        N=st.getint("n"),
        m=st.getint("m"),
        decay_p=st.getfloat("decay_p"),
        solvers=solvers,
        trials=st.getint("trials", 20),
        seed=st.getint("seed", 0),
        oracle_k=int(oracle_k) if oracle_k else None,
    )
