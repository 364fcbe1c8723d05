"""Instance studies that tie the solvers to the theoretical guarantees.

* ``search_certified_matrix``: scan many small Gaussian matrices for one
  with a small exhaustively certified RIP constant.
* ``omp_recovery_suite``: exact recovery of random k-sparse signals.
* ``contraction_audit``: traced GP/MP residual ratios against the
  contraction constants, on iterations where every selection so far lay in
  the true support.
* ``ordering_audit``: OMP, GP and MP residuals on a shared (replayed)
  selection sequence.
* ``lemma_suite``: RIP-consequence probes on random matrices with
  certified ``delta_k < 1``.
* ``concentration_grid``: concentration checks over a parameter grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .bounds import check_adjoint_lower_bound, check_rip_consequences, convergence_constants
from .ensembles import (
    ConcentrationReport,
    Ensemble,
    EnsembleSpec,
    RipCertificate,
    concentration_check,
    generate,
    rip_exhaustive,
)
from .experiments import random_sparse_signal
from .io import write_table
from .linalg import as_matrix
from .pursuit import Algorithm, PursuitConfig, SparseSignal, run_pursuit
from .rng import Domain, Stream, derive_seed
from .selection import SelectionRule

# absolute slack on ratio comparisons, for rounding in the traced norms
RATIO_SLACK = 1e-12

SEARCH_BLOCK = 4096

RECOVERY_COLUMNS = ("trial", "iterations", "error", "recovered")
CONTRACTION_COLUMNS = ("signal", "algorithm", "n", "ratio", "bound", "contained", "violation")
ORDERING_COLUMNS = ("instance", "n", "omp", "gp", "mp")
LEMMA_COLUMNS = ("matrix", "m", "N", "k", "draw", "delta_k", "check", "observed", "bound", "holds")
CONCENTRATION_COLUMNS = ("kind", "epsilon", "m", "trials", "exceedances", "empirical_rate",
                         "theoretical_bound", "slack", "within_bound")


def orip_threshold() -> float:
    """The RIP level ``1 / (1 + sqrt 2)`` below which OMP recovers every k-sparse signal in k steps."""
    return 1.0 / (1.0 + math.sqrt(2.0))


# ---------------------------------------------------------------- matrix search

@dataclass
class SearchResult:
    """Best candidate of a matrix search; ``found`` says whether it met the target."""

    Phi: np.ndarray
    candidate: int
    cert_k: RipCertificate
    cert_k1: RipCertificate
    target: float
    candidates_examined: int

    @property
    def found(self) -> bool:
        return self.cert_k1.delta_upper < self.target


def _pair_deltas(G: np.ndarray) -> np.ndarray:
    """delta_2 of every matrix in a batch of Gram matrices, by the closed-form 2x2 eigenvalues."""
    N = G.shape[-1]
    i, j = np.triu_indices(N, 1)
    a = G[:, i, i]
    b = G[:, j, j]
    c = G[:, i, j]
    mid = 0.5 * (a + b)
    rad = np.sqrt(0.25 * (a - b) ** 2 + c**2)
    return np.maximum(1.0 - (mid - rad), (mid + rad) - 1.0).max(axis=1)


def search_certified_matrix(m: int, N: int, k: int, seed: int = 0, blocks: int = 64,
                            finalists: int = 32, target: float | None = None) -> SearchResult:
    """Search ``blocks * 4096`` Gaussian m x N candidates for the smallest delta_{k+1}.

    Candidates are screened by delta_1 (column norms) and delta_2 (closed
    form); the ``finalists`` with the smallest delta_2 get exhaustive
    delta_{k+1} certificates. Candidate ``b * 4096 + j`` is the ``j``-th
    matrix drawn from stream ``(seed, SEARCH, b)``, so the result depends
    only on the arguments.
    """
    if target is None:
        target = orip_threshold()
    if k < 1 or k + 1 > N:
        raise ValueError(f"need 1 <= k < N, got k={k}, N={N}")
    scale = 1.0 / math.sqrt(m)
    pool_d2 = []
    pool_mats = []
    for b in range(blocks):
        z = Stream(seed, Domain.SEARCH, b).normal(SEARCH_BLOCK * m * N) * scale
        A = z.reshape(SEARCH_BLOCK, N, m).transpose(0, 2, 1)  # column-major per matrix
        G = np.einsum("bij,bik->bjk", A, A)
        d2 = _pair_deltas(G)
        keep = np.argsort(d2, kind="stable")[:finalists]
        pool_d2.append(d2[keep])
        pool_mats.append([(b * SEARCH_BLOCK + int(j), A[j]) for j in keep])
    d2 = np.concatenate(pool_d2)
    mats = [x for block in pool_mats for x in block]
    order = np.argsort(d2, kind="stable")[:finalists]
    best = None
    for idx in order:
        cand, A = mats[idx]
        A = as_matrix(A)
        c1 = rip_exhaustive(A, k + 1)
        if best is None or c1.delta_upper < best[2].delta_upper:
            best = (cand, A, c1)
    cand, A, c1 = best
    return SearchResult(A, cand, rip_exhaustive(A, k), c1, target, blocks * SEARCH_BLOCK)


# ---------------------------------------------------------------- recovery suite

@dataclass(frozen=True)
class RecoveryRecord:
    trial: int
    iterations: int
    error: float
    recovered: bool

    def row(self) -> tuple:
        return (self.trial, self.iterations, self.error, self.recovered)


def suite_signals(N: int, k: int, count: int, seed: int) -> list[SparseSignal]:
    return [random_sparse_signal(Stream(seed, Domain.SIGNAL, 0, k, t), N, k) for t in range(count)]


def omp_recovery_suite(Phi: np.ndarray, signals: Sequence[SparseSignal], k: int,
                       error_tol: float = 1e-8) -> list[RecoveryRecord]:
    """OMP (weak rule, alpha = 1, at most ``k`` iterations) on every signal."""
    cfg = PursuitConfig(Algorithm.OMP, SelectionRule.weak(1.0), max_iterations=k, residual_tol=0.0)
    out = []
    for t, sig in enumerate(signals):
        x = sig.to_dense()
        state, trace = run_pursuit(Phi, Phi @ x, cfg)
        err = float(np.linalg.norm(state.estimate - x))
        ok = err <= error_tol and np.array_equal(state.support, sig.support)
        out.append(RecoveryRecord(t, trace.iterations, err, bool(ok)))
    return out


# ---------------------------------------------------------------- contraction audit

@dataclass(frozen=True)
class ContractionRecord:
    signal: int
    algorithm: str
    n: int
    ratio: float
    bound: float
    contained: bool

    @property
    def violation(self) -> bool:
        return self.contained and self.ratio > self.bound + RATIO_SLACK

    def row(self) -> tuple:
        return (self.signal, self.algorithm, self.n, self.ratio, self.bound, self.contained, self.violation)


@dataclass
class ContractionAudit:
    delta_k: float
    k: int
    records: list[ContractionRecord] = field(default_factory=list)

    def checked(self, algorithm: str | None = None) -> list[ContractionRecord]:
        return [r for r in self.records if r.contained and (algorithm is None or r.algorithm == algorithm)]

    @property
    def violations(self) -> list[ContractionRecord]:
        return [r for r in self.records if r.violation]

    def worst_margin(self, algorithm: str) -> float:
        """Largest ``ratio - bound`` over the checked iterations (negative when all hold)."""
        rows = self.checked(algorithm)
        return max((r.ratio - r.bound for r in rows), default=-math.inf)


def contraction_audit(Phi: np.ndarray, signals: Sequence[SparseSignal], delta_k: float, k: int,
                      max_iterations: int = 40) -> ContractionAudit:
    """Trace GP and MP (weak rule, alpha = 1) and compare every ratio
    ``||r^n|| / ||r^(n-1)||`` to its constant.

    An iteration counts as checked when all selections up to it lie in the
    true support. GP is held to ``C_k`` there, and to ``D_k`` (labelled
    ``gp_full``) when its support equals the true support; MP is held to
    ``C'_k``.
    """
    consts = convergence_constants(delta_k, k)
    audit = ContractionAudit(delta_k, k)
    for s, sig in enumerate(signals):
        y = Phi @ sig.to_dense()
        true = set(sig.support.tolist())
        for algo, bound in ((Algorithm.GP, consts.C_k), (Algorithm.MP, consts.C_prime_k)):
            cfg = PursuitConfig(algo, SelectionRule.weak(1.0), max_iterations=max_iterations,
                                residual_tol=1e-12)
            _, trace = run_pursuit(Phi, y, cfg)
            contained = True
            for rec in trace.records:
                contained = contained and set(rec.selected.tolist()) <= true
                audit.records.append(ContractionRecord(s, algo.value, rec.n, rec.contraction_ratio,
                                                       bound, contained))
                if algo is Algorithm.GP and contained and set(rec.support.tolist()) == true:
                    audit.records.append(ContractionRecord(s, "gp_full", rec.n, rec.contraction_ratio,
                                                           consts.D_k, True))
    return audit


# ---------------------------------------------------------------- ordering audit

@dataclass
class OrderingAudit:
    rows: list[tuple[int, int, float, float, float]] = field(default_factory=list)

    def violations(self, pair: str, slack: float = 0.0) -> list[tuple]:
        """Rows breaking ``omp<=gp``, ``gp<=mp`` or ``omp<=mp`` by more than ``slack``."""
        col = {"omp": 2, "gp": 3, "mp": 4}
        lo, hi = pair.split("<=")
        return [r for r in self.rows if r[col[lo]] > r[col[hi]] + slack]

    def worst_gap(self, pair: str) -> float:
        col = {"omp": 2, "gp": 3, "mp": 4}
        lo, hi = pair.split("<=")
        return max((r[col[lo]] - r[col[hi]] for r in self.rows), default=-math.inf)


def ordering_audit(instances: int, m: int, N: int, k: int, seed: int = 0) -> OrderingAudit:
    """Run OMP (alpha = 1, k iterations) and replay its selections through GP and MP.

    Instance ``i`` uses matrix seed ``derive_seed(seed, MATRIX, i)`` and
    the signal stream ``(seed, SIGNAL, i)``.
    """
    audit = OrderingAudit()
    weak = SelectionRule.weak(1.0)
    for i in range(instances):
        Phi = generate(EnsembleSpec(Ensemble.GAUSSIAN, m, N, derive_seed(seed, Domain.MATRIX, i)))
        sig = random_sparse_signal(Stream(seed, Domain.SIGNAL, i), N, k)
        y = Phi @ sig.to_dense()
        _, omp = run_pursuit(Phi, y, PursuitConfig(Algorithm.OMP, weak, max_iterations=k, residual_tol=0.0))
        sel = omp.selections
        _, gp = run_pursuit(Phi, y, PursuitConfig(Algorithm.GP, weak, residual_tol=0.0), selections=sel)
        _, mp = run_pursuit(Phi, y, PursuitConfig(Algorithm.MP, weak, residual_tol=0.0), selections=sel)
        common = min(omp.iterations, gp.iterations, mp.iterations)
        ro, rg, rm = omp.residual_norms, gp.residual_norms, mp.residual_norms
        for n in range(1, common + 1):
            audit.rows.append((i, n, float(ro[n]), float(rg[n]), float(rm[n])))
    return audit


# ---------------------------------------------------------------- lemma suite

@dataclass(frozen=True)
class LemmaMatrixResult:
    index: int
    m: int
    N: int
    k: int
    draw: int
    cert: RipCertificate
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.holds for c in self.checks)

    def rows(self) -> list[tuple]:
        return [(self.index, self.m, self.N, self.k, self.draw, self.cert.delta, c.name, c.observed,
                 c.bound, c.holds) for c in self.checks]


def certified_gaussian(m: int, N: int, k: int, seed: int, slot: int, max_draws: int = 5000):
    """First Gaussian m x N draw (streams ``(seed, SEARCH, slot, j)``) whose exhaustive delta_k is below 1."""
    for j in range(max_draws):
        A = generate(EnsembleSpec(Ensemble.GAUSSIAN, m, N, derive_seed(seed, Domain.SEARCH, slot, j)))
        cert = rip_exhaustive(A, k)
        if cert.is_rip:
            return A, cert, j
    raise RuntimeError(f"no {m}x{N} draw with delta_{k} < 1 in {max_draws} attempts")


def lemma_suite(shapes: Sequence[tuple[int, int, int]], trials: int, seed: int = 0) -> list[LemmaMatrixResult]:
    """Probe every RIP consequence on one certified matrix per ``(m, N, k)`` in ``shapes``.

    Probes use the certificate's witness support, where ``delta_k`` is
    attained, split into disjoint halves for the cross term. Violations are
    recorded, not raised.
    """
    out = []
    for i, (m, N, k) in enumerate(shapes):
        A, cert, j = certified_gaussian(m, N, k, seed, i)
        w = np.array(cert.witness)
        half = k - k // 2
        a = check_rip_consequences(A, w[:half], w[half:], cert, trials, derive_seed(seed, Domain.PROBE, i),
                                   raise_on_violation=False)
        b = check_adjoint_lower_bound(A, w, cert, trials, derive_seed(seed, Domain.PROBE, i),
                                      raise_on_violation=False)
        out.append(LemmaMatrixResult(i, m, N, k, j, cert, tuple(a.checks + b.checks)))
    return out


# ---------------------------------------------------------------- concentration grid

def concentration_grid(kinds: Iterable[str], epsilons: Sequence[float], ms: Sequence[int],
                       trials: int, seed: int = 0) -> list[ConcentrationReport]:
    return [concentration_check(kind, m, eps, trials, seed)
            for kind in kinds for eps in epsilons for m in ms]


def write_concentration_table(reports: Sequence[ConcentrationReport], path) -> None:
    write_table(path, CONCENTRATION_COLUMNS,
                ((r.kind, r.epsilon, r.m, r.trials, r.exceedances, r.empirical_rate,
                  r.theoretical_bound, r.slack, r.within_bound) for r in reports))
