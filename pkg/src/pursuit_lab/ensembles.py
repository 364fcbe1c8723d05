"""Random sensing matrices, RIP certificates and concentration checks."""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .constants import EXHAUSTIVE_SUBSET_LIMIT
from .linalg import as_matrix, gram_extreme_eigenvalues
from .rng import Domain, Stream
from .selection import RuleKind, SelectionRule

__all__ = [
    "Ensemble",
    "EnsembleSpec",
    "generate",
    "RipCertificate",
    "rip_exhaustive",
    "rip_sampled",
    "ConcentrationReport",
    "concentration_check",
    "concentration_bound",
    "MeasurementConstants",
    "measurement_bound",
    "gaussian_c0",
]


class Ensemble(str, enum.Enum):
    GAUSSIAN = "gaussian"
    BERNOULLI = "bernoulli"


@dataclass(frozen=True)
class EnsembleSpec:
    kind: Ensemble
    m: int
    N: int
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", Ensemble(self.kind))
        if self.m < 1 or self.N < 1:
            raise ValueError(f"ensemble dimensions must be positive, got m={self.m}, N={self.N}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


def _entries(kind: Ensemble, stream: Stream, count: int, m: int) -> np.ndarray:
    if kind is Ensemble.GAUSSIAN:
        return stream.normal(count) / math.sqrt(m)
    return stream.signs(count) / math.sqrt(m)


def generate(spec: EnsembleSpec) -> np.ndarray:
    """Draw the m x N matrix for ``spec``.

    Gaussian entries have mean 0 and variance 1/m; Bernoulli entries are
    +-1/sqrt(m) with equal probability. Entries are drawn column by column,
    so column ``j`` is identical for every ``N > j`` with the same seed.
    """
    s = Stream(spec.seed, Domain.MATRIX)
    a = _entries(spec.kind, s, spec.m * spec.N, spec.m)
    return as_matrix(a.reshape((spec.m, spec.N), order="F"))


@dataclass(frozen=True)
class RipCertificate:
    """Bounds on the restricted isometry constant ``delta_k`` of one matrix.

    An exhaustive certificate is exact (``delta_lower == delta_upper``).
    A sampled certificate only knows a lower bound; ``delta_upper`` is 1.
    ``witness`` is a support attaining ``delta_lower``.
    """

    k: int
    delta_lower: float
    delta_upper: float
    method: str
    trials: int | None = None
    witness: tuple[int, ...] = field(default=(), compare=False)

    @property
    def exhaustive(self) -> bool:
        return self.method == "exhaustive"

    @property
    def delta(self) -> float:
        if not self.exhaustive:
            raise ValueError("a sampled certificate does not determine delta_k")
        return self.delta_upper

    @property
    def is_rip(self) -> bool:
        """True when the certificate proves ``delta_k < 1``."""
        return self.delta_upper < 1.0

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "delta_lower": self.delta_lower,
            "delta_upper": self.delta_upper,
            "method": self.method,
            "trials": self.trials,
            "is_rip": self.is_rip,
            "witness": list(self.witness),
        }


def _subset_deltas(G: np.ndarray, subsets: np.ndarray) -> np.ndarray:
    k = subsets.shape[1]
    if k == 1:
        d = G[subsets[:, 0], subsets[:, 0]]
        return np.abs(d - 1.0)
    sub = G[subsets[:, :, None], subsets[:, None, :]]
    lo, hi = gram_extreme_eigenvalues(sub)
    return np.maximum(1.0 - lo, hi - 1.0)


def rip_exhaustive(A: np.ndarray, k: int, chunk: int = 65536) -> RipCertificate:
    """Exact ``delta_k``: the worst deviation of squared singular values over all k-column submatrices."""
    N = A.shape[1]
    if not 1 <= k <= N:
        raise ValueError(f"k must lie in [1, {N}], got {k}")
    total = math.comb(N, k)
    if total > EXHAUSTIVE_SUBSET_LIMIT:
        raise ValueError(
            f"C({N}, {k}) = {total} subsets exceeds the exhaustive limit of "
            f"{EXHAUSTIVE_SUBSET_LIMIT}; use rip_sampled for a lower bound"
        )
    G = A.T @ A
    combos = itertools.combinations(range(N), k)
    best, witness = -np.inf, ()
    while True:
        flat = np.fromiter(itertools.chain.from_iterable(itertools.islice(combos, chunk)), dtype=np.int64)
        if flat.size == 0:
            break
        subsets = flat.reshape(-1, k)
        d = _subset_deltas(G, subsets)
        i = int(np.argmax(d))
        if d[i] > best:
            best, witness = float(d[i]), tuple(int(t) for t in subsets[i])
    best = max(best, 0.0)
    return RipCertificate(k, best, best, "exhaustive", None, witness)


def rip_sampled(A: np.ndarray, k: int, trials: int, seed: int = 0) -> RipCertificate:
    """Lower bound on ``delta_k`` from ``trials`` random k-subsets.

    For a fixed seed, the subsets examined by a run with ``t`` trials are a
    prefix of those examined with ``t' > t`` trials.
    """
    N = A.shape[1]
    if trials < 1:
        raise ValueError("rip_sampled needs at least one trial")
    if not 1 <= k <= N:
        raise ValueError(f"k must lie in [1, {N}], got {k}")
    subsets = np.sort(Stream(seed, Domain.SUPPORT_SAMPLE).sample_subsets(trials, N, k), axis=1)
    d = _subset_deltas(A.T @ A, subsets)
    i = int(np.argmax(d))
    lower = max(float(d[i]), 0.0)
    return RipCertificate(k, lower, 1.0, "sampled", trials, tuple(int(t) for t in subsets[i]))


def concentration_bound(kind: Ensemble | str, m: int, epsilon: float) -> float:
    """Tail bound for ``|<u, z>| >= epsilon``: exp(-eps^2 m / 2), doubled for Bernoulli."""
    base = math.exp(-(epsilon**2) * m / 2.0)
    return base if Ensemble(kind) is Ensemble.GAUSSIAN else 2.0 * base


@dataclass(frozen=True)
class ConcentrationReport:
    kind: str
    epsilon: float
    m: int
    trials: int
    exceedances: int
    empirical_rate: float
    theoretical_bound: float

    @property
    def slack(self) -> float:
        """Three binomial standard deviations at the bound."""
        return 3.0 * math.sqrt(self.theoretical_bound / self.trials)

    @property
    def within_bound(self) -> bool:
        return self.empirical_rate <= self.theoretical_bound + self.slack

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "epsilon": self.epsilon,
            "m": self.m,
            "trials": self.trials,
            "exceedances": self.exceedances,
            "empirical_rate": self.empirical_rate,
            "theoretical_bound": self.theoretical_bound,
            "slack": self.slack,
            "within_bound": self.within_bound,
        }


def concentration_check(kind, m: int, epsilon: float, trials: int, seed: int = 0,
                        chunk: int = 20000) -> ConcentrationReport:
    """Monte Carlo estimate of ``P(|<u, z>| >= epsilon)``.

    ``z`` is a fresh random column of the ensemble and ``u`` a uniformly
    random unit vector drawn from a separate stream, so the two are
    independent.
    """
    kind = Ensemble(kind)
    if not 0.0 < epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    if trials < 1000:
        raise ValueError(f"concentration_check needs at least 1000 trials, got {trials}")
    if m < 1:
        raise ValueError("m must be positive")
    base = Stream(seed, Domain.CONCENTRATION, 0 if kind is Ensemble.GAUSSIAN else 1, m)
    z_stream, u_stream = base.child(0), base.child(1)
    hits = 0
    for start in range(0, trials, chunk):
        rows = min(chunk, trials - start)
        z = _entries(kind, z_stream, rows * m, m).reshape(rows, m)
        u = u_stream.unit_vectors(rows, m)
        hits += int(np.count_nonzero(np.abs(np.einsum("ij,ij->i", u, z)) >= epsilon))
    return ConcentrationReport(kind.value, float(epsilon), m, trials, hits, hits / trials,
                               concentration_bound(kind, m, epsilon))


def gaussian_c0(epsilon: float) -> float:
    """Concentration exponent eps^2/4 - eps^3/6 for Gaussian and Bernoulli ensembles."""
    return epsilon**2 / 4.0 - epsilon**3 / 6.0


@dataclass(frozen=True)
class MeasurementConstants:
    """Constants of the tail properties: ``q1, c1`` for single inner products,
    ``q2, c2, D`` for the restricted adjoint lower bound."""

    q1: float
    q2: float
    c1: float
    c2: float
    D: float

    def __post_init__(self):
        if self.q1 < 1 or self.q2 < 1:
            raise ValueError("q1 and q2 must be at least 1")
        if self.c1 <= 0 or self.c2 <= 0:
            raise ValueError("c1 and c2 must be positive")
        if self.D <= 1:
            raise ValueError("D must exceed 1")

    @property
    def q3(self) -> float:
        return self.q1 + self.q2


def measurement_bound(rule: SelectionRule, k: int, N: int, l: int,
                      constants: MeasurementConstants, beta: float | None = None) -> int:
    """Smallest integer m satisfying the measurement-count condition for ``rule``.

    Relaxed rule (alpha~ <= 1/(2 sqrt k)):
        m >= max{ ln(q3 l (N-k)) / (c1 alpha~^2), (2k/c2) ln D }
    Weak rule:
        m >= max{ 4k ln(q3 l (N-k)) / (c1 alpha^2), (2k/c2) ln D }
    With a failure probability ``beta`` in (0, 1/e) the first term becomes
    ``2 ln(q3 l (N-k) / beta) / (c1 a^2)`` where ``a^2`` is ``alpha~^2``
    (relaxed) or ``alpha^2 / 4k`` (weak).
    """
    if not 1 <= k < N:
        raise ValueError(f"need 1 <= k < N, got k={k}, N={N}")
    if not 1 <= l < N:
        raise ValueError(f"need 1 <= l < N, got l={l}, N={N}")
    if beta is not None and not 0.0 < beta < 1.0 / math.e:
        raise ValueError(f"beta must lie in (0, 1/e), got {beta}")
    c = constants
    if rule.kind is RuleKind.RELAXED:
        if rule.alpha > 1.0 / (2.0 * math.sqrt(k)) * (1 + 1e-12):
            raise ValueError("the relaxed measurement bound requires alpha~ <= 1/(2 sqrt(k))")
        rate = rule.alpha**2
    else:
        rate = rule.alpha**2 / (4.0 * k)
    count = c.q3 * l * (N - k)
    if beta is None:
        first = math.log(count) / (c.c1 * rate)
    else:
        first = 2.0 * math.log(count / beta) / (c.c1 * rate)
    second = 2.0 * k / c.c2 * math.log(c.D)
    return int(math.ceil(max(first, second)))
