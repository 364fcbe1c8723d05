"""Closed-form constants from RIP analysis and numerical checks of the RIP inequalities.

The ``check_*`` functions probe a concrete matrix with random vectors and
compare against the inequalities implied by an *exhaustive* RIP
certificate. Because those inequalities are theorems, any violation means a
bug in the certificate or in the linear algebra, and is raised as
``RipLemmaViolation`` carrying the offending vector.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from .ensembles import RipCertificate
from .linalg import as_support
from .rng import Domain, Stream

__all__ = [
    "ConvergenceConstants",
    "convergence_constants",
    "support_id_condition_weak",
    "support_id_condition_relaxed",
    "estimation_error_factors",
    "EstimationFactors",
    "BoundsReport",
    "bounds_report",
    "InequalityCheck",
    "LemmaReport",
    "RipLemmaViolation",
    "check_rip_consequences",
    "check_adjoint_lower_bound",
]

#: absolute slack on probed ratios; covers eigenvalue and product rounding only
PROBE_SLACK = 1e-10


def _check_delta(delta_k, k):
    if not 0.0 <= delta_k < 1.0:
        raise ValueError(f"delta_k must lie in [0, 1), got {delta_k}")
    if k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")


def _check_pair(delta_k, delta_k1, k):
    _check_delta(delta_k, k)
    if not delta_k <= delta_k1 < 1.0:
        raise ValueError(f"need delta_k <= delta_(k+1) < 1, got {delta_k}, {delta_k1}")


class ConvergenceConstants(NamedTuple):
    C_k: float
    C_prime_k: float
    D_k: float


def convergence_constants(delta_k: float, k: int) -> ConvergenceConstants:
    """Per-iteration residual contraction factors.

    ``C_k`` bounds GP-type steps, ``C'_k`` MP-type steps and ``D_k`` GP-type
    steps once the whole support has been found.
    """
    _check_delta(delta_k, k)
    c = math.sqrt(1.0 - (1.0 - delta_k) / (k * (1.0 + delta_k)))
    c_prime = math.sqrt(1.0 - (1.0 - delta_k) ** 2 / k)
    d = math.sqrt(2.0 * delta_k / (1.0 + delta_k))
    return ConvergenceConstants(c, c_prime, d)


def support_id_condition_weak(delta_k: float, delta_k1: float, k: int) -> float:
    """Weak-rule parameters ``alpha`` above ``sqrt(k) delta_(k+1) / (1 - delta_k)`` select only support indices."""
    _check_pair(delta_k, delta_k1, k)
    return math.sqrt(k) * delta_k1 / (1.0 - delta_k)


def support_id_condition_relaxed(delta_k: float, delta_k1: float, k: int) -> tuple[float, float, bool]:
    """``(alpha_min, alpha_max, feasible)`` for the relaxed rule.

    Above ``alpha_min`` every selection lies in the support; at or below
    ``alpha_max`` the selection is never empty. Feasible when
    ``sqrt(k) * delta_(k+1) <= 1 - delta_k``.
    """
    _check_pair(delta_k, delta_k1, k)
    alpha_min = delta_k1 / math.sqrt(1.0 - delta_k)
    alpha_max = math.sqrt(1.0 - delta_k) / math.sqrt(k)
    feasible = math.sqrt(k) * delta_k1 <= 1.0 - delta_k
    return alpha_min, alpha_max, feasible


@dataclass(frozen=True)
class EstimationFactors:
    amplification: float
    gp: float
    mp: float
    gp_identified: float
    gp_converges: bool
    mp_converges: bool
    gp_identified_converges: bool


def estimation_error_factors(delta_k: float, k: int) -> EstimationFactors:
    """Contraction factors for ``||x - x^n||`` obtained by sandwiching with RIP.

    Each residual factor is multiplied by ``sqrt((1 + delta)/(1 - delta))``.
    The booleans are the sufficient thresholds delta < 1/(2k+1) (GP),
    delta < 1/(2k+2) (MP) and delta < 1/3 (GP with the support found).
    """
    consts = convergence_constants(delta_k, k)
    amp = math.sqrt((1.0 + delta_k) / (1.0 - delta_k))
    return EstimationFactors(
        amplification=amp,
        gp=amp * consts.C_k,
        mp=amp * consts.C_prime_k,
        gp_identified=amp * consts.D_k,
        gp_converges=delta_k < 1.0 / (2 * k + 1),
        mp_converges=delta_k < 1.0 / (2 * k + 2),
        gp_identified_converges=delta_k < 1.0 / 3.0,
    )


@dataclass(frozen=True)
class BoundsReport:
    delta_k: float
    delta_k1: float
    k: int
    alpha_min_weak: float
    alpha_min_relaxed: float
    alpha_max_relaxed: float
    C_k: float
    C_prime_k: float
    D_k: float
    # sufficient conditions under which the contraction bounds apply
    gp_condition: bool
    swgp_condition: bool
    rwgp_condition: bool
    swmp_condition: bool
    rwmp_condition: bool
    estimation: EstimationFactors
    alpha: float | None = None
    alpha_tilde: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def bounds_report(delta_k: float, delta_k1: float, k: int,
                  alpha: float | None = None, alpha_tilde: float | None = None) -> BoundsReport:
    """Every constant and condition for a pair of RIP constants.

    Without ``alpha`` (``alpha_tilde``) the weak (relaxed) flags say whether
    *some* admissible parameter exists; with it they test that value.
    """
    alpha_min_weak = support_id_condition_weak(delta_k, delta_k1, k)
    a_min, a_max, _ = support_id_condition_relaxed(delta_k, delta_k1, k)
    consts = convergence_constants(delta_k, k)
    root_k = math.sqrt(k)
    relaxed_ok = delta_k1 / (1.0 - delta_k) < 1.0 / root_k
    # the MP variant keeps the upper limit (1 - delta_k)^2 / sqrt(k)
    a_max_mp = (1.0 - delta_k) ** 2 / root_k
    if alpha is None:
        sw = alpha_min_weak < 1.0
    else:
        sw = alpha_min_weak < alpha <= 1.0
    if alpha_tilde is None:
        rwgp = relaxed_ok and a_min < a_max
        rwmp = relaxed_ok and a_min < a_max_mp
    else:
        rwgp = relaxed_ok and a_min < alpha_tilde < a_max
        rwmp = relaxed_ok and a_min < alpha_tilde < a_max_mp
    return BoundsReport(
        delta_k=delta_k, delta_k1=delta_k1, k=k,
        alpha_min_weak=alpha_min_weak,
        alpha_min_relaxed=a_min,
        alpha_max_relaxed=a_max,
        C_k=consts.C_k, C_prime_k=consts.C_prime_k, D_k=consts.D_k,
        gp_condition=alpha_min_weak < 1.0,
        swgp_condition=sw,
        rwgp_condition=rwgp,
        swmp_condition=sw,
        rwmp_condition=rwmp,
        estimation=estimation_error_factors(delta_k, k),
        alpha=alpha, alpha_tilde=alpha_tilde,
    )


class RipLemmaViolation(AssertionError):
    def __init__(self, message, name, witness):
        super().__init__(message)
        self.name = name
        self.witness = np.asarray(witness)


@dataclass(frozen=True)
class InequalityCheck:
    """Observed extreme of a probed ratio against its bound."""

    name: str
    observed: float
    bound: float
    kind: str  # "upper": observed <= bound; "lower": observed >= bound

    @property
    def holds(self) -> bool:
        if self.kind == "upper":
            return self.observed <= self.bound + PROBE_SLACK
        return self.observed >= self.bound - PROBE_SLACK


@dataclass
class LemmaReport:
    delta_k: float
    trials: int
    checks: list[InequalityCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.holds for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "delta_k": self.delta_k,
            "trials": self.trials,
            "passed": self.passed,
            "checks": [dict(asdict(c), holds=c.holds) for c in self.checks],
        }


def _require_exhaustive(cert: RipCertificate, size: int):
    if not cert.exhaustive:
        raise ValueError("RIP lemma checks need an exhaustive certificate; sampled ones only bound delta from below")
    if not cert.is_rip:
        raise ValueError(f"certificate has delta_{cert.k} = {cert.delta:.4f} >= 1; the matrix is not RIP of order {cert.k}")
    if size > cert.k:
        raise ValueError(f"sets of total size {size} exceed the certified order k = {cert.k}")


def _record(report, name, ratios, bound, kind, probes, raise_on_violation):
    i = int(np.argmax(ratios) if kind == "upper" else np.argmin(ratios))
    check = InequalityCheck(name, float(ratios[i]), float(bound), kind)
    report.checks.append(check)
    if raise_on_violation and not check.holds:
        raise RipLemmaViolation(
            f"{name}: observed {check.observed!r} violates bound {check.bound!r}", name, probes[i])


def check_rip_consequences(Phi: np.ndarray, support, other_support, cert: RipCertificate,
                           trials: int, seed: int = 0, raise_on_violation: bool = True) -> LemmaReport:
    """Probe the standard consequences of RIP on ``support`` (and the cross term with ``other_support``).

    With ``delta = cert.delta`` and unit ``u`` supported on ``support``:

    * ``||Phi_S u|| <= sqrt(1 + delta)`` and ``||Phi_S^T w|| <= sqrt(1 + delta)`` for unit ``w`` in R^m
    * ``1 - delta <= ||Phi_S^T Phi_S u|| <= 1 + delta``
    * ``1/(1 + delta) <= ||(Phi_S^T Phi_S)^{-1} u|| <= 1/(1 - delta)``
    * ``||Phi_T^T Phi_S u|| <= delta`` for ``T`` disjoint from ``S``
    """
    m, N = Phi.shape
    S = as_support(support, N)
    T = as_support(other_support, N)
    if S.size == 0:
        raise ValueError("support must be nonempty")
    if np.intersect1d(S, T).size:
        raise ValueError("the two supports must be disjoint")
    _require_exhaustive(cert, S.size + T.size)
    delta = cert.delta
    probe = Stream(seed, Domain.PROBE)
    U = probe.child(0).unit_vectors(trials, S.size)
    W = probe.child(1).unit_vectors(trials, m)
    sub = Phi[:, S]
    gram = sub.T @ sub
    report = LemmaReport(delta, trials)
    rr = raise_on_violation

    _record(report, "operator_norm", np.linalg.norm(U @ sub.T, axis=1), math.sqrt(1 + delta), "upper", U, rr)
    _record(report, "adjoint_operator_norm", np.linalg.norm(W @ sub, axis=1), math.sqrt(1 + delta), "upper", W, rr)
    gu = np.linalg.norm(U @ gram, axis=1)
    _record(report, "gram_upper", gu, 1 + delta, "upper", U, rr)
    _record(report, "gram_lower", gu, 1 - delta, "lower", U, rr)
    inv = np.linalg.norm(np.linalg.solve(gram, U.T).T, axis=1)
    _record(report, "gram_inverse_upper", inv, 1 / (1 - delta), "upper", U, rr)
    _record(report, "gram_inverse_lower", inv, 1 / (1 + delta), "lower", U, rr)
    if T.size:
        cross = Phi[:, T].T @ sub
        _record(report, "near_orthogonality", np.linalg.norm(U @ cross.T, axis=1), delta, "upper", U, rr)
    return report


def check_adjoint_lower_bound(Phi: np.ndarray, support, cert: RipCertificate, trials: int,
                              seed: int = 0, raise_on_violation: bool = True) -> LemmaReport:
    """Probe ``||Phi_S^T r|| >= sqrt(1 - delta) ||r||`` for ``r`` in the span of ``Phi_S``."""
    m, N = Phi.shape
    S = as_support(support, N)
    if S.size == 0:
        raise ValueError("support must be nonempty")
    _require_exhaustive(cert, S.size)
    delta = cert.delta
    sub = Phi[:, S]
    coeffs = Stream(seed, Domain.PROBE).child(2).unit_vectors(trials, S.size)
    R = coeffs @ sub.T
    ratios = np.linalg.norm(R @ sub, axis=1) / np.linalg.norm(R, axis=1)
    report = LemmaReport(delta, trials)
    _record(report, "adjoint_lower_bound", ratios, math.sqrt(1 - delta), "lower", R, raise_on_violation)
    return report
