import itertools
import math

import numpy as np
import pytest

from pursuit_lab.ensembles import (
    Ensemble,
    EnsembleSpec,
    MeasurementConstants,
    RipCertificate,
    concentration_bound,
    concentration_check,
    gaussian_c0,
    generate,
    measurement_bound,
    rip_exhaustive,
    rip_sampled,
)
from pursuit_lab.selection import SelectionRule


def naive_delta(A, k):
    worst = 0.0
    for S in itertools.combinations(range(A.shape[1]), k):
        s = np.linalg.svd(A[:, list(S)], compute_uv=False)
        worst = max(worst, 1 - s.min() ** 2 if len(s) == k else 1.0, s.max() ** 2 - 1)
    return worst


def test_bernoulli_entries():
    A = generate(EnsembleSpec(Ensemble.BERNOULLI, 4, 30, seed=1))
    assert set(np.unique(A)) == {-0.5, 0.5}


def test_generate_deterministic_and_read_only():
    spec = EnsembleSpec("gaussian", 5, 7, seed=9)
    A, B = generate(spec), generate(spec)
    assert A.tobytes() == B.tobytes()
    assert not A.flags.writeable
    assert generate(EnsembleSpec("gaussian", 5, 7, seed=10)).tobytes() != A.tobytes()


def test_generate_column_prefix():
    A = generate(EnsembleSpec("gaussian", 5, 7, seed=3))
    B = generate(EnsembleSpec("gaussian", 5, 12, seed=3))
    assert np.array_equal(A, B[:, :7])


def test_gaussian_column_energy():
    A = generate(EnsembleSpec("gaussian", 100, 100, seed=0))
    assert abs(np.mean(np.sum(A**2, axis=0)) - 1.0) < 0.05


def test_spec_validation():
    with pytest.raises(ValueError):
        EnsembleSpec("gaussian", 0, 3)
    with pytest.raises(ValueError):
        EnsembleSpec("cauchy", 3, 3)
    with pytest.raises(ValueError):
        EnsembleSpec("gaussian", 3, 3, seed=-1)


def test_rip_identity_columns():
    A = np.eye(6)[:, :4]
    for k in range(1, 5):
        c = rip_exhaustive(A, k)
        assert c.delta == 0.0 and c.is_rip and c.exhaustive


def test_rip_duplicate_columns_not_rip():
    a = np.random.default_rng(0).standard_normal(5)
    A = np.column_stack([a, a, np.eye(5)[:, 0]]) / np.linalg.norm(a)
    c = rip_exhaustive(A, 2)
    assert c.delta >= 1.0 and not c.is_rip


def test_rip_matches_naive_svd(rng):
    A = rng.standard_normal((7, 9)) / math.sqrt(7)
    for k in (1, 2, 3):
        c = rip_exhaustive(A, k)
        assert c.delta == pytest.approx(naive_delta(A, k), abs=1e-12)
        s = np.linalg.svd(A[:, list(c.witness)], compute_uv=False)
        assert max(1 - s.min() ** 2, s.max() ** 2 - 1) == pytest.approx(c.delta, abs=1e-12)


def test_rip_random_probe_lower_bounds(rng):
    A = generate(EnsembleSpec("gaussian", 20, 10, seed=5))
    cert = rip_exhaustive(A, 2)
    probe = 0.0
    for S in itertools.combinations(range(10), 2):
        V = rng.standard_normal((2000, 2))
        V /= np.linalg.norm(V, axis=1, keepdims=True)
        probe = max(probe, np.abs(np.sum((V @ A[:, list(S)].T) ** 2, axis=1) - 1).max())
    assert probe <= cert.delta + 1e-12
    assert probe >= cert.delta - 1e-3


def test_rip_monotone_in_k():
    A = generate(EnsembleSpec("gaussian", 12, 14, seed=2))
    deltas = [rip_exhaustive(A, k).delta for k in range(1, 5)]
    assert all(a <= b + 1e-15 for a, b in zip(deltas, deltas[1:]))


def test_rip_guard():
    A = np.ones((2, 60))
    with pytest.raises(ValueError, match="rip_sampled"):
        rip_exhaustive(A, 10)


def test_rip_sampled():
    A = generate(EnsembleSpec("gaussian", 8, 6, seed=1))
    ex = rip_exhaustive(A, 2)
    many = rip_sampled(A, 2, 5000, seed=3)
    assert many.delta_lower == pytest.approx(ex.delta, abs=1e-14)
    assert rip_sampled(A, 2, 3, seed=3).delta_lower <= ex.delta
    one = rip_sampled(A, 1, 2000)
    assert one.delta_lower == pytest.approx(np.abs(np.sum(A**2, axis=0) - 1).max(), abs=1e-14)
    assert not many.exhaustive and many.delta_upper == 1.0
    with pytest.raises(ValueError):
        many.delta
    with pytest.raises(ValueError):
        rip_sampled(A, 2, 0)


def test_certificate_dict():
    d = RipCertificate(2, 0.3, 0.3, "exhaustive", None, (1, 4)).to_dict()
    assert d["is_rip"] and d["witness"] == [1, 4]


def test_concentration_bounds():
    assert concentration_bound("gaussian", 10, 1.0) == pytest.approx(math.exp(-5))
    assert concentration_bound("bernoulli", 10, 1.0) == pytest.approx(2 * math.exp(-5))
    assert gaussian_c0(0.5) == pytest.approx(0.0625 - 0.125 / 6)


def test_concentration_check_gaussian():
    rep = concentration_check("gaussian", 50, 0.3, 100_000, seed=1)
    assert rep.empirical_rate <= rep.theoretical_bound + rep.slack
    assert rep.within_bound
    assert rep.exceedances == round(rep.empirical_rate * rep.trials)
    again = concentration_check("gaussian", 50, 0.3, 100_000, seed=1)
    assert again == rep


def test_concentration_validation():
    with pytest.raises(ValueError):
        concentration_check("gaussian", 10, 0.0, 1000)
    with pytest.raises(ValueError):
        concentration_check("gaussian", 10, 0.5, 999)


CONSTS = MeasurementConstants(q1=1, q2=1, c1=0.25, c2=0.25, D=math.e)


def test_measurement_bound_example():
    # 64 ln(2 * 4 * 252) = 486.97..., second term 2*4/0.25 = 32
    assert measurement_bound(SelectionRule.relaxed(0.25), 4, 256, 4, CONSTS) == 487


def test_measurement_bound_relaxed_at_limit_is_weak_form():
    k, N, l = 9, 200, 3
    relaxed = measurement_bound(SelectionRule.relaxed(1 / (2 * math.sqrt(k))), k, N, l, CONSTS)
    expected = max(4 * k / 0.25 * math.log(2 * l * (N - k)), 2 * k / 0.25)
    assert relaxed == math.ceil(expected)
    weak = measurement_bound(SelectionRule.weak(1.0), k, N, l, CONSTS)
    assert weak == relaxed


def test_measurement_bound_monotone_in_N():
    rule = SelectionRule.relaxed(0.1)
    vals = [measurement_bound(rule, 4, N, 4, CONSTS) for N in (16, 32, 64, 128, 256, 512)]
    assert vals == sorted(vals)


def test_measurement_bound_beta():
    b = measurement_bound(SelectionRule.relaxed(0.25), 4, 256, 4, CONSTS, beta=0.01)
    assert b == math.ceil(2 * math.log(2016 / 0.01) / (0.25 * 0.0625))


def test_measurement_bound_validation():
    rule = SelectionRule.relaxed(0.25)
    with pytest.raises(ValueError):
        measurement_bound(rule, 4, 4, 2, CONSTS)
    with pytest.raises(ValueError):
        measurement_bound(rule, 4, 256, 0, CONSTS)
    with pytest.raises(ValueError):
        measurement_bound(rule, 4, 256, 4, CONSTS, beta=0.5)
    with pytest.raises(ValueError):
        measurement_bound(SelectionRule.relaxed(0.3), 4, 256, 4, CONSTS)
    with pytest.raises(ValueError):
        MeasurementConstants(q1=0.5, q2=1, c1=1, c2=1, D=2)
    with pytest.raises(ValueError):
        MeasurementConstants(q1=1, q2=1, c1=1, c2=1, D=1)
