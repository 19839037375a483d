import math

import numpy as np
import pytest

from qdcsim.sampling import (
    CountTable,
    EstimationError,
    NoiseConfig,
    _linear_sigma,
    _nonlinear_sigma,
    estimate_table,
    estimate_witness,
    sample_counts,
)
from qdcsim.witness import (
    PamSettings,
    ProbTable,
    linear_settings,
    linear_value,
    nonlinear_settings,
    prob_table,
    witness_at,
)

PI = math.pi


def fair_settings():
    return PamSettings((0.0, 1.0, 2.0), (0.0, 1.0), 0.0)


def test_noise_config_validation():
    for bad in (dict(shots_per_setting=0), dict(shots_per_setting=10, loss=1.0), dict(shots_per_setting=10, efficiency=0.0), dict(shots_per_setting=10, seed=-1)):
        with pytest.raises(ValueError):
            NoiseConfig(**bad)


def test_counts_conserve_shots():
    c = sample_counts(fair_settings(), NoiseConfig(1000, 0.3, 0.7, seed=1))
    assert np.all(c.shots == 1000)


def test_fair_coin_regime():
    n = 10**6
    c = sample_counts(fair_settings(), NoiseConfig(n, seed=3))
    frac = c.n0 / n
    assert np.all(np.abs(frac - 0.5) < 5 * math.sqrt(0.25 / n))
    assert np.all(c.n_lost == 0)


def test_loss_fraction():
    n = 10**6
    c = sample_counts(fair_settings(), NoiseConfig(n, loss=0.5, seed=4))
    assert np.all(np.abs(c.n_lost / n - 0.5) < 5 * math.sqrt(0.25 / n))


def test_certain_cell_never_clicks_d1():
    s = PamSettings((0.0, 1.0, 2.0), (0.0, 1.0), PI / 4)
    c = sample_counts(s, NoiseConfig(10_000, 0.2, 0.8, seed=5))
    assert c.n1[0, 0] == 0


def test_determinism_and_seed_sensitivity():
    s = linear_settings(PI / 4, PI / 4)
    a = sample_counts(s, NoiseConfig(5000, 0.4, 0.9, seed=11))
    b = sample_counts(s, NoiseConfig(5000, 0.4, 0.9, seed=11))
    c = sample_counts(s, NoiseConfig(5000, 0.4, 0.9, seed=12))
    for name in ("n0", "n1", "n_lost"):
        assert getattr(a, name).tobytes() == getattr(b, name).tobytes()
    assert a.to_dict() != c.to_dict()


def test_estimate_table_arithmetic():
    t = estimate_table(CountTable([[50]], [[50]], [[0]]))
    assert t.p[0, 0] == 0.5
    assert t.stderr[0, 0] == pytest.approx(0.05)
    assert t.provenance == "sampled"
    with pytest.raises(EstimationError):
        estimate_table(CountTable([[0, 3]], [[0, 1]], [[5, 1]]))


def test_post_selection_under_heavy_loss():
    s = PamSettings((0.0, 1.0, 2.0), (0.0, 1.0), PI / 4)
    t = estimate_table(sample_counts(s, NoiseConfig(10**6, loss=0.9, seed=21)))
    assert abs(t.p[0, 0] - 1.0) <= 5 * t.stderr[0, 0] + 1e-15


def test_linear_sigma_is_exact_propagation():
    se = np.array([[0.01, 0.02], [0.03, 0.04], [0.05, 0.06]])
    t = ProbTable(np.full((3, 2), 0.5), "sampled", se)
    expected = 2 * math.sqrt(0.01**2 + 0.02**2 + 0.03**2 + 0.04**2 + 0.05**2)
    assert _linear_sigma(t) == pytest.approx(expected)


def test_nonlinear_sigma_matches_finite_difference_gradient(rng):
    p = rng.uniform(0.1, 0.9, (4, 2))
    se = rng.uniform(0.001, 0.01, (4, 2))
    t = ProbTable(p, "sampled", se)

    def det(q):
        w = np.array([[q[0, 0] - q[1, 0], q[2, 0] - q[3, 0]], [q[0, 1] - q[1, 1], q[2, 1] - q[3, 1]]])
        return abs(np.linalg.det(w))

    h = 1e-6
    var = 0.0
    for x in range(4):
        for y in range(2):
            dp = np.zeros_like(p)
            dp[x, y] = h
            g = (det(p + dp) - det(p - dp)) / (2 * h)
            var += (g * se[x, y]) ** 2
    assert _nonlinear_sigma(t) == pytest.approx(math.sqrt(var), rel=1e-6)


def test_unbiased_under_loss():
    s = linear_settings(PI / 4, PI / 4)
    p_true = prob_table(s).p[0, 0]
    for loss in (0.0, 0.3, 0.8):
        ests = []
        for seed in range(200):
            t = estimate_table(sample_counts(s, NoiseConfig(10**5, loss=loss, seed=seed)))
            ests.append(t.p[0, 0])
        ests = np.array(ests)
        se_mean = ests.std(ddof=1) / math.sqrt(len(ests))
        assert abs(ests.mean() - p_true) < 4 * se_mean


def test_interval_coverage():
    s = PamSettings((0.4, 1.3, 2.2, 2.9, -0.6), (0.0, 1.1), 0.6)
    p_true = prob_table(s).p
    hits = total = 0
    for seed in range(100):
        t = estimate_table(sample_counts(s, NoiseConfig(20_000, loss=0.2, efficiency=0.9, seed=seed)))
        inside = np.abs(t.p - p_true) <= 1.959964 * t.stderr
        hits += int(inside.sum())
        total += inside.size
    assert total == 1000
    assert 0.93 <= hits / total <= 0.97


def test_large_n_estimates_stay_within_4_sigma():
    s = linear_settings(PI / 4, PI / 4)
    ideal = witness_at("linear", PI / 4, PI / 4).value
    inside = 0
    for seed in range(100):
        r = estimate_witness("linear", s, NoiseConfig(10**7, seed=seed))
        inside += abs(r.value - ideal) < 4 * r.uncertainty
    assert inside >= 99


def test_uncertainty_shrinks_with_shots():
    s = nonlinear_settings(3 * PI / 4, PI / 5)
    small = estimate_witness("nonlinear", s, NoiseConfig(100, seed=1))
    big = estimate_witness("nonlinear", s, NoiseConfig(10**6, seed=1))
    assert small.uncertainty >= big.uncertainty
    lsmall = estimate_witness("linear", linear_settings(0.3, 0.5), NoiseConfig(100, seed=1))
    lbig = estimate_witness("linear", linear_settings(0.3, 0.5), NoiseConfig(10**6, seed=1))
    assert lsmall.uncertainty >= lbig.uncertainty


def test_loss_only_changes_effective_sample_size():
    s = linear_settings(PI / 5, PI / 6)
    diffs = []
    for seed in range(50):
        a = estimate_witness("linear", s, NoiseConfig(20_000, seed=seed))
        b = estimate_witness("linear", s, NoiseConfig(100_000, loss=0.8, seed=10_000 + seed))
        diffs.append((a.value - b.value) / math.hypot(a.uncertainty, b.uncertainty))
    diffs = np.array(diffs)
    # standardized paired differences should look like N(0, 1)
    assert abs(diffs.mean()) < 4 / math.sqrt(len(diffs))
    assert 0.6 < diffs.std(ddof=1) < 1.4


def test_bootstrap_agrees_with_delta_method():
    s = nonlinear_settings(3 * PI / 4, PI / 5)
    r = estimate_witness("nonlinear", s, NoiseConfig(200_000, loss=0.3, seed=9), bootstrap=True)
    assert r.extra["bootstrap_sigma"] == pytest.approx(r.extra["delta_sigma"], rel=0.15)
    rl = estimate_witness("linear", linear_settings(0.4, 0.5), NoiseConfig(200_000, seed=9), bootstrap=True)
    assert rl.uncertainty == pytest.approx(rl.extra["delta_sigma"], rel=0.15)


def test_zero_efficiency_like_config_fails_estimation():
    s = linear_settings(0.1, 0.2)
    with pytest.raises(EstimationError):
        estimate_witness("linear", s, NoiseConfig(1, loss=0.999999, seed=0))


def test_linear_value_on_sampled_table_is_evaluated_correctly():
    s = linear_settings(PI / 4, PI / 4)
    r = estimate_witness("linear", s, NoiseConfig(1000, seed=2))
    assert r.value == pytest.approx(float(linear_value(r.extra["table"].p)))
