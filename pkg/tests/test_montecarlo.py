import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from subplanck.errors import ConfigError
from subplanck.fisher import fi_analytic
from subplanck.montecarlo import (
    FringeModel,
    TrialConfig,
    cramer_rao_trial,
    default_params,
    estimate_beta_mle,
    estimator_window,
    replica_stream,
    sample_fringe,
    sample_outcomes,
    scaling_check,
)
from subplanck.protocol import ImperfectionModel, ProtocolParams, pg_with_imperfections


# sampling

def test_sample_outcomes_edges():
    rng = replica_stream(1, 0)
    assert sample_outcomes(0.0, 500, rng) == 0
    assert sample_outcomes(1.0, 500, rng) == 500


def test_sample_outcomes_frequency():
    count = sample_outcomes(0.5, 10 ** 6, replica_stream(7, 3))
    assert abs(count / 10 ** 6 - 0.5) <= 0.002


def test_sample_outcomes_range():
    with pytest.raises(ValueError):
        sample_outcomes(1.1, 10, replica_stream(0, 0))


def test_streams_reproducible_and_distinct():
    a = replica_stream(2017, 5).random(8)
    np.testing.assert_array_equal(a, replica_stream(2017, 5).random(8))
    assert not np.array_equal(a, replica_stream(2017, 6).random(8))
    assert not np.array_equal(a, replica_stream(2018, 5).random(8))


def test_stream_is_counter_based():
    assert isinstance(replica_stream(0, 0).bit_generator, np.random.Philox)


# estimation

def test_exact_inversion():
    p = default_params()
    model = FringeModel(p)
    nu = 10 ** 12
    count = round(model(0.1) * nu)
    est = estimate_beta_mle(count, nu, p, model)
    assert not est.clamped
    assert est.beta == pytest.approx(0.1, abs=1e-9)


@settings(max_examples=40)
@given(st.floats(-0.95, 0.95))
def test_inversion_round_trip(frac):
    p = default_params()
    model = FringeModel(p)
    beta = frac * model.half_width
    est = estimate_beta_mle(model(beta) * 10 ** 9, 10 ** 9, p, model)
    assert est.beta == pytest.approx(beta, abs=1e-8)


def test_clamping():
    p = default_params()
    model = FringeModel(p)
    lo = estimate_beta_mle(0, 100, p, model)
    hi = estimate_beta_mle(100, 100, p, model)
    assert lo.clamped and hi.clamped
    assert {lo.beta, hi.beta} == {-estimator_window(p), estimator_window(p)}


def test_rejects_off_fringe_operating_point():
    with pytest.raises(ConfigError):
        FringeModel(ProtocolParams(T1=13.4, T2=13.4))


def test_trial_config_validation():
    with pytest.raises(ConfigError):
        TrialConfig(nu=0)


def test_estimator_unbiased():
    r = cramer_rao_trial(TrialConfig(replicas=200))
    assert abs(r.mean_estimate) <= 3 * r.empirical_std / math.sqrt(200)


# Cramer-Rao

def test_ideal_saturation():
    r = cramer_rao_trial(TrialConfig())
    assert r.ratio == pytest.approx(1.0, abs=0.10)
    assert r.n_clamped == 0


def test_saturation_with_detection_error():
    model = ImperfectionModel(detection_error=0.05, position_sigma=0.0)
    r = cramer_rao_trial(TrialConfig(imperfections=model))
    assert r.ratio == pytest.approx(1.0, abs=0.10)
    p = default_params()
    assert r.predicted_std == pytest.approx(1 / math.sqrt(1e4 * fi_analytic(0.0, p, 0.05)))


def test_saturation_with_spread():
    model = ImperfectionModel(detection_error=0.05, position_sigma=0.5)
    r = cramer_rao_trial(TrialConfig(imperfections=model, replicas=300))
    assert r.ratio == pytest.approx(1.0, abs=0.15)


def test_single_realization_predicted_std():
    r = cramer_rao_trial(TrialConfig(nu=1, replicas=20))
    assert r.predicted_std == pytest.approx(1 / math.sqrt(fi_analytic(0.0, default_params())))


def test_scaling():
    for ratio in scaling_check(TrialConfig(replicas=400)):
        assert ratio == pytest.approx(0.5, abs=0.1)


def test_seed_determinism():
    a = cramer_rao_trial(TrialConfig(replicas=50, seed=11))
    b = cramer_rao_trial(TrialConfig(replicas=50, seed=11))
    np.testing.assert_array_equal(a.estimates, b.estimates)
    c = cramer_rao_trial(TrialConfig(replicas=50, seed=12))
    assert not np.array_equal(a.estimates, c.estimates)


def test_parallel_matches_serial():
    cfg = TrialConfig(replicas=40, seed=3)
    serial = cramer_rao_trial(cfg)
    parallel = cramer_rao_trial(cfg, workers=2)
    np.testing.assert_array_equal(serial.estimates, parallel.estimates)
    assert serial.empirical_std == parallel.empirical_std


# fringe models

def test_spline_model_tracks_simulation():
    p = ProtocolParams(T1=12.0, T2=13.5)
    imp = ImperfectionModel(detection_error=0.05, position_sigma=0.3)
    model = FringeModel(p, imp)
    for b in (-0.1, 0.0, 0.07):
        assert model(b) == pytest.approx(pg_with_imperfections(p.replace(beta=b), imp), abs=1e-4)
    assert 0 < model.fisher(0.0) < fi_analytic(0.0, p, 0.05)


def test_sample_fringe():
    p = ProtocolParams(T1=12.0, T2=13.5)
    model = FringeModel(p)
    beta = np.linspace(-0.1, 0.1, 5)
    data = sample_fringe(model, beta, 1000, seed=4)
    np.testing.assert_array_equal(data.trials, 1000)
    assert np.all(np.abs(data.p_hat - [model(b) for b in beta]) < 0.07)
    again = sample_fringe(model, beta, 1000, seed=4)
    np.testing.assert_array_equal(data.p_hat, again.p_hat)
