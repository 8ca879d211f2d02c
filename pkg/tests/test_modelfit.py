import io

import numpy as np
import pytest

from envindex.curve import normalize
from envindex.criteria import PenaltySpec, select
from envindex.env import env_index, suggested_k
from envindex.modelfit import (
    Dataset,
    DatasetError,
    SingularFitError,
    curve_from_dataset,
    forward_rank,
    neg2loglik_from_mse,
    ols_fit,
    read_dataset_csv,
    synth_regression,
    write_dataset_csv,
)


def test_intercept_only_fit_is_population_variance(rng):
    y = rng.normal(3.0, 2.0, size=200)
    fit = ols_fit(np.empty((200, 0)), y)
    assert fit.mse == pytest.approx(np.var(y), rel=1e-12)
    assert fit.intercept == pytest.approx(y.mean(), rel=1e-12)


def test_noiseless_line():
    x = np.linspace(-2, 3, 50)
    fit = ols_fit(x[:, None], 2 * x + 1)
    np.testing.assert_allclose(fit.coefficients, [1, 2], atol=1e-12)
    assert fit.mse < 1e-25


def test_orthogonal_target_gives_intercept_only_mse(rng):
    X = rng.normal(size=(100, 3))
    y = rng.normal(size=100)
    A = np.column_stack([np.ones(100), X])
    resid = y - A @ np.linalg.lstsq(A, y, rcond=None)[0]
    y0 = resid + 4.0
    assert ols_fit(X, y0).mse == pytest.approx(ols_fit(np.empty((100, 0)), y0).mse, rel=1e-10)


def test_fit_matches_lstsq_oracle(rng):
    X = rng.normal(size=(80, 5))
    y = X @ rng.normal(size=5) + rng.normal(size=80)
    A = np.column_stack([np.ones(80), X])
    theta = np.linalg.lstsq(A, y, rcond=None)[0]
    fit = ols_fit(X, y)
    np.testing.assert_allclose(fit.coefficients, theta, rtol=1e-10)
    assert fit.neg2loglik == pytest.approx(80 * np.log(fit.mse) + 80 * (1 + np.log(2 * np.pi)))


def test_neg2loglik_is_gaussian_loglik(rng):
    y = rng.normal(size=60)
    fit = ols_fit(np.empty((60, 0)), y)
    sigma2 = fit.mse
    loglik = np.sum(-0.5 * np.log(2 * np.pi * sigma2) - (y - y.mean()) ** 2 / (2 * sigma2))
    assert fit.neg2loglik == pytest.approx(-2 * loglik, rel=1e-12)


def test_singular_design_names_column(rng):
    X = rng.normal(size=(40, 3))
    X = np.column_stack([X, X[:, 0] + 2 * X[:, 2]])
    with pytest.raises(SingularFitError) as info:
        ols_fit(X, rng.normal(size=40))
    assert info.value.column == 3
    with pytest.raises(SingularFitError) as info:
        ols_fit(np.column_stack([X[:, :1], np.full(40, 5.0)]), rng.normal(size=40))
    assert info.value.column == 1


def test_dataset_validation():
    with pytest.raises(DatasetError):
        Dataset(np.zeros((3, 2)), np.zeros(3), ("a", "b"))
    with pytest.raises(DatasetError):
        Dataset(np.full((10, 1), np.nan), np.zeros(10), ("a",))
    with pytest.raises(DatasetError):
        Dataset(np.zeros((10, 1)), np.zeros(10), ("a", "b"))


def test_forward_rank_single_relevant_feature(rng):
    X = rng.normal(size=(300, 6))
    y = 3 * X[:, 4] + 0.1 * rng.normal(size=300)
    r = forward_rank(Dataset(X, y, tuple("abcdef")))
    assert r.order[0] == 4
    assert r.step_mse[0] == pytest.approx(np.var(y))
    assert (np.diff(r.step_mse) <= 0).all()


def test_forward_rank_single_feature(rng):
    r = forward_rank(Dataset(rng.normal(size=(10, 1)), rng.normal(size=10), ("a",)))
    assert r.order == (0,)


def test_forward_rank_duplicated_column(rng):
    X = rng.normal(size=(200, 3))
    y = X[:, 0] + 0.5 * X[:, 1] + 0.1 * rng.normal(size=200)
    X = np.column_stack([X, X[:, 0]])
    r = forward_rank(Dataset(X, y, ("a", "b", "c", "a2")))
    assert sorted(r.order) == [0, 1, 2, 3]
    first = next(j for j in r.order if j in (0, 3))
    assert r.order[0] == first
    assert r.singular == ((3,) if first == 0 else (0,))
    w = -np.diff(r.step_mse)
    assert w[r.order.index(r.singular[0])] == 0.0


def test_step_mse_matches_independent_refit():
    data = synth_regression(300, 8, 3, 0.3, seed=5)
    r = forward_rank(data)
    for k in range(1, data.K_full + 1):
        A = np.column_stack([np.ones(data.N), data.X[:, list(r.order[:k])]])
        resid = data.y - A @ np.linalg.lstsq(A, data.y, rcond=None)[0]
        assert r.step_mse[k] == pytest.approx(resid @ resid / data.N, rel=1e-9)


def test_curve_forms_and_affine_equivalence():
    data = synth_regression(400, 10, 4, 0.5, seed=1)
    r = forward_rank(data)
    mse = curve_from_dataset(data, r, "mse")
    nlog = curve_from_dataset(data, r, "n_log_mse")
    n2ll = curve_from_dataset(data, r, "neg2loglik")
    assert mse.values[0] == pytest.approx(np.var(data.y))
    assert (np.diff(mse.values) <= 0).all()
    np.testing.assert_allclose(normalize(nlog).values, normalize(n2ll).values, rtol=1e-9, atol=1e-9)
    for spec in (PenaltySpec.aic(), PenaltySpec.bic(400), PenaltySpec.hqic(400), PenaltySpec.uaed()):
        assert select(normalize(nlog), spec).k_e == select(normalize(n2ll), spec).k_e
    with pytest.raises(ValueError):
        curve_from_dataset(data, r, "mae")


def test_log_forms_reject_exact_fit():
    x = np.arange(10.0)
    data = Dataset(x[:, None], 2 * x, ("x",))
    r = forward_rank(data)
    assert curve_from_dataset(data, r, "mse").values[-1] < 1e-25
    if r.step_mse[-1] == 0.0:
        with pytest.raises(ValueError):
            curve_from_dataset(data, r, "n_log_mse")


def test_synth_regression_deterministic_and_checked():
    a, b = synth_regression(50, 4, 2, 0.1, seed=3), synth_regression(50, 4, 2, 0.1, seed=3)
    assert np.array_equal(a.X, b.X) and np.array_equal(a.y, b.y) and a.true_features == b.true_features
    for bad in [(5, 4, 2), (50, 4, 5), (50, 0, 0)]:
        with pytest.raises(ValueError):
            synth_regression(*bad, 0.1, seed=0)


def test_noiseless_full_support_hits_zero():
    data = synth_regression(100, 6, 6, 0.0, seed=2)
    c = curve_from_dataset(data, forward_rank(data), "mse")
    assert c.values[-1] < 1e-25 * c.values[0]


def test_pipeline_recovers_five():
    data = synth_regression(1000, 20, 5, 0.1, seed=0)
    r = forward_rank(data)
    assert set(r.order[:5]) == set(data.true_features)
    assert suggested_k(env_index(normalize(curve_from_dataset(data, r, "mse")))) == 5


def test_no_signal_curve_carries_only_noise_sized_drop():
    # the index is scale invariant, so a noise-only curve is not flat after
    # normalization; what vanishes is its size relative to var(y)
    for seed in range(5):
        data = synth_regression(1000, 20, 0, 0.1, seed=seed)
        c = normalize(curve_from_dataset(data, forward_rank(data), "mse"))
        assert c.v0 / np.var(data.y) < 0.05


def test_dataset_csv_round_trip():
    data = synth_regression(20, 3, 1, 0.1, seed=0)
    buf = io.StringIO()
    write_dataset_csv(buf, data)
    buf.seek(0)
    back = read_dataset_csv(buf)
    assert np.array_equal(back.X, data.X) and back.names == data.names


@pytest.mark.parametrize("text", ["a,b\n1,2\n", "a,target\n1,\n2,3\n3,4\n4,5\n", "a,target\n1,2,3\n", ""])
def test_dataset_csv_rejects(text):
    with pytest.raises(DatasetError):
        read_dataset_csv(io.StringIO(text))
