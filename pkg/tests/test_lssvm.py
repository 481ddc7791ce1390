import numpy as np
import pytest

from app.domain.errors import InsufficientDataError, ShapeError
from app.domain import lssvm
from app.domain.lssvm import lssvm_fit, lssvm_predict, rbf_kernel, tune_hyperparams
from app.domain.metrics import nse


def _oracle(x, y, sigma, gamma):
    n = len(y)
    k = np.exp(-((x[:, None, :] - x[None, :, :]) ** 2).sum(axis=2) / (2 * sigma ** 2))
    system = np.zeros((n + 1, n + 1))
    system[0, 1:] = 1.0
    system[1:, 0] = 1.0
    system[1:, 1:] = k + np.eye(n) / gamma
    solution = np.linalg.solve(system, np.concatenate([[0.0], y]))
    return solution[0], solution[1:]


def test_fit_matches_saddle_point_solution():
    rng = np.random.default_rng(5)
    x = rng.uniform(-2, 2, size=(8, 2))
    y = rng.normal(size=8)
    model = lssvm_fit(x, y, sigma=1.0, gamma=10.0, standardize=False)
    b, alpha = _oracle(x, y, 1.0, 10.0)
    assert model.b == pytest.approx(b, abs=1e-8)
    np.testing.assert_allclose(model.alpha, alpha, atol=1e-8)
    assert abs(model.alpha.sum()) < 1e-8


def test_kernel_is_positive_semidefinite():
    x = np.random.default_rng(1).normal(size=(30, 3))
    k = rbf_kernel(x, x, 0.7)
    np.testing.assert_allclose(k, k.T)
    assert np.linalg.eigvalsh(k).min() > -1e-10
    np.testing.assert_allclose(np.diag(k), 1.0)


def test_target_shift_moves_only_the_intercept():
    rng = np.random.default_rng(9)
    x = rng.normal(size=(12, 2))
    y = rng.normal(size=12)
    base = lssvm_fit(x, y, 1.0, 5.0)
    shifted = lssvm_fit(x, y + 7.0, 1.0, 5.0)
    assert shifted.b == pytest.approx(base.b + 7.0, abs=1e-8)
    np.testing.assert_allclose(shifted.alpha, base.alpha, atol=1e-8)
    query = rng.normal(size=(4, 2))
    np.testing.assert_allclose(lssvm_predict(shifted, query), lssvm_predict(base, query) + 7.0, atol=1e-8)


def test_constant_target_predicts_constant():
    x = np.linspace(0, 1, 8)[:, None]
    model = lssvm_fit(x, [5.0] * 8, 1.0, 10.0)
    np.testing.assert_allclose(lssvm_predict(model, [[0.3], [4.0]]), 5.0, atol=1e-8)


def test_single_row_fit_predicts_its_target():
    model = lssvm_fit([[1.0, 2.0]], [3.5], 1.0, 1.0)
    assert model.b == pytest.approx(3.5)
    np.testing.assert_allclose(lssvm_predict(model, [[9.0, -9.0]]), 3.5)


def test_far_queries_fall_back_to_intercept():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(10, 1))
    model = lssvm_fit(x, np.sin(x[:, 0]), 0.5, 10.0, standardize=False)
    assert lssvm_predict(model, [[1e3]])[0] == pytest.approx(model.b, abs=1e-12)


def test_prediction_shapes():
    model = lssvm_fit(np.ones((3, 2)) * [[1], [2], [3]], [1.0, 2.0, 3.0], 1.0, 1.0)
    assert lssvm_predict(model, np.empty((0, 2))).shape == (0,)
    with pytest.raises(ShapeError):
        lssvm_predict(model, [[1.0, 2.0, 3.0]])
    with pytest.raises(ShapeError):
        lssvm_fit([[1.0], [2.0]], [1.0], 1.0, 1.0)


def test_tuning_needs_enough_rows():
    with pytest.raises(InsufficientDataError):
        tune_hyperparams(np.arange(9.0)[:, None], np.arange(9.0))


def test_tuned_model_learns_smooth_target():
    x = np.linspace(0, 2 * np.pi, 80)[:, None]
    y = np.sin(x[:, 0])
    train, test = slice(0, None, 2), slice(1, None, 2)
    sigma, gamma = tune_hyperparams(x[train], y[train])
    model = lssvm_fit(x[train], y[train], sigma, gamma)
    assert nse(y[test], lssvm_predict(model, x[test])) >= 0.95


def test_zero_target_tolerates_round_off(monkeypatch):
    solve = lssvm.linalg.solve

    def noisy_solve(a, b, **kw):
        return solve(a, b, **kw) + 1e-13

    monkeypatch.setattr(lssvm.linalg, "solve", noisy_solve)
    x = np.linspace(0.0, 1.0, 6)[:, None]
    model = lssvm_fit(x, np.zeros(6), sigma=0.5, gamma=10.0)
    np.testing.assert_allclose(lssvm_predict(model, x), 0.0, atol=1e-9)


def test_tuning_scales_each_fold_on_its_training_rows(monkeypatch):
    seen = []
    fit_scaler = lssvm.fit_scaler

    def recording_fit_scaler(x):
        seen.append(x.shape[0])
        return fit_scaler(x)

    monkeypatch.setattr(lssvm, "fit_scaler", recording_fit_scaler)
    x = np.linspace(0.0, 6.0, 20)[:, None]
    tune_hyperparams(x, np.sin(x).ravel(), sigmas=(1.0,), gammas=(10.0,), folds=5)
    assert seen == [16] * 5
