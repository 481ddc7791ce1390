"""
Least-squares support vector regression with an RBF kernel.

Fitting solves the (n+1) x (n+1) saddle-point system

    [ 0   1^T         ] [b    ]   [0]
    [ 1   K + I/gamma ] [alpha] = [y]

with K_ij = exp(-||x_i - x_j||^2 / (2 sigma^2)); predictions are
sum_i alpha_i k(x_i, x*) + b.
"""

from __future__ import annotations

import logging
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg
from scipy.spatial.distance import cdist

from app.domain.errors import ConditioningError, InsufficientDataError, ShapeError
from app.domain.models import FeatureScaler, LssvmModel

logger = logging.getLogger(__name__)

SIGMA_GRID: Tuple[float, ...] = tuple(2.0 ** k for k in range(-3, 6))
GAMMA_GRID: Tuple[float, ...] = tuple(2.0 ** k for k in range(-2, 11))
CV_FOLDS = 5
MIN_TUNING_ROWS = 10


def _as_matrix(x: Sequence) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ShapeError(f"feature matrix must be 2-D, got shape {arr.shape}")
    return arr


def fit_scaler(x: np.ndarray) -> FeatureScaler:
    """Column means and population standard deviations; constant columns keep scale 1."""
    mean = x.mean(axis=0)
    scale = x.std(axis=0)
    scale = np.where(scale > 0, scale, 1.0)
    return FeatureScaler(mean=mean, scale=scale)


def rbf_kernel(a: np.ndarray, b: np.ndarray, sigma: float) -> np.ndarray:
    return np.exp(-cdist(a, b, "sqeuclidean") / (2.0 * sigma ** 2))


def _solve_saddle(kernel: np.ndarray, y: np.ndarray, gamma: float) -> Tuple[float, np.ndarray]:
    n = y.size
    system = np.zeros((n + 1, n + 1))
    system[0, 1:] = 1.0
    system[1:, 0] = 1.0
    system[1:, 1:] = kernel + np.eye(n) / gamma
    rhs = np.concatenate([[0.0], y])
    try:
        solution = linalg.solve(system, rhs, assume_a="sym")
    except (linalg.LinAlgError, ValueError) as e:
        raise ConditioningError(
            f"LS-SVM system is singular (gamma={gamma}); try a smaller gamma (larger 1/gamma): {e}"
        )
    residual = np.linalg.norm(system @ solution - rhs)
    if not np.isfinite(residual) or residual > 1e-8 * max(np.linalg.norm(y), 1.0):
        raise ConditioningError(
            f"LS-SVM system solved with residual {residual:.3e} (gamma={gamma}); "
            f"try a smaller gamma (larger 1/gamma)"
        )
    return float(solution[0]), solution[1:]


def lssvm_fit(x: Sequence, y: Sequence[float], sigma: float, gamma: float, standardize: bool = True) -> LssvmModel:
    """
    Fit an LS-SVM regression.

    With ``standardize`` the features are scaled by their training means and
    standard deviations and the scaler is stored on the model.

    Raises:
        ConditioningError: when the saddle-point system cannot be solved accurately.
    """
    x = _as_matrix(x)
    y = np.asarray(y, dtype=float).ravel()
    if x.shape[0] != y.size:
        raise ShapeError(f"{x.shape[0]} feature rows but {y.size} targets")
    if y.size < 1:
        raise InsufficientDataError("LS-SVM needs at least one training row")
    if sigma <= 0 or gamma <= 0:
        raise ShapeError(f"sigma and gamma must be positive, got {sigma}, {gamma}")

    scaler = fit_scaler(x) if standardize else None
    xs = scaler.transform(x) if scaler is not None else x
    b, alpha = _solve_saddle(rbf_kernel(xs, xs, sigma), y, gamma)
    return LssvmModel(sigma=sigma, gamma=gamma, alpha=alpha, b=b, x_train=xs, scaler=scaler)


def lssvm_predict(model: LssvmModel, x: Sequence) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return np.empty(0)
    x = _as_matrix(x)
    if x.shape[1] != model.n_features:
        raise ShapeError(f"model expects {model.n_features} features, got {x.shape[1]}")
    xs = model.scaler.transform(x) if model.scaler is not None else x
    return rbf_kernel(xs, model.x_train, model.sigma) @ model.alpha + model.b


def tune_hyperparams(
    x: Sequence,
    y: Sequence[float],
    sigmas: Iterable[float] = SIGMA_GRID,
    gammas: Iterable[float] = GAMMA_GRID,
    folds: int = CV_FOLDS,
) -> Tuple[float, float]:
    """
    Grid search of (sigma, gamma) by k-fold cross-validated MSE.

    Fold of row i is ``i % folds``. Ties go to the smaller gamma, then the
    smaller sigma. Grid points whose system cannot be solved are skipped.
    """
    x = _as_matrix(x)
    y = np.asarray(y, dtype=float).ravel()
    n = y.size
    if n < MIN_TUNING_ROWS:
        raise InsufficientDataError(f"hyperparameter tuning needs at least {MIN_TUNING_ROWS} rows, got {n}")

    fold_of = np.arange(n) % folds
    splits = []
    for f in range(folds):
        train, test = np.flatnonzero(fold_of != f), np.flatnonzero(fold_of == f)
        # Scaler sees only the training rows of the fold
        scaler = fit_scaler(x[train])
        xs_train, xs_test = scaler.transform(x[train]), scaler.transform(x[test])
        splits.append((train, test, cdist(xs_train, xs_train, "sqeuclidean"), cdist(xs_test, xs_train, "sqeuclidean")))

    best: Optional[Tuple[float, float, float]] = None
    for gamma in sorted(gammas):
        for sigma in sorted(sigmas):
            sse = 0.0
            try:
                for train, test, d_train, d_test in splits:
                    b, alpha = _solve_saddle(np.exp(-d_train / (2.0 * sigma ** 2)), y[train], gamma)
                    pred = np.exp(-d_test / (2.0 * sigma ** 2)) @ alpha + b
                    sse += float(np.sum((y[test] - pred) ** 2))
            except ConditioningError:
                logger.debug(f"Skipping sigma={sigma}, gamma={gamma}: ill-conditioned")
                continue
            mse = sse / n
            if best is None or mse < best[0]:
                best = (mse, sigma, gamma)

    if best is None:
        raise ConditioningError("no grid point produced a solvable LS-SVM system")
    logger.debug(f"Selected sigma={best[1]}, gamma={best[2]} (CV MSE {best[0]:.4f})")
    return best[1], best[2]
