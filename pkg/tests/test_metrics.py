import numpy as np
import pytest

from app.domain.errors import ShapeError, ZeroVarianceError
from app.domain.metrics import mean_bias, nse, pearson_r


def test_nse_reference_values():
    assert nse([1, 2, 3], [1, 2, 4]) == pytest.approx(0.5)
    assert nse([1, 2, 3], [1, 2, 3]) == 1.0
    assert nse([1, 2, 3], [2, 2, 2]) == pytest.approx(0.0)


def test_pearson_r_is_affine_invariant():
    x = np.linspace(0.0, 5.0, 20)
    assert pearson_r(x, 2 * x + 1) == pytest.approx(1.0)
    assert pearson_r(x, -x) == pytest.approx(-1.0)


def test_mean_bias_sign():
    assert mean_bias([10.0, 12.0], [11.0, 13.0]) == pytest.approx(1.0)


def test_metric_errors():
    with pytest.raises(ShapeError):
        nse([1.0, 2.0], [1.0])
    with pytest.raises(ShapeError):
        nse([1.0], [1.0])
    with pytest.raises(ZeroVarianceError):
        nse([2.0, 2.0, 2.0], [1.0, 2.0, 3.0])
    with pytest.raises(ZeroVarianceError):
        pearson_r([1.0, 2.0, 3.0], [4.0, 4.0, 4.0])
