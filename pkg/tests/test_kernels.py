"""The numba and numpy kernels must agree."""
import numpy as np
import pytest

from covtest import CovarianceModel, _accel, kernels

MODELS = [
    CovarianceModel.exponential(2.0, 0.5),
    CovarianceModel.squared_exponential(1.5, 2.0),
    CovarianceModel.tabulated([0.0, 0.5, 1.0, 3.0], [1.0, 0.6, 0.2, -0.1]),
    CovarianceModel.tabulated([0.0], [1.0]),
]


@pytest.mark.parametrize("model", MODELS, ids=lambda m: m.kind.value)
def test_rho_values_agree(model):
    tau = np.linspace(-4.0, 4.0, 161)
    args = model.kernel_args()
    np.testing.assert_allclose(kernels.rho_values_nb(*args, tau), kernels.rho_values_np(*args, tau), rtol=1e-14, atol=0)


@pytest.mark.parametrize("model", MODELS, ids=lambda m: m.kind.value)
def test_psi_simpson_agree(model):
    taus = np.linspace(0.0, 2.5, 11)
    args = model.kernel_args()
    a = kernels.psi_simpson_nb(*args, 2.0, taus, 200)
    b = kernels.psi_simpson_np(*args, 2.0, taus, 200)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-15)


def test_correlogram_batch_agree(rng):
    X = rng.standard_normal((5, 60))
    a = kernels.correlogram_batch_nb(X, 50, 10, 0.1, 5.0)
    b = kernels.correlogram_batch_np(X, 50, 10, 0.1, 5.0)
    np.testing.assert_allclose(a, b, rtol=1e-12)


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0])
def test_lp_trapezoid_agree(rng, p):
    dev = rng.standard_normal((4, 21))
    np.testing.assert_allclose(kernels.lp_trapezoid_nb(dev, 0.1, p), kernels.lp_trapezoid_np(dev, 0.1, p), rtol=1e-13)


def test_simpson_weights_integrate_cubics_exactly():
    w = kernels.simpson_weights(6, 0.5)
    x = np.linspace(0.0, 3.0, 7)
    assert w @ (x**3 - 2 * x) == pytest.approx(3.0**4 / 4 - 9.0, rel=1e-14)


def test_dispatch_matches_flag():
    expected = kernels.correlogram_batch_nb if _accel.USE_NUMBA else kernels.correlogram_batch_np
    assert kernels.correlogram_batch is expected
