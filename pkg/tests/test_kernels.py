import numpy as np
import pytest

from bearingtma import _kernels_py, kernels

from .conftest import BACKENDS


def _inputs(m=57, degree=5, seed=3):
    rng = np.random.default_rng(seed)
    tau = np.sort(rng.uniform(-1, 1, m))
    tau[0], tau[-1] = -1.0, 1.0
    beta = rng.uniform(-np.pi, np.pi, m)
    ox = rng.uniform(-1e4, 1e4, m)
    oy = rng.uniform(-1e4, 1e4, m)
    return tau, beta, ox, oy


@pytest.mark.parametrize("kind", [0, 1, 2])
@pytest.mark.parametrize("degree", [0, 1, 4, 12])
def test_backends_agree(kind, degree):
    tau, beta, ox, oy = _inputs(degree=degree)
    ref = _kernels_py
    for impl in BACKENDS:
        np.testing.assert_allclose(impl.basis_matrix(kind, degree, tau), ref.basis_matrix(kind, degree, tau),
                                   rtol=1e-13, atol=1e-13)
        np.testing.assert_allclose(impl.basis_deriv_matrix(kind, degree, tau),
                                   ref.basis_deriv_matrix(kind, degree, tau), rtol=1e-12, atol=1e-10)
        a, rhs = impl.design_system(kind, degree, tau, beta, ox, oy)
        a_ref, rhs_ref = ref.design_system(kind, degree, tau, beta, ox, oy)
        np.testing.assert_allclose(a, a_ref, rtol=1e-13, atol=1e-13)
        np.testing.assert_allclose(rhs, rhs_ref, rtol=1e-13, atol=1e-9)


@pytest.mark.parametrize("degree", [0, 2, 6])
def test_bearing_model_agrees(degree):
    tau, _, ox, oy = _inputs(degree=degree)
    rng = np.random.default_rng(11)
    phi = _kernels_py.basis_matrix(2, degree, tau)
    cx = rng.normal(0, 5000, degree + 1)
    cy = rng.normal(0, 5000, degree + 1)
    pred_ref, jac_ref, r_ref = _kernels_py.bearing_model(phi, cx, cy, ox, oy)
    for impl in BACKENDS:
        pred, jac, r = impl.bearing_model(phi, cx, cy, ox, oy)
        np.testing.assert_allclose(pred, pred_ref, rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(jac, jac_ref, rtol=1e-9, atol=1e-15)
        assert r == pytest.approx(r_ref, rel=1e-12)


def test_read_only_inputs(backend):
    tau, beta, ox, oy = _inputs()
    for arr in (tau, beta, ox, oy):
        arr.setflags(write=False)
    a, rhs = backend.design_system(0, 3, tau, beta, ox, oy)
    assert a.shape == (tau.shape[0], 8)


def test_backend_switch():
    original = kernels.BACKEND
    assert original in kernels.available_backends()
    try:
        for name in kernels.available_backends():
            kernels.set_backend(name)
            assert kernels.BACKEND == name
            a, _ = kernels.design_system(0, 2, np.array([0.5]), np.array([0.3]), np.array([1.0]), np.array([2.0]))
            assert a.shape == (1, 6)
        with pytest.raises(ValueError):
            kernels.set_backend("fortran")
    finally:
        kernels.set_backend(original)
