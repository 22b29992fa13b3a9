"""Pure numpy implementations of the hot kernels.

Used when the compiled ``_kernels`` extension is unavailable, and as the
reference the compiled version is tested against. Kind codes: 0 Chebyshev
first kind, 1 Chebyshev second kind, 2 Legendre.
"""
import numpy as np


def basis_matrix(kind, degree, tau):
    tau = np.ascontiguousarray(tau, dtype=np.float64)
    out = np.empty((tau.shape[0], degree + 1))
    out[:, 0] = 1.0
    if degree == 0:
        return out
    out[:, 1] = 2.0 * tau if kind == 1 else tau
    for n in range(1, degree):
        if kind == 2:
            out[:, n + 1] = ((2 * n + 1) * tau * out[:, n] - n * out[:, n - 1]) / (n + 1)
        else:
            out[:, n + 1] = 2.0 * tau * out[:, n] - out[:, n - 1]
    return out


def basis_deriv_matrix(kind, degree, tau):
    # differentiated three-term recurrence, exact at the endpoints
    tau = np.ascontiguousarray(tau, dtype=np.float64)
    val = basis_matrix(kind, degree, tau)
    out = np.zeros_like(val)
    if degree == 0:
        return out
    out[:, 1] = 2.0 if kind == 1 else 1.0
    for n in range(1, degree):
        if kind == 2:
            out[:, n + 1] = (
                (2 * n + 1) * (val[:, n] + tau * out[:, n]) - n * out[:, n - 1]
            ) / (n + 1)
        else:
            out[:, n + 1] = 2.0 * val[:, n] + 2.0 * tau * out[:, n] - out[:, n - 1]
    return out


def design_system(kind, degree, tau, beta, obs_x, obs_y):
    phi = basis_matrix(kind, degree, tau)
    c = np.cos(beta)
    s = np.sin(beta)
    a = np.hstack([phi * c[:, None], -phi * s[:, None]])
    rhs = obs_x * c - obs_y * s
    return a, rhs


def bearing_model(phi, coeffs_x, coeffs_y, obs_x, obs_y):
    """Predicted bearings, their Jacobian w.r.t. (coeffs_x, coeffs_y), min range."""
    dx = phi @ coeffs_x - obs_x
    dy = phi @ coeffs_y - obs_y
    r2 = dx * dx + dy * dy
    pred = np.arctan2(dx, dy)
    jac = np.hstack([phi * (dy / r2)[:, None], phi * (-dx / r2)[:, None]])
    return pred, jac, float(np.sqrt(r2.min()))
