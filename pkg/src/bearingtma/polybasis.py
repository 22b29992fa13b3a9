"""Orthogonal polynomial bases on a time window.

Trajectory coordinates are expanded in Chebyshev (first or second kind) or
Legendre polynomials of a normalized time ``tau``. The observation window
``[t0, tf]`` is mapped affinely onto ``[-1, 1]``, the orthogonality
interval of all three families.

Polynomials are evaluated by forward three-term recurrence rather than
Clenshaw summation. With the degree capped at ``MAX_DEGREE`` the stability
difference is negligible and the recurrence also yields the basis matrix
the estimators need.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import kernels
from .errors import DomainError, ShapeError

MAX_DEGREE = 12

# slack for times that land on the window edge after float arithmetic
_EDGE_TOL = 1e-12


class BasisKind(Enum):
    CHEBYSHEV1 = "cheb1"
    CHEBYSHEV2 = "cheb2"
    LEGENDRE = "legendre"

    @property
    def code(self):
        return _KIND_CODES[self]

    @classmethod
    def parse(cls, value):
        """Accept a member, its value (``"cheb1"``) or its name."""
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        for kind in cls:
            if key in (kind.value, kind.name.lower()):
                return kind
        raise ValueError(
            f"unknown basis {value!r}; expected one of "
            + ", ".join(k.value for k in cls)
        )


_KIND_CODES = {BasisKind.CHEBYSHEV1: 0, BasisKind.CHEBYSHEV2: 1, BasisKind.LEGENDRE: 2}


@dataclass(frozen=True)
class PolyBasis:
    """Polynomial family, degree and the time window mapped onto [-1, 1]."""

    kind: BasisKind
    degree: int
    t0: float
    tf: float

    def __post_init__(self):
        object.__setattr__(self, "kind", BasisKind.parse(self.kind))
        if int(self.degree) != self.degree or not 0 <= self.degree <= MAX_DEGREE:
            raise DomainError(f"degree must be an integer in [0, {MAX_DEGREE}], got {self.degree}")
        object.__setattr__(self, "degree", int(self.degree))
        if not (np.isfinite(self.t0) and np.isfinite(self.tf)) or not self.tf > self.t0:
            raise DomainError(f"window must satisfy tf > t0, got [{self.t0}, {self.tf}]")

    @property
    def size(self):
        return self.degree + 1

    @property
    def span(self):
        return self.tf - self.t0

    @property
    def dtau_dt(self):
        """Chain-rule factor d(tau)/dt."""
        return 2.0 / (self.tf - self.t0)

    def matrix(self, t, extrapolate=False):
        """Basis values, shape ``(len(t), degree + 1)``."""
        tau = np.atleast_1d(map_time(t, self, extrapolate=extrapolate))
        return kernels.basis_matrix(self.kind.code, self.degree, tau)

    def deriv_matrix(self, t, extrapolate=False):
        """Basis derivatives with respect to ``tau`` (not ``t``)."""
        tau = np.atleast_1d(map_time(t, self, extrapolate=extrapolate))
        return kernels.basis_deriv_matrix(self.kind.code, self.degree, tau)


def map_time(t, basis, extrapolate=False):
    """Map time(s) ``t`` from ``[t0, tf]`` onto ``[-1, 1]``.

    Raises DomainError for times outside the window unless ``extrapolate``.
    Times within a rounding tolerance of an edge are clipped to it.
    """
    arr = np.asarray(t, dtype=np.float64)
    tol = _EDGE_TOL * max(1.0, abs(basis.t0), abs(basis.tf))
    if not extrapolate:
        if np.any(arr < basis.t0 - tol) or np.any(arr > basis.tf + tol) or np.any(np.isnan(arr)):
            raise DomainError(
                f"time outside basis window [{basis.t0}, {basis.tf}] "
                "(pass extrapolate=True to evaluate anyway)"
            )
        arr = np.clip(arr, basis.t0, basis.tf)
    tau = 2.0 * (arr - basis.t0) / (basis.tf - basis.t0) - 1.0
    if not extrapolate:
        tau = np.clip(tau, -1.0, 1.0)
    return float(tau) if tau.ndim == 0 else tau


def unmap_time(tau, basis):
    """Inverse of :func:`map_time`."""
    tau = np.asarray(tau, dtype=np.float64)
    t = basis.t0 + (tau + 1.0) * 0.5 * (basis.tf - basis.t0)
    return float(t) if t.ndim == 0 else t


def _check_index(n, tau):
    if int(n) != n or n < 0:
        raise DomainError(f"polynomial index must be a non-negative integer, got {n}")
    if not -1.0 <= tau <= 1.0:
        raise DomainError(f"tau must lie in [-1, 1], got {tau}")


def eval_basis(kind, n, tau):
    """Value of the ``n``-th polynomial of ``kind`` at scalar ``tau``."""
    kind = BasisKind.parse(kind)
    _check_index(n, tau)
    n = int(n)
    prev, cur = 1.0, (2.0 * tau if kind is BasisKind.CHEBYSHEV2 else tau)
    if n == 0:
        return prev
    for k in range(1, n):
        if kind is BasisKind.LEGENDRE:
            nxt = ((2 * k + 1) * tau * cur - k * prev) / (k + 1)
        else:
            nxt = 2.0 * tau * cur - prev
        prev, cur = cur, nxt
    return cur


def eval_basis_deriv(kind, n, tau):
    """Exact derivative d/dtau of the ``n``-th polynomial at scalar ``tau``."""
    kind = BasisKind.parse(kind)
    _check_index(n, tau)
    n = int(n)
    if n == 0:
        return 0.0
    p_prev, p_cur = 1.0, (2.0 * tau if kind is BasisKind.CHEBYSHEV2 else tau)
    d_prev, d_cur = 0.0, (2.0 if kind is BasisKind.CHEBYSHEV2 else 1.0)
    for k in range(1, n):
        if kind is BasisKind.LEGENDRE:
            p_next = ((2 * k + 1) * tau * p_cur - k * p_prev) / (k + 1)
            d_next = ((2 * k + 1) * (p_cur + tau * d_cur) - k * d_prev) / (k + 1)
        else:
            p_next = 2.0 * tau * p_cur - p_prev
            d_next = 2.0 * p_cur + 2.0 * tau * d_cur - d_prev
        p_prev, p_cur = p_cur, p_next
        d_prev, d_cur = d_cur, d_next
    return d_cur


def eval_series(basis, coeffs, t, derivative=False, extrapolate=False):
    """Evaluate ``sum_k coeffs[k] * phi_k(tau(t))``.

    With ``derivative=True`` returns the time derivative, i.e. the series of
    basis derivatives scaled by ``2 / (tf - t0)``; units of coeffs per second.
    Scalar ``t`` gives a float, array ``t`` an array.
    """
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if coeffs.ndim != 1 or coeffs.shape[0] != basis.size:
        raise ShapeError(
            f"expected {basis.size} coefficients for degree {basis.degree}, got {coeffs.shape}"
        )
    scalar = np.ndim(t) == 0
    if derivative:
        vals = basis.deriv_matrix(t, extrapolate=extrapolate) @ coeffs * basis.dtau_dt
    else:
        vals = basis.matrix(t, extrapolate=extrapolate) @ coeffs
    return float(vals[0]) if scalar else vals
