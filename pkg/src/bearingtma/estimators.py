"""Trajectory reconstruction from bearings only.

Both estimators solve the pseudo-linear form of the bearing constraint.
A target at ``(x, y)`` lies on the bearing line through the observer iff

    (x - x_obs) * cos(b) - (y - y_obs) * sin(b) = 0,

which is linear in the target coordinates. Expanding ``x(t)`` and ``y(t)``
in a polynomial basis makes each observation one linear equation in the
coefficients. No ``tan(b)`` appears, so every bearing direction is handled
the same way.

N-Polynomials fits a basis of chosen family and degree. N-Bearings is the
classical uniform-motion fit, i.e. the same system at degree 1. An optional
Gauss-Newton pass then minimizes the true angular residuals, removing most
of the pseudo-linear bias at high noise.
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np
from scipy import linalg

from . import kernels
from .errors import (
    ConfigError,
    DegenerateGeometryError,
    InsufficientDataError,
    UnobservableGeometryError,
)
from .kinematics import WorldPoint, WorldVector
from .polybasis import MAX_DEGREE, BasisKind, PolyBasis, map_time
from .sensing import wrap_angle

log = logging.getLogger(__name__)

NPOLY = "npoly"
NBEARINGS = "nbearings"

_MIN_PRED_RANGE = 1e-6
_MAX_HALVINGS = 30


@dataclass(frozen=True)
class EstimatorConfig:
    method: str = NPOLY
    kind: BasisKind = BasisKind.CHEBYSHEV1
    degree: int = 2
    refine: bool = False
    refine_max_iters: int = 20
    refine_tol: float = 1e-10
    cond_limit: float = 1e12
    label: Optional[str] = None

    def __post_init__(self):
        if self.method not in (NPOLY, NBEARINGS):
            raise ConfigError("method", f"must be {NPOLY!r} or {NBEARINGS!r}, got {self.method!r}")
        try:
            object.__setattr__(self, "kind", BasisKind.parse(self.kind))
        except ValueError as exc:
            raise ConfigError("basis", str(exc)) from None
        if self.method == NBEARINGS:
            object.__setattr__(self, "degree", 1)
        if int(self.degree) != self.degree or not 0 <= self.degree <= MAX_DEGREE:
            raise ConfigError("degree", f"must be an integer in [0, {MAX_DEGREE}], got {self.degree}")
        object.__setattr__(self, "degree", int(self.degree))
        if self.refine_max_iters < 1:
            raise ConfigError("refine_max_iters", "must be >= 1")
        if not self.refine_tol > 0:
            raise ConfigError("refine_tol", "must be > 0")
        if not self.cond_limit >= 1:
            raise ConfigError("cond_limit", "must be >= 1")

    @property
    def name(self):
        """Label used in reports and file names."""
        if self.label:
            return self.label
        if self.method == NBEARINGS:
            base = "nbearings"
        else:
            base = f"npoly-{self.kind.value}-d{self.degree}"
        return base + ("-gn" if self.refine else "")


@dataclass(frozen=True)
class Diagnostics:
    condition_number: float
    residual_rms: float
    per_coordinate_stderr: Tuple[float, float]
    angular_rms: float
    rank: int


@dataclass(frozen=True, eq=False)
class TrajectoryEstimate:
    """Fitted coefficients for x(t) and y(t) plus fit diagnostics.

    ``covariance`` is over the stacked vector ``(coeffs_x, coeffs_y)``.
    """

    basis: PolyBasis
    coeffs_x: np.ndarray
    coeffs_y: np.ndarray
    diagnostics: Diagnostics
    covariance: np.ndarray
    method: str = NPOLY
    refined: bool = False
    converged: bool = True
    iterations: int = 0

    @property
    def theta(self):
        return np.concatenate([self.coeffs_x, self.coeffs_y])

    def track(self, t, extrapolate=False):
        """Positions and velocities at times ``t``, each shape ``(len(t), 2)``."""
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        phi = self.basis.matrix(t, extrapolate=extrapolate)
        dphi = self.basis.deriv_matrix(t, extrapolate=extrapolate) * self.basis.dtau_dt
        xy = np.column_stack([phi @ self.coeffs_x, phi @ self.coeffs_y])
        vxy = np.column_stack([dphi @ self.coeffs_x, dphi @ self.coeffs_y])
        return xy, vxy

    def coordinate_stderr(self, t, extrapolate=False):
        """Standard error of x and y at times ``t``, shape ``(len(t), 2)``."""
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        phi = self.basis.matrix(t, extrapolate=extrapolate)
        p = self.basis.size
        cxx = self.covariance[:p, :p]
        cyy = self.covariance[p:, p:]
        vx = np.einsum("ij,jk,ik->i", phi, cxx, phi)
        vy = np.einsum("ij,jk,ik->i", phi, cyy, phi)
        return np.sqrt(np.column_stack([np.maximum(vx, 0.0), np.maximum(vy, 0.0)]))

    def position_stderr(self, t, extrapolate=False):
        se = self.coordinate_stderr(t, extrapolate=extrapolate)
        return np.hypot(se[:, 0], se[:, 1])


def predict(estimate, t, extrapolate=False):
    """Position and velocity of the fitted trajectory at scalar time ``t``."""
    xy, vxy = estimate.track([t], extrapolate=extrapolate)
    return WorldPoint(float(xy[0, 0]), float(xy[0, 1])), WorldVector(float(vxy[0, 0]), float(vxy[0, 1]))


def series_basis(series, kind, degree):
    """Basis over the span of the observation times."""
    return PolyBasis(kind, degree, float(series.t[0]), float(series.t[-1]))


def design_row(obs, basis):
    """One pseudo-linear equation ``(row, rhs)`` for a single observation."""
    tau = np.array([map_time(obs.t, basis)])
    a, rhs = kernels.design_system(
        basis.kind.code, basis.degree, tau,
        np.array([obs.beta]), np.array([obs.observer.x]), np.array([obs.observer.y]),
    )
    return a[0], float(rhs[0])


def design_matrix(series, basis):
    """Stacked pseudo-linear system ``(A, rhs)`` for the whole series."""
    tau = np.atleast_1d(map_time(series.t, basis))
    return kernels.design_system(basis.kind.code, basis.degree, tau, series.beta, series.obs_x, series.obs_y)


def _check_size(series, degree):
    n = len(series)
    need = 2 * (degree + 1)
    if n < need:
        raise InsufficientDataError(f"{n} observations, degree {degree} needs at least {need}")


def _cov_from_r(r, perm, scale2):
    p = r.shape[0]
    rinv = linalg.solve_triangular(r, np.eye(p))
    cov_perm = scale2 * (rinv @ rinv.T)
    cov = np.empty_like(cov_perm)
    cov[np.ix_(perm, perm)] = cov_perm
    return cov


def _angular_objective(beta, pred, weight):
    r = wrap_angle(beta - pred)
    return float(weight * np.dot(r, r)), r


def _summarize(basis, coeffs_x, coeffs_y, cov, series, cond, resid_rms, rank):
    est = TrajectoryEstimate(basis, coeffs_x, coeffs_y, None, cov)
    se = est.coordinate_stderr(series.t)
    per_coord = tuple(float(v) for v in np.sqrt(np.mean(se * se, axis=0)))
    phi = basis.matrix(series.t)
    pred, _, _ = kernels.bearing_model(phi, coeffs_x, coeffs_y, series.obs_x, series.obs_y)
    ang = wrap_angle(series.beta - pred)
    return Diagnostics(
        condition_number=float(cond),
        residual_rms=float(resid_rms),
        per_coordinate_stderr=per_coord,
        angular_rms=float(np.sqrt(np.mean(ang * ang))),
        rank=int(rank),
    )


def solve_pseudolinear(series, cfg):
    """Least-squares fit of the pseudo-linear bearing system.

    Uses QR with column pivoting. Raises UnobservableGeometryError if the
    design matrix is rank deficient or its condition number exceeds
    ``cfg.cond_limit``, and InsufficientDataError when ``N < 2(d+1)``.
    """
    _check_size(series, cfg.degree)
    basis = series_basis(series, cfg.kind, cfg.degree)
    a, rhs = design_matrix(series, basis)
    n, m = a.shape
    q, r, perm = linalg.qr(a, mode="economic", pivoting=True)
    sv = linalg.svdvals(r)
    cond = np.inf if sv[-1] <= sv[0] * np.finfo(float).eps * n else sv[0] / sv[-1]
    if not cond <= cfg.cond_limit:
        raise UnobservableGeometryError(
            f"design matrix condition number {cond:.3g} exceeds limit {cfg.cond_limit:.3g}",
            condition_number=float(cond),
        )
    theta = np.empty(m)
    theta[perm] = linalg.solve_triangular(r, q.T @ rhs)
    resid = a @ theta - rhs
    ssr = float(resid @ resid)
    dof = max(n - m, 1)
    cov = _cov_from_r(r, perm, ssr / dof)
    p = basis.size
    cx, cy = theta[:p].copy(), theta[p:].copy()
    diag = _summarize(basis, cx, cy, cov, series, cond, np.sqrt(ssr / n), m)
    return TrajectoryEstimate(basis, cx, cy, diag, cov, method=cfg.method)


def angular_residuals(series, estimate):
    """Wrapped bearing residuals ``beta - predicted`` in radians."""
    phi = estimate.basis.matrix(series.t)
    pred, _, _ = kernels.bearing_model(phi, estimate.coeffs_x, estimate.coeffs_y, series.obs_x, series.obs_y)
    return wrap_angle(series.beta - pred)


def bearing_jacobian(series, basis, theta):
    """Predicted bearings and their analytic Jacobian w.r.t. stacked coefficients."""
    p = basis.size
    phi = basis.matrix(series.t)
    pred, jac, _ = kernels.bearing_model(phi, theta[:p], theta[p:], series.obs_x, series.obs_y)
    return pred, jac


def refine_gauss_newton(series, init, cfg):
    """Gauss-Newton on the weighted angular residuals, started from ``init``.

    Steps are halved (at most 30 times) until the objective does not
    increase, so the returned estimate is never worse than ``init``.
    Iteration stops when the largest predicted bearing change of a step is
    below ``cfg.refine_tol`` radians, or after ``cfg.refine_max_iters``
    iterations; in the latter case the best iterate comes back with
    ``converged=False``.
    """
    basis = init.basis
    p = basis.size
    phi = basis.matrix(series.t)
    ox, oy, beta = series.obs_x, series.obs_y, series.beta
    weight = 1.0 / series.sigma**2 if series.sigma > 0 else 1.0

    theta = init.theta
    pred, jac, min_r = kernels.bearing_model(phi, theta[:p], theta[p:], ox, oy)
    if min_r < _MIN_PRED_RANGE:
        raise DegenerateGeometryError("predicted target coincides with the observer")
    obj, res = _angular_objective(beta, pred, weight)
    converged = False
    iters = 0
    for iters in range(1, cfg.refine_max_iters + 1):
        step = linalg.lstsq(jac, res, lapack_driver="gelsy")[0]
        if not np.all(np.isfinite(step)):
            break
        change = float(np.max(np.abs(jac @ step)))
        if change < cfg.refine_tol:
            converged = True
            break
        lam = 1.0
        accepted = False
        for _ in range(_MAX_HALVINGS + 1):
            trial = theta + lam * step
            t_pred, t_jac, t_min_r = kernels.bearing_model(phi, trial[:p], trial[p:], ox, oy)
            if t_min_r >= _MIN_PRED_RANGE:
                t_obj, t_res = _angular_objective(beta, t_pred, weight)
                if np.isfinite(t_obj) and t_obj <= obj:
                    accepted = True
                    break
            lam *= 0.5
        if not accepted:
            break
        theta, pred, jac, obj, res = trial, t_pred, t_jac, t_obj, t_res
        if lam * change < cfg.refine_tol:
            converged = True
            break
    if not converged:
        log.debug("Gauss-Newton refinement stopped after %d iterations without converging", iters)

    n = len(series)
    if series.sigma > 0:
        scale2 = series.sigma**2
    else:
        scale2 = float(res @ res) / max(n - 2 * p, 1)
    q, r, perm = linalg.qr(jac, mode="economic", pivoting=True)
    if abs(r[-1, -1]) > np.finfo(float).eps * abs(r[0, 0]) * n:
        cov = _cov_from_r(r, perm, scale2)
    else:
        cov = init.covariance
    cx, cy = theta[:p].copy(), theta[p:].copy()
    a, rhs = design_matrix(series, basis)
    pl_resid = a @ theta - rhs
    diag = _summarize(
        basis, cx, cy, cov, series, init.diagnostics.condition_number,
        np.sqrt(np.mean(pl_resid**2)), init.diagnostics.rank,
    )
    return TrajectoryEstimate(
        basis, cx, cy, diag, cov, method=init.method, refined=True,
        converged=converged, iterations=iters,
    )


def estimate_n_bearings(series):
    """Classical N-Bearings fit: uniform rectilinear target motion."""
    return solve_pseudolinear(series, EstimatorConfig(method=NBEARINGS, kind=BasisKind.CHEBYSHEV1, degree=1))


def estimate(series, cfg):
    """Run the method described by ``cfg``, including refinement if requested."""
    if cfg.method == NBEARINGS:
        est = estimate_n_bearings(series)
        cfg = replace(cfg, kind=BasisKind.CHEBYSHEV1)
    else:
        est = solve_pseudolinear(series, cfg)
    if cfg.refine:
        est = refine_gauss_newton(series, est, cfg)
    return est
