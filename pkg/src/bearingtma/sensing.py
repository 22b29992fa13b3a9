"""Bearing geometry, angle wrapping and noisy observation generation.

Bearings follow the navigation convention: clockwise from North, so the
unit vector toward the target is ``(sin b, cos b)`` in (East, North).
Measurement noise is zero-mean Gaussian, independent across samples.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometryError, DomainError, ShapeError
from .kinematics import WorldPoint, sample_times

TWO_PI = 2.0 * math.pi
_MIN_RANGE = 1e-9


def wrap_angle(a):
    """Reduce angle(s) into (-pi, pi]. Values already in range pass through unchanged."""
    arr = np.asarray(a, dtype=np.float64)
    inside = (arr > -math.pi) & (arr <= math.pi)
    red = np.mod(arr + math.pi, TWO_PI) - math.pi
    red = np.where(red <= -math.pi, math.pi, red)
    out = np.where(inside, arr, red)
    return float(out) if out.ndim == 0 else out


def true_bearing(observer, target):
    """Bearing from ``observer`` to ``target`` (points or ``(..., 2)`` arrays)."""
    obs = np.asarray(observer, dtype=np.float64)
    tgt = np.asarray(target, dtype=np.float64)
    d = tgt - obs
    if np.any(np.hypot(d[..., 0], d[..., 1]) <= _MIN_RANGE):
        raise DegenerateGeometryError("observer and target coincide")
    b = wrap_angle(np.arctan2(d[..., 0], d[..., 1]))
    return b


@dataclass(frozen=True)
class BearingObservation:
    t: float
    observer: WorldPoint
    beta: float
    sigma: float

    def __post_init__(self):
        object.__setattr__(self, "observer", WorldPoint(float(self.observer[0]), float(self.observer[1])).check())
        if not -math.pi < self.beta <= math.pi:
            raise DomainError(f"beta must lie in (-pi, pi], got {self.beta}")
        if not self.sigma >= 0:
            raise DomainError(f"sigma must be >= 0, got {self.sigma}")


@dataclass(frozen=True, eq=False)
class ObservationSeries:
    """Bearings with the exact observer positions they were taken from.

    Holds column arrays; indexing yields :class:`BearingObservation`.
    Bearings are wrapped into (-pi, pi] on construction. No target truth
    is stored here.
    """

    t: np.ndarray
    obs_x: np.ndarray
    obs_y: np.ndarray
    beta: np.ndarray
    sigma: float

    def __post_init__(self):
        cols = [np.array(c, dtype=np.float64).reshape(-1) for c in (self.t, self.obs_x, self.obs_y, self.beta)]
        if len({c.shape[0] for c in cols}) != 1:
            raise ShapeError("observation columns have different lengths")
        t, ox, oy, beta = cols
        if t.shape[0] < 1:
            raise ShapeError("observation series is empty")
        if not all(np.all(np.isfinite(c)) for c in cols):
            raise DomainError("observation series contains non-finite values")
        if np.any(np.diff(t) <= 0):
            raise DomainError("observation times must be strictly increasing")
        sigma = np.unique(np.asarray(self.sigma, dtype=np.float64).reshape(-1))
        if sigma.shape[0] != 1:
            raise DomainError("all observations in a series must share one sigma")
        if not sigma[0] >= 0:
            raise DomainError(f"sigma must be >= 0, got {sigma[0]}")
        beta = wrap_angle(beta)
        for c in (t, ox, oy, beta):
            c.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "obs_x", ox)
        object.__setattr__(self, "obs_y", oy)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "sigma", float(sigma[0]))

    @classmethod
    def from_observations(cls, observations):
        obs = list(observations)
        return cls(
            t=[o.t for o in obs],
            obs_x=[o.observer.x for o in obs],
            obs_y=[o.observer.y for o in obs],
            beta=[o.beta for o in obs],
            sigma=[o.sigma for o in obs],
        )

    def __len__(self):
        return self.t.shape[0]

    def __getitem__(self, i):
        return BearingObservation(
            float(self.t[i]),
            WorldPoint(float(self.obs_x[i]), float(self.obs_y[i])),
            float(self.beta[i]),
            self.sigma,
        )

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @property
    def observer_xy(self):
        return np.column_stack([self.obs_x, self.obs_y])


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """Target truth on the observation grid; for scoring only."""

    t: np.ndarray
    xy: np.ndarray
    vxy: np.ndarray
    observer_xy: np.ndarray


def run_rng(master_seed, run_index):
    """Independent generator for run ``run_index`` of a master seed.

    Counter-based: the stream depends only on ``(master_seed, run_index)``,
    so results do not depend on execution order or thread count.
    """
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(run_index),))
    return np.random.Generator(np.random.PCG64(ss))


def observe(scenario, rng=None):
    """Sample the scenario: returns ``(ObservationSeries, GroundTruth)``.

    ``rng`` defaults to ``run_rng(scenario.seed, 0)``.
    """
    if rng is None:
        rng = run_rng(scenario.seed, 0)
    t = sample_times(scenario)
    obs_xy = scenario.observer.positions(t)
    tgt_xy = scenario.target.positions(t)
    d = tgt_xy - obs_xy
    rng_dist = np.hypot(d[:, 0], d[:, 1])
    bad = np.flatnonzero(rng_dist <= _MIN_RANGE)
    if bad.size:
        raise DegenerateGeometryError(f"observer and target coincide at t={t[bad[0]]}", t=float(t[bad[0]]))
    beta = np.arctan2(d[:, 0], d[:, 1])
    noise = rng.standard_normal(t.shape[0])
    if scenario.bearing_sigma > 0:
        beta = beta + scenario.bearing_sigma * noise
    series = ObservationSeries(t, obs_xy[:, 0], obs_xy[:, 1], beta, scenario.bearing_sigma)
    truth = GroundTruth(t, tgt_xy, scenario.target.velocities(t), obs_xy)
    return series, truth
