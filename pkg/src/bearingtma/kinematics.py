"""Ground-truth motion models and scenario assembly.

Conventions: x East, y North, meters, seconds, radians. Every model is
referenced to absolute time, i.e. ``p0`` is the position at ``t = 0``.
Models evaluate on scalars or arrays; ``positions``/``velocities`` return
``(..., 2)`` arrays and :func:`position`/:func:`velocity` return typed
points for scalar times.
"""
import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Tuple, Union

import numpy as np

from .errors import ConfigError, DomainError

RANGE_CLASSES = {"small": 5000.0, "average": 15000.0, "big": 30000.0}

_JOIN_TOL = 1e-9


class WorldPoint(NamedTuple):
    x: float
    y: float

    def check(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise DomainError(f"non-finite point {self}")
        return self


class WorldVector(NamedTuple):
    vx: float
    vy: float

    def check(self):
        if not (math.isfinite(self.vx) and math.isfinite(self.vy)):
            raise DomainError(f"non-finite vector {self}")
        return self


def _pt(p):
    return WorldPoint(float(p[0]), float(p[1])).check()


def _vec(v):
    return WorldVector(float(v[0]), float(v[1])).check()


def _stack(x, y):
    return np.stack(np.broadcast_arrays(x, y), axis=-1)


@dataclass(frozen=True)
class UniformLinear:
    p0: WorldPoint
    v: WorldVector

    def __post_init__(self):
        object.__setattr__(self, "p0", _pt(self.p0))
        object.__setattr__(self, "v", _vec(self.v))

    def positions(self, t):
        t = np.asarray(t, dtype=np.float64)
        return _stack(self.p0.x + self.v.vx * t, self.p0.y + self.v.vy * t)

    def velocities(self, t):
        t = np.asarray(t, dtype=np.float64)
        return _stack(np.full_like(t, self.v.vx), np.full_like(t, self.v.vy))


@dataclass(frozen=True)
class UniformlyAccelerated:
    p0: WorldPoint
    v0: WorldVector
    a: Tuple[float, float]

    def __post_init__(self):
        object.__setattr__(self, "p0", _pt(self.p0))
        object.__setattr__(self, "v0", _vec(self.v0))
        object.__setattr__(self, "a", tuple(_vec(self.a)))

    def positions(self, t):
        t = np.asarray(t, dtype=np.float64)
        ax, ay = self.a
        return _stack(
            self.p0.x + self.v0.vx * t + 0.5 * ax * t * t,
            self.p0.y + self.v0.vy * t + 0.5 * ay * t * t,
        )

    def velocities(self, t):
        t = np.asarray(t, dtype=np.float64)
        ax, ay = self.a
        return _stack(self.v0.vx + ax * t, self.v0.vy + ay * t)


@dataclass(frozen=True)
class Parabola:
    """Path ``y' = curvature * x'**2`` in a frame whose x' axis is ``along``.

    The along-axis coordinate advances at the constant rate ``speed_along``.
    """

    p0: WorldPoint
    along: WorldVector
    speed_along: float
    curvature: float

    def __post_init__(self):
        object.__setattr__(self, "p0", _pt(self.p0))
        object.__setattr__(self, "along", _vec(self.along))
        if abs(math.hypot(*self.along) - 1.0) > 1e-9:
            raise DomainError(f"along must be a unit vector, got {self.along}")
        if not (math.isfinite(self.speed_along) and math.isfinite(self.curvature)):
            raise DomainError("speed_along and curvature must be finite")

    def _to_world(self, s, q):
        ux, uy = self.along
        # (ux, uy) is the x' axis; x' rotated +90 deg counterclockwise is y'
        return _stack(self.p0.x + s * ux - q * uy, self.p0.y + s * uy + q * ux)

    def positions(self, t):
        s = self.speed_along * np.asarray(t, dtype=np.float64)
        return self._to_world(s, self.curvature * s * s)

    def velocities(self, t):
        s = self.speed_along * np.asarray(t, dtype=np.float64)
        ds = self.speed_along
        dq = 2.0 * self.curvature * s * ds
        ux, uy = self.along
        return _stack(ds * ux - dq * uy, ds * uy + dq * ux)


@dataclass(frozen=True)
class Circulation:
    """Constant-rate turn; the target starts at ``center + radius*(sin, cos)(phase0)``."""

    center: WorldPoint
    radius: float
    angular_rate: float
    phase0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "center", _pt(self.center))
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise DomainError(f"radius must be > 0, got {self.radius}")

    def positions(self, t):
        ang = self.phase0 + self.angular_rate * np.asarray(t, dtype=np.float64)
        return _stack(
            self.center.x + self.radius * np.sin(ang),
            self.center.y + self.radius * np.cos(ang),
        )

    def velocities(self, t):
        ang = self.phase0 + self.angular_rate * np.asarray(t, dtype=np.float64)
        w = self.radius * self.angular_rate
        return _stack(w * np.cos(ang), -w * np.sin(ang))


@dataclass(frozen=True)
class Leg:
    t_begin: float
    t_end: float
    motion: UniformLinear


@dataclass(frozen=True)
class LegSequence:
    """Piecewise uniform motion; position must be continuous at the joins.

    At a join the velocity of the later leg is reported.
    """

    legs: Tuple[Leg, ...]

    def __post_init__(self):
        legs = tuple(self.legs)
        object.__setattr__(self, "legs", legs)
        if not legs:
            raise DomainError("leg sequence needs at least one leg")
        for leg in legs:
            if not leg.t_end > leg.t_begin:
                raise DomainError(f"leg must have t_end > t_begin, got {leg}")
        for a, b in zip(legs, legs[1:]):
            if abs(b.t_begin - a.t_end) > _JOIN_TOL * max(1.0, abs(a.t_end)):
                raise DomainError(f"legs not contiguous at t={a.t_end}")
            jump = np.hypot(*(a.motion.positions(a.t_end) - b.motion.positions(b.t_begin)))
            if jump > _JOIN_TOL * max(1.0, float(np.abs(a.motion.positions(a.t_end)).max())):
                raise DomainError(f"position jump of {jump} m at leg join t={a.t_end}")

    @classmethod
    def from_courses(cls, start, t_start, legs):
        """Build from a start point and ``(course_rad, speed, duration)`` triples.

        Course is clockwise from North.
        """
        out = []
        p = np.array(start, dtype=np.float64)
        t = float(t_start)
        for course, speed, duration in legs:
            v = np.array([speed * math.sin(course), speed * math.cos(course)])
            motion = UniformLinear(WorldPoint(*(p - v * t)), WorldVector(*v))
            out.append(Leg(t, t + duration, motion))
            p = motion.positions(t + duration)
            t = t + duration
        return cls(tuple(out))

    @property
    def t_begin(self):
        return self.legs[0].t_begin

    @property
    def t_end(self):
        return self.legs[-1].t_end

    def _dispatch(self, t, attr):
        t = np.asarray(t, dtype=np.float64)
        tol = _JOIN_TOL * max(1.0, abs(self.t_end))
        if np.any(t < self.t_begin - tol) or np.any(t > self.t_end + tol):
            raise DomainError(f"time outside leg span [{self.t_begin}, {self.t_end}]")
        ends = np.array([leg.t_end for leg in self.legs[:-1]])
        idx = np.searchsorted(ends, t, side="right")
        out = np.empty(t.shape + (2,))
        for i, leg in enumerate(self.legs):
            mask = idx == i
            if np.any(mask):
                out[mask] = getattr(leg.motion, attr)(t[mask])
        return out

    def positions(self, t):
        return self._dispatch(t, "positions")

    def velocities(self, t):
        return self._dispatch(t, "velocities")


TrajectoryModel = Union[UniformLinear, UniformlyAccelerated, Parabola, Circulation, LegSequence]


def position(model, t):
    """Position of ``model`` at scalar time ``t``."""
    if not math.isfinite(t):
        raise DomainError(f"time must be finite, got {t}")
    return _pt(model.positions(float(t)))


def velocity(model, t):
    """Velocity of ``model`` at scalar time ``t`` (analytic derivative)."""
    if not math.isfinite(t):
        raise DomainError(f"time must be finite, got {t}")
    return _vec(model.velocities(float(t)))


def is_single_leg(model):
    return isinstance(model, UniformLinear) or (
        isinstance(model, LegSequence) and len(model.legs) == 1
    )


@dataclass(frozen=True)
class Scenario:
    """Target and observer motion, the sampling grid and the sensor noise."""

    target: TrajectoryModel
    observer: TrajectoryModel
    t_start: float
    t_end: float
    dt: float
    bearing_sigma: float
    seed: int = 0
    initial_range_class: Optional[str] = None
    name: str = "scenario"
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ConfigError("dt", f"must be > 0, got {self.dt}")
        if not (math.isfinite(self.t_start) and math.isfinite(self.t_end)) or not self.t_end > self.t_start:
            raise ConfigError("t_end", f"must be greater than t_start ({self.t_start}), got {self.t_end}")
        if not (math.isfinite(self.bearing_sigma) and self.bearing_sigma >= 0):
            raise ConfigError("sigma", f"must be >= 0, got {self.bearing_sigma}")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed", "must be an unsigned 64-bit integer")
        object.__setattr__(self, "seed", int(self.seed))
        if self.initial_range_class is not None and self.initial_range_class not in RANGE_CLASSES:
            raise ConfigError(
                "initial_range_class",
                f"must be one of {sorted(RANGE_CLASSES)}, got {self.initial_range_class!r}",
            )
        if isinstance(self.observer, LegSequence):
            if self.t_start < self.observer.t_begin or self.t_end > self.observer.t_end + 1e-9:
                raise ConfigError("observer", "legs do not cover [t_start, t_end]")

    @property
    def n_obs(self):
        return len(sample_times(self))

    def validate(self, max_degree=0):
        """Check the grid supports ``max_degree`` and warn on a non-maneuvering observer."""
        n = self.n_obs
        need = 2 * (max_degree + 1)
        if n < need:
            raise ConfigError("dt", f"grid gives {n} observations, degree {max_degree} needs >= {need}")
        if is_single_leg(self.observer):
            warnings.warn(
                "observer moves on a single uniform leg; bearings-only geometry "
                "is unobservable for uniformly moving targets",
                stacklevel=2,
            )
        return self

    def replace(self, **changes):
        from dataclasses import replace

        return replace(self, **changes)


def sample_times(scenario):
    """Uniform grid ``t_start + i*dt`` not exceeding ``t_end``."""
    span = scenario.t_end - scenario.t_start
    n = int(math.floor(span / scenario.dt * (1 + 1e-12) + 1e-9)) + 1
    return scenario.t_start + scenario.dt * np.arange(n, dtype=np.float64)
