"""Scenario files and method specifications.

Scenario files are INI-style with sections ``[scenario]``, ``[observer]``,
``[target]``, ``[sensing]`` and ``[estimation]``. Angles are degrees in
files and on the command line and radians everywhere else. See the
bundled files in ``bearingtma/scenarios`` for every supported key.
"""
import configparser
import hashlib
import math
from importlib import resources
from pathlib import Path

from .errors import ConfigError
from .estimators import NBEARINGS, NPOLY, EstimatorConfig
from .kinematics import (
    RANGE_CLASSES,
    Circulation,
    LegSequence,
    Parabola,
    Scenario,
    UniformLinear,
    UniformlyAccelerated,
)
from .polybasis import BasisKind

BUNDLED = ("figure1_accel_big", "figure2_accel_small", "figure3_parabola_average")
TARGET_MODELS = ("uniform", "accelerated", "parabola", "circulation")


def bundled_path(name):
    """Filesystem path of a bundled scenario (``.cfg`` optional)."""
    stem = name[:-4] if name.endswith(".cfg") else name
    ref = resources.files("bearingtma") / "scenarios" / f"{stem}.cfg"
    if not ref.is_file():
        raise ConfigError("scenario", f"no bundled scenario named {name!r}")
    return Path(str(ref))


def resolve_path(path_or_name):
    p = Path(path_or_name)
    if p.is_file():
        return p
    return bundled_path(str(path_or_name))


def file_digest(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def read_config(path):
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError("file", f"cannot parse {path}: {exc}") from None
    return cp


def _get(cp, section, key, conv=float, default=None, required=True):
    if cp.has_option(section, key):
        raw = cp.get(section, key).strip()
        try:
            return conv(raw)
        except ValueError:
            raise ConfigError(f"{section}.{key}", f"invalid value {raw!r}") from None
    if default is not None or not required:
        return default
    raise ConfigError(f"{section}.{key}", "missing required key")


def _bool(raw):
    low = raw.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(raw)


def _parse_legs(raw):
    legs = []
    for chunk in raw.split(","):
        parts = chunk.strip().split(":")
        if len(parts) != 3:
            raise ValueError(chunk)
        course, speed, duration = (float(v) for v in parts)
        if not duration > 0:
            raise ValueError(chunk)
        legs.append((math.radians(course), speed, duration))
    return legs


def _target_model(cp, start, t_start):
    sec = "target"
    kind = _get(cp, sec, "model", str, default="accelerated")
    if kind not in TARGET_MODELS:
        raise ConfigError("target.model", f"must be one of {', '.join(TARGET_MODELS)}, got {kind!r}")
    origin = (0.0, 0.0)
    if kind == "uniform":
        build = lambda p0: UniformLinear(p0, (_get(cp, sec, "vx"), _get(cp, sec, "vy")))
    elif kind == "accelerated":
        build = lambda p0: UniformlyAccelerated(
            p0, (_get(cp, sec, "vx"), _get(cp, sec, "vy")),
            (_get(cp, sec, "ax"), _get(cp, sec, "ay")),
        )
    elif kind == "parabola":
        course = math.radians(_get(cp, sec, "course_deg"))
        build = lambda p0: Parabola(
            p0, (math.sin(course), math.cos(course)),
            _get(cp, sec, "speed_along"), _get(cp, sec, "curvature"),
        )
    else:
        radius = _get(cp, sec, "radius")
        if not radius > 0:
            raise ConfigError("target.radius", f"must be > 0, got {radius}")
        phase0 = math.radians(_get(cp, sec, "phase0_deg", default=0.0))
        rate = math.radians(_get(cp, sec, "angular_rate_deg"))
        # center chosen so the target starts at the origin at t=0
        build = lambda c: Circulation(
            (c[0] - radius * math.sin(phase0), c[1] - radius * math.cos(phase0)), radius, rate, phase0,
        )
    # all models are affine in their anchor point: shift so the target is at `start` at t_start
    probe = build(origin).positions(t_start)
    return build((start[0] - probe[0], start[1] - probe[1])), kind


def build_scenario(cp, overrides=None):
    """Scenario from a parsed config; ``overrides`` may set
    ``initial_range``, ``sigma_deg``, ``n_obs`` or ``seed``."""
    ov = dict(overrides or {})
    for sec in ("scenario", "observer", "target", "sensing"):
        if not cp.has_section(sec):
            raise ConfigError(sec, "missing section")
    t_start = _get(cp, "scenario", "t_start", default=0.0)
    t_end = _get(cp, "scenario", "t_end")
    dt = _get(cp, "scenario", "dt")
    if "n_obs" in ov:
        n_obs = int(ov["n_obs"])
        if n_obs < 2:
            raise ConfigError("n_obs", f"must be >= 2, got {n_obs}")
        dt = (t_end - t_start) / (n_obs - 1)
    if not dt > 0:
        raise ConfigError("dt", f"must be > 0, got {dt}")
    seed = int(ov.get("seed", _get(cp, "scenario", "seed", int, default=0)))
    range_class = _get(cp, "scenario", "initial_range_class", str, required=False)
    if range_class is not None and range_class not in RANGE_CLASSES:
        raise ConfigError(
            "scenario.initial_range_class", f"must be one of {sorted(RANGE_CLASSES)}, got {range_class!r}"
        )

    ox = _get(cp, "observer", "x0", default=0.0)
    oy = _get(cp, "observer", "y0", default=0.0)
    legs = _get(cp, "observer", "legs", _parse_legs)
    observer = LegSequence.from_courses((ox, oy), t_start, legs)
    if observer.t_end < t_end - 1e-9:
        raise ConfigError("observer.legs", f"legs end at {observer.t_end}, before t_end={t_end}")

    if "initial_range" in ov or not (cp.has_option("target", "x0") and cp.has_option("target", "y0")):
        rng = ov.get("initial_range", _get(cp, "target", "initial_range", required=False))
        if rng is None:
            if range_class is None:
                raise ConfigError("target.initial_range", "needs initial_range, x0/y0 or a range class")
            rng = RANGE_CLASSES[range_class]
        rng = float(rng)
        if not rng > 0:
            raise ConfigError("target.initial_range", f"must be > 0, got {rng}")
        brg = math.radians(_get(cp, "target", "initial_bearing_deg", default=0.0))
        start = (ox + rng * math.sin(brg), oy + rng * math.cos(brg))
    else:
        start = (_get(cp, "target", "x0"), _get(cp, "target", "y0"))
    target, kind = _target_model(cp, start, t_start)

    sigma_deg = float(ov.get("sigma_deg", _get(cp, "sensing", "sigma_deg", default=0.5)))
    if not sigma_deg >= 0:
        raise ConfigError("sensing.sigma_deg", f"must be >= 0, got {sigma_deg}")
    return Scenario(
        target=target,
        observer=observer,
        t_start=t_start,
        t_end=t_end,
        dt=dt,
        bearing_sigma=math.radians(sigma_deg),
        seed=seed,
        initial_range_class=range_class,
        name=_get(cp, "scenario", "name", str, default="scenario"),
        metadata={"target_model": kind, "sigma_deg": sigma_deg},
    )


def load_scenario(path_or_name, **overrides):
    return build_scenario(read_config(resolve_path(path_or_name)), overrides)


def default_methods(cp):
    """N-Bearings plus N-Polynomials configured from ``[estimation]``."""
    sec = "estimation"
    if not cp.has_section(sec):
        return [EstimatorConfig(method=NBEARINGS), EstimatorConfig(method=NPOLY)]
    try:
        kind = BasisKind.parse(_get(cp, sec, "basis", str, default="cheb1"))
    except ValueError as exc:
        raise ConfigError("estimation.basis", str(exc)) from None
    npoly = EstimatorConfig(
        method=NPOLY,
        kind=kind,
        degree=_get(cp, sec, "degree", int, default=2),
        refine=_get(cp, sec, "refine", _bool, default=False),
    )
    return [EstimatorConfig(method=NBEARINGS), npoly]


def parse_method(spec):
    """Parse ``name=npoly,basis=cheb1,degree=2,refine=1`` into a config."""
    fields = {}
    for item in spec.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise ConfigError("method", f"expected key=value, got {item!r}")
        k, v = (s.strip() for s in item.split("=", 1))
        fields[k] = v
    unknown = set(fields) - {"name", "basis", "degree", "refine", "label"}
    if unknown:
        raise ConfigError("method", f"unknown keys {sorted(unknown)}")
    kwargs = {"method": fields.get("name", NPOLY)}
    if "basis" in fields:
        try:
            kwargs["kind"] = BasisKind.parse(fields["basis"])
        except ValueError as exc:
            raise ConfigError("basis", str(exc)) from None
    if "degree" in fields:
        try:
            kwargs["degree"] = int(fields["degree"])
        except ValueError:
            raise ConfigError("degree", f"must be an integer, got {fields['degree']!r}") from None
    if "refine" in fields:
        try:
            kwargs["refine"] = _bool(fields["refine"])
        except ValueError:
            raise ConfigError("refine", f"must be a boolean, got {fields['refine']!r}") from None
    if "label" in fields:
        kwargs["label"] = fields["label"]
    return EstimatorConfig(**kwargs)
