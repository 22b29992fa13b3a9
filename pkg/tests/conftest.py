import math
from dataclasses import dataclass

import numpy as np
import pytest

from bearingtma import _kernels_py
from bearingtma.kinematics import LegSequence, Scenario, UniformlyAccelerated

try:
    from bearingtma import _kernels as _kernels_cy
except ImportError:  # pragma: no cover - exercised only without a compiler
    _kernels_cy = None

BACKENDS = [_kernels_py] + ([_kernels_cy] if _kernels_cy is not None else [])


@pytest.fixture(params=BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def backend(request):
    return request.param


@dataclass(frozen=True)
class PolyTarget:
    """Target whose coordinates are monomial polynomials in t (coefficients low to high)."""

    cx: tuple
    cy: tuple

    def positions(self, t):
        t = np.asarray(t, dtype=np.float64)
        return np.stack([np.polynomial.polynomial.polyval(t, self.cx),
                         np.polynomial.polynomial.polyval(t, self.cy)], axis=-1)

    def velocities(self, t):
        t = np.asarray(t, dtype=np.float64)
        dx = np.polynomial.polynomial.polyder(self.cx)
        dy = np.polynomial.polynomial.polyder(self.cy)
        return np.stack([np.polynomial.polynomial.polyval(t, dx),
                         np.polynomial.polynomial.polyval(t, dy)], axis=-1)


def dogleg(t_end, speed=8.0, course1=45.0, course2=135.0, start=(0.0, 0.0)):
    half = t_end / 2.0
    return LegSequence.from_courses(
        start, 0.0, [(math.radians(course1), speed, half), (math.radians(course2), speed, half)]
    )


def zigzag(t_end, legs=4, speed=8.0):
    d = t_end / legs
    return LegSequence.from_courses(
        (0.0, 0.0), 0.0,
        [(math.radians(45.0 if i % 2 == 0 else 135.0), speed, d) for i in range(legs)],
    )


def poly_target(degree, rng, t_end):
    """Random degree-``degree`` target roughly 3-8 km from the origin over [0, t_end]."""
    cx = [rng.uniform(-3000, 3000)]
    cy = [rng.uniform(4000, 8000)]
    for k in range(1, degree + 1):
        scale = 5.0 / t_end ** (k - 1)
        cx.append(rng.uniform(-scale, scale))
        cy.append(rng.uniform(-scale, scale))
    return PolyTarget(tuple(cx), tuple(cy))


def accel_scenario(seed=1, sigma_deg=0.5, t_end=1200.0, dt=10.0, observer=None, r0=8000.0):
    return Scenario(
        target=UniformlyAccelerated((0.0, r0), (-4.0, 1.0), (0.004, -0.002)),
        observer=observer or zigzag(t_end),
        t_start=0.0,
        t_end=t_end,
        dt=dt,
        bearing_sigma=math.radians(sigma_deg),
        seed=seed,
        name="accel",
    )


# criterion number -> (title, passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {num}. {title}: {detail}")
