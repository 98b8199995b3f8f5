"""Shared closed-form oracles and small numerical helpers for the suite."""

from __future__ import annotations

import math

import numpy as np
import pytest


def grim_reaper_exact(y):
    """alpha = 1 profile: z = -log(cos y), domain (-pi/2, pi/2)."""
    return -np.log(np.cos(y))


def catenary_exact(y):
    """alpha = 2 profile normalized to z(0) = 0: z = cosh(y) - 1."""
    return np.cosh(y) - 1.0


def parabola_exact(y):
    """alpha = 3 profile: z = y^2 / 2."""
    return y * y / 2.0


def halfcircle_exact(y):
    """alpha = 0 limit profile shifted to z(0) = 0: z = 1 - sqrt(1 - y^2)."""
    return 1.0 - np.sqrt(1.0 - y * y)


CLOSED_FORMS = {
    1.0: (grim_reaper_exact, math.pi / 2.0),
    2.0: (catenary_exact, math.inf),
    3.0: (parabola_exact, math.inf),
    0.0: (halfcircle_exact, 1.0),
}


def rk4_fixed(rhs, t0, t1, y0, steps):
    """Plain fixed-step RK4, independent of any adaptive integrator."""
    t = t0
    y = np.asarray(y0, dtype=float).copy()
    h = (t1 - t0) / steps
    for _ in range(steps):
        k1 = np.asarray(rhs(t, y))
        k2 = np.asarray(rhs(t + h / 2.0, y + h / 2.0 * k1))
        k3 = np.asarray(rhs(t + h / 2.0, y + h / 2.0 * k2))
        k4 = np.asarray(rhs(t + h, y + h * k3))
        y = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += h
    return y


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260809)
