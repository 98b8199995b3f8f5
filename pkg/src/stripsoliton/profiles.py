"""One-dimensional soliton profiles and the grim-reaper family.

The cylindrical solitons are generated by a planar curve whose turning
angle phi satisfies

    y' = cos(phi),  z' = sin(phi),  phi' = cos(phi)^alpha,

with apex conditions y(0) = z(0) = phi(0) = 0.  Integration uses phi as
the independent variable (dy/dphi = cos^(1-alpha), dz/dphi =
sin * cos^(-alpha), ds/dphi = cos^(-alpha)), which removes the infinite
arc-length tail near phi = pi/2 and makes the maximal half-width of the
graph domain a plain quadrature,

    d(alpha) = integral_0^(pi/2) cos(phi)^(1-alpha) dphi,

finite exactly when alpha < 2 (integrand ~ t^(1-alpha) at t = pi/2-phi).
The tilted/scaled two-variable family built on a base profile w is

    w_theta(x, y) = cos(theta)^-(alpha+1) * w(cos(theta)^alpha * y)
                    + tan(theta) * x + a,

defined on the strip |y| < d(alpha)/cos(theta)^alpha.  The rotational
bowl profile b(r) solves

    b''/(1+b'^2)^(3/2) + b'/(r sqrt(1+b'^2)) = (1+b'^2)^(-alpha/2),

normalized to b(0) = 0, seeded by a series through the r = 0 coordinate
singularity.

All objects here are immutable after construction and safe to share.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import solve_ivp

from .errors import DomainError, ProfileError
from .serialize import write_csv

PHI_STOP_DEFAULT = 15.0 / 16.0 * (math.pi / 2.0)
DEFAULT_TOL = 1e-11
BOWL_SEED_RADIUS = 1e-3


@dataclass(frozen=True)
class Alpha:
    """Soliton exponent, dimensionless and positive.

    The value 0 is the constant-mean-curvature limit and is only
    admitted with ``oracle_mode=True`` (used by tests that compare
    against the half-circle profile).
    """

    value: float
    oracle_mode: bool = False

    def __post_init__(self):
        v = float(self.value)
        if not math.isfinite(v) or v < 0.0:
            raise ValueError(f"alpha must be a finite nonnegative real, got {self.value}")
        if v == 0.0 and not self.oracle_mode:
            raise ValueError("alpha = 0 is a limit case; construct Alpha(0.0, oracle_mode=True)")
        object.__setattr__(self, "value", v)


def as_alpha(alpha) -> Alpha:
    """Coerce a float into Alpha; pass Alpha through unchanged."""
    if isinstance(alpha, Alpha):
        return alpha
    return Alpha(float(alpha))


@dataclass(frozen=True)
class ProfilePoint:
    s: float
    y: float
    z: float
    phi: float


class PlanarProfile:
    """Dense-output solution z(y) of the planar profile system.

    Only y >= 0 is integrated; evaluation mirrors through the even
    symmetry z(-y) = z(y).  Queries beyond the covered range raise
    DomainError unless ``tail=True``, in which case the profile is
    continued by its tangent at the last computed point (a lower bound,
    by convexity; used by barrier construction only).
    """

    def __init__(self, alpha: Alpha, dense, phi_nodes, tolerance, truncated, notice):
        self.alpha = alpha
        self.tolerance = float(tolerance)
        self.truncated = bool(truncated)
        self.notice = notice
        self._dense = dense
        self.phi_max = float(phi_nodes[-1])
        y_end, z_end, s_end = (float(v) for v in dense(self.phi_max))
        self.y_max = y_end
        self.z_max = z_end
        self.s_max = s_end
        states = dense(phi_nodes)
        self.points = [
            ProfilePoint(s=float(states[2, k]), y=float(states[0, k]),
                         z=float(states[1, k]), phi=float(phi_nodes[k]))
            for k in range(len(phi_nodes))
        ]

    # -- evaluation ----------------------------------------------------

    def _phi_of_abs_y(self, ay):
        """Invert the monotone map phi -> y by vectorized bisection."""
        lo = np.zeros_like(ay)
        hi = np.full_like(ay, self.phi_max)
        for _ in range(56):
            mid = 0.5 * (lo + hi)
            above = self._dense(mid)[0] > ay
            hi = np.where(above, mid, hi)
            lo = np.where(above, lo, mid)
        return np.where(ay == 0.0, 0.0, 0.5 * (lo + hi))

    def _prepare(self, y, tail):
        arr = np.asarray(y, dtype=float)
        flat = np.atleast_1d(arr).ravel()
        ay = np.abs(flat)
        inside = ay <= self.y_max * (1.0 + 1e-12)
        if not tail and not bool(np.all(inside)):
            worst = float(np.max(ay))
            raise DomainError(
                f"query |y| = {worst:.6g} beyond covered range {self.y_max:.6g} "
                f"(phi_max = {self.phi_max:.6g}); re-integrate with larger phi_stop "
                f"or evaluate with tail=True"
            )
        return arr, flat, ay, inside

    @staticmethod
    def _restore(vals, arr):
        vals = np.asarray(vals, dtype=float).reshape(arr.shape)
        return float(vals) if arr.ndim == 0 else vals

    def z(self, y, tail: bool = False):
        """Height z(y) on the covered range (tangent tail if requested)."""
        arr, flat, ay, inside = self._prepare(y, tail)
        phi = self._phi_of_abs_y(np.minimum(ay, self.y_max))
        vals = np.asarray(self._dense(phi)[1])
        if tail:
            slope = math.tan(self.phi_max)
            vals = np.where(inside, vals, self.z_max + slope * (ay - self.y_max))
        return self._restore(vals, arr)

    def dz(self, y, tail: bool = False):
        """Slope z'(y); odd in y."""
        arr, flat, ay, inside = self._prepare(y, tail)
        phi = self._phi_of_abs_y(np.minimum(ay, self.y_max))
        vals = np.tan(phi)
        if tail:
            vals = np.where(inside, vals, math.tan(self.phi_max))
        return self._restore(vals * np.sign(flat), arr)

    def phi_of_y(self, y):
        """Turning angle at horizontal coordinate y (odd in y)."""
        arr, flat, ay, _ = self._prepare(y, tail=False)
        phi = self._phi_of_abs_y(ay) * np.sign(flat)
        return self._restore(phi, arr)

    def second_derivative(self, y):
        """z''(y) via the curvature identity z'' = (1+z'^2)^((3-alpha)/2)."""
        dz = np.asarray(self.dz(y), dtype=float)
        vals = (1.0 + dz * dz) ** ((3.0 - self.alpha.value) / 2.0)
        return vals if vals.ndim else float(vals)

    def graph_residual(self, y):
        """Defect of the one-variable graph equation at y; ~0 by construction."""
        dz = np.asarray(self.dz(y), dtype=float)
        zpp = self.second_derivative(y)
        vals = zpp * (1.0 + dz * dz) ** ((self.alpha.value - 3.0) / 2.0) - 1.0
        return vals if vals.ndim else float(vals)

    def to_csv(self, path) -> None:
        write_csv(path, ["s", "y", "z", "phi"],
                  [(p.s, p.y, p.z, p.phi) for p in self.points])


def integrate_profile(alpha, phi_stop: float = PHI_STOP_DEFAULT,
                      tol: float = DEFAULT_TOL) -> PlanarProfile:
    """Integrate the planar profile system up to turning angle phi_stop.

    Adaptive RK45 with dense output in the phi parameterization.  Step
    collapse before reaching phi_stop (possible for large alpha with
    phi_stop pushed at pi/2) is not an error: the profile is returned
    truncated at the reached angle, with a notice recording it.
    """
    a = as_alpha(alpha)
    if not 0.0 < phi_stop < math.pi / 2.0:
        raise ValueError(f"phi_stop must lie in (0, pi/2), got {phi_stop}")
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    av = a.value

    def rhs(phi, _state):
        c = np.cos(phi)
        k = c ** (-av)  # may overflow to inf near pi/2; forces step rejection
        return (c * k, np.sin(phi) * k, k)

    with np.errstate(over="ignore", invalid="ignore"):
        sol = solve_ivp(rhs, (0.0, phi_stop), (0.0, 0.0, 0.0), method="RK45",
                        rtol=tol, atol=0.01 * tol, dense_output=True)
    if sol.t.size < 2 or sol.t[-1] <= 0.0:
        raise ProfileError(f"profile integration made no progress for alpha={av}")
    truncated = sol.status < 0 or sol.t[-1] < phi_stop * (1.0 - 1e-12)
    notice = None
    if truncated:
        notice = (f"integration truncated at phi = {sol.t[-1]:.12g} "
                  f"(requested {phi_stop:.12g}); step size underflow")
    return PlanarProfile(a, sol.sol, sol.t, tol, truncated, notice)


def profile_covering(alpha, y_target: float, tol: float = DEFAULT_TOL,
                     phi_stop: float = PHI_STOP_DEFAULT, max_retries: int = 6) -> PlanarProfile:
    """Profile whose covered range reaches y_target, pushing phi_stop as needed.

    Stops early if y_target is at or beyond the maximal half-width (the
    caller then relies on tail evaluation or surfaces a width error).
    """
    prof = integrate_profile(alpha, phi_stop=phi_stop, tol=tol)
    d = halfwidth(alpha)
    target = y_target if math.isinf(d) else min(y_target, d * (1.0 - 1e-9))
    tries = 0
    while prof.y_max < target and not prof.truncated and tries < max_retries:
        phi_stop = math.pi / 2.0 - (math.pi / 2.0 - phi_stop) / 4.0
        prof = integrate_profile(alpha, phi_stop=phi_stop, tol=tol)
        tries += 1
    return prof


# -- maximal half-width ------------------------------------------------

_GL_NODES, _GL_WEIGHTS = leggauss(32)


def _panel_integral(f, a, b):
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    return half * float(np.sum(_GL_WEIGHTS * f(mid + half * _GL_NODES)))


@lru_cache(maxsize=256)
def _halfwidth_value(av: float) -> float:
    # Substitution t = pi/2 - phi: d = int_0^(pi/2) sin(t)^(1-av) dt.
    # Divergence decided by the endpoint exponent, not numerical blow-up.
    if 1.0 - av <= -1.0:
        return math.inf
    e = 1.0 - av
    t0 = 1e-4
    # Series head on [0, t0]: sin(t)^e = t^e (1 + c2 t^2 + c4 t^4 + ...)
    c2 = -e / 6.0
    c4 = e * (3.0 - 5.0 * av) / 360.0  # from (sin t / t)^e expansion
    head = (t0 ** (2.0 - av) / (2.0 - av)
            + c2 * t0 ** (4.0 - av) / (4.0 - av)
            + c4 * t0 ** (6.0 - av) / (6.0 - av))

    def f(t):
        return np.sin(t) ** e

    total = head
    left = t0
    while left < math.pi / 2.0:
        right = min(2.0 * left, math.pi / 2.0)
        total += _panel_integral(f, left, right)
        left = right
    return total


def halfwidth(alpha, tol: float = 1e-12) -> float:
    """Maximal half-width d(alpha) of the profile graph domain.

    Graded geometric panels against the endpoint singularity deliver
    absolute error well below 1e-12; ``tol`` only sanity-checks the
    request.  Returns math.inf when the endpoint exponent test shows
    divergence (alpha >= 2).
    """
    a = as_alpha(alpha)
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    return _halfwidth_value(a.value)


def reaper_domain_halfwidth(alpha, theta: float) -> float:
    """Half-width of the strip carrying the tilted reaper: d(alpha)/cos(theta)^alpha."""
    a = as_alpha(alpha)
    if not abs(theta) < math.pi / 2.0:
        raise ValueError(f"tilt must satisfy |theta| < pi/2, got {theta}")
    d = halfwidth(a)
    if math.isinf(d):
        return math.inf
    return d / math.cos(theta) ** a.value


# -- tilted family -----------------------------------------------------

@dataclass(frozen=True)
class GrimReaper:
    """Member of the tilted/scaled soliton family over a base profile.

    Evaluates cos(theta)^-(alpha+1) * w(cos(theta)^alpha y)
    + tan(theta) x + a on the strip |y| < d(alpha)/cos(theta)^alpha.
    """

    alpha: Alpha
    theta: float
    a: float
    base: PlanarProfile

    def __post_init__(self):
        if not abs(self.theta) < math.pi / 2.0:
            raise ValueError(f"tilt must satisfy |theta| < pi/2, got {self.theta}")
        if self.base.alpha != self.alpha:
            raise ValueError("base profile was integrated for a different alpha")

    @property
    def domain_halfwidth(self) -> float:
        return reaper_domain_halfwidth(self.alpha, self.theta)

    def _check_domain(self, y):
        hw = self.domain_halfwidth
        if math.isinf(hw):
            return
        bad = np.abs(np.asarray(y, dtype=float)) >= hw
        if bool(np.any(bad)):
            raise DomainError(
                f"y outside reaper strip of half-width {hw:.12g} "
                f"(alpha={self.alpha.value:g}, theta={self.theta:g})"
            )

    def __call__(self, x, y, tail: bool = False):
        self._check_domain(y)
        av = self.alpha.value
        c = math.cos(self.theta)
        xi = c ** av * np.asarray(y, dtype=float)
        vals = (c ** (-(av + 1.0)) * self.base.z(xi, tail=tail)
                + math.tan(self.theta) * np.asarray(x, dtype=float) + self.a)
        return vals if np.ndim(vals) else float(vals)

    def partials(self, x, y, tail: bool = False):
        """Exact first partials (u_x, u_y) from the defining formula."""
        self._check_domain(y)
        av = self.alpha.value
        c = math.cos(self.theta)
        xi = c ** av * np.asarray(y, dtype=float)
        ux = np.full_like(xi, math.tan(self.theta))
        uy = self.base.dz(xi, tail=tail) / c
        return ux, uy

    def pde_residual(self, x, y, step: float = 1e-4):
        """Two-variable soliton residual with exact first partials.

        u_xx = u_xy = 0 exactly; u_yy comes from a centered difference of
        the exact u_y, so the value measures how well the integrated
        profile satisfies the equation (not an algebraic identity).
        """
        av = self.alpha.value
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        ux, uy = self.partials(x, y)
        _, uy_p = self.partials(x, y + step)
        _, uy_m = self.partials(x, y - step)
        uyy = (uy_p - uy_m) / (2.0 * step)
        w2 = 1.0 + ux * ux + uy * uy
        res = np.asarray((1.0 + ux * ux) * uyy / w2 ** 1.5 - w2 ** (-av / 2.0))
        return float(res) if res.ndim == 0 else res


def grim_reaper(alpha, theta: float = 0.0, a: float = 0.0,
                base: PlanarProfile | None = None, tol: float = DEFAULT_TOL) -> GrimReaper:
    """Convenience constructor integrating the base profile when absent."""
    al = as_alpha(alpha)
    if base is None:
        base = integrate_profile(al, tol=tol)
    return GrimReaper(alpha=al, theta=theta, a=a, base=base)


def reaper_eval(g: GrimReaper, x, y, tail: bool = False):
    """Evaluate a grim reaper at (x, y); DomainError outside its strip."""
    return g(x, y, tail=tail)


# -- rotational bowl ---------------------------------------------------

class RadialProfile:
    """Bowl profile b(r) on [0, R], normalized to b(0) = 0, b'(0) = 0.

    Series zone below the seed radius, dense RK45 output above it.
    """

    def __init__(self, alpha: Alpha, dense, r_nodes, r0, c4, tolerance):
        self.alpha = alpha
        self.tolerance = float(tolerance)
        self.r0 = float(r0)
        self.c4 = float(c4)
        self._dense = dense
        self.r_max = float(r_nodes[-1])
        rs = np.concatenate(([0.0], r_nodes))
        bs = np.concatenate(([0.0], dense(r_nodes)[0]))
        ps = np.concatenate(([0.0], dense(r_nodes)[1]))
        self.samples = np.column_stack([rs, bs, ps])
        self.b_min = 0.0

    def _split(self, r):
        arr = np.asarray(r, dtype=float)
        flat = np.atleast_1d(arr).ravel()
        if bool(np.any(flat < 0.0)) or bool(np.any(flat > self.r_max * (1.0 + 1e-12))):
            raise DomainError(f"bowl profile covers [0, {self.r_max:.6g}]")
        return arr, flat, np.minimum(np.maximum(flat, self.r0), self.r_max)

    @staticmethod
    def _restore(vals, arr):
        vals = np.asarray(vals, dtype=float).reshape(arr.shape)
        return float(vals) if arr.ndim == 0 else vals

    def b(self, r):
        arr, flat, rc = self._split(r)
        series = flat * flat / 4.0 + self.c4 * flat ** 4
        vals = np.where(flat < self.r0, series, self._dense(rc)[0])
        return self._restore(vals, arr)

    def db(self, r):
        arr, flat, rc = self._split(r)
        series = flat / 2.0 + 4.0 * self.c4 * flat ** 3
        vals = np.where(flat < self.r0, series, self._dense(rc)[1])
        return self._restore(vals, arr)

    def equation_residual(self, r, step: float = 1e-5):
        """Radial equation defect with b'' from a centered difference of b'."""
        r = np.asarray(r, dtype=float)
        av = self.alpha.value
        p = self.db(r)
        bpp = (self.db(np.minimum(r + step, self.r_max)) - self.db(r - step)) / (
            np.minimum(r + step, self.r_max) - (r - step))
        w2 = 1.0 + p * p
        res = np.asarray(bpp / w2 ** 1.5 + p / (r * np.sqrt(w2)) - w2 ** (-av / 2.0))
        return float(res) if res.ndim == 0 else res

    def to_csv(self, path) -> None:
        write_csv(path, ["r", "b", "bp"], [tuple(row) for row in self.samples])


def integrate_bowl(alpha, R: float, tol: float = 1e-12) -> RadialProfile:
    """Integrate the rotational bowl profile out to radius R.

    The r = 0 coordinate singularity is bridged by the two-term series
    b = r^2/4 + c4 r^4 on [0, r0]; c4 is fixed by one Newton correction
    of the radial defect at r0 (lands at (2-alpha)/128 + O(r0^2)).
    """
    a = as_alpha(alpha)
    av = a.value
    if R <= 0.0:
        raise ValueError("R must be positive")
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    r0 = min(BOWL_SEED_RADIUS, R / 2.0)

    def seed_defect(c4):
        p = r0 / 2.0 + 4.0 * c4 * r0 ** 3
        bpp = 0.5 + 12.0 * c4 * r0 * r0
        w2 = 1.0 + p * p
        return bpp - w2 ** ((3.0 - av) / 2.0) + (p / r0) * w2

    g0 = seed_defect(0.0)
    eps = 1e-6
    c4 = -g0 * eps / (seed_defect(eps) - g0)

    def rhs(r, state):
        p = state[1]
        w2 = 1.0 + p * p
        return (p, w2 ** ((3.0 - av) / 2.0) - (p / r) * w2)

    y0 = (r0 * r0 / 4.0 + c4 * r0 ** 4, r0 / 2.0 + 4.0 * c4 * r0 ** 3)
    sol = solve_ivp(rhs, (r0, R), y0, method="RK45",
                    rtol=tol, atol=0.01 * tol, dense_output=True)
    if not sol.success:
        raise ProfileError(f"bowl integration failed for alpha={av}: {sol.message}")
    return RadialProfile(a, sol.sol, sol.t, r0, c4, tol)
