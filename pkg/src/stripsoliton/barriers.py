"""Grim-reaper barriers under convex boundary data.

A tilted reaper restricted to either strip edge is the line
tan(theta) x + intercept; it sits below a convex f on the whole edge
exactly when intercept <= -f*(tan theta), with f* the convex conjugate
f*(k) = sup_x (k x - f(x)).  The conjugate is computed by bisection on
the nondecreasing derivative f', so admissibility over the unbounded
edge is certified exactly; sampled margins on the working window are
kept as defense in depth.  The touching barrier at a boundary abscissa
x0 tilts to tan(theta) = f'(x0) and shifts so its edge trace is the
tangent line of f at x0; the pointwise maximum of touching barriers is
the lower envelope used as lower bound and Newton initial guess.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

from .errors import ConvexityError, WidthError
from .grids import RectGrid, SolutionField
from .profiles import (
    DEFAULT_TOL,
    GrimReaper,
    PlanarProfile,
    as_alpha,
    halfwidth,
    profile_covering,
)

EPS_CONV = 1e-10
ENVELOPE_ABSCISSAE = 33


@dataclass(frozen=True)
class ConvexityCertificate:
    lo: float
    hi: float
    samples: int
    min_second_derivative: float
    slope_nondecreasing: bool


class ConvexBoundaryFunction:
    """Convex boundary data with closed-form first and second derivatives.

    Restricted to a whitelisted family (const, linear, poly, cosh) so
    the convexity certificate and the conjugate stay computable.
    """

    def __init__(self, tag, fn, dfn, d2fn, params):
        self.tag = tag
        self.params = params
        self._f = fn
        self._df = dfn
        self._d2f = d2fn
        self.certificate = self.certify()

    @classmethod
    def const(cls, c: float) -> "ConvexBoundaryFunction":
        c = float(c)
        return cls("const",
                   lambda x: np.full_like(np.asarray(x, dtype=float), c),
                   lambda x: np.zeros_like(np.asarray(x, dtype=float)),
                   lambda x: np.zeros_like(np.asarray(x, dtype=float)),
                   {"value": c})

    @classmethod
    def linear(cls, slope: float, intercept: float = 0.0) -> "ConvexBoundaryFunction":
        k, b = float(slope), float(intercept)
        return cls("linear",
                   lambda x: k * np.asarray(x, dtype=float) + b,
                   lambda x: np.full_like(np.asarray(x, dtype=float), k),
                   lambda x: np.zeros_like(np.asarray(x, dtype=float)),
                   {"slope": k, "intercept": b})

    @classmethod
    def poly(cls, coeffs) -> "ConvexBoundaryFunction":
        p = Polynomial(list(coeffs))
        d1 = p.deriv()
        d2 = d1.deriv()
        return cls("poly",
                   lambda x: p(np.asarray(x, dtype=float)),
                   lambda x: d1(np.asarray(x, dtype=float)),
                   lambda x: d2(np.asarray(x, dtype=float)),
                   {"coeffs": [float(c) for c in coeffs]})

    @classmethod
    def cosh(cls, scale: float = 1.0) -> "ConvexBoundaryFunction":
        s = float(scale)
        if s <= 0.0:
            raise ConvexityError(f"cosh scale must be positive, got {scale}")
        return cls("cosh",
                   lambda x: s * np.cosh(np.asarray(x, dtype=float) / s),
                   lambda x: np.sinh(np.asarray(x, dtype=float) / s),
                   lambda x: np.cosh(np.asarray(x, dtype=float) / s) / s,
                   {"scale": s})

    def __call__(self, x):
        return self._f(x)

    def derivative(self, x):
        return self._df(x)

    def second_derivative(self, x):
        return self._d2f(x)

    def certify(self, lo: float = -8.0, hi: float = 8.0,
                samples: int = 321) -> ConvexityCertificate:
        """Sampled convexity certificate on [lo, hi]; raises when broken."""
        xs = np.linspace(lo, hi, samples)
        second = np.asarray(self.second_derivative(xs), dtype=float)
        slopes = np.asarray(self.derivative(xs), dtype=float)
        min_second = float(np.min(second))
        nondecreasing = bool(np.all(np.diff(slopes) >= -EPS_CONV))
        if min_second < -EPS_CONV or not nondecreasing:
            raise ConvexityError(
                f"{self.tag} boundary function is not convex on [{lo}, {hi}]: "
                f"min f'' = {min_second:.3e}")
        return ConvexityCertificate(lo, hi, samples, min_second, nondecreasing)

    def conjugate(self, k: float):
        """(f*(k), maximizer, bounded) with f*(k) = sup_x (k x - f(x)).

        Bisection on the nondecreasing derivative.  When k falls outside
        the closure of the range of f' the supremum is infinite and
        bounded comes back False.
        """
        k = float(k)
        lo, hi = -1.0, 1.0
        with np.errstate(over="ignore", invalid="ignore"):
            n = 0
            while float(self._df(lo)) > k:
                hi = lo
                lo *= 2.0
                n += 1
                if n > 80:
                    return math.inf, None, False
            n = 0
            while float(self._df(hi)) < k:
                lo = hi
                hi *= 2.0
                n += 1
                if n > 80:
                    return math.inf, None, False
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if float(self._df(mid)) > k:
                    hi = mid
                else:
                    lo = mid
        x_star = 0.5 * (lo + hi)
        return k * x_star - float(self._f(x_star)), x_star, True


@dataclass(frozen=True)
class BarrierCertificate:
    """Admissibility record for one reaper below f on the strip edges.

    ``margin`` is the exact conjugate-based slack -f*(k) - c of the
    boundary trace; ``sampled_margin`` is the minimum of f - trace over
    the sampled working window.  Touching is reported through the
    maximizer of the conjugate (and an interval when f is flat there).
    """

    reaper: GrimReaper
    m: float
    margin: float
    sampled_margin: float
    touch_x: float | None
    touch_interval: tuple | None
    conjugate_unbounded: bool
    eps_num: float

    @property
    def admissible(self) -> bool:
        return self.margin >= -self.eps_num

    def to_json_dict(self) -> dict:
        return {
            "theta": self.reaper.theta,
            "a": self.reaper.a,
            "alpha": self.reaper.alpha.value,
            "m": self.m,
            "margin": self.margin,
            "touch_x": self.touch_x,
        }


def boundary_trace(g: GrimReaper, m: float):
    """(slope, intercept) of the reaper restricted to either edge y = +-m.

    Identical on both edges by evenness of the base profile.
    """
    hw = g.domain_halfwidth
    if not m < hw:
        raise WidthError(
            f"edge y = {m:g} outside the reaper strip of half-width {hw:.12g}",
            m=m, halfwidth=hw, max_m=hw)
    av = g.alpha.value
    c = math.cos(g.theta)
    intercept = g.a + c ** (-(av + 1.0)) * float(g.base.z(c ** av * m, tail=True))
    return math.tan(g.theta), intercept


def is_admissible(g: GrimReaper, f: ConvexBoundaryFunction, m: float,
                  x_window=(-11.0, 11.0), samples: int = 1000) -> BarrierCertificate:
    """Certify the reaper's edge trace lies below f on the whole edge."""
    slope, intercept = boundary_trace(g, m)
    fstar, x_star, bounded = f.conjugate(slope)
    xs = np.linspace(x_window[0], x_window[1], samples)
    fx = np.asarray(f(xs), dtype=float)
    scale = max(1.0, abs(intercept), float(np.max(np.abs(fx))))
    eps_num = 1e-12 * scale
    gaps = fx - (slope * xs + intercept)
    sampled_margin = float(np.min(gaps))
    if not bounded:
        return BarrierCertificate(g, m, -math.inf, sampled_margin, None, None,
                                  True, eps_num)
    margin = -fstar - intercept
    touch_x = None
    touch_interval = None
    if abs(margin) <= eps_num:
        touch_x = float(x_star)
        near = xs[gaps <= 10.0 * eps_num]
        if near.size >= 2 and near[-1] - near[0] > (xs[1] - xs[0]) * 1.5:
            touch_interval = (float(near[0]), float(near[-1]))
    return BarrierCertificate(g, m, margin, sampled_margin, touch_x,
                              touch_interval, False, eps_num)


def touching_barrier(p, f: ConvexBoundaryFunction, alpha, m: float,
                     base: PlanarProfile | None = None,
                     tol: float = DEFAULT_TOL) -> GrimReaper:
    """Reaper whose edge trace is the tangent line of f at the abscissa of p.

    ``p`` is a boundary point (x0, +-m); by evenness the construction
    touches f at x0 on both edges simultaneously.
    """
    x0, ym = float(p[0]), float(p[1])
    if abs(abs(ym) - m) > 1e-9 * max(1.0, m):
        raise ValueError(f"touching point {p} does not lie on the edges y = +-{m:g}")
    al = as_alpha(alpha)
    av = al.value
    slope = float(f.derivative(x0))
    theta = math.atan(slope)
    c = math.cos(theta)
    d = halfwidth(al)
    if not m * c ** av < d:
        max_m = d / c ** av
        raise WidthError(
            f"no touching barrier at x0={x0:g}: width m={m:g} reaches the "
            f"profile half-width d(alpha={av:g}) = {d:.12g} "
            f"(max admissible m = {max_m:.12g} at this tilt)",
            m=m, halfwidth=d, max_m=max_m)
    if base is None:
        base = profile_covering(al, c ** av * m, tol=tol)
    w_edge = c ** (-(av + 1.0)) * float(base.z(c ** av * m, tail=True))
    a = float(f(x0)) - slope * x0 - w_edge
    return GrimReaper(alpha=al, theta=theta, a=a, base=base)


def chebyshev_abscissae(L: float, n: int = ENVELOPE_ABSCISSAE):
    """Chebyshev-spaced touching abscissae on [-L, L], ascending."""
    k = np.arange(n)
    return np.sort(L * np.cos(math.pi * (2.0 * k + 1.0) / (2.0 * n)))


def lower_envelope(f: ConvexBoundaryFunction, alpha, m: float, xs,
                   grid: RectGrid, base: PlanarProfile | None = None,
                   tol: float = DEFAULT_TOL) -> SolutionField:
    """Pointwise maximum of touching barriers on the grid.

    A valid lower bound for the strip solution and the default Newton
    initial guess.  The profile part depends on y alone, so each barrier
    costs one profile evaluation per grid row.
    """
    al = as_alpha(alpha)
    av = al.value
    if base is None:
        base = profile_covering(al, m, tol=tol)
    env = np.full(grid.shape, -np.inf)
    for x0 in np.asarray(xs, dtype=float):
        g = touching_barrier((x0, m), f, al, m, base=base, tol=tol)
        c = math.cos(g.theta)
        row = c ** (-(av + 1.0)) * base.z(c ** av * grid.y, tail=True)
        member = row[:, None] + math.tan(g.theta) * grid.x[None, :] + g.a
        np.maximum(env, member, out=env)
    return SolutionField(grid, env, alpha=al, kind="envelope")
