"""Damped-Newton solver for the soliton operator on rectangles and disks.

Residuals are assembled in conservative divergence form: the flux
Du/sqrt(1+|Du|^2) is differenced across faces whose transverse slope is
the average of the two flanking node-centered slopes, and the source
(1+|Du|^2)^(-alpha/2) is evaluated from centered node differences.  The
Newton matrix is assembled analytically from the expanded
non-divergence form

    (1+|Du|^2) Lap u - u_i u_j u_ij - (1+|Du|^2)^((3-alpha)/2) = 0,

row-scaled by W^-3 so it matches the divergence-form residual near a
solution.  Minimal-surface solves reuse the identical stencil with the
source switched off; a linear mode reduces everything to the plain
Laplacian (used for harmonic-extension initial guesses).  Disk rows
fall back to unequal-arm stencils at irregular nodes (grids.DiskDomain)
with one consistent residual/Jacobian pair so Newton stays reliable
there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import SolveFailure, StripSolitonError, WidthError
from .grids import DiskDomain, RectGrid, SolutionField
from .profiles import as_alpha, halfwidth


@dataclass(frozen=True)
class SolveConfig:
    """Newton controls: residual sup-norm target, damping, linear check."""

    tol: float = 1e-10
    max_iter: int = 60
    backtrack: float = 0.5
    min_step: float = 1e-10
    armijo: float = 1e-4
    linear_tol: float = 1e-8

    def __post_init__(self):
        if self.tol <= 0 or self.max_iter <= 0 or self.min_step <= 0 \
                or self.armijo <= 0 or self.linear_tol <= 0:
            raise StripSolitonError("solver tolerances must be positive")
        if not 0.0 < self.backtrack < 1.0:
            raise StripSolitonError("backtracking ratio must lie in (0, 1)")


DEFAULT_CONFIG = SolveConfig()


def _conservative_interior(u, hx, hy, av, minimal, linear=False):
    """Divergence-form residual on interior lanes of a full array.

    Returns shape (ny-2, nx-2).  Lanes whose stencil touches filler
    values (disk OUT nodes) are computed but must be masked by the
    caller.  ``linear`` collapses the operator to the 5-point Laplacian.
    """
    qn = np.zeros_like(u)
    qn[1:-1, :] = (u[2:, :] - u[:-2, :]) / (2.0 * hy)
    pn = np.zeros_like(u)
    pn[:, 1:-1] = (u[:, 2:] - u[:, :-2]) / (2.0 * hx)

    pf = (u[1:-1, 1:] - u[1:-1, :-1]) / hx
    if linear:
        fx = pf
    else:
        qf = 0.5 * (qn[1:-1, 1:] + qn[1:-1, :-1])
        fx = pf / np.sqrt(1.0 + pf * pf + qf * qf)
    divx = (fx[:, 1:] - fx[:, :-1]) / hx

    qfy = (u[1:, 1:-1] - u[:-1, 1:-1]) / hy
    if linear:
        fy = qfy
    else:
        pfy = 0.5 * (pn[1:, 1:-1] + pn[:-1, 1:-1])
        fy = qfy / np.sqrt(1.0 + pfy * pfy + qfy * qfy)
    divy = (fy[1:, :] - fy[:-1, :]) / hy

    res = divx + divy
    if not (minimal or linear):
        w2 = 1.0 + pn[1:-1, 1:-1] ** 2 + qn[1:-1, 1:-1] ** 2
        res = res - w2 ** (-av / 2.0)
    return res


def _expanded_entries(val, hx, hy, av, minimal, linear=False):
    """Analytic 9-point Newton entries from the expanded operator form.

    ``val`` maps an offset (dj, di) to the array of stencil values at
    the assembled nodes.  Each entry is scaled by W^-3 so the matrix
    matches the divergence-form residual near a solution.
    """
    inv_hx2, inv_hy2 = 1.0 / hx ** 2, 1.0 / hy ** 2
    inv_2hx, inv_2hy = 1.0 / (2.0 * hx), 1.0 / (2.0 * hy)
    inv_cross = 1.0 / (4.0 * hx * hy)

    if linear:
        shape = np.shape(val(0, 0))
        one = np.ones(shape)
        zero = np.zeros(shape)
        return {
            (0, 0): (-2.0 * inv_hx2 - 2.0 * inv_hy2) * one,
            (0, 1): inv_hx2 * one, (0, -1): inv_hx2 * one,
            (1, 0): inv_hy2 * one, (-1, 0): inv_hy2 * one,
            (1, 1): zero, (-1, -1): zero, (1, -1): zero, (-1, 1): zero,
        }

    p = (val(0, 1) - val(0, -1)) * inv_2hx
    q = (val(1, 0) - val(-1, 0)) * inv_2hy
    uc = val(0, 0)
    uxx = (val(0, 1) - 2.0 * uc + val(0, -1)) * inv_hx2
    uyy = (val(1, 0) - 2.0 * uc + val(-1, 0)) * inv_hy2
    uxy = (val(1, 1) - val(1, -1) - val(-1, 1) + val(-1, -1)) * inv_cross

    w2 = 1.0 + p * p + q * q
    A = 1.0 + q * q
    B = -2.0 * p * q
    C = 1.0 + p * p
    gp = -2.0 * q * uxy + 2.0 * p * uyy
    gq = 2.0 * q * uxx - 2.0 * p * uxy
    if not minimal:
        src = (3.0 - av) * w2 ** ((1.0 - av) / 2.0)
        gp = gp - src * p
        gq = gq - src * q
    scale = w2 ** -1.5

    return {
        (0, 0): (-2.0 * A * inv_hx2 - 2.0 * C * inv_hy2) * scale,
        (0, 1): (A * inv_hx2 + gp * inv_2hx) * scale,
        (0, -1): (A * inv_hx2 - gp * inv_2hx) * scale,
        (1, 0): (C * inv_hy2 + gq * inv_2hy) * scale,
        (-1, 0): (C * inv_hy2 - gq * inv_2hy) * scale,
        (1, 1): B * inv_cross * scale,
        (-1, -1): B * inv_cross * scale,
        (1, -1): -B * inv_cross * scale,
        (-1, 1): -B * inv_cross * scale,
    }


class _RectProblem:
    def __init__(self, grid: RectGrid, template, av, minimal, linear=False):
        self.grid = grid
        self.template = template
        self.av = av
        self.minimal = minimal
        self.linear = linear
        self.n = (grid.ny - 2) * (grid.nx - 2)

    def full(self, vec):
        u = self.template.copy()
        u[1:-1, 1:-1] = vec.reshape(self.grid.ny - 2, self.grid.nx - 2)
        return u

    def residual(self, vec):
        u = self.full(vec)
        return _conservative_interior(u, self.grid.hx, self.grid.hy,
                                      self.av, self.minimal, self.linear).ravel()

    def jacobian(self, vec):
        g = self.grid
        u = self.full(vec)
        nxi = g.nx - 2
        jj, ii = np.meshgrid(np.arange(1, g.ny - 1), np.arange(1, g.nx - 1), indexing="ij")

        def val(dj, di):
            return u[jj + dj, ii + di]

        entries = _expanded_entries(val, g.hx, g.hy, self.av, self.minimal, self.linear)
        krow = ((jj - 1) * nxi + (ii - 1)).ravel()
        rows, cols, data = [], [], []
        for (dj, di), ent in entries.items():
            jn, in_ = jj + dj, ii + di
            keep = ((jn >= 1) & (jn <= g.ny - 2) & (in_ >= 1) & (in_ <= g.nx - 2)).ravel()
            rows.append(krow[keep])
            cols.append(((jn - 1) * nxi + (in_ - 1)).ravel()[keep])
            data.append(np.asarray(ent).ravel()[keep])
        return sp.csc_matrix(
            (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.n, self.n))

    def linearized(self):
        return _RectProblem(self.grid, self.template, self.av, True, linear=True)

    def wrap(self, vec, alpha, res_norm, iters, data_fn):
        return SolutionField(self.grid, self.full(vec), alpha=alpha,
                             residual_norm=res_norm, iterations=iters, data_fn=data_fn)


class _DiskProblem:
    def __init__(self, domain: DiskDomain, boundary_values, av, minimal, linear=False):
        self.domain = domain
        self.bvals = np.asarray(boundary_values, dtype=float)
        self.av = av
        self.minimal = minimal
        self.linear = linear
        self.n = domain.n_in
        self._template = domain.fill(np.zeros(self.n), self.bvals, fill_value=0.0)
        self._reg_j = domain.in_j[domain.regular]
        self._reg_i = domain.in_i[domain.regular]
        self._reg_rows = np.nonzero(domain.regular)[0]

    def full(self, vec):
        u = self._template.copy()
        u[self.domain.in_j, self.domain.in_i] = vec
        return u

    def _ring_eval(self, row, u_box, vec, want_jac):
        d = self.domain
        j, i = int(d.in_j[row.row]), int(d.in_i[row.row])
        up = u_box[j, i]
        ends = [0.0] * 4
        for k, (dj, di) in enumerate(((0, 1), (0, -1), (1, 0), (-1, 0))):
            if row.end_unknown[k] >= 0:
                ends[k] = u_box[j + dj, i + di]
            else:
                ends[k] = self.bvals[row.end_sample[k]]
        ae, aw, an, as_ = row.arm
        ve, vw, vn, vs = ends
        dx = ae * aw * (ae + aw)
        dy = an * as_ * (an + as_)
        p = (aw * aw * ve + (ae * ae - aw * aw) * up - ae * ae * vw) / dx
        q = (as_ * as_ * vn + (an * an - as_ * as_) * up - an * an * vs) / dy
        uxx = 2.0 * (aw * ve - (ae + aw) * up + ae * vw) / dx
        uyy = 2.0 * (as_ * vn - (an + as_) * up + an * vs) / dy
        uxy = 0.0
        if row.cross_terms and not self.linear:
            for dj, di, coeff in row.cross_terms:
                uxy += coeff * u_box[j + dj, i + di]
            uxy /= d.hx * d.hy

        if self.linear:
            res = uxx + uyy
            if not want_jac:
                return res, None
            cols = {}

            def add_lin(col, v):
                if col >= 0:
                    cols[col] = cols.get(col, 0.0) + v

            add_lin(row.row, -2.0 * (ae + aw) / dx - 2.0 * (an + as_) / dy)
            add_lin(row.end_unknown[0], 2.0 * aw / dx)
            add_lin(row.end_unknown[1], 2.0 * ae / dx)
            add_lin(row.end_unknown[2], 2.0 * as_ / dy)
            add_lin(row.end_unknown[3], 2.0 * an / dy)
            return res, cols

        w2 = 1.0 + p * p + q * q
        A, B, C = 1.0 + q * q, -2.0 * p * q, 1.0 + p * p
        G = A * uxx + B * uxy + C * uyy
        if not self.minimal:
            G -= w2 ** ((3.0 - self.av) / 2.0)
        w3 = w2 ** 1.5
        res = G / w3
        if not want_jac:
            return res, None

        gp = -2.0 * q * uxy + 2.0 * p * uyy
        gq = 2.0 * q * uxx - 2.0 * p * uxy
        if not self.minimal:
            src = (3.0 - self.av) * w2 ** ((1.0 - self.av) / 2.0)
            gp -= src * p
            gq -= src * q
        cols = {}

        def add(col, dG, dp=0.0, dq=0.0):
            if col < 0:
                return
            total = (dG + gp * dp + gq * dq) / w3 - 3.0 * res * (p * dp + q * dq) / w2
            cols[col] = cols.get(col, 0.0) + total

        add(row.row, A * (-2.0 * (ae + aw) / dx) + C * (-2.0 * (an + as_) / dy),
            dp=(ae * ae - aw * aw) / dx, dq=(an * an - as_ * as_) / dy)
        add(row.end_unknown[0], A * 2.0 * aw / dx, dp=aw * aw / dx)
        add(row.end_unknown[1], A * 2.0 * ae / dx, dp=-ae * ae / dx)
        add(row.end_unknown[2], C * 2.0 * as_ / dy, dq=as_ * as_ / dy)
        add(row.end_unknown[3], C * 2.0 * an / dy, dq=-an * an / dy)
        for dj, di, coeff in row.cross_terms:
            add(int(d.col_of[j + dj, i + di]), B * coeff / (d.hx * d.hy))
        return res, cols

    def residual(self, vec):
        d = self.domain
        u = self.full(vec)
        res = np.empty(self.n)
        cons = _conservative_interior(u, d.hx, d.hy, self.av, self.minimal, self.linear)
        res[self._reg_rows] = cons[self._reg_j - 1, self._reg_i - 1]
        for row in d.ring_rows:
            res[row.row], _ = self._ring_eval(row, u, vec, want_jac=False)
        return res

    def jacobian(self, vec):
        d = self.domain
        u = self.full(vec)
        rows_acc, cols_acc, data_acc = [], [], []
        jj, ii = self._reg_j, self._reg_i

        def val(dj, di):
            return u[jj + dj, ii + di]

        entries = _expanded_entries(val, d.hx, d.hy, self.av, self.minimal, self.linear)
        for (dj, di), ent in entries.items():
            col = d.col_of[jj + dj, ii + di]
            keep = col >= 0
            rows_acc.append(self._reg_rows[keep])
            cols_acc.append(col[keep])
            data_acc.append(np.asarray(ent)[keep])

        lr, lc, ld = [], [], []
        for row in d.ring_rows:
            _, cols = self._ring_eval(row, u, vec, want_jac=True)
            for c, v in cols.items():
                lr.append(row.row)
                lc.append(c)
                ld.append(v)
        rows_acc.append(np.asarray(lr, dtype=np.int64))
        cols_acc.append(np.asarray(lc, dtype=np.int64))
        data_acc.append(np.asarray(ld, dtype=float))
        return sp.csc_matrix(
            (np.concatenate(data_acc), (np.concatenate(rows_acc), np.concatenate(cols_acc))),
            shape=(self.n, self.n))

    def linearized(self):
        return _DiskProblem(self.domain, self.bvals, self.av, True, linear=True)

    def wrap(self, vec, alpha, res_norm, iters, data_fn):
        values = self.domain.fill(vec, self.bvals, fill_value=np.nan)
        return SolutionField(self.domain, values, alpha=alpha,
                             residual_norm=res_norm, iterations=iters,
                             data_fn=data_fn, boundary_values=self.bvals)


def _newton(problem, init_vec, cfg: SolveConfig):
    u = np.asarray(init_vec, dtype=float).copy()
    res = problem.residual(u)
    norm = float(np.max(np.abs(res)))
    history = [norm]
    if not math.isfinite(norm):
        raise SolveFailure("initial residual is not finite", history)
    iters = 0
    while norm > cfg.tol:
        if iters >= cfg.max_iter:
            raise SolveFailure(
                f"Newton did not reach tol={cfg.tol:g} in {cfg.max_iter} iterations "
                f"(last residual {norm:.3e})", history)
        jac = problem.jacobian(u)
        try:
            lu = splu(jac)
        except RuntimeError as err:
            raise SolveFailure(f"sparse factorization failed: {err}", history) from err
        step = lu.solve(-res)
        if not np.all(np.isfinite(step)):
            raise SolveFailure("NaN in linear solve", history)
        check = float(np.max(np.abs(jac @ step + res)))
        if check > cfg.linear_tol * (1.0 + norm):
            raise SolveFailure(f"linear solve inaccurate: |J d + r| = {check:.3e}", history)
        lam = 1.0
        while True:
            trial = u + lam * step
            with np.errstate(over="ignore", invalid="ignore"):
                res_trial = problem.residual(trial)
            new_norm = float(np.max(np.abs(res_trial)))
            if math.isfinite(new_norm) and new_norm <= (1.0 - cfg.armijo * lam) * norm:
                break
            lam *= cfg.backtrack
            if lam < cfg.min_step:
                raise SolveFailure(
                    f"line search collapsed at residual {norm:.3e}", history)
        u, res, norm = trial, res_trial, new_norm
        history.append(norm)
        iters += 1
    return u, norm, iters, history


# -- public operations ---------------------------------------------------

def _make_problem(domain, data, alpha, minimal):
    av = 0.0 if minimal else as_alpha(alpha).value
    if isinstance(domain, RectGrid):
        return _RectProblem(domain, domain.boundary_template(data), av, minimal)
    if isinstance(domain, DiskDomain):
        return _DiskProblem(domain, domain.evaluate_data(data), av, minimal)
    raise StripSolitonError(f"unsupported domain type {type(domain).__name__}")


def harmonic_extension(domain, data) -> SolutionField:
    """Discrete harmonic extension of boundary data (generic initial guess)."""
    problem = _make_problem(domain, data, alpha=1.0, minimal=True).linearized()
    zero = np.zeros(problem.n)
    load = problem.residual(zero)
    vec = splu(problem.jacobian(zero)).solve(-load)
    return problem.wrap(vec, None, None, 0, data)


def residual_field(field: SolutionField, minimal: bool = False):
    """Nodal residual of a field; zero on boundary/filler nodes."""
    av = 0.0 if minimal else field.alpha.value
    if field.is_disk:
        problem = _DiskProblem(field.domain, field.boundary_values, av, minimal)
        vec = field.values[field.domain.in_j, field.domain.in_i]
        out = np.zeros(field.domain.status.shape)
        out[field.domain.in_j, field.domain.in_i] = problem.residual(vec)
        return out
    out = np.zeros(field.domain.shape)
    out[1:-1, 1:-1] = _conservative_interior(
        field.values, field.domain.hx, field.domain.hy, av, minimal)
    return out


def solve_dirichlet(domain, data, alpha, init=None, cfg: SolveConfig = DEFAULT_CONFIG,
                    minimal: bool = False) -> SolutionField:
    """Damped-Newton Dirichlet solve on a rectangle or disk.

    ``init`` may be a SolutionField, a full-lattice array respecting the
    boundary data, or None (harmonic extension of the data).
    """
    al = None if minimal else as_alpha(alpha)
    problem = _make_problem(domain, data, alpha, minimal)
    if init is None:
        init_vec = harmonic_extension(domain, data).interior_values()
    elif isinstance(init, SolutionField):
        init_vec = init.interior_values()
    else:
        init = np.asarray(init, dtype=float)
        if isinstance(domain, DiskDomain):
            init_vec = init[domain.in_j, domain.in_i]
        else:
            init_vec = init[1:-1, 1:-1]
    vec, norm, iters, _ = _newton(problem, np.asarray(init_vec, float).ravel(), cfg)
    return problem.wrap(vec, al, norm, iters, data)


def gradient_field(field: SolutionField):
    """Nodal |Du|: centered interior, one-sided second order on boundaries.

    Disk fields get centered differences at regular nodes and
    unequal-arm differences at ring nodes (using the stored boundary
    samples); filler nodes come back NaN.
    """
    if not field.is_disk:
        u = field.values
        g = field.domain
        ux = np.empty_like(u)
        ux[:, 1:-1] = (u[:, 2:] - u[:, :-2]) / (2.0 * g.hx)
        ux[:, 0] = (-3.0 * u[:, 0] + 4.0 * u[:, 1] - u[:, 2]) / (2.0 * g.hx)
        ux[:, -1] = (3.0 * u[:, -1] - 4.0 * u[:, -2] + u[:, -3]) / (2.0 * g.hx)
        uy = np.empty_like(u)
        uy[1:-1, :] = (u[2:, :] - u[:-2, :]) / (2.0 * g.hy)
        uy[0, :] = (-3.0 * u[0, :] + 4.0 * u[1, :] - u[2, :]) / (2.0 * g.hy)
        uy[-1, :] = (3.0 * u[-1, :] - 4.0 * u[-2, :] + u[-3, :]) / (2.0 * g.hy)
        return np.hypot(ux, uy)

    d = field.domain
    u = np.where(np.isnan(field.values), 0.0, field.values)
    out = np.full(d.status.shape, np.nan)
    jj, ii = d.in_j[d.regular], d.in_i[d.regular]
    ux = (u[jj, ii + 1] - u[jj, ii - 1]) / (2.0 * d.hx)
    uy = (u[jj + 1, ii] - u[jj - 1, ii]) / (2.0 * d.hy)
    out[jj, ii] = np.hypot(ux, uy)
    for row in d.ring_rows:
        j, i = int(d.in_j[row.row]), int(d.in_i[row.row])
        ends = [0.0] * 4
        for k, (dj, di) in enumerate(((0, 1), (0, -1), (1, 0), (-1, 0))):
            if row.end_unknown[k] >= 0:
                ends[k] = u[j + dj, i + di]
            else:
                ends[k] = field.boundary_values[row.end_sample[k]]
        ae, aw, an, as_ = row.arm
        up = u[j, i]
        px = (aw * aw * ends[0] + (ae * ae - aw * aw) * up - ae * ae * ends[1]) / (
            ae * aw * (ae + aw))
        py = (as_ * as_ * ends[2] + (an * an - as_ * as_) * up - an * an * ends[3]) / (
            an * as_ * (an + as_))
        out[j, i] = math.hypot(px, py)
    return out


def width_gate(alpha, m: float) -> float:
    """Raise WidthError unless the grim-reaper family covers a 2m strip."""
    al = as_alpha(alpha)
    d = halfwidth(al)
    if not m < d:
        raise WidthError(
            f"strip half-width m={m:g} is not below the profile half-width "
            f"d(alpha={al.value:g}) = {d:.12g}; barriers exist only for m < d",
            m=m, halfwidth=d, max_m=d)
    return d


def strip_boundary_data(f, m: float, L: float):
    """Boundary callable for a truncated strip: f(x) on the long edges,
    the corner constants f(+-L) on the truncation edges."""

    def data(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        vals = f(x)
        on_edge = np.abs(x) >= L * (1.0 - 1e-15)
        off_row = np.abs(y) < m * (1.0 - 1e-15)
        return np.where(on_edge & off_row, np.where(x > 0, f(L), f(-L)), vals)

    return data


def solve_strip(f, alpha, m: float, L: float, grid: RectGrid,
                cfg: SolveConfig = DEFAULT_CONFIG, abscissae=None) -> SolutionField:
    """Strip Dirichlet solve with convex data f on both edges.

    Boundary data is f(x) on y = +-m and the constants f(+-L) on the
    truncation edges (the same values the minimal-graph upper bound
    carries there).  The initial guess is the grim-reaper lower
    envelope; on return the field is checked to sit inside
    [envelope - eps, v0 + eps] and carries both bounds as attributes.
    """
    from .barriers import chebyshev_abscissae, lower_envelope
    from .minimal_graph import solve_minimal

    al = as_alpha(alpha)
    width_gate(al, m)
    if not (grid.L == L and grid.m == m):
        raise StripSolitonError("grid does not match the requested strip")
    data = strip_boundary_data(f, m, L)
    if abscissae is None:
        abscissae = chebyshev_abscissae(L)
    envelope = lower_envelope(f, al, m, abscissae, grid)
    init = grid.boundary_template(data)
    init[1:-1, 1:-1] = envelope.values[1:-1, 1:-1]
    field = solve_dirichlet(grid, data, al, init=init, cfg=cfg)

    v0 = solve_minimal(f, m, L, grid, cfg)
    scale = max(1.0, float(np.max(np.abs(field.boundary_data_values()))))
    eps = 10.0 * grid.h ** 2 * scale
    excess_lo = float(np.max(envelope.values - field.values))
    excess_hi = float(np.max(field.values - v0.values))
    if excess_lo > eps or excess_hi > eps:
        raise SolveFailure(
            f"sandwich violated: envelope excess {excess_lo:.3e}, "
            f"upper excess {excess_hi:.3e}, eps {eps:.3e}")
    field.envelope = envelope
    field.v0 = v0
    field.sandwich_eps = eps
    return field
