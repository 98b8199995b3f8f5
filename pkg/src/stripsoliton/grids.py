"""Computational domains: rectangles and disks embedded in Cartesian lattices.

Rectangles carry the strip truncation [-L, L] x [-m, m] with nodes on
the boundary lines.  Disks live on a background lattice; nodes strictly
inside the circle are unknowns, nodes on the circle carry data, and
stencil arms that would leave the disk are shortened to their circle
crossing (Shortley-Weller).  Nodes whose every grid neighbor (including
diagonals) holds a value are "regular" and use the same conservative
stencil as rectangle interiors; the remaining ring nodes get
unequal-arm rows assembled pointwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import StripSolitonError
from .serialize import write_csv

OUT, IN, ON = 0, 1, 2
SNAP_FRACTION = 1e-6  # arms shorter than this fraction of h collapse the node onto the circle

# direction order used throughout: east, west, north, south
DIRS = ((0, 1), (0, -1), (1, 0), (-1, 0))


@dataclass(frozen=True)
class RectGrid:
    """Uniform lattice on [-L, L] x [-m, m] including the boundary lines."""

    L: float
    m: float
    nx: int
    ny: int

    def __post_init__(self):
        if not (self.L > 0.0 and self.m > 0.0):
            raise StripSolitonError(f"degenerate rectangle: L={self.L}, m={self.m}")
        if self.nx < 5 or self.ny < 5:
            raise StripSolitonError(f"grid too coarse: nx={self.nx}, ny={self.ny} (need >= 5)")

    @property
    def hx(self) -> float:
        return 2.0 * self.L / (self.nx - 1)

    @property
    def hy(self) -> float:
        return 2.0 * self.m / (self.ny - 1)

    @property
    def h(self) -> float:
        return max(self.hx, self.hy)

    @cached_property
    def x(self):
        return np.linspace(-self.L, self.L, self.nx)

    @cached_property
    def y(self):
        return np.linspace(-self.m, self.m, self.ny)

    def mesh(self):
        return np.meshgrid(self.x, self.y)

    @property
    def shape(self):
        return (self.ny, self.nx)

    def boundary_template(self, data):
        """Full array with boundary values imposed exactly, zero interior.

        ``data`` is either a callable (x, y) -> value (vectorized) or a
        dict with keys bottom/top/left/right holding edge arrays.
        """
        u = np.zeros(self.shape)
        if callable(data):
            u[0, :] = data(self.x, np.full(self.nx, -self.m))
            u[-1, :] = data(self.x, np.full(self.nx, self.m))
            u[:, 0] = data(np.full(self.ny, -self.L), self.y)
            u[:, -1] = data(np.full(self.ny, self.L), self.y)
        else:
            u[0, :] = data["bottom"]
            u[-1, :] = data["top"]
            u[:, 0] = data["left"]
            u[:, -1] = data["right"]
        if not np.all(np.isfinite(u[self.boundary_mask()])):
            raise StripSolitonError("boundary data contains non-finite values")
        return u

    def boundary_mask(self):
        mask = np.zeros(self.shape, dtype=bool)
        mask[0, :] = mask[-1, :] = True
        mask[:, 0] = mask[:, -1] = True
        return mask


class _RingRow:
    """Per-node stencil data for an irregular (ring) disk node."""

    __slots__ = ("row", "arm", "end_unknown", "end_sample", "cross_terms")

    def __init__(self):
        self.row = -1
        self.arm = [0.0, 0.0, 0.0, 0.0]          # e, w, n, s lengths
        self.end_unknown = [-1, -1, -1, -1]      # unknown column or -1
        self.end_sample = [-1, -1, -1, -1]       # boundary-sample index or -1
        self.cross_terms = ()                    # ((dj, di, coeff), ...) for u_xy


class DiskDomain:
    """Closed disk on a Cartesian background lattice.

    ``xs``/``ys`` define the local box (which must extend at least one
    node beyond the circle); ``host_offset`` records where the box sits
    inside a host grid when the disk was carved out of one.
    """

    def __init__(self, center, R: float, xs, ys, host_offset=None):
        cx, cy = center
        self.center = (float(cx), float(cy))
        self.R = float(R)
        if self.R <= 0.0:
            raise StripSolitonError(f"disk radius must be positive, got {R}")
        self.xs = np.asarray(xs, dtype=float)
        self.ys = np.asarray(ys, dtype=float)
        if self.xs.size < 3 or self.ys.size < 3:
            raise StripSolitonError("disk box too small")
        self.hx = float(self.xs[1] - self.xs[0])
        self.hy = float(self.ys[1] - self.ys[0])
        self.host_offset = host_offset  # (j0, i0) into the host grid
        self._classify()
        self._build_arms()

    # -- construction ----------------------------------------------------

    @classmethod
    def standalone(cls, center, R: float, h: float) -> "DiskDomain":
        """Fresh lattice of spacing h centered on the disk center."""
        cx, cy = center
        n = int(math.ceil(R / h)) + 2
        xs = cx + h * np.arange(-n, n + 1)
        ys = cy + h * np.arange(-n, n + 1)
        return cls(center, R, xs, ys)

    @classmethod
    def on_grid(cls, grid: RectGrid, center, R: float) -> "DiskDomain":
        """Carve the disk out of a host rectangle lattice.

        The circle, plus one stencil arm in every direction, must stay
        inside the host; lifts interpolate host values on the circle.
        """
        cx, cy = center
        if (abs(cx) + R > grid.L - 0.5 * grid.hx + 1e-12 or
                abs(cy) + R > grid.m - 0.5 * grid.hy + 1e-12):
            raise StripSolitonError(
                f"disk center={center} R={R} does not fit inside the host rectangle")
        i0 = int(np.searchsorted(grid.x, cx - R - 1.5 * grid.hx))
        i1 = int(np.searchsorted(grid.x, cx + R + 1.5 * grid.hx))
        j0 = int(np.searchsorted(grid.y, cy - R - 1.5 * grid.hy))
        j1 = int(np.searchsorted(grid.y, cy + R + 1.5 * grid.hy))
        i0, j0 = max(i0, 0), max(j0, 0)
        i1, j1 = min(i1, grid.nx), min(j1, grid.ny)
        return cls(center, R, grid.x[i0:i1], grid.y[j0:j1], host_offset=(j0, i0))

    def _radius(self, x, y):
        return np.hypot(x - self.center[0], y - self.center[1])

    def _classify(self):
        xx, yy = np.meshgrid(self.xs, self.ys)
        rr = self._radius(xx, yy)
        on_tol = 1e-12 * max(1.0, self.R)
        status = np.full(rr.shape, OUT, dtype=np.int8)
        status[rr < self.R - on_tol] = IN
        status[np.abs(rr - self.R) <= on_tol] = ON
        # snap: interior nodes hugging the circle closer than SNAP_FRACTION*h
        snap = (status == IN) & (rr > self.R - SNAP_FRACTION * min(self.hx, self.hy))
        status[snap] = ON
        self.status = status
        self.xx, self.yy = xx, yy
        jj, ii = np.where(status == IN)
        self.in_j, self.in_i = jj, ii
        self.n_in = jj.size
        if self.n_in == 0:
            raise StripSolitonError(f"disk R={self.R} too small for spacing {self.hx:g}")
        self.col_of = np.full(status.shape, -1, dtype=np.int64)
        self.col_of[jj, ii] = np.arange(self.n_in)

    def _crossing(self, j, i, dj, di):
        """Circle crossing of the arm from node (j, i) in direction (dj, di)."""
        cx, cy = self.center
        x, y = self.xs[i], self.ys[j]
        if di != 0:
            s = math.sqrt(max(self.R ** 2 - (y - cy) ** 2, 0.0))
            xc = cx + s if di > 0 else cx - s
            return xc, y, abs(xc - x)
        s = math.sqrt(max(self.R ** 2 - (x - cx) ** 2, 0.0))
        yc = cy + s if dj > 0 else cy - s
        return x, yc, abs(yc - y)

    def _build_arms(self):
        ny, nx = self.status.shape
        samples = []         # (x, y) data points: ON nodes and arm crossings
        sample_index = {}

        def sample_id(key, xy):
            if key not in sample_index:
                sample_index[key] = len(samples)
                samples.append(xy)
            return sample_index[key]

        # ON nodes referenced by stencils get their own sample
        regular = np.zeros(self.n_in, dtype=bool)
        on_value_id = np.full(self.status.shape, -1, dtype=np.int64)
        jj, ii = np.where(self.status == ON)
        for j, i in zip(jj, ii):
            on_value_id[j, i] = sample_id(("on", j, i), (self.xs[i], self.ys[j]))

        rows = []
        cx, cy = self.center
        for k in range(self.n_in):
            j, i = int(self.in_j[k]), int(self.in_i[k])
            neigh_ok = True
            for dj in (-1, 0, 1):
                for di in (-1, 0, 1):
                    jn, in_ = j + dj, i + di
                    if not (0 <= jn < ny and 0 <= in_ < nx) or self.status[jn, in_] == OUT:
                        neigh_ok = False
            if neigh_ok:
                regular[k] = True
                continue
            row = _RingRow()
            row.row = k
            for d, (dj, di) in enumerate(DIRS):
                jn, in_ = j + dj, i + di
                h_axis = self.hx if di != 0 else self.hy
                inside_box = 0 <= jn < ny and 0 <= in_ < nx
                st = self.status[jn, in_] if inside_box else OUT
                if st == IN:
                    row.arm[d] = h_axis
                    row.end_unknown[d] = int(self.col_of[jn, in_])
                elif st == ON:
                    row.arm[d] = h_axis
                    row.end_sample[d] = on_value_id[jn, in_]
                else:
                    xc, yc, rho = self._crossing(j, i, dj, di)
                    rho = max(rho, SNAP_FRACTION * h_axis)
                    row.arm[d] = rho
                    row.end_sample[d] = sample_id(("x", j, i, d), (xc, yc))
            # u_xy stencil: centered when all four diagonals carry values,
            # else one-sided toward the disk center, else dropped
            def valued(jq, iq):
                return 0 <= jq < ny and 0 <= iq < nx and self.status[jq, iq] != OUT

            if all(valued(j + dj, i + di) for dj in (-1, 1) for di in (-1, 1)):
                quarter = 0.25
                row.cross_terms = ((1, 1, quarter), (1, -1, -quarter),
                                   (-1, 1, -quarter), (-1, -1, quarter))
            else:
                pref_sx = 1 if cx >= self.xs[i] else -1
                pref_sy = 1 if cy >= self.ys[j] else -1
                for sx, sy in ((pref_sx, pref_sy), (pref_sx, -pref_sy),
                               (-pref_sx, pref_sy), (-pref_sx, -pref_sy)):
                    if (valued(j, i + sx) and valued(j + sy, i)
                            and valued(j + sy, i + sx)):
                        s = float(sx * sy)
                        row.cross_terms = ((0, 0, s), (0, sx, -s),
                                           (sy, 0, -s), (sy, sx, s))
                        break
            rows.append(row)

        self.ring_rows = rows
        self.regular = regular
        self.boundary_points = np.asarray(samples, dtype=float).reshape(-1, 2)

    # -- views -------------------------------------------------------------

    @property
    def h(self) -> float:
        return max(self.hx, self.hy)

    def interior_mask(self):
        return self.status == IN

    def value_mask(self):
        return self.status != OUT

    def fill(self, interior_vec, boundary_values, fill_value=0.0):
        """Box array with unknowns, ON-node data, and fill elsewhere."""
        u = np.full(self.status.shape, fill_value)
        u[self.in_j, self.in_i] = interior_vec
        jj, ii = np.where(self.status == ON)
        for j, i in zip(jj, ii):
            # ON samples were registered first, keyed by node position
            u[j, i] = boundary_values[self._on_sample_id(j, i)]
        return u

    def _on_sample_id(self, j, i):
        # ON nodes are the leading samples in registration order
        if not hasattr(self, "_on_ids"):
            ids = {}
            jj, ii = np.where(self.status == ON)
            k = 0
            for jo, io in zip(jj, ii):
                ids[(jo, io)] = k
                k += 1
            self._on_ids = ids
        return self._on_ids[(j, i)]

    def evaluate_data(self, data_fn):
        """Data values at every boundary sample (ON nodes and crossings)."""
        if self.boundary_points.size == 0:
            return np.zeros(0)
        vals = np.asarray(data_fn(self.boundary_points[:, 0], self.boundary_points[:, 1]),
                          dtype=float)
        if not np.all(np.isfinite(vals)):
            raise StripSolitonError("disk boundary data contains non-finite values")
        return vals


class SolutionField:
    """Grid function with its domain, convergence record, and exports.

    For rectangles ``values`` covers the full lattice with boundary rows
    holding the imposed data bit-exactly.  For disks it covers the local
    box with NaN outside the closed disk.  ``residual_norm`` is None for
    non-solution fields (envelopes, iterates mid-sweep).
    """

    def __init__(self, domain, values, alpha=None, residual_norm=None,
                 iterations=0, data_fn=None, boundary_values=None, kind="solution"):
        self.domain = domain
        self.values = values
        self.alpha = alpha
        self.residual_norm = residual_norm
        self.iterations = iterations
        self.data_fn = data_fn
        self.boundary_values = boundary_values
        self.kind = kind

    @property
    def is_disk(self) -> bool:
        return isinstance(self.domain, DiskDomain)

    def node_rows(self):
        """(x, y, u) triples in row-major order, skipping valueless nodes."""
        if self.is_disk:
            mask = self.domain.value_mask()
            xx, yy = self.domain.xx, self.domain.yy
            return [(xx[j, i], yy[j, i], self.values[j, i])
                    for j, i in zip(*np.where(mask))]
        xx, yy = self.domain.mesh()
        return [(xx[j, i], yy[j, i], self.values[j, i])
                for j in range(self.domain.ny) for i in range(self.domain.nx)]

    def to_csv(self, path) -> None:
        write_csv(path, ["x", "y", "u"], self.node_rows())

    def interior_values(self):
        if self.is_disk:
            return self.values[self.domain.in_j, self.domain.in_i]
        return self.values[1:-1, 1:-1]

    def boundary_data_values(self):
        if self.is_disk:
            return self.boundary_values
        return self.values[self.domain.boundary_mask()]
