"""Exact planar geometry of polygonal solids on a Cartesian grid.

Solid footprints are closed CCW vertex loops (interior = solid).  The grid
coverage pipeline produces, per cell, the solid volume fraction alpha and,
per grid face, the solid aperture kappa.  Alpha is evaluated with a
divergence identity over each cell,

    alpha * dx * dy = sum_pieces integral (x - x_left) dy  +  dx * dy * kappa_right,

so that untouched cells come out exactly 0 and buried cells exactly 1, and
the discrete geometric conservation laws hold to round-off by construction.

Boundary subdivision cuts every polygon edge at all grid lines crossed at
either time level, so each produced face lies in a single cell at time n
and in a single (possibly different) cell at time n+1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

@dataclass(frozen=True)
class Grid:
    """Uniform Cartesian grid.  Cell (i, j) is the half-open box
    [xline(i), xline(i+1)) x [yline(j), yline(j+1)); the same strict
    comparison against floating-point line coordinates is used by the
    coverage scanline, the cell indexer and the boundary subdivision, which
    keeps the discrete geometric identities exact even when a solid
    boundary sits exactly on a grid line.
    """

    nx: int
    ny: int
    dx: float
    dy: float
    x0: float = 0.0
    y0: float = 0.0

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    def xline(self, i):
        return self.x0 + i * self.dx

    def yline(self, j):
        return self.y0 + j * self.dy

    def cell_box(self, i, j):
        return (self.xline(i), self.xline(i + 1), self.yline(j), self.yline(j + 1))

    def _axis_index(self, coord, origin, h, n):
        i = int(np.floor((coord - origin) / h))
        # settle against the actual line coordinates (half-open convention)
        while coord < origin + i * h:
            i -= 1
        while coord >= origin + (i + 1) * h:
            i += 1
        return i if 0 <= i < n else None

    def cell_of(self, p) -> Optional[Tuple[int, int]]:
        """Cell containing p; points on a grid line belong to the + side."""
        i = self._axis_index(p[0], self.x0, self.dx, self.nx)
        j = self._axis_index(p[1], self.y0, self.dy, self.ny)
        if i is None or j is None:
            return None
        return (i, j)


# ---------------------------------------------------------------------------
# polygon primitives
# ---------------------------------------------------------------------------

def polygon_area(verts) -> float:
    """Signed shoelace area (positive = CCW)."""
    v = np.asarray(verts, dtype=float)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def ensure_ccw(verts):
    v = np.asarray(verts, dtype=float)
    return v if polygon_area(v) >= 0.0 else v[::-1].copy()


def polygon_moments(verts):
    """(area, centroid, I_zz about the centroid) of a simple CCW polygon."""
    v = np.asarray(verts, dtype=float)
    x, y = v[:, 0], v[:, 1]
    x1, y1 = np.roll(x, -1), np.roll(y, -1)
    cross = x * y1 - x1 * y
    area = 0.5 * cross.sum()
    cx = np.sum((x + x1) * cross) / (6.0 * area)
    cy = np.sum((y + y1) * cross) / (6.0 * area)
    i_origin = np.sum(cross * (x * x + x * x1 + x1 * x1 + y * y + y * y1 + y1 * y1)) / 12.0
    izz = i_origin - area * (cx * cx + cy * cy)
    return float(area), np.array([cx, cy]), float(izz)


def clip_polygon_halfplane(poly, point, normal):
    """Sutherland-Hodgman clip keeping the side where (p-point).normal <= 0."""
    if len(poly) == 0:
        return poly
    out = []
    n = len(poly)
    d = [(p[0] - point[0]) * normal[0] + (p[1] - point[1]) * normal[1] for p in poly]
    for k in range(n):
        a, b = poly[k], poly[(k + 1) % n]
        da, db = d[k], d[(k + 1) % n]
        if da <= 0.0:
            out.append(a)
            if db > 0.0:
                t = da / (da - db)
                out.append((a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])))
        elif db <= 0.0:
            t = da / (da - db)
            out.append((a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])))
    return out


def clip_polygon_box(poly, xlo, xhi, ylo, yhi):
    """Clip a polygon (list of (x, y)) to an axis-aligned box."""
    p = [tuple(q) for q in poly]
    p = clip_polygon_halfplane(p, (xlo, 0.0), (-1.0, 0.0))
    p = clip_polygon_halfplane(p, (xhi, 0.0), (1.0, 0.0))
    p = clip_polygon_halfplane(p, (0.0, ylo), (0.0, -1.0))
    p = clip_polygon_halfplane(p, (0.0, yhi), (0.0, 1.0))
    return p


def _shoelace(pts) -> float:
    if len(pts) < 3:
        return 0.0
    a = 0.0
    n = len(pts)
    for k in range(n):
        x1, y1 = pts[k]
        x2, y2 = pts[(k + 1) % n]
        a += x1 * y2 - x2 * y1
    return 0.5 * a


def point_in_polygon(points, verts):
    """Even-odd ray test, vectorized over points (m, 2)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    v = np.asarray(verts, dtype=float)
    x1, y1 = v[:, 0], v[:, 1]
    x2, y2 = np.roll(x1, -1), np.roll(y1, -1)
    px = pts[:, 0][:, None]
    py = pts[:, 1][:, None]
    crossing = (y1[None, :] > py) != (y2[None, :] > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        xs = x1[None, :] + (py - y1[None, :]) / (y2 - y1)[None, :] * (x2 - x1)[None, :]
    hits = crossing & (px < xs)
    return (hits.sum(axis=1) % 2).astype(bool)


# ---------------------------------------------------------------------------
# single-cell reference operations (independent of the grid pipeline)
# ---------------------------------------------------------------------------

def volume_fraction(footprint, cell_box) -> float:
    """Solid area fraction of one cell, by direct polygon clipping."""
    xlo, xhi, ylo, yhi = cell_box
    poly = ensure_ccw(footprint)
    if len(poly) < 3:
        raise ValueError("degenerate footprint polygon")
    clipped = clip_polygon_box(poly, xlo, xhi, ylo, yhi)
    return _shoelace(clipped) / ((xhi - xlo) * (yhi - ylo))


def _segment_covered_fraction(footprint, p1, p2) -> float:
    """Fraction of the segment p1-p2 lying inside the polygon."""
    v = np.asarray(footprint, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    d = p2 - p1
    ts = [0.0, 1.0]
    a, b = v, np.roll(v, -1, axis=0)
    e = b - a
    denom = d[0] * (-e[:, 1]) + d[1] * e[:, 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = a - p1
        t = (rel[:, 0] * (-e[:, 1]) + rel[:, 1] * e[:, 0]) / denom
        s = (d[0] * rel[:, 1] - d[1] * rel[:, 0]) / denom
    ok = np.isfinite(t) & np.isfinite(s) & (t > 0) & (t < 1) & (s >= 0) & (s < 1)
    ts.extend(t[ok].tolist())
    ts = sorted(set(ts))
    covered = 0.0
    mids = np.array([[p1[0] + 0.5 * (ta + tb) * d[0], p1[1] + 0.5 * (ta + tb) * d[1]]
                     for ta, tb in zip(ts[:-1], ts[1:])])
    inside = point_in_polygon(mids, v)
    for (ta, tb), isin in zip(zip(ts[:-1], ts[1:]), inside):
        if isin:
            covered += tb - ta
    return covered


def face_apertures(footprint, cell_box):
    """(kappa_l, kappa_r, kappa_b, kappa_t): covered fraction of each face."""
    xlo, xhi, ylo, yhi = cell_box
    poly = ensure_ccw(footprint)
    if len(poly) < 3:
        raise ValueError("degenerate footprint polygon")
    kl = _segment_covered_fraction(poly, (xlo, ylo), (xlo, yhi))
    kr = _segment_covered_fraction(poly, (xhi, ylo), (xhi, yhi))
    kb = _segment_covered_fraction(poly, (xlo, ylo), (xhi, ylo))
    kt = _segment_covered_fraction(poly, (xlo, yhi), (xhi, yhi))
    return kl, kr, kb, kt


# ---------------------------------------------------------------------------
# full-grid coverage: alpha per cell, kappa per grid face
# ---------------------------------------------------------------------------

def _line_row_coverage(verts, lines, origin, h, nrows, axis):
    """Covered length fraction of every (line, row) face along one axis.

    axis=0: vertical lines x=lines, rows along y. axis=1: horizontal lines.
    Returns an array (len(lines), nrows).
    """
    v = np.asarray(verts, dtype=float)
    a = v
    b = np.roll(v, -1, axis=0)
    cov = np.zeros((len(lines), nrows))
    ax, ay = (0, 1) if axis == 0 else (1, 0)
    for li, c in enumerate(lines):
        lo = a[:, ax] < c
        hi = b[:, ax] < c
        m = lo != hi  # half-open crossing rule, robust to on-line vertices
        if not np.any(m):
            continue
        t = (c - a[m, ax]) / (b[m, ax] - a[m, ax])
        ys = np.sort(a[m, ay] + t * (b[m, ay] - a[m, ay]))
        # inside between alternate crossings of a closed loop
        for s, e in zip(ys[0::2], ys[1::2]):
            j0 = int(np.floor((s - origin) / h))
            j1 = int(np.floor((e - origin) / h))
            for j in range(max(j0, 0), min(j1, nrows - 1) + 1):
                seg = min(e, origin + (j + 1) * h) - max(s, origin + j * h)
                if seg > 0:
                    cov[li, j] += seg / h
    return cov


def _edge_cut_params(p, q, grid: Grid):
    """Sorted parameters in (0,1) where segment p-q crosses grid lines."""
    ts = []
    for comp, orig, h, n in ((0, grid.x0, grid.dx, grid.nx), (1, grid.y0, grid.dy, grid.ny)):
        d = q[comp] - p[comp]
        if d == 0.0:
            continue
        lo = min(p[comp], q[comp])
        hi = max(p[comp], q[comp])
        k0 = int(np.ceil((lo - orig) / h - 1e-12))
        k1 = int(np.floor((hi - orig) / h + 1e-12))
        for k in range(k0, k1 + 1):
            t = (orig + k * h - p[comp]) / d
            if 1e-14 < t < 1.0 - 1e-14:
                ts.append(t)
    return sorted(ts)


def _grid_coverage_one(verts, grid: Grid):
    """alpha, kx, ky of a single CCW polygon footprint on the grid."""
    v = np.asarray(verts, dtype=float)
    kx = _line_row_coverage(v, [grid.xline(i) for i in range(grid.nx + 1)],
                            grid.y0, grid.dy, grid.ny, axis=0)
    ky_t = _line_row_coverage(v, [grid.yline(j) for j in range(grid.ny + 1)],
                              grid.x0, grid.dx, grid.nx, axis=1)
    ky = ky_t.T  # (nx, ny+1)
    # faces sealed up to round-off count as sealed: the interval arithmetic
    # lands within 1e-16 of 1 on interior faces and would otherwise leave
    # every deep interior cell fractionally uncovered
    kx[kx > 1.0 - 1e-13] = 1.0
    ky[ky > 1.0 - 1e-13] = 1.0

    # per-cell boundary pieces of integral (x - x_left_line) dy
    pieces = np.zeros((grid.nx, grid.ny))
    b = np.roll(v, -1, axis=0)
    for p, q in zip(v, b):
        if p[0] == q[0] and p[1] == q[1]:
            continue
        ts = [0.0] + _edge_cut_params(p, q, grid) + [1.0]
        d = q - p
        for ta, tb in zip(ts[:-1], ts[1:]):
            pa = p + ta * d
            pb = p + tb * d
            cell = grid.cell_of(0.5 * (pa + pb))
            if cell is None:
                continue
            i, j = cell
            xl = grid.xline(i)
            pieces[i, j] += 0.5 * ((pa[0] - xl) + (pb[0] - xl)) * (pb[1] - pa[1])

    alpha = pieces / grid.cell_area + kx[1:, :]
    return alpha, kx, ky


def grid_coverage(footprints, grid: Grid):
    """Combined alpha (nx, ny), kx (nx+1, ny), ky (nx, ny+1) over all bodies.

    Bodies are assumed non-overlapping; contributions add and are clamped to 1.
    """
    alpha = np.zeros((grid.nx, grid.ny))
    kx = np.zeros((grid.nx + 1, grid.ny))
    ky = np.zeros((grid.nx, grid.ny + 1))
    for verts in footprints:
        a, fx, fy = _grid_coverage_one(ensure_ccw(verts), grid)
        alpha += a
        kx += fx
        ky += fy
    if alpha.min() < -1e-9 or alpha.max() > 1.0 + 1e-9:
        raise RuntimeError(
            f"coverage out of range: alpha in [{alpha.min()}, {alpha.max()}]"
        )
    kx = np.clip(kx, 0.0, 1.0)
    ky = np.clip(ky, 0.0, 1.0)
    kx[kx > 1.0 - 1e-13] = 1.0
    ky[ky > 1.0 - 1e-13] = 1.0
    return np.clip(alpha, 0.0, 1.0), kx, ky


# ---------------------------------------------------------------------------
# boundary faces
# ---------------------------------------------------------------------------

@dataclass
class BoundaryFace:
    """One subdivided piece of a solid boundary.

    Geometric attributes (S, n, X) are those of the face position at time n;
    the *_np1 duplicates describe the face after the solid moved.  X0 is the
    material image of the face center at the initial time.
    """

    S: float
    n: np.ndarray
    X: np.ndarray
    X0: np.ndarray
    a_n: np.ndarray
    b_n: np.ndarray
    a_np1: np.ndarray
    b_np1: np.ndarray
    S_np1: float
    n_np1: np.ndarray
    cell_n: Optional[Tuple[int, int]]
    cell_np1: Optional[Tuple[int, int]]
    body_id: int = 0
    p_x: float = np.nan
    p_y: float = np.nan
    v_half: np.ndarray = field(default_factory=lambda: np.zeros(2))

    @property
    def exchange_cell(self):
        return self.cell_np1 if self.cell_np1 is not None else self.cell_n


def _face_geometry(a, b):
    d = b - a
    s = float(np.hypot(d[0], d[1]))
    n = np.array([d[1], -d[0]]) / s if s > 0 else np.zeros(2)
    return s, n, 0.5 * (a + b)


def subdivide_boundary(verts0, verts_n, verts_np1, grid: Grid, body_id: int = 0):
    """Split a material polygon loop into faces one-cell-per-time-level.

    verts0: (m, 2) material vertices (CCW, solid inside); verts_n and
    verts_np1 are the same loop mapped to world coordinates at the two time
    levels (pass the exact arrays used for the coverage computation so the
    geometric identities agree bitwise).  Faces outside the grid at both
    levels and not sweeping any grid cell are dropped; faces kept without
    an owning time-n cell carry cell_n = None (no pressure or load role,
    but their swept content still counts).  Pieces shorter than
    1e-12*min(dx, dy) merge into their neighbor.
    """
    v0 = np.asarray(verts0, dtype=float)
    wn = np.asarray(verts_n, dtype=float)
    wq = np.asarray(verts_np1, dtype=float)
    m = len(v0)
    hmin = min(grid.dx, grid.dy)
    faces: List[BoundaryFace] = []
    for k in range(m):
        a0, b0 = v0[k], v0[(k + 1) % m]
        an, bn = wn[k], wn[(k + 1) % m]
        aq, bq = wq[k], wq[(k + 1) % m]
        if np.array_equal(an, bn):
            continue
        ts = sorted(set(_edge_cut_params(an, bn, grid) + _edge_cut_params(aq, bq, grid)))
        # merge cuts that would create slivers
        edge_len = max(np.hypot(*(bn - an)), np.hypot(*(bq - aq)))
        tmin = 1e-12 * hmin / edge_len if edge_len > 0 else 1.0
        params = [0.0]
        for t in ts:
            if t - params[-1] >= tmin and 1.0 - t >= tmin:
                params.append(t)
        params.append(1.0)
        pts_n = [an + t * (bn - an) for t in params]
        pts_q = [aq + t * (bq - aq) for t in params]
        pts_0 = [a0 + t * (b0 - a0) for t in params]
        for p1n, p2n, p1q, p2q, p10, p20 in zip(
            pts_n[:-1], pts_n[1:], pts_q[:-1], pts_q[1:], pts_0[:-1], pts_0[1:]
        ):
            s, n, xf = _face_geometry(p1n, p2n)
            if s <= 0.0:
                continue
            sq, nq, xq = _face_geometry(p1q, p2q)
            cell_n = grid.cell_of(xf)
            cell_q = grid.cell_of(xq)
            if cell_n is None and cell_q is None:
                # keep only if the sweep region can overlap the grid
                lo_x = min(p1n[0], p2n[0], p1q[0], p2q[0])
                hi_x = max(p1n[0], p2n[0], p1q[0], p2q[0])
                lo_y = min(p1n[1], p2n[1], p1q[1], p2q[1])
                hi_y = max(p1n[1], p2n[1], p1q[1], p2q[1])
                if (hi_x <= grid.x0 or lo_x >= grid.xline(grid.nx)
                        or hi_y <= grid.y0 or lo_y >= grid.yline(grid.ny)):
                    continue
            faces.append(
                BoundaryFace(
                    S=s, n=n, X=xf, X0=0.5 * (p10 + p20),
                    a_n=p1n, b_n=p2n, a_np1=p1q, b_np1=p2q,
                    S_np1=sq, n_np1=nq, cell_n=cell_n, cell_np1=cell_q,
                    body_id=body_id,
                )
            )
    return faces


# ---------------------------------------------------------------------------
# swept regions
# ---------------------------------------------------------------------------

def _seg_intersection(a1, a2, b1, b2):
    """Proper intersection point of segments a and b, or None."""
    d1 = a2 - a1
    d2 = b2 - b1
    denom = d1[0] * d2[1] - d1[1] * d2[0]
    if denom == 0.0:
        return None
    r = b1 - a1
    t = (r[0] * d2[1] - r[1] * d2[0]) / denom
    s = (r[0] * d1[1] - r[1] * d1[0]) / denom
    if 1e-12 < t < 1 - 1e-12 and 1e-12 < s < 1 - 1e-12:
        return a1 + t * d1
    return None


def swept_polygons(face: BoundaryFace):
    """Signed sweep region(s) of a face between its two time levels.

    Returns a list of vertex loops; their (negated) shoelace areas are
    positive where the solid advances into fluid.  A face that rotates
    through itself (bow-tie) splits into two signed triangles at the
    crossing so that signed areas stay exact.
    """
    a_n, b_n, a_q, b_q = face.a_n, face.b_n, face.a_np1, face.b_np1
    if np.array_equal(a_n, a_q) and np.array_equal(b_n, b_q):
        return []
    x = _seg_intersection(a_n, b_n, a_q, b_q)
    if x is None:
        return [[a_n, b_n, b_q, a_q]]
    return [[a_n, x, a_q], [x, b_n, b_q]]


def swept_contributions(face: BoundaryFace, w_n, grid: Grid):
    """Per-cell pieces of the conserved content swept by one face.

    Integrates the piecewise-constant field w_n over the signed sweep region
    clipped to each cell.  Returns (list of (cell, dw), total dw), where dw
    is already divided by the cell area (state units); covering fluid counts
    positive.  All clipping runs in face-local coordinates so the area
    round-off scales with the sweep size, not with the domain extent.
    """
    out = []
    total = np.zeros(w_n.shape[-1])
    ox, oy = face.a_n
    for loop in swept_polygons(face):
        pts = np.asarray(loop, dtype=float)
        local = [(p[0] - ox, p[1] - oy) for p in pts]
        i0 = max(int(np.floor((pts[:, 0].min() - grid.x0) / grid.dx)), 0)
        i1 = min(int(np.floor((pts[:, 0].max() - grid.x0) / grid.dx)), grid.nx - 1)
        j0 = max(int(np.floor((pts[:, 1].min() - grid.y0) / grid.dy)), 0)
        j1 = min(int(np.floor((pts[:, 1].max() - grid.y0) / grid.dy)), grid.ny - 1)
        for i in range(i0, i1 + 1):
            for j in range(j0, j1 + 1):
                xlo, xhi, ylo, yhi = grid.cell_box(i, j)
                clipped = clip_polygon_box(
                    local, xlo - ox, xhi - ox, ylo - oy, yhi - oy
                )
                a = -_shoelace(clipped)  # covering = positive
                if a != 0.0:
                    dw = (a / grid.cell_area) * w_n[i, j]
                    out.append(((i, j), dw))
                    total += dw
    return out, total


def gcl_residual(kl, kr, kb, kt, faces, dx, dy, level="n"):
    """Residual pair of the geometric conservation laws for one cell."""
    rx = kl - kr
    ry = kb - kt
    for f in faces:
        s = f.S if level == "n" else f.S_np1
        n = f.n if level == "n" else f.n_np1
        rx -= s / dy * n[0]
        ry -= s / dx * n[1]
    return rx, ry
