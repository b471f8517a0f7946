"""Explicit conservative coupling of the grid solver with moving rigid bodies.

One coupled step runs five sub-steps: (1) flux precomputation on the full
Cartesian grid ignoring the solid, capturing per-cell directional boundary
pressures; (2) pressure transfer to the solid boundary faces; (3) the rigid
body update under those (constant-in-time) loads; (4) geometry update —
new volume fractions and apertures, boundary subdivision, swept conserved
content; (5) the aperture-weighted flux modification plus the conservative
mixing of small cut cells.

Bookkeeping invariants, enforced to round-off by construction:
  * fluid mass changes only through domain-boundary fluxes (the wall flux
    has a zero mass component);
  * fluid momentum/energy change + sum of per-face solid increments
    dP_F = dt F_F and dE_F = dt F_F . V_F balances the domain-boundary flux.

Both the exchange flux of a face and its swept content are credited to the
cell holding the face at the new time level; together with apertures taken
at the new level this keeps uniform co-moving flow and tangential flow
along straight walls exactly stationary, cell by cell.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np

from .fluxes import FluxScheme
from .gas import AdmissibilityError, GasModel, check_admissible
from .geometry import Grid, grid_coverage, subdivide_boundary, swept_contributions
from .rigid import (
    LoadSet,
    RigidBody,
    accumulate_pressure_loads,
    rattle_advance_positions,
    rattle_finalize_velocities,
)
from .sweeps import DomainBC, strang_step_2d

SMALL_CELL_THRESHOLD = 0.5
# smooth onset of mixing just above the threshold: grid-noise-level (1e-14)
# differences in alpha then shift the exchange strength by ~1e-12 instead of
# toggling a full exchange, which keeps mirror-symmetric setups symmetric
MIX_RAMP = 0.01
# set-membership tolerances for target search (same robustness reasoning);
# target candidacy admits nearly-full-fluid cells: polygonized boundaries
# spray round-off-size solid crumbs over neighbouring cells, and a target
# at alpha <= 0.1 is as sound a mixing partner as one at exactly zero
FULL_FLUID_TOL = 0.1
# a face open by less than a millionth of its width is not a meaningful
# mixing path (and inscribed-polygon facets shave exactly such slivers)
OPEN_FACE_TOL = 1e-6


class MixingError(RuntimeError):
    """No reachable target cell (pathological sealed pocket)."""


@dataclass
class StepReport:
    """Per-step conservation bookkeeping and mixing statistics."""

    step: int
    t: float
    dt: float
    totals_before: np.ndarray
    totals_after: np.ndarray
    solid_dp: np.ndarray        # sum over faces of dt * F_F (x, y)
    solid_de: float             # sum over faces of dt * F_F . V_F
    boundary_in: np.ndarray     # net content inflow through domain edges
    gross: np.ndarray           # activity scale per component
    residuals: np.ndarray
    mix_count: int = 0
    covered_transfers: int = 0
    covered_residual_max: float = 0.0
    repair_mixes: int = 0


@dataclass
class CutCellField:
    """Grid of conserved states plus the solid coverage at the current level."""

    grid: Grid
    w: np.ndarray
    bodies: List[RigidBody]
    gas: GasModel
    scheme: FluxScheme
    bc: DomainBC
    mixing: str = "beta"
    alpha: np.ndarray = None
    kx: np.ndarray = None
    ky: np.ndarray = None
    t: float = 0.0
    step_index: int = 0

    def __post_init__(self):
        if self.mixing not in ("beta", "alpha-paper"):
            raise ValueError(f"unknown mixing variant {self.mixing!r}")
        if self.alpha is None:
            self.refresh_coverage()

    def refresh_coverage(self):
        self.alpha, self.kx, self.ky = grid_coverage(
            [b.world_vertices() for b in self.bodies], self.grid
        )

    def fluid_totals(self):
        beta = (1.0 - self.alpha)[..., None]
        return (beta * self.w).sum(axis=(0, 1)) * self.grid.cell_area

    def primitive(self):
        from .gas import primitive_from_conserved

        return primitive_from_conserved(self.w, self.gas)


def boundary_flux(face) -> np.ndarray:
    """Wall flux per unit face length: zero mass, directional pressures,
    pressure work with the half-step face velocity."""
    if not np.isfinite(face.p_x) or not np.isfinite(face.p_y):
        raise ValueError("boundary face with unset pressures")
    fx = face.p_x * face.n[0]
    fy = face.p_y * face.n[1]
    return np.array([0.0, fx, fy, face.v_half[0] * fx + face.v_half[1] * fy])


def apply_flux_modification(rhs_cell, alpha_np1_cell):
    """State increment of one cell from its assembled right-hand side."""
    beta = 1.0 - alpha_np1_cell
    if beta <= 0.0:
        return np.zeros_like(rhs_cell)
    return rhs_cell / beta


def find_target_cells(alpha, kx, ky, start, candidates=None, restrict=False):
    """All nearest fully-fluid cells reachable through open faces (BFS).

    Returns the full set of minimum-depth candidates, sorted row-major.
    Falls back to partially-fluid targets, then to aperture-blind search,
    before reporting a sealed pocket.  With restrict=True the fallbacks
    keep the given candidate mask and only relax the face-openness rule.
    """
    nx, ny = alpha.shape
    if candidates is None:
        candidates = alpha <= FULL_FLUID_TOL

    def bfs(open_faces_only, cand):
        seen = {start}
        frontier = [start]
        while frontier:
            hits = [c for c in frontier if cand[c] and c != start]
            if hits:
                return sorted(hits)
            nxt = []
            for (i, j) in frontier:
                for di, dj, open_ in (
                    (-1, 0, 1.0 - kx[i, j]),
                    (1, 0, 1.0 - kx[i + 1, j]),
                    (0, -1, 1.0 - ky[i, j]),
                    (0, 1, 1.0 - ky[i, j + 1]),
                ):
                    ii, jj = i + di, j + dj
                    if not (0 <= ii < nx and 0 <= jj < ny) or (ii, jj) in seen:
                        continue
                    if open_faces_only and not open_ > OPEN_FACE_TOL:
                        continue
                    seen.add((ii, jj))
                    nxt.append((ii, jj))
            frontier = nxt
        return None

    if restrict:
        tiers = ((True, candidates), (False, candidates))
    else:
        tiers = (
            (True, candidates),
            (True, alpha <= SMALL_CELL_THRESHOLD),  # mostly-fluid fallback
            (True, alpha < 1.0),
            (False, alpha <= SMALL_CELL_THRESHOLD),
            (False, alpha < 1.0),
        )
    for open_only, cand in tiers:
        hits = bfs(open_only, cand)
        if hits is not None:
            return hits
    raise MixingError(f"no reachable fluid cell from {start}")


def find_target_cell(alpha, kx, ky, start, candidates=None):
    """Single mixing target: the row-major smallest of the nearest set."""
    return find_target_cells(alpha, kx, ky, start, candidates)[0]


def _mix_pair(w, alpha, c, t, variant):
    """Exchange content between a small cell and its target, in place."""
    if variant == "beta":
        bc_, bt = 1.0 - alpha[c], 1.0 - alpha[t]
        wbar = (bc_ * w[c] + bt * w[t]) / (bc_ + bt)
        w[c] = wbar
        w[t] = wbar
    else:  # the printed alpha-weighted exchange, kept for comparison
        ac, at = alpha[c], alpha[t]
        denom = ac + at
        if denom == 0.0:
            return
        m_ct = at / denom * (w[t] - w[c])
        m_tc = ac / denom * (w[c] - w[t])
        w[c] = w[c] + m_ct
        w[t] = w[t] + m_tc


def _mix_round(w, alpha, kx, ky, cells, variant, strength=None, candidates=None):
    """One simultaneous round of conservative exchanges, from a snapshot.

    Every listed cell exchanges with the full set of its nearest targets
    (ties share the exchange in proportion to their fluid fraction), and
    all exchanges are evaluated on the pre-round state and applied at once.
    This keeps the result independent of cell ordering, so mirror-symmetric
    configurations stay mirror-symmetric to round-off.  `strength` scales
    each cell's exchange (partial mixes conserve exactly as well).
    """
    if not cells:
        return 0
    w0 = w.copy()
    delta = np.zeros_like(w)
    beta = 1.0 - alpha
    for k, c in enumerate(cells):
        s = 1.0 if strength is None else strength[k]
        if s <= 0.0:
            continue
        targets = find_target_cells(alpha, kx, ky, c, candidates=candidates)
        if variant == "alpha-paper":
            t = targets[0]
            ac, at = alpha[c], alpha[t]
            if ac + at == 0.0:
                continue
            delta[c] += s * at / (ac + at) * (w0[t] - w0[c])
            delta[t] += s * ac / (ac + at) * (w0[c] - w0[t])
            continue
        bts = np.array([beta[t] for t in targets])
        bsum = float(bts.sum())
        bt_eff = bsum / len(targets)
        if len(targets) == 1:
            wt = w0[targets[0]]
        else:
            wt = sum(bt * w0[t] for bt, t in zip(bts, targets)) / bsum
        bc_ = beta[c]
        # difference form: exactly a no-op on equal states
        dc = s * bt_eff / (bc_ + bt_eff) * (wt - w0[c])
        delta[c] += dc
        for t in targets:
            delta[t] += (-bc_ / bsum) * dc
    w += delta
    return len(cells)


def mix_small_cells(w, alpha, kx, ky, extra_cells=(), variant="beta",
                    candidates=None):
    """Mix every small cell (alpha > 0.5) with its nearest target(s).

    `extra_cells` are mixed regardless of threshold (newly uncovered
    cells).  Exchanges within one call are simultaneous; returns the
    number of mixed cells.
    """
    small = np.argwhere((alpha > SMALL_CELL_THRESHOLD) & (alpha < 1.0))
    todo = sorted({(int(i), int(j)) for i, j in small} | set(extra_cells))
    extra = set(extra_cells)
    strength = [
        1.0
        if c in extra
        else min((alpha[c] - SMALL_CELL_THRESHOLD) / MIX_RAMP, 1.0)
        for c in todo
    ]
    return _mix_round(w, alpha, kx, ky, todo, variant, strength, candidates)


def _inadmissible_cells(w, live):
    rho = w[..., 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        eint = w[..., 3] - 0.5 * (w[..., 1] ** 2 + w[..., 2] ** 2) / rho
    bad = live & ~((rho > 0.0) & (eint > 0.0) & np.all(np.isfinite(w), axis=-1))
    return sorted((int(i), int(j)) for i, j in np.argwhere(bad))


def repair_inadmissible_cells(w, alpha, kx, ky, covered, max_rounds=400,
                              candidates=None):
    """Conservative last-resort mixing of cells the update left inadmissible.

    Strong boundary motion can strand an imbalanced residual in a cut cell
    below the small-cell threshold; merging it with its target (always with
    the fluid-fraction weights, so content is conserved exactly) is the
    same stabilization the small-cell treatment performs.  Uniform states
    never trigger it.  Returns the number of repair mixes.
    """
    live = ~covered
    count = 0
    for _ in range(max_rounds):
        bad = _inadmissible_cells(w, live)
        if not bad:
            break
        bad_mask = np.zeros_like(covered)
        for c in bad:
            bad_mask[c] = True
        healthy = live & ~bad_mask
        base = candidates if candidates is not None else (alpha <= FULL_FLUID_TOL)
        cand = base & healthy
        if not np.any(cand):
            cand = (alpha <= SMALL_CELL_THRESHOLD) & healthy
        if not np.any(cand):
            cand = healthy
        if not np.any(cand):
            break
        if not cells_mixed_with(w, alpha, kx, ky, bad, cand):
            break
        count += len(bad)
    return count


def cells_mixed_with(w, alpha, kx, ky, cells, candidates):
    """One simultaneous repair round against an explicit candidate mask."""
    w0 = w.copy()
    delta = np.zeros_like(w)
    beta = 1.0 - alpha
    done = 0
    for c in cells:
        try:
            targets = find_target_cells(
                alpha, kx, ky, c, candidates=candidates, restrict=True
            )
        except MixingError:
            continue
        bts = np.array([beta[t] for t in targets])
        bsum = float(bts.sum())
        bt_eff = bsum / len(targets)
        wt = w0[targets[0]] if len(targets) == 1 else (
            sum(bt * w0[t] for bt, t in zip(bts, targets)) / bsum
        )
        bc_ = beta[c]
        dc = bt_eff / (bc_ + bt_eff) * (wt - w0[c])
        delta[c] += dc
        for t in targets:
            delta[t] += (-bc_ / bsum) * dc
        done += 1
    w += delta
    return done


def coupled_step(fld: CutCellField, dt: float):
    """Advance the coupled system by one step; returns (field, report).

    The input field is left untouched; any sub-step error propagates
    before any state is committed.
    """
    grid = fld.grid
    nx, ny = grid.nx, grid.ny
    area = grid.cell_area
    w_n = fld.w
    alpha_n = fld.alpha

    # (1) fluxes and boundary pressures on the plain grid; the solid is
    # ignored, so intermediate states near violent boundary pinches may be
    # unusable: such cells hold their pre-pass value for the remaining
    # passes (the conservative assembly and the mixing own the real update)
    freeze = alpha_n >= 1.0
    has_bodies = bool(fld.bodies)
    sweep = strang_step_2d(
        w_n, dt, grid.dx, grid.dy, fld.scheme, fld.gas, fld.bc,
        t=fld.t, step_index=fld.step_index, origin=(grid.x0, grid.y0),
        freeze_mask=freeze if np.any(freeze) else None,
        cut_mask=~freeze if has_bodies else None,
    )

    # (2) pressures onto the current boundary; (3) solid step
    loads = {}
    new_bodies = []
    for body in fld.bodies:
        wv = body.world_vertices()
        faces_now = [
            f
            for f in subdivide_boundary(body.polygon0, wv, wv, grid, body.body_id)
            if f.cell_n is not None
        ]
        for f in faces_now:
            f.p_x = sweep.pbar_x[f.cell_n]
            f.p_y = sweep.pbar_y[f.cell_n]
        ld = accumulate_pressure_loads(faces_now, body) if faces_now else LoadSet.zero(body.X)
        loads[body.body_id] = ld
        b1 = rattle_advance_positions(body, ld, dt)
        b1 = rattle_finalize_velocities(b1, ld, dt)  # same loads: explicit coupling
        new_bodies.append(b1)

    # (4) new geometry, boundary subdivision, swept content
    alpha_q, kx_q, ky_q = grid_coverage(
        [b.world_vertices() for b in new_bodies], grid
    )

    faces = []
    for body, b1 in zip(fld.bodies, new_bodies):
        fs = subdivide_boundary(
            body.polygon0, body.world_vertices(), b1.world_vertices(), grid,
            body.body_id,
        )
        for f in fs:
            if f.cell_n is not None:
                f.p_x = sweep.pbar_x[f.cell_n]
                f.p_y = sweep.pbar_y[f.cell_n]
            f.v_half = b1.point_velocity_half(f.X0)[:2]
        faces.extend(fs)

    # newly uncovered cells inherit their target's pre-step state; their
    # time-n content has zero weight, so this is exactly conservative
    w_base = w_n.copy()
    uncovered = np.argwhere((alpha_n >= 1.0) & (alpha_q < 1.0))
    uncovered = sorted((int(i), int(j)) for i, j in uncovered)
    cand = (alpha_q == 0.0) & (alpha_n < 1.0)
    for c in uncovered:
        ts = find_target_cells(alpha_q, kx_q, ky_q, c, candidates=cand)
        if len(ts) == 1:
            w_base[c] = w_n[ts[0]]
        else:
            bts = np.array([1.0 - alpha_q[t] for t in ts])
            w_base[c] = sum(b * w_n[t] for b, t in zip(bts, ts)) / bts.sum()

    exch = np.zeros((nx, ny, 4))
    swept = np.zeros((nx, ny, 4))
    solid_dp = np.zeros(2)
    solid_de = 0.0
    gross_exch = np.zeros(4)
    for f in faces:
        cell = f.exchange_cell
        if f.cell_n is not None and cell is not None:
            bf = boundary_flux(f)
            exch[cell] += (dt * f.S / area) * bf
            solid_dp += -dt * f.S * bf[1:3]
            solid_de += -dt * f.S * bf[3]
            gross_exch += dt * f.S * np.abs(bf)
        pieces, tot = swept_contributions(f, w_base, grid)
        if cell is not None:
            swept[cell] += tot
        else:
            # no owning cell: credit each clipped piece to its own cell so
            # the swept-volume partition stays exact at the domain edge
            for pc, dw in pieces:
                swept[pc] += dw

    # (5) aperture-weighted update
    ax = (1.0 - kx_q)[..., None] * sweep.fx
    ay = (1.0 - ky_q)[..., None] * sweep.fy
    flux_rhs = (dt / grid.dx) * (ax[:-1] - ax[1:]) + (dt / grid.dy) * (
        ay[:, :-1] - ay[:, 1:]
    )
    rhs = flux_rhs + exch + swept

    covered = alpha_q >= 1.0
    beta_q = 1.0 - alpha_q
    cand_default = alpha_q <= FULL_FLUID_TOL
    near_live = np.zeros_like(covered)
    live_m = ~covered
    for s in (1, 2):
        near_live[s:, :] |= live_m[:-s, :]
        near_live[:-s, :] |= live_m[s:, :]
        near_live[:, s:] |= live_m[:, :-s]
        near_live[:, :-s] |= live_m[:, s:]
    w_new = w_base.copy()
    live = ~covered
    w_new[live] = w_base[live] + rhs[live] / beta_q[live][:, None]

    # covered cells cannot absorb their residual; hand it to their target(s);
    # round-off crumbs (aperture weights within machine epsilon of sealed)
    # are dropped, which costs less than 1e-16 of the content per step
    covered_transfers = 0
    covered_residual_max = 0.0
    crumb = 1e-14 * float(np.max(np.abs(w_n)))
    for c in sorted((int(i), int(j)) for i, j in np.argwhere(covered)):
        r = rhs[c]
        mag = float(np.max(np.abs(r)))
        if mag <= crumb:
            continue
        covered_residual_max = max(covered_residual_max, mag)
        ts = find_target_cells(alpha_q, kx_q, ky_q, c, candidates=cand_default)
        bsum = sum(beta_q[t] for t in ts)
        for t in ts:
            w_new[t] += r / bsum
        covered_transfers += 1

    # conservative mixing of small cells (and of freshly uncovered ones)
    mix_count = mix_small_cells(
        w_new, alpha_q, kx_q, ky_q,
        extra_cells=[c for c in uncovered if not covered[c]],
        variant=fld.mixing,
        candidates=cand_default,
    )
    repairs = repair_inadmissible_cells(
        w_new, alpha_q, kx_q, ky_q, covered, candidates=cand_default
    )

    # placeholder hygiene: covered cells hold zero-weight states that the
    # flux precomputation still reads through the stencil, so covered cells
    # within stencil reach of fluid follow the mean of their nearest live
    # neighbors (conservation-neutral; uniform states stay uniform to
    # round-off)
    src_mask = ~covered
    fill = covered & near_live
    for _ in range(2):
        todo = fill & ~src_mask
        if not np.any(todo):
            break
        num = np.zeros_like(w_new)
        den = np.zeros(w_new.shape[:2])
        for di, dj in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            sm = np.zeros_like(src_mask)
            wv = np.zeros_like(w_new)
            if di == -1:
                sm[1:, :] = src_mask[:-1, :]
                wv[1:, :] = w_new[:-1, :]
            elif di == 1:
                sm[:-1, :] = src_mask[1:, :]
                wv[:-1, :] = w_new[1:, :]
            elif dj == -1:
                sm[:, 1:] = src_mask[:, :-1]
                wv[:, 1:] = w_new[:, :-1]
            else:
                sm[:, :-1] = src_mask[:, 1:]
                wv[:, :-1] = w_new[:, 1:]
            num += np.where(sm[..., None], wv, 0.0)
            den += sm
        ready = todo & (den > 0)
        w_new[ready] = num[ready] / den[ready][:, None]
        src_mask |= ready

    check_admissible(w_new[~covered], fld.gas, "coupled_step")

    # bookkeeping
    totals_before = ((1.0 - alpha_n)[..., None] * w_n).sum(axis=(0, 1)) * area
    totals_after = ((1.0 - alpha_q)[..., None] * w_new).sum(axis=(0, 1)) * area
    b_in = dt * grid.dy * (ax[0].sum(axis=0) - ax[-1].sum(axis=0)) + dt * grid.dx * (
        ay[:, 0].sum(axis=0) - ay[:, -1].sum(axis=0)
    )
    solid4 = np.array([0.0, solid_dp[0], solid_dp[1], solid_de])
    defect = totals_after - totals_before - b_in + solid4
    gross = (
        np.abs((1.0 - alpha_n)[..., None] * w_n).sum(axis=(0, 1)) * area
        + np.abs(b_in)
        + gross_exch
    )
    residuals = np.abs(defect) / np.maximum(gross, 1e-30)

    report = StepReport(
        step=fld.step_index,
        t=fld.t,
        dt=dt,
        totals_before=totals_before,
        totals_after=totals_after,
        solid_dp=solid_dp,
        solid_de=solid_de,
        boundary_in=b_in,
        gross=gross,
        residuals=residuals,
        mix_count=mix_count,
        covered_transfers=covered_transfers,
        covered_residual_max=covered_residual_max,
        repair_mixes=repairs,
    )
    out = CutCellField(
        grid=grid, w=w_new, bodies=new_bodies, gas=fld.gas, scheme=fld.scheme,
        bc=fld.bc, mixing=fld.mixing, alpha=alpha_q, kx=kx_q, ky=ky_q,
        t=fld.t + dt, step_index=fld.step_index + 1,
    )
    return out, report
