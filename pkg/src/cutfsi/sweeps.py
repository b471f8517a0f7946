"""Directional sweeps on a uniform Cartesian grid with Strang splitting.

The 2D update is a sequence of 1D conservative passes; pairs of steps
alternate x-y then y-x to restore the second-order splitting symmetry.
Each pass records its interface fluxes and the cell pressures of the state
it was fed; the coupling layer consumes both.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .fluxes import FluxScheme, interface_flux_x
from .gas import EN, MX, MY, RHO, AdmissibilityError, GasModel, pressure, swap_momenta

NG = 2  # ghost layers per side, enough for the 4-point mp2 stencil

BC_KINDS = ("periodic", "transmissive", "reflective", "inflow", "moving_shock", "split")


@dataclass(frozen=True)
class BoundaryCondition:
    """One domain side.

    kind 'inflow' freezes ghost cells at `state` (conserved, shape (4,)).
    kind 'moving_shock' fills ghosts with the exact pre/post state of a
    planar shock through `point` with unit `normal`, travelling at `speed`:
    post-shock where (x - point).normal < speed * t.
    kind 'split' applies `lo` below `split_at` (measured along the side)
    and `hi` above it.
    """

    kind: str = "periodic"
    state: Optional[np.ndarray] = None
    pre: Optional[np.ndarray] = None
    post: Optional[np.ndarray] = None
    point: tuple = (0.0, 0.0)
    normal: tuple = (1.0, 0.0)
    speed: float = 0.0
    split_at: float = 0.0
    lo: Optional["BoundaryCondition"] = None
    hi: Optional["BoundaryCondition"] = None

    def __post_init__(self):
        if self.kind not in BC_KINDS:
            raise ValueError(f"unknown BC kind {self.kind!r}")
        if self.kind == "inflow" and self.state is None:
            raise ValueError("inflow BC requires a state")
        if self.kind == "moving_shock" and (self.pre is None or self.post is None):
            raise ValueError("moving_shock BC requires pre and post states")
        if self.kind == "split" and (self.lo is None or self.hi is None):
            raise ValueError("split BC requires lo and hi parts")

    def shock_state(self, x, y, t):
        s = (x - self.point[0]) * self.normal[0] + (y - self.point[1]) * self.normal[1]
        post = np.asarray(self.post, dtype=float)
        pre = np.asarray(self.pre, dtype=float)
        behind = s < self.speed * t
        return np.where(behind[..., None], post, pre)


@dataclass
class DomainBC:
    left: BoundaryCondition = field(default_factory=BoundaryCondition)
    right: BoundaryCondition = field(default_factory=BoundaryCondition)
    bottom: BoundaryCondition = field(default_factory=BoundaryCondition)
    top: BoundaryCondition = field(default_factory=BoundaryCondition)

    def __post_init__(self):
        for a, b, name in (
            (self.left, self.right, "x"),
            (self.bottom, self.top, "y"),
        ):
            if (a.kind == "periodic") != (b.kind == "periodic"):
                raise ValueError(f"periodic BC must pair on both {name} sides")


def _kernel_state(state, swapped):
    state = np.asarray(state, dtype=float)
    return swap_momenta(state) if swapped else state


def _ghost_block(padded, side, bc, normal_comp, coords, tang, t, swapped):
    """Ghost block of shape (NG, m, 4) for one side in kernel order."""
    n = padded.shape[0] - 2 * NG
    if bc.kind == "periodic":
        # modular gather stays correct even when n < NG
        if side == "lo":
            idx = np.arange(-NG, 0) % n
        else:
            idx = np.arange(n, n + NG) % n
        return padded[NG + idx].copy()
    if bc.kind == "transmissive":
        edge = padded[NG] if side == "lo" else padded[n + NG - 1]
        return np.broadcast_to(edge[None], (NG,) + edge.shape).copy()
    if bc.kind == "reflective":
        if side == "lo":
            mirror = padded[NG : 2 * NG][::-1].copy()
        else:
            mirror = padded[n : n + NG][::-1].copy()
        mirror[..., normal_comp] = -mirror[..., normal_comp]
        return mirror
    if bc.kind == "inflow":
        m = padded.shape[1]
        return np.broadcast_to(
            _kernel_state(bc.state, swapped), (NG, m, 4)
        ).copy()
    if bc.kind == "moving_shock":
        xs, ys = coords
        block = bc.shock_state(xs, ys, t)
        return _kernel_state(block, swapped)
    if bc.kind == "split":
        lo_blk = _ghost_block(padded, side, bc.lo, normal_comp, coords, tang, t, swapped)
        hi_blk = _ghost_block(padded, side, bc.hi, normal_comp, coords, tang, t, swapped)
        return np.where(tang[..., None] < bc.split_at, lo_blk, hi_blk)
    raise ValueError(bc.kind)


def _fill_ghosts(padded, lo_bc, hi_bc, normal_comp, coords_lo, coords_hi, t, swapped):
    """Fill NG ghost rows at each end of axis 0 (x-kernel component order).

    `coords_*` are (normal, tangential) cell-center coordinates of the ghost
    block in world orientation; `swapped` marks the y pass, where externally
    prescribed states need their momentum components exchanged.
    """
    n = padded.shape[0] - 2 * NG
    for side, bc, coords in (("lo", lo_bc, coords_lo), ("hi", hi_bc, coords_hi)):
        sl = slice(0, NG) if side == "lo" else slice(n + NG, n + 2 * NG)
        # world coordinates: in the swapped frame the "x" of the kernel is y
        xs, ys = coords
        world = (ys, xs) if swapped else (xs, ys)
        tang = world[0] if swapped else world[1]
        padded[sl] = _ghost_block(
            padded, side, bc, normal_comp, world, tang, t, swapped
        )
    return padded


def _pass_x(w, dt, dx, scheme, gas, lo_bc, hi_bc, geom, t, freeze_mask,
            swapped=False, cut_mask=None):
    """One conservative pass along axis 0 of `w` (shape (n, m, 4)).

    Component order must match the x-kernel (normal momentum at index 1);
    `swapped` marks that axis 0 is the world y direction.  Cells under
    `freeze_mask` are reset to their input value; cells under `cut_mask`
    whose plain update turns inadmissible hold their input value instead
    (their content is partly fictitious and their final value comes from
    the aperture-weighted update), while inadmissible pure-fluid cells
    raise.  Returns (interface fluxes (n+1, m, 4), updated field).
    """
    n, m = w.shape[0], w.shape[1]
    padded = np.empty((n + 2 * NG, m, 4), dtype=float)
    padded[NG : n + NG] = w
    x0, dxi, ycent = geom
    gl = np.arange(-NG, 0) + 0.5
    gh = np.arange(n, n + NG) + 0.5
    coords_lo = (np.broadcast_to((x0 + gl * dxi)[:, None], (NG, m)), ycent)
    coords_hi = (np.broadcast_to((x0 + gh * dxi)[:, None], (NG, m)), ycent)
    _fill_ghosts(padded, lo_bc, hi_bc, MX, coords_lo, coords_hi, t, swapped)

    f = interface_flux_x(
        padded[:-3], padded[1:-2], padded[2:-1], padded[3:], dt, dx, scheme, gas
    )
    out = w - (dt / dx) * (f[1:] - f[:-1])
    if freeze_mask is not None:
        out[freeze_mask] = w[freeze_mask]
    rho = out[..., RHO]
    with np.errstate(invalid="ignore", divide="ignore"):
        eint = out[..., EN] - 0.5 * (out[..., MX] ** 2 + out[..., MY] ** 2) / rho
    bad = ~((rho > 0.0) & (eint > 0.0))
    if freeze_mask is not None:
        bad &= ~freeze_mask
    if cut_mask is not None:
        hold = bad & cut_mask
        if np.any(hold):
            out[hold] = w[hold]
            bad &= ~cut_mask
    if np.any(bad):
        ij = tuple(int(v) for v in np.argwhere(bad)[0])
        raise AdmissibilityError(f"sweep produced inadmissible state at cell {ij}")
    return f, out


@dataclass
class SweepResult:
    w: np.ndarray          # updated field (nx, ny, 4)
    fx: np.ndarray         # x-face fluxes (nx+1, ny, 4), natural component order
    fy: np.ndarray         # y-face fluxes (nx, ny+1, 4)
    pbar_x: np.ndarray     # cell pressure fed to the x pass
    pbar_y: np.ndarray     # cell pressure fed to the y pass


def sweep_1d(row, dt, dx, scheme: FluxScheme, gas: GasModel, bc):
    """Single 1D sweep of a row of conserved states.

    bc is a (lo, hi) pair of BoundaryCondition; returns (interface fluxes
    with shape (n+1, 4), updated row).  Moving-shock BCs are not meaningful
    without 2D geometry and are rejected here.
    """
    row = np.asarray(row, dtype=float)
    lo, hi = bc
    if "moving_shock" in (lo.kind, hi.kind):
        raise ValueError("moving_shock BC requires the 2D driver")
    w = row[:, None, :]
    geom = (0.0, dx, np.zeros((NG, 1)))
    f, out = _pass_x(w, dt, dx, scheme, gas, lo, hi, geom, 0.0, None)
    return f[:, 0, :], out[:, 0, :]


def strang_step_2d(
    w,
    dt,
    dx,
    dy,
    scheme: FluxScheme,
    gas: GasModel,
    bc: DomainBC,
    t: float = 0.0,
    step_index: int = 0,
    origin=(0.0, 0.0),
    freeze_mask=None,
    cut_mask=None,
):
    """One full 2D step via directional splitting.

    Sweep order is x-y on even steps and y-x on odd steps so that pairs of
    steps form a symmetric second-order splitting.  Cells under
    `freeze_mask` are reset to their input state after every pass and are
    exempt from admissibility checks (used for fully covered cells whose
    content is fictitious).
    """
    w = np.asarray(w, dtype=float)
    nx, ny = w.shape[0], w.shape[1]
    x0, y0 = origin
    xc = x0 + (np.arange(nx) + 0.5) * dx
    yc = y0 + (np.arange(ny) + 0.5) * dy
    order = ("x", "y") if step_index % 2 == 0 else ("y", "x")

    fx = fy = None
    pbx = {}
    pby = {}
    cur = w
    for direction in order:
        if direction == "x":
            pbx.setdefault("vals", []).append(pressure(cur, gas))
            geom = (x0, dx, np.broadcast_to(yc[None, :], (NG, ny)))
            fx, cur = _pass_x(
                cur, dt, dx, scheme, gas, bc.left, bc.right, geom, t, freeze_mask,
                cut_mask=cut_mask,
            )
        else:
            pby.setdefault("vals", []).append(pressure(cur, gas))
            wt = swap_momenta(cur).transpose(1, 0, 2)
            mask_t = freeze_mask.T if freeze_mask is not None else None
            cut_t = cut_mask.T if cut_mask is not None else None
            geom = (y0, dy, np.broadcast_to(xc[None, :], (NG, nx)))
            ft, wt = _pass_x(
                wt, dt, dy, scheme, gas, bc.bottom, bc.top, geom, t, mask_t,
                swapped=True, cut_mask=cut_t,
            )
            cur = swap_momenta(wt.transpose(1, 0, 2))
            fy = swap_momenta(ft.transpose(1, 0, 2))
    pbar_x = np.mean(pbx["vals"], axis=0)
    pbar_y = np.mean(pby["vals"], axis=0)
    return SweepResult(w=cur, fx=fx, fy=fy, pbar_x=pbar_x, pbar_y=pbar_y)


def stable_dt(w, dx, dy, gas: GasModel, cfl: float, alpha=None):
    """CFL time step: cfl * min(dx, dy) / max over full cells of (|u|+c, |v|+c).

    Cut cells (alpha > 0) are excluded from the wave-speed maximum; the
    small-cell mixing removes their stability restriction.
    """
    w = np.asarray(w, dtype=float)
    if alpha is not None:
        mask = np.asarray(alpha) == 0.0
        if not np.any(mask):
            mask = np.asarray(alpha) < 1.0
        if not np.any(mask):
            raise ValueError("stable_dt: empty fluid domain")
        cells = w[mask]
    else:
        cells = w.reshape(-1, 4)
    if cells.size == 0:
        raise ValueError("stable_dt: empty fluid domain")
    rho = cells[..., RHO]
    u = cells[..., MX] / rho
    v = cells[..., MY] / rho
    p = (gas.gamma - 1.0) * (cells[..., EN] - 0.5 * rho * (u * u + v * v))
    if np.any(~(p > 0.0)) or np.any(~(rho > 0.0)):
        raise AdmissibilityError("stable_dt: inadmissible fluid state")
    c = np.sqrt(gas.gamma * p / rho)
    smax = max(np.max(np.abs(u) + c), np.max(np.abs(v) + c))
    return cfl * min(dx, dy) / smax
