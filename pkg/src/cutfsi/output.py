"""Field and trajectory writers: legacy VTK structured points and CSV."""

from __future__ import annotations

import csv

import numpy as np


def write_vtk(path, grid, prim, alpha, title="cutfsi snapshot"):
    """Legacy-VTK structured-points file with cell data (rho, u, v, p, alpha)."""
    nx, ny = grid.nx, grid.ny
    names = ["rho", "u", "v", "p"]
    with open(path, "w") as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write(f"{title}\n")
        fh.write("ASCII\n")
        fh.write("DATASET STRUCTURED_POINTS\n")
        fh.write(f"DIMENSIONS {nx + 1} {ny + 1} 1\n")
        fh.write(f"ORIGIN {grid.x0} {grid.y0} 0.0\n")
        fh.write(f"SPACING {grid.dx} {grid.dy} 1.0\n")
        fh.write(f"CELL_DATA {nx * ny}\n")
        for k, name in enumerate(names):
            fh.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
            # vtk cell order: x fastest
            np.savetxt(fh, prim[..., k].T.reshape(ny, nx), fmt="%.17g")
        fh.write("SCALARS alpha double 1\nLOOKUP_TABLE default\n")
        np.savetxt(fh, np.asarray(alpha).T.reshape(ny, nx), fmt="%.17g")


def write_field_csv(path, grid, prim, alpha):
    """One row per cell: x, y, rho, u, v, p, alpha."""
    nx, ny = grid.nx, grid.ny
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["x", "y", "rho", "u", "v", "p", "alpha"])
        for j in range(ny):
            for i in range(nx):
                x = grid.x0 + (i + 0.5) * grid.dx
                y = grid.y0 + (j + 0.5) * grid.dy
                wr.writerow(
                    [repr(x), repr(y)]
                    + [repr(v) for v in prim[i, j]]
                    + [repr(float(alpha[i, j]))]
                )


def write_bodies_csv(path, records):
    """Trajectories: one row per (step, body): t, body, x, y, theta, vx, vy, omega."""
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["t", "body", "x", "y", "theta", "vx", "vy", "omega"])
        for r in records:
            wr.writerow(
                [repr(r["t"]), r["body"]]
                + [repr(r[k]) for k in ("x", "y", "theta", "vx", "vy", "omega")]
            )
