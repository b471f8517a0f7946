"""Perfect-gas state handling for the 2D compressible Euler equations.

Conserved state vectors are numpy arrays whose last axis holds
(rho, rho*u, rho*v, rho*E); primitive vectors hold (rho, u, v, p).
All functions broadcast over leading axes so a whole grid can be
converted at once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# component indices of a conserved vector
RHO, MX, MY, EN = 0, 1, 2, 3


class AdmissibilityError(ValueError):
    """Raised when a state has non-positive density or internal energy."""


@dataclass(frozen=True)
class GasModel:
    """Perfect gas closure p = (gamma-1)(rho E - 0.5 rho |u|^2)."""

    gamma: float = 1.4

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")


def _first_bad_index(mask):
    idx = np.argwhere(mask)
    return tuple(int(k) for k in idx[0]) if idx.size else None


def check_admissible(w, gas: GasModel, where: str = "state"):
    """Raise AdmissibilityError identifying the first offending cell."""
    w = np.asarray(w, dtype=float)
    rho = w[..., RHO]
    bad = ~(rho > 0.0)
    if np.any(bad):
        raise AdmissibilityError(
            f"{where}: non-positive density at cell {_first_bad_index(bad)}"
        )
    eint = w[..., EN] - 0.5 * (w[..., MX] ** 2 + w[..., MY] ** 2) / rho
    bad = ~(eint > 0.0)
    if np.any(bad):
        raise AdmissibilityError(
            f"{where}: non-positive internal energy at cell {_first_bad_index(bad)}"
        )


def primitive_from_conserved(w, gas: GasModel):
    """Convert (rho, mx, my, rhoE) -> (rho, u, v, p); validates admissibility."""
    w = np.asarray(w, dtype=float)
    check_admissible(w, gas, "primitive_from_conserved")
    rho = w[..., RHO]
    u = w[..., MX] / rho
    v = w[..., MY] / rho
    p = (gas.gamma - 1.0) * (w[..., EN] - 0.5 * rho * (u * u + v * v))
    return np.stack([rho, u, v, p], axis=-1)


def conserved_from_primitive(q, gas: GasModel):
    """Convert (rho, u, v, p) -> (rho, mx, my, rhoE)."""
    q = np.asarray(q, dtype=float)
    rho, u, v, p = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    if np.any(~(rho > 0.0)) or np.any(~(p > 0.0)):
        raise AdmissibilityError("conserved_from_primitive: rho and p must be positive")
    rho_e = p / (gas.gamma - 1.0) + 0.5 * rho * (u * u + v * v)
    return np.stack([rho, rho * u, rho * v, rho_e], axis=-1)


def pressure(w, gas: GasModel):
    """Pressure field of a conserved state array (no admissibility check)."""
    w = np.asarray(w, dtype=float)
    rho = w[..., RHO]
    return (gas.gamma - 1.0) * (
        w[..., EN] - 0.5 * (w[..., MX] ** 2 + w[..., MY] ** 2) / rho
    )


def sound_speed(w, gas: GasModel):
    w = np.asarray(w, dtype=float)
    return np.sqrt(gas.gamma * pressure(w, gas) / w[..., RHO])


def euler_flux(w, axis: str, gas: GasModel):
    """Physical Euler flux along 'x' or 'y', per unit face length per unit time."""
    w = np.asarray(w, dtype=float)
    check_admissible(w, gas, "euler_flux")
    rho = w[..., RHO]
    u = w[..., MX] / rho
    v = w[..., MY] / rho
    p = (gas.gamma - 1.0) * (w[..., EN] - 0.5 * rho * (u * u + v * v))
    if axis == "x":
        return np.stack(
            [w[..., MX], w[..., MX] * u + p, w[..., MY] * u, (w[..., EN] + p) * u],
            axis=-1,
        )
    if axis == "y":
        return np.stack(
            [w[..., MY], w[..., MX] * v, w[..., MY] * v + p, (w[..., EN] + p) * v],
            axis=-1,
        )
    raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")


def swap_momenta(w):
    """Exchange the two momentum components (used to reuse x-kernels in y)."""
    return np.stack([w[..., RHO], w[..., MY], w[..., MX], w[..., EN]], axis=-1)
