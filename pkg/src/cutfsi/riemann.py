"""Exact Riemann solver for the 1D Euler equations (perfect gas).

Star-region pressure from Newton iteration on the standard pressure
function; self-similar sampling in xi = x/t.  The transverse velocity is
passively advected with the contact.  Used as the independent ground truth
for shock-tube verification and wall-reflection checks.
"""

from __future__ import annotations

import numpy as np

from .gas import GasModel


class VacuumError(RuntimeError):
    """The data generate vacuum; the solver does not cover that regime."""


def _pressure_fn(p, rho_k, p_k, c_k, g):
    """f_K(p) and df_K/dp for one side (shock or rarefaction branch)."""
    if p > p_k:
        a = 2.0 / ((g + 1.0) * rho_k)
        b = (g - 1.0) / (g + 1.0) * p_k
        root = np.sqrt(a / (p + b))
        f = (p - p_k) * root
        df = root * (1.0 - 0.5 * (p - p_k) / (p + b))
    else:
        f = 2.0 * c_k / (g - 1.0) * ((p / p_k) ** ((g - 1.0) / (2.0 * g)) - 1.0)
        df = (p / p_k) ** (-(g + 1.0) / (2.0 * g)) / (rho_k * c_k)
    return f, df


def star_state(qL, qR, gas: GasModel):
    """Star-region (p*, u*) for left/right primitive states (rho, u, v, p)."""
    g = gas.gamma
    rhoL, uL, pL = qL[0], qL[1], qL[3]
    rhoR, uR, pR = qR[0], qR[1], qR[3]
    cL = np.sqrt(g * pL / rhoL)
    cR = np.sqrt(g * pR / rhoR)
    if 2.0 * (cL + cR) / (g - 1.0) <= uR - uL:
        raise VacuumError("initial states generate vacuum")
    # two-rarefaction estimate is positive and a good Newton start
    z = (g - 1.0) / (2.0 * g)
    p = ((cL + cR - 0.5 * (g - 1.0) * (uR - uL)) / (cL / pL**z + cR / pR**z)) ** (1.0 / z)
    p = max(p, 1e-14 * min(pL, pR))
    for _ in range(100):
        fL, dL = _pressure_fn(p, rhoL, pL, cL, g)
        fR, dR = _pressure_fn(p, rhoR, pR, cR, g)
        dp = (fL + fR + uR - uL) / (dL + dR)
        p_new = max(p - dp, 1e-14 * min(pL, pR))
        if abs(p_new - p) <= 1e-14 * p_new:
            p = p_new
            break
        p = p_new
    fL, _ = _pressure_fn(p, rhoL, pL, cL, g)
    fR, _ = _pressure_fn(p, rhoR, pR, cR, g)
    u = 0.5 * (uL + uR) + 0.5 * (fR - fL)
    return p, u


def exact_riemann(qL, qR, gas: GasModel, xi):
    """Sample the exact solution at xi = x/t; returns (rho, u, v, p) array.

    xi may be scalar or array; output shape is xi.shape + (4,).
    """
    g = gas.gamma
    qL = np.asarray(qL, dtype=float)
    qR = np.asarray(qR, dtype=float)
    rhoL, uL, vL, pL = qL
    rhoR, uR, vR, pR = qR
    cL = np.sqrt(g * pL / rhoL)
    cR = np.sqrt(g * pR / rhoR)
    ps, us = star_state(qL, qR, gas)
    xi = np.asarray(xi, dtype=float)
    scalar = xi.ndim == 0
    xi = np.atleast_1d(xi)

    rho = np.empty_like(xi)
    u = np.empty_like(xi)
    p = np.empty_like(xi)
    v = np.where(xi < us, vL, vR)

    gp = (g + 1.0) / (2.0 * g)
    gm = (g - 1.0) / (2.0 * g)

    left = xi < us
    if ps > pL:  # left shock
        sL = uL - cL * np.sqrt(gp * ps / pL + gm)
        rho_sL = rhoL * ((ps / pL + (g - 1) / (g + 1)) / ((g - 1) / (g + 1) * ps / pL + 1))
        m = left & (xi < sL)
        rho[m], u[m], p[m] = rhoL, uL, pL
        m = left & (xi >= sL)
        rho[m], u[m], p[m] = rho_sL, us, ps
    else:  # left rarefaction
        c_sL = cL * (ps / pL) ** gm
        head, tail = uL - cL, us - c_sL
        m = left & (xi < head)
        rho[m], u[m], p[m] = rhoL, uL, pL
        m = left & (xi >= head) & (xi <= tail)
        cf = (2.0 / (g + 1.0)) * (cL + 0.5 * (g - 1.0) * (uL - xi[m]))
        u[m] = (2.0 / (g + 1.0)) * (cL + 0.5 * (g - 1.0) * uL + xi[m])
        rho[m] = rhoL * (cf / cL) ** (2.0 / (g - 1.0))
        p[m] = pL * (cf / cL) ** (2.0 * g / (g - 1.0))
        m = left & (xi > tail)
        rho[m] = rhoL * (ps / pL) ** (1.0 / g)
        u[m], p[m] = us, ps

    right = ~left
    if ps > pR:  # right shock
        sR = uR + cR * np.sqrt(gp * ps / pR + gm)
        rho_sR = rhoR * ((ps / pR + (g - 1) / (g + 1)) / ((g - 1) / (g + 1) * ps / pR + 1))
        m = right & (xi > sR)
        rho[m], u[m], p[m] = rhoR, uR, pR
        m = right & (xi <= sR)
        rho[m], u[m], p[m] = rho_sR, us, ps
    else:  # right rarefaction
        c_sR = cR * (ps / pR) ** gm
        head, tail = uR + cR, us + c_sR
        m = right & (xi > head)
        rho[m], u[m], p[m] = rhoR, uR, pR
        m = right & (xi >= tail) & (xi <= head)
        cf = (2.0 / (g + 1.0)) * (cR - 0.5 * (g - 1.0) * (uR - xi[m]))
        u[m] = (2.0 / (g + 1.0)) * (-cR + 0.5 * (g - 1.0) * uR + xi[m])
        rho[m] = rhoR * (cf / cR) ** (2.0 / (g - 1.0))
        p[m] = pR * (cf / cR) ** (2.0 * g / (g - 1.0))
        m = right & (xi < tail)
        rho[m] = rhoR * (ps / pR) ** (1.0 / g)
        u[m], p[m] = us, ps

    out = np.stack([rho, u, v, p], axis=-1)
    return out[0] if scalar else out
