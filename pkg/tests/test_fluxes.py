import numpy as np
import pytest

from cutfsi.fluxes import (
    FluxError,
    FluxScheme,
    eigen_basis,
    eigenvalues,
    high_order_flux,
    interface_flux_x,
    roe_average,
    roe_flux,
    wave_decompose,
)
from cutfsi.gas import GasModel, conserved_from_primitive, euler_flux

GAS = GasModel()


# ---------------------------------------------------------------------------
# independent oracle: |A| dissipation via numpy eigendecomposition of the
# analytic flux Jacobian at the Roe state (written before the solver itself)
# ---------------------------------------------------------------------------

def jacobian_x(u, v, H, gamma):
    g1 = gamma - 1.0
    phi2 = 0.5 * g1 * (u * u + v * v)
    return np.array(
        [
            [0.0, 1.0, 0.0, 0.0],
            [phi2 - u * u, (3.0 - gamma) * u, -g1 * v, g1],
            [-u * v, v, u, 0.0],
            [u * (phi2 - H), H - g1 * u * u, -g1 * u * v, gamma * u],
        ]
    )


def oracle_roe_flux(wL, wR, gamma):
    """Brute-force Roe flux: 0.5(fL+fR) - 0.5 R|L|R^-1 (wR-wL), no entropy fix."""
    gas = GasModel(gamma)
    rhoL, rhoR = wL[0], wR[0]
    sL, sR = np.sqrt(rhoL), np.sqrt(rhoR)
    uL, uR = wL[1] / rhoL, wR[1] / rhoR
    vL, vR = wL[2] / rhoL, wR[2] / rhoR
    pL = (gamma - 1) * (wL[3] - 0.5 * rhoL * (uL**2 + vL**2))
    pR = (gamma - 1) * (wR[3] - 0.5 * rhoR * (uR**2 + vR**2))
    HL, HR = (wL[3] + pL) / rhoL, (wR[3] + pR) / rhoR
    ub = (sL * uL + sR * uR) / (sL + sR)
    vb = (sL * vL + sR * vR) / (sL + sR)
    Hb = (sL * HL + sR * HR) / (sL + sR)
    A = jacobian_x(ub, vb, Hb, gamma)
    lam, R = np.linalg.eig(A)
    absA = (R * np.abs(lam)) @ np.linalg.inv(R)
    return 0.5 * (
        euler_flux(wL, "x", gas) + euler_flux(wR, "x", gas)
    ) - 0.5 * absA @ (wR - wL)


SOD_L = conserved_from_primitive(np.array([1.0, 0.0, 0.0, 1.0]), GAS)
SOD_R = conserved_from_primitive(np.array([0.125, 0.0, 0.0, 0.1]), GAS)


def test_roe_matches_brute_force_oracle_on_sod():
    mine = roe_flux(SOD_L, SOD_R, "x", GAS)  # fix inactive for these states
    ref = oracle_roe_flux(SOD_L, SOD_R, 1.4)
    assert np.allclose(mine, ref, rtol=1e-12, atol=1e-13)


def test_roe_matches_oracle_on_random_pairs():
    rng = np.random.default_rng(7)
    for _ in range(25):
        qL = np.array([rng.uniform(0.2, 4), rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(0.2, 5)])
        qR = np.array([rng.uniform(0.2, 4), rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(0.2, 5)])
        wL = conserved_from_primitive(qL, GAS)
        wR = conserved_from_primitive(qR, GAS)
        mine = roe_flux(wL, wR, "x", GAS, entropy_fix=False)
        ref = oracle_roe_flux(wL, wR, 1.4)
        assert np.allclose(mine, ref, rtol=1e-10, atol=1e-11)


def test_roe_property_jacobian_jump():
    # f(wR) - f(wL) = A(roe avg)(wR - wL) must hold exactly for Roe averages
    fL = euler_flux(SOD_L, "x", GAS)
    fR = euler_flux(SOD_R, "x", GAS)
    ub, vb, Hb, cb, rb = roe_average(SOD_L, SOD_R, GAS)
    A = jacobian_x(ub, vb, Hb, 1.4)
    assert np.allclose(fR - fL, A @ (SOD_R - SOD_L), rtol=1e-12, atol=1e-13)


def test_roe_consistency():
    w = conserved_from_primitive(np.array([2.0, 1.3, -0.4, 3.0]), GAS)
    assert np.allclose(roe_flux(w, w, "x", GAS), euler_flux(w, "x", GAS), rtol=1e-13)
    assert np.allclose(roe_flux(w, w, "y", GAS), euler_flux(w, "y", GAS), rtol=1e-13)


def test_roe_mirror_symmetry():
    # swapping L/R and negating normal velocities negates the mass flux
    qL = np.array([1.0, 0.7, 0.2, 1.0])
    qR = np.array([0.5, -0.3, 0.2, 0.4])
    wL = conserved_from_primitive(qL, GAS)
    wR = conserved_from_primitive(qR, GAS)
    f = roe_flux(wL, wR, "x", GAS)
    qLm, qRm = qR.copy(), qL.copy()
    qLm[1] *= -1
    qRm[1] *= -1
    fm = roe_flux(
        conserved_from_primitive(qLm, GAS), conserved_from_primitive(qRm, GAS), "x", GAS
    )
    assert np.isclose(fm[0], -f[0], rtol=1e-12, atol=1e-14)
    assert np.isclose(fm[1], f[1], rtol=1e-12, atol=1e-14)
    assert np.isclose(fm[3], -f[3], rtol=1e-12, atol=1e-14)


def test_wave_decomposition_reconstructs_jump():
    rng = np.random.default_rng(3)
    for _ in range(20):
        wL = conserved_from_primitive(
            np.array([rng.uniform(0.2, 3), rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(0.2, 4)]), GAS
        )
        wR = conserved_from_primitive(
            np.array([rng.uniform(0.2, 3), rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(0.2, 4)]), GAS
        )
        ub, vb, Hb, cb, rb = roe_average(wL, wR, GAS)
        alphas = wave_decompose(wR - wL, ub, vb, Hb, cb, rb, GAS)
        rs = eigen_basis(ub, vb, Hb, cb)
        recon = np.einsum("k,ki->i", alphas, rs)
        assert np.allclose(recon, wR - wL, rtol=1e-11, atol=1e-12)


def test_eigenvalue_order():
    w = conserved_from_primitive(np.array([1.0, 0.5, 0.0, 1.0]), GAS)
    ub, vb, Hb, cb, rb = roe_average(w, w, GAS)
    lam = eigenvalues(ub, cb)
    assert lam[0] < lam[1] == lam[2] < lam[3]


def test_degenerate_decomposition_flagged():
    wL = np.array([1.0, 2.0, 0.0, 1.0])  # kinetic energy exceeds total -> p < 0
    with pytest.raises(FluxError):
        roe_average(wL, wL, GAS)
    with pytest.raises(FluxError):
        roe_average(np.array([-1.0, 0.0, 0.0, 1.0]), wL, GAS)


@pytest.mark.parametrize("variant", ["roe", "mp2"])
def test_uniform_stencil_reduces_to_euler_flux(variant):
    w = conserved_from_primitive(np.array([1.3, 0.8, -0.1, 2.0]), GAS)
    stencil = np.stack([w, w, w, w])
    scheme = FluxScheme(variant=variant)
    f = high_order_flux(stencil, scheme, dt=1e-3, dx=0.01, gas=GAS)
    assert np.allclose(f, euler_flux(w, "x", GAS), rtol=1e-13)


def test_stencil_too_short():
    w = conserved_from_primitive(np.array([1.0, 0.0, 0.0, 1.0]), GAS)
    with pytest.raises(ValueError, match="too short"):
        high_order_flux(np.stack([w, w]), FluxScheme(variant="mp2"), 1e-3, 0.01, GAS)


def test_custom_slot_is_called():
    w = conserved_from_primitive(np.array([1.0, 0.0, 0.0, 1.0]), GAS)

    def first_order(stencil, dt, dx, gas):
        m = stencil.shape[0] // 2
        return roe_flux(stencil[m - 1], stencil[m], "x", gas)

    scheme = FluxScheme(variant="custom", order=2, custom=first_order)
    f = high_order_flux(np.stack([w] * 4), scheme, 1e-3, 0.01, GAS)
    assert np.allclose(f, euler_flux(w, "x", GAS), rtol=1e-13)


def _advect_row(rho_profile, scheme, n, steps, cfl=0.4):
    """Advect a density profile at u=1, p=1 on a periodic row; return final rho."""
    dx = 1.0 / n
    x = (np.arange(n) + 0.5) * dx
    q = np.stack([rho_profile(x), np.ones(n), np.zeros(n), np.ones(n)], axis=-1)
    w = conserved_from_primitive(q, GAS)
    dt = cfl * dx / (1.0 + np.sqrt(1.4 * 1.0 / q[:, 0].min()))
    for _ in range(steps):
        wp = np.concatenate([w[-2:], w, w[:2]], axis=0)
        f = interface_flux_x(wp[:-3], wp[1:-2], wp[2:-1], wp[3:], dt, dx, scheme, GAS)
        w = w - dt / dx * (f[1:] - f[:-1])
    return w[:, 0], dt * steps


def test_mp2_smooth_advection_order():
    # L1 self-convergence against the exact translated profile
    prof = lambda x: 1.0 + 0.2 * np.sin(2 * np.pi * x)
    errs, hs = [], []
    for n in (64, 128, 256):
        scheme = FluxScheme(variant="mp2")
        dx = 1.0 / n
        steps = 200 * n // 64
        rho, t_final = _advect_row(prof, scheme, n, steps)
        x = (np.arange(n) + 0.5) * dx
        exact = prof(x - t_final)
        errs.append(np.mean(np.abs(rho - exact)))
        hs.append(dx)
    slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    assert slope >= 1.8, f"advection order {slope:.2f} < 1.8"


@pytest.mark.parametrize("limiter", ["minmod", "mc"])
def test_mp2_square_wave_monotone(limiter):
    prof = lambda x: np.where((x > 0.25) & (x < 0.75), 2.0, 1.0)
    scheme = FluxScheme(variant="mp2", limiter=limiter)
    rho, _ = _advect_row(prof, scheme, 128, 300)
    assert rho.max() <= 2.0 + 1e-12
    assert rho.min() >= 1.0 - 1e-12
