"""Rigid bodies and their symplectic constrained time integrator.

Bodies carry the full 3D representation (rotation matrix Q, angular
momentum matrix P, inertia data d_i = (I1+I2+I3)/2 - I_i); planar scenarios
embed their bodies with z-symmetric inertia and in-plane loads, which the
update preserves identically.  The rotation constraint Q^T Q = I and the
hidden momentum constraint are enforced through symmetric Lagrange
multipliers each half step.

Three kinds of motion are supported: free bodies (full update), hinged
bodies (scalar rotation about a fixed pivot, the force resultant being
absorbed by the pivot), and static bodies (loads accumulate, motion is
suppressed).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

MULTIPLIER_TOL = 1e-13
MULTIPLIER_MAX_ITER = 50


class IntegratorError(RuntimeError):
    """Constraint multiplier iteration failed to converge."""


def hat(v):
    """Cross-product matrix: hat(x) @ y == x ^ y."""
    return np.array(
        [[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]], dtype=float
    )


def rot_z(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


@dataclass(frozen=True)
class LoadSet:
    """Total force and torque on one body; torque is taken about `ref`."""

    force: np.ndarray
    torque: np.ndarray
    ref: np.ndarray = field(default_factory=lambda: np.zeros(3))

    @staticmethod
    def zero(ref=None):
        return LoadSet(
            np.zeros(3), np.zeros(3), np.zeros(3) if ref is None else np.asarray(ref)
        )


@dataclass
class RigidBody:
    """State of one rigid body.

    d holds the diagonal of D = diag(d_i); X0/Q0-relative material
    coordinates are fixed at construction (polygon0 for the footprint).
    Half-step quantities V_half and Qdot_half = P^{n+1/2} D^{-1} are stored
    by the position update and consumed by face-velocity evaluation.
    """

    mass: float
    d: np.ndarray
    X: np.ndarray
    Q: np.ndarray
    V: np.ndarray
    P: np.ndarray
    X0: np.ndarray
    polygon0: np.ndarray
    body_id: int = 0
    planar: bool = True
    static: bool = False
    pivot: Optional[np.ndarray] = None
    # hinge state (scalar angle dynamics about the pivot); stops model
    # rigid contact limits of the rotation angle (elastic reflection)
    theta: float = 0.0
    omega: float = 0.0
    i_pivot: float = 0.0
    stops: Optional[tuple] = None
    # half-step kinematics
    V_half: np.ndarray = field(default_factory=lambda: np.zeros(3))
    Qdot_half: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))
    P_half: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))

    def copy(self) -> "RigidBody":
        return RigidBody(
            mass=self.mass,
            d=self.d.copy(),
            X=self.X.copy(),
            Q=self.Q.copy(),
            V=self.V.copy(),
            P=self.P.copy(),
            X0=self.X0.copy(),
            polygon0=self.polygon0,
            body_id=self.body_id,
            planar=self.planar,
            static=self.static,
            pivot=None if self.pivot is None else self.pivot.copy(),
            theta=self.theta,
            omega=self.omega,
            i_pivot=self.i_pivot,
            stops=self.stops,
            V_half=self.V_half.copy(),
            Qdot_half=self.Qdot_half.copy(),
            P_half=self.P_half.copy(),
        )

    # -- kinematics ---------------------------------------------------------

    def world_vertices(self):
        """Footprint polygon at the current pose, as an (m, 2) array."""
        rel = self.polygon0 - self.X0[:2]
        return (rel @ self.Q[:2, :2].T) + self.X[:2]

    def material_point(self, x_world):
        """Pull a current-time world point back to its initial position."""
        x3 = np.array([x_world[0], x_world[1], 0.0])
        return self.X0 + self.Q.T @ (x3 - self.X)

    def point_velocity_half(self, x_material):
        """Half-step velocity of the material point initially at x_material."""
        x3 = np.zeros(3)
        x3[: len(x_material)] = x_material
        return self.V_half + self.Qdot_half @ (x3 - self.X0)

    def kinetic_energy(self) -> float:
        if self.static:
            return 0.0
        if self.pivot is not None:
            return 0.5 * self.i_pivot * self.omega**2
        rot = 0.5 * np.trace(self.P @ np.diag(1.0 / self.d) @ self.P.T)
        return 0.5 * self.mass * float(self.V @ self.V) + rot

    def constraint_residuals(self):
        """(orthogonality, hidden-constraint) Frobenius residuals."""
        r1 = np.linalg.norm(self.Q.T @ self.Q - np.eye(3))
        dinv = np.diag(1.0 / self.d)
        r2 = np.linalg.norm(self.Q.T @ self.P @ dinv + dinv @ self.P.T @ self.Q)
        return r1, r2


def make_planar_body(
    polygon,
    density=None,
    mass=None,
    velocity=(0.0, 0.0),
    omega=0.0,
    pivot=None,
    static=False,
    body_id=0,
    inertia=None,
    stops=None,
):
    """Build a planar rigid body from a CCW footprint polygon.

    Mass and moment of inertia derive from the polygon and `density`
    unless given explicitly.  The z-symmetric embedding d1 = d2 = d3 =
    I_z/2 represents the 2D body inside the 3D formulation.
    """
    from .geometry import ensure_ccw, polygon_moments

    poly = ensure_ccw(polygon)
    area, centroid, izz_unit = polygon_moments(poly)
    if mass is None:
        if density is None:
            raise ValueError("need density or mass")
        mass = density * area
    izz = inertia if inertia is not None else (density if density else mass / area) * izz_unit
    X0 = np.array([centroid[0], centroid[1], 0.0])
    d = np.full(3, max(izz, 1e-300) / 2.0)
    body = RigidBody(
        mass=float(mass),
        d=d,
        X=X0.copy(),
        Q=np.eye(3),
        V=np.array([velocity[0], velocity[1], 0.0]),
        P=np.zeros((3, 3)),
        X0=X0,
        polygon0=poly,
        body_id=body_id,
        planar=True,
        static=static,
        pivot=None if pivot is None else np.array([pivot[0], pivot[1], 0.0]),
    )
    if omega != 0.0:
        body.P = hat(np.array([0.0, 0.0, omega])) @ body.Q @ np.diag(body.d)
    if body.pivot is not None:
        arm = body.X - body.pivot
        body.i_pivot = izz + mass * float(arm @ arm)
        body.omega = omega
        body.stops = None if stops is None else (float(stops[0]), float(stops[1]))
    return body


# ---------------------------------------------------------------------------
# RATTLE update
# ---------------------------------------------------------------------------

def _planar_loads(body, loads: LoadSet):
    F = np.asarray(loads.force, dtype=float).copy()
    M = np.asarray(loads.torque, dtype=float).copy()
    if body.planar:
        F[2] = 0.0
        M[0] = M[1] = 0.0
    return F, M


def _pivot_torque(body, loads: LoadSet):
    F, M = _planar_loads(body, loads)
    arm = np.asarray(loads.ref, dtype=float) - body.pivot
    return M[2] + arm[0] * F[1] - arm[1] * F[0]


def _solve_position_multiplier(Q, A, d, c):
    """Symmetric Z with (A + c Q Z D^-1) orthogonal; returns (Z, Q_new)."""
    dinv = 1.0 / d
    denom = c * (dinv[:, None] + dinv[None, :])
    Z = np.zeros((3, 3))
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(MULTIPLIER_MAX_ITER):
            Q1 = A + c * Q @ Z * dinv[None, :]
            G = np.eye(3) - Q1.T @ Q1
            res = np.max(np.abs(G))
            if not np.isfinite(res):
                break
            if res < MULTIPLIER_TOL:
                return Z, Q1
            Z = Z + G / denom
    raise IntegratorError("position constraint multiplier did not converge")


def rattle_advance_positions(body: RigidBody, loads: LoadSet, dt: float) -> RigidBody:
    """First half of the constrained step: X, Q to t+dt, half-step momenta."""
    out = body.copy()
    if body.static:
        out.V_half = np.zeros(3)
        out.Qdot_half = np.zeros((3, 3))
        out.P_half = np.zeros((3, 3))
        return out
    if body.pivot is not None:
        tau = _pivot_torque(body, loads)
        omega_half = body.omega + 0.5 * dt * tau / body.i_pivot
        theta1 = body.theta + dt * omega_half
        if body.stops is not None:
            # inelastic hinge limit: the rotation rests at the stop until
            # the load torque pulls it back (a reflecting stop would pump
            # energy under a sustained pressing torque)
            lo, hi = body.stops
            if theta1 > hi:
                theta1 = hi
                omega_half = 0.0
            elif theta1 < lo:
                theta1 = lo
                omega_half = 0.0
        Q1 = rot_z(theta1)
        X1 = body.pivot + Q1 @ (body.X0 - body.pivot)
        out.V_half = (X1 - body.X) / dt
        out.Qdot_half = (Q1 - body.Q) / dt
        out.P_half = out.Qdot_half @ np.diag(body.d)
        out.theta, out.omega = theta1, omega_half
        out.X, out.Q = X1, Q1
        out.V = out.V_half  # representative; finalize sets the full-step value
        return out

    F, M = _planar_loads(body, loads)
    V_half = body.V + 0.5 * dt / body.mass * F
    X1 = body.X + dt * V_half
    P0 = body.P + 0.25 * dt * hat(M) @ body.Q
    A = body.Q + dt * P0 * (1.0 / body.d)[None, :]
    Z, Q1 = _solve_position_multiplier(body.Q, A, body.d, 0.5 * dt * dt)
    P_half = P0 + 0.5 * dt * body.Q @ Z
    out.V_half = V_half
    out.P_half = P_half
    out.Qdot_half = P_half * (1.0 / body.d)[None, :]
    out.X, out.Q = X1, Q1
    return out


def rattle_finalize_velocities(body: RigidBody, loads: LoadSet, dt: float) -> RigidBody:
    """Second half: velocities at t+dt with the hidden-constraint multiplier.

    In the coupled algorithm the caller passes the same fluid loads as in
    the first half (pressure force and torque are held constant over the
    step).
    """
    out = body.copy()
    if body.static:
        return out
    if body.pivot is not None:
        tau = _pivot_torque(body, loads)
        out.omega = body.omega + 0.5 * dt * tau / body.i_pivot
        out.V = hat(np.array([0.0, 0.0, out.omega])) @ (body.X - body.pivot)
        return out

    F, M = _planar_loads(body, loads)
    out.V = body.V_half + 0.5 * dt / body.mass * F
    P00 = body.P_half + 0.25 * dt * hat(M) @ body.Q
    dinv = 1.0 / body.d
    R0 = body.Q.T @ P00 * dinv[None, :] + (P00 * dinv[None, :]).T @ body.Q
    Mt = -R0 / (0.5 * dt * (dinv[:, None] + dinv[None, :]))
    out.P = P00 + 0.5 * dt * body.Q @ Mt
    return out


def face_velocity(body: RigidBody, face) -> np.ndarray:
    """Half-step velocity of a boundary face center (2-vector).

    Evaluates the rigid velocity field at the face's material point, which
    equals the per-step displacement rate of that point exactly.
    """
    if face.X0 is None:
        raise ValueError("face lacks a material reference point")
    return body.point_velocity_half(face.X0)[:2]


def accumulate_pressure_loads(faces, body: RigidBody) -> LoadSet:
    """Total pressure force and torque (about the body center) on `faces`.

    Per face: F_x = -p_x S n_x, F_y = -p_y S n_y, with the directional
    pressures sampled by the flux precomputation; torque keeps only the
    z component in planar mode.
    """
    F = np.zeros(3)
    M = np.zeros(3)
    for f in faces:
        if not np.isfinite(f.p_x) or not np.isfinite(f.p_y):
            raise ValueError("face with unset boundary pressures")
        fx = -f.p_x * f.S * f.n[0]
        fy = -f.p_y * f.S * f.n[1]
        F[0] += fx
        F[1] += fy
        rx = f.X[0] - body.X[0]
        ry = f.X[1] - body.X[1]
        M[2] += rx * fy - ry * fx
    return LoadSet(force=F, torque=M, ref=body.X.copy())
