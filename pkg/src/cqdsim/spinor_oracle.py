"""Direct physical-time integration of the electron spinor.

This is the slow, independent route: the untransformed Schrodinger equation
with the explicit field components. Two integrators are offered: scipy's
DOP853 (``"dop853"``) and an exactly unitary fourth-order Magnus scheme with
step-doubling control (``"magnus4"``). The module exists to check
:mod:`cqdsim.majorana_ode` (|c1(t)| must equal |f(tau(t))|) and is never used
in the production sweep.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np
from scipy.constants import hbar
from scipy.integrate import solve_ivp

from . import model
from .majorana_ode import IntegrationError, NumericalBlowupError, OdeParams, integrate

# gamma_e is negative for the electron; magnitudes live in PhysicalConstants
GAMMA_E_SIGN = -1.0


@dataclass(frozen=True)
class SpinorState:
    c1: complex
    c2: complex

    @property
    def norm2(self):
        return abs(self.c1) ** 2 + abs(self.c2) ** 2


UP = SpinorState(1.0 + 0j, 0j)


@dataclass(frozen=True)
class SpinorTrajectory:
    t: np.ndarray
    c1: np.ndarray
    c2: np.ndarray
    n_steps: int

    def norm_error(self):
        return float(np.max(np.abs(np.abs(self.c1) ** 2 + np.abs(self.c2) ** 2 - 1.0)))


def azimuth(t, params, phi_n0):
    """phi_n(t) = w_n tau(t) + phi_n0."""
    return params.w_n * model.tau_of_t(t, params) + phi_n0


def hamiltonian(t, theta_n, phi_n, params, constants=model.DEFAULT_CONSTANTS):
    """-1/2 hbar gamma_e B.sigma in joules, as a 2x2 complex matrix."""
    Bx, By, Bz = model.total_field(t, theta_n, phi_n, params)
    pref = -0.5 * hbar * GAMMA_E_SIGN * constants.gamma_e_mag
    return pref * np.array([[Bz, Bx - 1j * By], [Bx + 1j * By, -Bz]], dtype=complex)


@numba.njit(cache=True, inline="always")
def _field_vector(s, w_s, transverse, Gza, Gv_scaled, B_z0, w_n, tau_offset, phi_n0):
    # s is alpha * t; returns the rotation-rate vector a with dc/ds = i (a.sigma) c
    phi = w_n * (s + tau_offset) + phi_n0
    return (
        w_s * transverse * math.cos(phi),
        w_s * (Gza + transverse * math.sin(phi)),
        w_s * (Gv_scaled * s + B_z0),
    )


@numba.njit(cache=True, inline="always")
def _magnus_step(s, h, c1, c2, w_s, transverse, Gza, Gv_scaled, B_z0, w_n, tau_offset, phi_n0):
    r = math.sqrt(3.0) / 6.0
    ax1, ay1, az1 = _field_vector(s + h * (0.5 - r), w_s, transverse, Gza, Gv_scaled, B_z0, w_n, tau_offset, phi_n0)
    ax2, ay2, az2 = _field_vector(s + h * (0.5 + r), w_s, transverse, Gza, Gv_scaled, B_z0, w_n, tau_offset, phi_n0)
    # Omega = i (omega . sigma); the commutator of two su(2) generators is a cross product
    k = math.sqrt(3.0) / 6.0 * h * h
    ox = 0.5 * h * (ax1 + ax2) - k * (ay2 * az1 - az2 * ay1)
    oy = 0.5 * h * (ay1 + ay2) - k * (az2 * ax1 - ax2 * az1)
    oz = 0.5 * h * (az1 + az2) - k * (ax2 * ay1 - ay2 * ax1)
    norm = math.sqrt(ox * ox + oy * oy + oz * oz)
    cs = math.cos(norm)
    sn = math.sin(norm) / norm if norm > 0.0 else 1.0
    # exp(i omega.sigma) = cos|omega| + i sin|omega| (n.sigma)
    u11 = complex(cs, sn * oz)
    u12 = complex(sn * oy, sn * ox)
    u21 = complex(-sn * oy, sn * ox)
    u22 = complex(cs, -sn * oz)
    return u11 * c1 + u12 * c2, u21 * c1 + u22 * c2


@numba.njit(cache=True, nogil=True)
def _magnus_solve(s0, out_s, c1, c2, rtol, atol, w_s, transverse, Gza, Gv_scaled, B_z0, w_n, tau_offset, phi_n0, out):
    s = s0
    h = 1e-3
    steps = 0
    for j in range(out_s.shape[0]):
        target = out_s[j]
        while s < target:
            h_try = min(h, target - s)
            b1, b2 = _magnus_step(s, h_try, c1, c2, w_s, transverse, Gza, Gv_scaled, B_z0, w_n, tau_offset, phi_n0)
            m1, m2 = _magnus_step(s, 0.5 * h_try, c1, c2, w_s, transverse, Gza, Gv_scaled, B_z0, w_n, tau_offset, phi_n0)
            m1, m2 = _magnus_step(s + 0.5 * h_try, 0.5 * h_try, m1, m2, w_s, transverse, Gza, Gv_scaled, B_z0, w_n, tau_offset, phi_n0)
            sc = atol + rtol * math.sqrt(abs(m1) ** 2 + abs(m2) ** 2)
            err = math.sqrt(abs(b1 - m1) ** 2 + abs(b2 - m2) ** 2) / 15.0 / sc
            if err <= 1.0:
                s = target if h_try == target - s else s + h_try
                c1 = m1
                c2 = m2
                steps += 1
                fac = 5.0 if err == 0.0 else min(5.0, 0.9 * err ** (-0.2))
                h = max(h, h_try * fac) if h_try < h else h_try * fac
            else:
                h = h_try * max(0.2, 0.9 * err ** (-0.2))
            if h < 1e-15:
                return -1, s, steps
        out[j, 0] = c1
        out[j, 1] = c2
    return 0, s, steps


def integrate_spinor(
    initial,
    t_window,
    orientation,
    params,
    t_eval=None,
    rel_tol=1e-10,
    abs_tol=1e-10,
    constants=model.DEFAULT_CONSTANTS,
    sweep_sign=1.0,
    method="dop853",
):
    """Solve i hbar dc/dt = H c over ``t_window`` (seconds).

    ``sweep_sign=-1`` reverses the longitudinal sweep (B_z -> -B_z); it is
    only meant for symmetry checks with B_n = 0.
    """
    if method == "magnus4":
        return _integrate_magnus(initial, t_window, orientation, params, t_eval, rel_tol, abs_tol, constants, sweep_sign)
    if method != "dop853":
        raise ValueError(f"unknown spinor method {method!r}")
    theta_n = orientation.theta_n0
    w = 0.5 * GAMMA_E_SIGN * constants.gamma_e_mag  # dc/dt = i w (B.sigma) c
    transverse = params.B_n_mag * math.sin(theta_n)
    B_z0 = params.B_n_mag * math.cos(theta_n)
    Gza = params.G * params.z_a
    Gv = params.G * params.v

    def rhs(t, c):
        phi = params.w_n * (params.alpha * t + params.tau_offset) + orientation.phi_n0
        bx = transverse * math.cos(phi)
        by = Gza + transverse * math.sin(phi)
        bz = sweep_sign * Gv * t + B_z0
        c1, c2 = c
        return np.array([
            1j * w * (bz * c1 + (bx - 1j * by) * c2),
            1j * w * ((bx + 1j * by) * c1 - bz * c2),
        ])

    # time in units of 1/alpha keeps the solver's step heuristics well scaled
    scale = 1.0 / params.alpha
    t0, t1 = t_window
    sol = solve_ivp(
        lambda s, c: scale * rhs(s * scale, c),
        (t0 / scale, t1 / scale),
        np.array([initial.c1, initial.c2], dtype=complex),
        method="DOP853",
        rtol=rel_tol,
        atol=abs_tol,
        t_eval=None if t_eval is None else np.asarray(t_eval) / scale,
    )
    if not sol.success:
        raise IntegrationError(sol.message, model.tau_of_t(sol.t[-1] * scale, params))
    if not np.all(np.isfinite(sol.y)):
        raise NumericalBlowupError("non-finite spinor", model.tau_of_t(sol.t[-1] * scale, params))
    return SpinorTrajectory(t=sol.t * scale, c1=sol.y[0], c2=sol.y[1], n_steps=int(sol.nfev))


def _integrate_magnus(initial, t_window, orientation, params, t_eval, rel_tol, abs_tol, constants, sweep_sign):
    a = params.alpha
    t0, t1 = t_window
    out_t = np.array([t1]) if t_eval is None else np.asarray(t_eval, dtype=float)
    if out_t[0] < t0 or out_t[-1] > t1:
        raise ValueError("t_eval must lie inside t_window")
    out = np.empty((out_t.shape[0], 2), np.complex128)
    transverse = params.B_n_mag * math.sin(orientation.theta_n0)
    status, s_end, steps = _magnus_solve(
        a * t0, a * out_t, complex(initial.c1), complex(initial.c2), rel_tol, abs_tol,
        0.5 * GAMMA_E_SIGN * constants.gamma_e_mag / a,
        transverse,
        params.G * params.z_a,
        sweep_sign * params.G * params.v / a,
        params.B_n_mag * math.cos(orientation.theta_n0),
        params.w_n,
        params.tau_offset,
        orientation.phi_n0,
        out,
    )
    if status != 0:
        raise IntegrationError("step size underflow", model.tau_of_t(s_end / a, params))
    return SpinorTrajectory(t=out_t, c1=out[:, 0], c2=out[:, 1], n_steps=int(steps))


def to_majorana_frame(state, tau):
    """(f, g) with c1 = exp(-i tau^2) f and c2 = exp(+i tau^2) g."""
    phase = np.exp(1j * np.asarray(tau) ** 2)
    return state.c1 * phase, state.c2 / phase


def from_majorana_frame(f, g, tau):
    phase = np.exp(1j * np.asarray(tau) ** 2)
    return SpinorState(f / phase, g * phase)


def frame_equivalence_error(
    current,
    orientation,
    *,
    v=800.0,
    z_a=1.05e-4,
    B_r=0.42e-4,
    tau_start=-30.0,
    tau_end=60.0,
    n_points=4000,
    rel_tol=1e-10,
    abs_tol=1e-10,
    constants=model.DEFAULT_CONSTANTS,
    ode_overrides=None,
    method="dop853",
):
    """sup over a shared grid of | |c1(t)| - |f(tau(t))| | for one flight.

    Both routes start from |+z> at ``tau_start``. ``ode_overrides`` is passed
    to :class:`OdeParams` (e.g. ``{"drift_sign": -1}`` for mutation tests).
    """
    params = model.derive(current, orientation.theta_n0, v=v, z_a=z_a, B_r=B_r, constants=constants)
    ode = OdeParams(
        k0=params.k0,
        k1=params.k1,
        w_n=params.w_n,
        phi_n0=orientation.phi_n0,
        tau_start=tau_start,
        tau_end=tau_end,
        tail_start=tau_end - 0.5 * (tau_end - tau_start) / n_points,
        rel_tol=rel_tol,
        abs_tol=abs_tol,
        n_tail=1,
        **(ode_overrides or {}),
    )
    flight = integrate(ode, trace=n_points)
    taus = flight.trace_tau
    t_grid = model.t_of_tau(taus, params)
    traj = integrate_spinor(
        UP,
        (model.t_of_tau(tau_start, params), t_grid[-1]),
        orientation,
        params,
        t_eval=t_grid,
        rel_tol=rel_tol,
        abs_tol=abs_tol,
        constants=constants,
        method=method,
    )
    return float(np.max(np.abs(np.abs(traj.c1) - np.abs(flight.trace_f)))), traj
