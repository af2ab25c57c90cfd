"""Integration of the Majorana-transformed spin equation.

The unknown is the slowly varying amplitude f(tau), with c1 = exp(-i tau^2) f.
It obeys

    f'' = 4i [tau - sqrt(k1) w_n / (4 (sqrt(k1) - i sqrt(k0) e^{i phi}))] f'
          - (k0 + k1 + 2 sqrt(k0 k1) sin phi) f,     phi = w_n tau + phi_n0,

started from f = 1, f' = 0 at ``tau_start``. The solver is a hand-rolled
embedded Runge-Kutta in numba, specialised to this two-complex-component
system, so that the sweep can run many integrations in threads without the
GIL. Output grid points are hit exactly by shortening the step that would
cross them, which makes tail sampling free of interpolation error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np
from scipy.integrate import DOP853, RK45

METHODS = ("dop853", "dopri5", "rk4")

_OK, _MAX_STEPS, _UNDERFLOW, _BLOWUP = 0, 1, 2, 3
# no "nnan"/"ninf": the blowup checks must survive optimisation
_FASTMATH = {"nsz", "arcp", "contract", "afn", "reassoc"}


@numba.njit(cache=True, inline="always")
def _abs2(z):
    # |z|^2 without the inf/nan special-casing of hypot
    return z.real * z.real + z.imag * z.imag


class IntegrationError(RuntimeError):
    """The adaptive solver could not reach the end of the window."""

    def __init__(self, message, tau_reached):
        super().__init__(f"{message} (reached tau={tau_reached:.6g})")
        self.tau_reached = tau_reached


class NumericalBlowupError(IntegrationError):
    pass


@dataclass(frozen=True)
class OdeParams:
    k0: float
    k1: float
    w_n: float
    phi_n0: float
    tau_start: float = -30.0
    tau_end: float = 60.0
    tail_start: float = 52.0
    rel_tol: float = 1e-10
    abs_tol: float = 1e-10
    n_tail: int = 187
    method: str = "dop853"
    rk4_step: float = 2e-4
    max_steps: int = 5_000_000
    initial_slope: str = "zero"
    # -1 flips the sign of the nuclear drift term; only for mutation testing
    drift_sign: float = 1.0

    def __post_init__(self):
        if not self.k0 >= 0 or not self.k1 >= 0:
            raise ValueError("k0 and k1 must be non-negative")
        if not self.tau_start < self.tail_start < self.tau_end:
            raise ValueError("need tau_start < tail_start < tau_end")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be > 0")
        if self.n_tail < 1:
            raise ValueError("n_tail must be >= 1")
        if self.initial_slope not in ("zero", "adiabatic"):
            raise ValueError("initial_slope must be 'zero' or 'adiabatic'")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")


@dataclass(frozen=True)
class FlightSolution:
    f_final_mag: float
    theta_ef: float
    tail_std: float
    n_steps: int
    max_abs_f: float
    trace_tau: np.ndarray | None = None
    trace_f: np.ndarray | None = None

    def trace_rows(self):
        """(tau, |f|, Re f, Im f) rows of the stored trace."""
        if self.trace_tau is None:
            return []
        return [
            (float(t), float(abs(f)), float(f.real), float(f.imag))
            for t, f in zip(self.trace_tau, self.trace_f)
        ]


# ---------------------------------------------------------------- kernels


@numba.njit(cache=True, inline="always", fastmath=_FASTMATH)
def _accel(tau, f, d, k0, k1, w_n, phi_n0, drift_sign):
    s1 = math.sqrt(k1)
    if s1 == 0.0:
        return 4j * tau * d - k0 * f
    phi = w_n * tau + phi_n0
    s0 = math.sqrt(k0)
    cos_phi = math.cos(phi)
    sin_phi = math.sin(phi)
    # sqrt(k1) - i sqrt(k0) e^{i phi}
    den = complex(s1 + s0 * sin_phi, -s0 * cos_phi)
    drift = drift_sign * s1 * w_n / (4.0 * den)
    K = k0 + k1 + 2.0 * s0 * s1 * sin_phi
    return 4j * (tau - drift) * d - K * f


@numba.njit(cache=True, nogil=True, fastmath=_FASTMATH)
def _solve_embedded(
    k0, k1, w_n, phi_n0, drift_sign, t0, d0, t1, out_tau, rtol, atol, max_steps,
    A, B, C, E5, E3, n_stages, err_exp, out_f,
):
    """Adaptive embedded RK; E3 of length 0 selects the plain (dopri5) estimator.

    Fills out_f with f at each out_tau; returns (status, tau_reached, steps, max|f|).
    """
    t = t0
    f = 1.0 + 0j
    d = d0
    kf = np.zeros(n_stages + 1, np.complex128)
    kd = np.zeros(n_stages + 1, np.complex128)
    kf[0] = d
    kd[0] = _accel(t, f, d, k0, k1, w_n, phi_n0, drift_sign)
    h = 1e-2
    err_old = 1e-4
    beta = 0.04
    n_out = out_tau.shape[0]
    j_out = 0
    steps = 0
    max_f = 1.0
    dual = E3.shape[0] > 0
    while j_out < n_out:
        target = out_tau[j_out]
        if steps >= max_steps:
            return _MAX_STEPS, t, steps, max_f
        h_try = h
        landing = False
        if t + h_try >= target:
            h_try = target - t
            landing = True
        if h_try < 1e-14 * max(1.0, abs(t)):
            return _UNDERFLOW, t, steps, max_f
        for s in range(1, n_stages):
            yf = f
            yd = d
            for j in range(s):
                a = A[s, j]
                if a != 0.0:
                    yf += h_try * a * kf[j]
                    yd += h_try * a * kd[j]
            kf[s] = yd
            kd[s] = _accel(t + C[s] * h_try, yf, yd, k0, k1, w_n, phi_n0, drift_sign)
        fn = f
        dn = d
        for j in range(n_stages):
            fn += h_try * B[j] * kf[j]
            dn += h_try * B[j] * kd[j]
        kf[n_stages] = dn
        kd[n_stages] = _accel(t + h_try, fn, dn, k0, k1, w_n, phi_n0, drift_sign)
        ef5 = 0j
        ed5 = 0j
        ef3 = 0j
        ed3 = 0j
        for j in range(n_stages + 1):
            ef5 += E5[j] * kf[j]
            ed5 += E5[j] * kd[j]
            if dual:
                ef3 += E3[j] * kf[j]
                ed3 += E3[j] * kd[j]
        sf = atol + rtol * math.sqrt(max(_abs2(f), _abs2(fn)))
        sd = atol + rtol * math.sqrt(max(_abs2(d), _abs2(dn)))
        n5 = _abs2(ef5) / (sf * sf) + _abs2(ed5) / (sd * sd)
        if dual:
            n3 = _abs2(ef3) / (sf * sf) + _abs2(ed3) / (sd * sd)
            den = n5 + 0.01 * n3
            err = 0.0
            if den > 0.0:
                err = abs(h_try) * n5 / math.sqrt(2.0 * den)
        else:
            err = abs(h_try) * math.sqrt(0.5 * n5)
        if not math.isfinite(err) or not (math.isfinite(fn.real) and math.isfinite(fn.imag)):
            if h_try < 1e-10:
                return _BLOWUP, t, steps, max_f
            h = 0.2 * h_try
            continue
        if err <= 1.0:
            t = target if landing else t + h_try
            f = fn
            d = dn
            kf[0] = kf[n_stages]
            kd[0] = kd[n_stages]
            steps += 1
            af = math.sqrt(_abs2(f))
            if af > max_f:
                max_f = af
            if landing:
                out_f[j_out] = f
                j_out += 1
            if err == 0.0:
                fac = 10.0
            else:
                fac = 0.9 * err ** (-err_exp + 0.75 * beta) * err_old**beta
                fac = min(10.0, max(0.2, fac))
            err_old = max(err, 1e-4)
            # a shortened landing step must not shrink the natural step size
            h = max(h, h_try * fac) if landing else h_try * fac
        else:
            h = h_try * max(0.2, 0.9 * err ** (-err_exp))
    return _OK, t, steps, max_f


@numba.njit(cache=True, nogil=True)
def _solve_rk4(k0, k1, w_n, phi_n0, drift_sign, t0, d0, out_tau, step, max_steps, out_f):
    t = t0
    f = 1.0 + 0j
    d = d0
    steps = 0
    max_f = 1.0
    for j_out in range(out_tau.shape[0]):
        target = out_tau[j_out]
        while t < target:
            if steps >= max_steps:
                return _MAX_STEPS, t, steps, max_f
            h = min(step, target - t)
            a1f = d
            a1d = _accel(t, f, d, k0, k1, w_n, phi_n0, drift_sign)
            a2f = d + 0.5 * h * a1d
            a2d = _accel(t + 0.5 * h, f + 0.5 * h * a1f, a2f, k0, k1, w_n, phi_n0, drift_sign)
            a3f = d + 0.5 * h * a2d
            a3d = _accel(t + 0.5 * h, f + 0.5 * h * a2f, a3f, k0, k1, w_n, phi_n0, drift_sign)
            a4f = d + h * a3d
            a4d = _accel(t + h, f + h * a3f, a4f, k0, k1, w_n, phi_n0, drift_sign)
            f = f + h / 6.0 * (a1f + 2.0 * a2f + 2.0 * a3f + a4f)
            d = d + h / 6.0 * (a1d + 2.0 * a2d + 2.0 * a3d + a4d)
            t = target if target - t <= step else t + h
            steps += 1
            if not (math.isfinite(f.real) and math.isfinite(f.imag)):
                return _BLOWUP, t, steps, max_f
            max_f = max(max_f, abs(f))
        out_f[j_out] = f
    return _OK, t, steps, max_f


_TABLEAUS = {
    "dop853": (
        np.ascontiguousarray(DOP853.A[: DOP853.n_stages, : DOP853.n_stages], dtype=float),
        np.ascontiguousarray(DOP853.B, dtype=float),
        np.ascontiguousarray(DOP853.C[: DOP853.n_stages], dtype=float),
        np.ascontiguousarray(DOP853.E5, dtype=float),
        np.ascontiguousarray(DOP853.E3, dtype=float),
        DOP853.n_stages,
        1.0 / (DOP853.error_estimator_order + 1),
    ),
    "dopri5": (
        np.ascontiguousarray(RK45.A, dtype=float),
        np.ascontiguousarray(RK45.B, dtype=float),
        np.ascontiguousarray(RK45.C, dtype=float),
        np.ascontiguousarray(RK45.E, dtype=float),
        np.zeros(0),
        RK45.n_stages,
        1.0 / (RK45.error_estimator_order + 1),
    ),
}


def initial_slope(k0, k1, w_n, phi_n0, tau_start, kind="zero", drift_sign=1.0):
    """f'(tau_start) for f(tau_start) = 1.

    ``"zero"`` is the literal f' = 0 start. ``"adiabatic"`` drops f'' from the
    equation at the first point, which places the state on the slowly varying
    branch that a start at tau = -inf would have reached; this removes the
    turn-on transient a sudden start excites.
    """
    if kind == "zero":
        return 0j
    if kind != "adiabatic":
        raise ValueError(f"unknown initial slope {kind!r}")
    # 4i (tau - drift) f' = K f  with f'' neglected
    d2_at_zero = _accel(tau_start, 1.0 + 0j, 0j, k0, k1, w_n, phi_n0, drift_sign)
    coeff = _accel(tau_start, 0j, 1.0 + 0j, k0, k1, w_n, phi_n0, drift_sign)
    return -d2_at_zero / coeff


def _run_kernel(k0, k1, w_n, phi_n0, out_tau, p):
    out_f = np.empty(out_tau.shape[0], np.complex128)
    d0 = initial_slope(k0, k1, w_n, phi_n0, p.tau_start, p.initial_slope, p.drift_sign)
    if p.method == "rk4":
        res = _solve_rk4(k0, k1, w_n, phi_n0, p.drift_sign, p.tau_start, d0, out_tau, p.rk4_step, p.max_steps, out_f)
    else:
        A, B, C, E5, E3, n_stages, err_exp = _TABLEAUS[p.method]
        res = _solve_embedded(
            k0, k1, w_n, phi_n0, p.drift_sign, p.tau_start, d0, p.tau_end, out_tau,
            p.rel_tol, p.abs_tol, p.max_steps, A, B, C, E5, E3, n_stages, err_exp, out_f,
        )
    return res, out_f


def _raise_for(status, tau_reached):
    if status == _BLOWUP:
        raise NumericalBlowupError("non-finite state", tau_reached)
    if status == _MAX_STEPS:
        raise IntegrationError("step budget exhausted", tau_reached)
    if status == _UNDERFLOW:
        raise IntegrationError("step size underflow", tau_reached)


# ---------------------------------------------------------------- public API


def tail_grid(tau_start, tail_start, tau_end, n_tail):
    """n_tail uniform points in (tail_start, tau_end]."""
    del tau_start
    return tail_start + (tau_end - tail_start) * np.arange(1, n_tail + 1) / n_tail


def trace_grid(tau_start, tau_end, n_points):
    """n_points uniform points in (tau_start, tau_end]."""
    return tau_start + (tau_end - tau_start) * np.arange(1, n_points + 1) / n_points


def rhs(tau, f, df, params):
    """Second derivative of f at (tau, f, f')."""
    return _accel(tau, complex(f), complex(df), params.k0, params.k1, params.w_n, params.phi_n0, params.drift_sign)


def final_polar_angle(f_final_mag):
    if f_final_mag < 0:
        raise ValueError("|f| cannot be negative")
    return 2.0 * math.asin(min(f_final_mag, 1.0))


def integrate(params, trace=None):
    """Integrate one flight and estimate |f(+inf)| from the tail average.

    ``trace`` may be an int (number of uniform points over the whole window)
    or an explicit increasing array of tau values inside the window; the
    solution is then also reported at those points.
    """
    tail = tail_grid(params.tau_start, params.tail_start, params.tau_end, params.n_tail)
    if trace is None:
        out_tau = tail
    else:
        extra = trace_grid(params.tau_start, params.tau_end, trace) if np.isscalar(trace) else np.asarray(trace, float)
        if extra.size and (extra[0] <= params.tau_start or extra[-1] > params.tau_end):
            raise ValueError("trace points must lie in (tau_start, tau_end]")
        out_tau = np.union1d(extra, tail)
    (status, tau_reached, steps, max_f), out_f = _run_kernel(
        params.k0, params.k1, params.w_n, params.phi_n0, out_tau, params
    )
    _raise_for(status, tau_reached)
    tail_mag = np.abs(out_f[np.isin(out_tau, tail)])
    f_mag = float(tail_mag.mean())
    sol = FlightSolution(
        f_final_mag=f_mag,
        theta_ef=final_polar_angle(f_mag),
        tail_std=float(tail_mag.std()),
        n_steps=int(steps),
        max_abs_f=float(max_f),
    )
    if trace is not None:
        keep = np.isin(out_tau, extra)
        sol = FlightSolution(**{**sol.__dict__, "trace_tau": out_tau[keep], "trace_f": out_f[keep]})
    return sol


def integrate_many(k0, k1, w_n, phi_n0, params):
    """Tail-averaged |f| for arrays of k1 and phi_n0 sharing k0 and w_n.

    ``params`` supplies the window, tolerances and method; its own k1/phi
    fields are ignored. Returns (f_final_mag, status, tau_reached) arrays.
    Runs without the GIL once compiled, so callers may thread it.
    """
    tail = tail_grid(params.tau_start, params.tail_start, params.tau_end, params.n_tail)
    n = len(k1)
    mags = np.empty(n)
    status = np.zeros(n, np.int64)
    reached = np.empty(n)
    for i in range(n):
        (st, tr, _, _), out_f = _run_kernel(k0, float(k1[i]), w_n, float(phi_n0[i]), tail, params)
        status[i] = st
        reached[i] = tr
        mags[i] = np.abs(out_f).mean() if st == _OK else np.nan
    return mags, status, reached


def raise_for_status(status, tau_reached):
    _raise_for(int(status), float(tau_reached))
