"""Physical constants and the dimensionless parameters of the inner-rotation chamber.

All gyromagnetic ratios are stored as magnitudes. The electron's negative sign
enters only through the sign convention of the spinor Hamiltonian (see
:mod:`cqdsim.spinor_oracle`); every derived quantity here uses |gamma|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class PhysicalConstants:
    mu0: float = 4.0e-7 * math.pi  # T m / A
    R_vdw: float = 2.75e-10  # m, van der Waals radius of potassium
    mu_n: float = 1.977e-27  # J / T
    mu_e: float = 9.285e-24  # J / T
    gamma_e_mag: float = 1.761e11  # rad / (s T)
    gamma_n_mag: float = 1.25e7  # rad / (s T)

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"constant {name} must be positive and finite, got {value!r}")


DEFAULT_CONSTANTS = PhysicalConstants()


def _require_positive(**values):
    for name, value in values.items():
        if not value > 0:
            raise ValueError(f"{name} must be > 0, got {value!r}")


def gradient_from_current(current, B_r, constants=DEFAULT_CONSTANTS):
    """Quadrupole gradient G = 2*pi*B_r**2 / (mu0 * I) in T/m."""
    _require_positive(current=current, B_r=B_r)
    return 2.0 * math.pi * B_r**2 / (constants.mu0 * current)


def torque_averaged_field(moment, constants=DEFAULT_CONSTANTS):
    """Field 5*mu0*mu / (16*pi*R**3) that a moment exerts on its partner."""
    return 5.0 * constants.mu0 * moment / (16.0 * math.pi * constants.R_vdw**3)


def nuclear_field(constants=DEFAULT_CONSTANTS):
    return torque_averaged_field(constants.mu_n, constants)


def electron_field(constants=DEFAULT_CONSTANTS):
    return torque_averaged_field(constants.mu_e, constants)


def adiabaticity_k0(G, v, z_a, constants=DEFAULT_CONSTANTS):
    """Longitudinal adiabaticity gamma_e * G * z_a**2 / v.

    Uses z_a squared; with a single power of z_a the result would carry units
    of 1/m.
    """
    _require_positive(G=G, v=v, z_a=z_a)
    return constants.gamma_e_mag * G * z_a**2 / v


def adiabaticity_k1(G, v, theta_n0, constants=DEFAULT_CONSTANTS):
    """Nuclear-coupling adiabaticity gamma_e * (B_n sin(theta_n0))**2 / (G v)."""
    _require_positive(G=G, v=v)
    if not 0.0 <= theta_n0 <= math.pi:
        raise ValueError(f"theta_n0 must lie in [0, pi], got {theta_n0!r}")
    transverse = nuclear_field(constants) * math.sin(theta_n0)
    return constants.gamma_e_mag * transverse**2 / (G * v)


def time_scale(G, v, constants=DEFAULT_CONSTANTS):
    """alpha = sqrt(gamma_e G v) / 2, the rate converting seconds to tau."""
    _require_positive(G=G, v=v)
    return 0.5 * math.sqrt(constants.gamma_e_mag * G * v)


def larmor_wn(G, v, constants=DEFAULT_CONSTANTS):
    """Dimensionless nuclear Larmor frequency 2 gamma_n B_e / sqrt(gamma_e G v)."""
    return constants.gamma_n_mag * electron_field(constants) / time_scale(G, v, constants)


@dataclass(frozen=True)
class DerivedParams:
    G: float
    B_n_mag: float
    B_e_mag: float
    k0: float
    k1: float
    w_n: float
    alpha: float
    tau_offset: float
    # kept so the field and time maps can be evaluated without the config
    v: float = field(default=800.0)
    z_a: float = field(default=1.05e-4)
    theta_n0: float = field(default=math.pi / 2)


def derive(current, theta_n0, *, v=800.0, z_a=1.05e-4, B_r=0.42e-4, constants=DEFAULT_CONSTANTS):
    """All per-(current, orientation) quantities feeding the transformed ODE."""
    G = gradient_from_current(current, B_r, constants)
    B_n = nuclear_field(constants)
    alpha = time_scale(G, v, constants)
    # 0.5*sqrt(gamma_e/(G v)) * B_n cos(theta) == alpha * B_n cos(theta) / (G v)
    tau_offset = 0.5 * math.sqrt(constants.gamma_e_mag / (G * v)) * B_n * math.cos(theta_n0)
    return DerivedParams(
        G=G,
        B_n_mag=B_n,
        B_e_mag=electron_field(constants),
        k0=adiabaticity_k0(G, v, z_a, constants),
        k1=adiabaticity_k1(G, v, theta_n0, constants),
        w_n=larmor_wn(G, v, constants),
        alpha=alpha,
        tau_offset=tau_offset,
        v=v,
        z_a=z_a,
        theta_n0=theta_n0,
    )


def tau_of_t(t, params):
    return params.alpha * t + params.tau_offset


def t_of_tau(tau, params):
    return (tau - params.tau_offset) / params.alpha


def total_field(t, theta_n, phi_n, params):
    """Quadrupole plus torque-averaged nuclear field at (0, v t, 0); returns (Bx, By, Bz).

    Works elementwise on arrays of ``t`` and ``phi_n``.
    """
    B_n = params.B_n_mag
    transverse = B_n * np.sin(theta_n)
    Bx = transverse * np.cos(phi_n)
    By = params.G * params.z_a + transverse * np.sin(phi_n)
    Bz = params.G * params.v * t + B_n * np.cos(theta_n)
    return Bx, By, Bz
