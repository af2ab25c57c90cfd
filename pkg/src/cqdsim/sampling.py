"""Reproducible draws of the initial nuclear-moment orientation.

Every (seed, current_index, sample_index) triple owns one Philox block, so a
sample is a pure function of those three integers no matter how the sweep is
split across workers.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np


class Distribution(str, enum.Enum):
    ISOTROPIC = "isotropic"
    ANISOTROPIC = "anisotropic"


@dataclass(frozen=True)
class NuclearOrientation:
    theta_n0: float
    phi_n0: float


@dataclass(frozen=True)
class SampleStream:
    seed: int
    current_index: int
    sample_index: int


def _philox_key(seed, current_index):
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(current_index),))
    return ss.generate_state(2, np.uint64)


def uniforms(seed, current_index, start, count):
    """The (zeta1, zeta2) pairs for samples ``start .. start+count-1``, shape (count, 2)."""
    bg = np.random.Philox(key=_philox_key(seed, current_index))
    bg.advance(int(start))
    # one Philox block = 4 doubles per sample; only the first two are used
    return np.random.Generator(bg).random(4 * int(count)).reshape(-1, 4)[:, :2]


def polar_from_uniform(zeta1, distribution):
    """Inverse CDF of the polar angle for either co-quantum density."""
    zeta1 = np.asarray(zeta1, dtype=float)
    if Distribution(distribution) is Distribution.ANISOTROPIC:
        # CDF (1 - cos theta)^2 / 4  =>  sin^2(theta/2) = sqrt(zeta1)
        return 2.0 * np.arcsin(zeta1**0.25)
    return np.arccos(1.0 - 2.0 * zeta1)


def sample_block(seed, current_index, start, count, distribution):
    """Vectorised orientations; returns arrays (theta_n0, phi_n0)."""
    z = uniforms(seed, current_index, start, count)
    return polar_from_uniform(z[:, 0], distribution), 2.0 * math.pi * z[:, 1]


def _sample(stream, distribution):
    theta, phi = sample_block(stream.seed, stream.current_index, stream.sample_index, 1, distribution)
    return NuclearOrientation(float(theta[0]), float(phi[0]))


def sample_anisotropic(stream):
    return _sample(stream, Distribution.ANISOTROPIC)


def sample_isotropic(stream):
    return _sample(stream, Distribution.ISOTROPIC)


def pdf(theta_n, distribution):
    """Density per steradian of the co-quantum orientation."""
    theta_n = np.asarray(theta_n, dtype=float)
    if np.any((theta_n < 0) | (theta_n > math.pi)):
        raise ValueError("theta_n must lie in [0, pi]")
    if Distribution(distribution) is Distribution.ANISOTROPIC:
        return (1.0 - np.cos(theta_n)) / (4.0 * math.pi)
    return np.full_like(theta_n, 1.0 / (4.0 * math.pi))


def polar_cdf(theta_n, distribution):
    """Marginal CDF of the polar angle."""
    c = np.cos(np.asarray(theta_n, dtype=float))
    if Distribution(distribution) is Distribution.ANISOTROPIC:
        return (1.0 - c) ** 2 / 4.0
    return (1.0 - c) / 2.0
