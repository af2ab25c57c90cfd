"""Branching of the electron moment at the second Stern-Gerlach stage."""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass

import numpy as np


class CollapsedState(enum.Enum):
    UP = 0  # theta_e,D = 0
    DOWN = 1  # theta_e,D = pi


class FlipConvention(str, enum.Enum):
    # count theta_e,D = 0 outcomes (the Iverson-bracket form)
    COLLAPSE_UP_IS_FLIP = "collapse_up_is_flip"
    # count theta_e,f > theta_n0 outcomes (what the reference Mathematica code sums)
    COLLAPSE_DOWN_IS_FLIP = "collapse_down_is_flip"


@dataclass(frozen=True)
class FlipStatistics:
    n_total: int
    n_flip: int

    @property
    def fraction(self):
        return self.n_flip / self.n_total

    @property
    def std_err(self):
        p = self.fraction
        return math.sqrt(p * (1.0 - p) / self.n_total)


def _check_angle(name, value):
    if not 0.0 <= value <= math.pi:
        raise ValueError(f"{name} must lie in [0, pi], got {value!r}")


def branch(theta_ef, theta_n0):
    """Collapse direction given the final electron and initial nuclear polar angles.

    The electron goes up when it is angularly closer to +z than the nuclear
    moment. An exact tie goes DOWN; it has probability zero under continuous
    sampling.
    """
    _check_angle("theta_ef", theta_ef)
    _check_angle("theta_n0", theta_n0)
    return CollapsedState.UP if theta_ef < theta_n0 else CollapsedState.DOWN


def branch_many(theta_ef, theta_n0):
    """Vectorised :func:`branch`; True where the outcome is UP."""
    theta_ef = np.asarray(theta_ef, dtype=float)
    theta_n0 = np.asarray(theta_n0, dtype=float)
    for name, arr in (("theta_ef", theta_ef), ("theta_n0", theta_n0)):
        if np.any((arr < 0) | (arr > math.pi)):
            raise ValueError(f"{name} must lie in [0, pi]")
    return theta_ef < theta_n0


def flip_fraction(outcomes, convention=FlipConvention.COLLAPSE_DOWN_IS_FLIP):
    outcomes = list(outcomes)
    if not outcomes:
        raise ValueError("flip_fraction needs at least one outcome")
    counts = Counter(outcomes)
    flipped = CollapsedState.UP if FlipConvention(convention) is FlipConvention.COLLAPSE_UP_IS_FLIP else CollapsedState.DOWN
    return FlipStatistics(n_total=len(outcomes), n_flip=counts[flipped])


def statistics_from_up_count(n_up, n_total, convention):
    """FlipStatistics from a tally of UP outcomes."""
    if n_total < 1:
        raise ValueError("need at least one outcome")
    if FlipConvention(convention) is FlipConvention.COLLAPSE_UP_IS_FLIP:
        return FlipStatistics(n_total, int(n_up))
    return FlipStatistics(n_total, int(n_total - n_up))
