"""Oracle suites shared by ``cqdsim validate`` and the test suite."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import sampling
from .config import EXPERIMENT_CURRENTS
from .majorana_ode import OdeParams, integrate
from .spinor_oracle import frame_equivalence_error


@dataclass
class SuiteResult:
    name: str
    passed: bool
    rows: list = field(default_factory=list)
    columns: tuple = ()

    def table(self):
        lines = [f"[{'PASS' if self.passed else 'FAIL'}] {self.name}"]
        if self.columns:
            lines.append("    " + "  ".join(f"{c:>14}" for c in self.columns))
        for row in self.rows:
            lines.append("    " + "  ".join(f"{_cell(v):>14}" for v in row))
        return "\n".join(lines)


def _cell(v):
    if isinstance(v, bool):
        return "ok" if v else "FAIL"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def landau_zener_suite(k0_values=(0.1, 0.5, 1.0, 2.0), rel_tol=0.02, tau_start=-30.0, initial_slope="adiabatic"):
    """|f_final|^2 against exp(-pi k0 / 2) with the nuclear coupling switched off."""
    rows = []
    for k0 in k0_values:
        sol = integrate(OdeParams(k0=k0, k1=0.0, w_n=0.0, phi_n0=0.0, tau_start=tau_start, initial_slope=initial_slope))
        expected = math.exp(-math.pi * k0 / 2.0)
        rel = abs(sol.f_final_mag**2 - expected) / expected
        rows.append((k0, sol.f_final_mag**2, expected, rel, rel < rel_tol))
    return SuiteResult(
        "Landau-Zener law (k1=0)",
        all(r[-1] for r in rows),
        rows,
        ("k0", "|f|^2", "exp(-pi k0/2)", "rel err", "ok"),
    )


def random_triples(n, seed=7):
    """(current, distribution, orientation) triples covering every standard current and both densities."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        current = EXPERIMENT_CURRENTS[i % len(EXPERIMENT_CURRENTS)]
        dist = sampling.Distribution.ANISOTROPIC if (i // len(EXPERIMENT_CURRENTS)) % 2 == 0 else sampling.Distribution.ISOTROPIC
        z1, z2 = rng.random(2)
        theta = float(sampling.polar_from_uniform(z1, dist))
        out.append((current, dist, sampling.NuclearOrientation(theta, 2 * math.pi * float(z2))))
    return out


def spinor_suite(n=20, tol=1e-6, seed=7, method="magnus4", ode_overrides=None):
    """Majorana-frame |f| against the directly integrated |c1| on a shared grid."""
    rows = []
    for current, dist, orient in random_triples(n, seed):
        err, traj = frame_equivalence_error(current, orient, method=method, ode_overrides=ode_overrides)
        rows.append((current, dist.value, orient.theta_n0, orient.phi_n0, err, traj.norm_error(), err < tol))
    return SuiteResult(
        f"spinor frame equivalence ({method})",
        all(r[-1] for r in rows),
        rows,
        ("I (A)", "density", "theta_n0", "phi_n0", "sup||c1|-|f||", "norm err", "ok"),
    )


@dataclass(frozen=True)
class SamplerCheck:
    distribution: str
    n: int
    mean_cos: float
    expected_mean_cos: float
    sigma: float
    ks: float
    ks_bound: float
    chi2_p: float

    @property
    def passed(self):
        return (
            abs(self.mean_cos - self.expected_mean_cos) <= 3 * self.sigma
            and self.ks < self.ks_bound
            and self.chi2_p > 0.01
        )


def sampler_check(distribution, n=1_000_000, seed=11):
    theta, phi = sampling.sample_block(seed, 0, 0, n, distribution)
    c = np.cos(theta)
    expected = -1.0 / 3.0 if sampling.Distribution(distribution) is sampling.Distribution.ANISOTROPIC else 0.0
    ks = stats.kstest(theta, lambda x: sampling.polar_cdf(x, distribution)).statistic
    # 8x8 contingency table on equal-probability theta bins and uniform phi bins
    u = sampling.polar_cdf(theta, distribution)
    table = np.zeros((8, 8))
    np.add.at(table, (np.minimum((u * 8).astype(int), 7), np.minimum((phi / (2 * math.pi) * 8).astype(int), 7)), 1)
    chi2_p = stats.chi2_contingency(table).pvalue
    return SamplerCheck(
        distribution=sampling.Distribution(distribution).value,
        n=n,
        mean_cos=float(c.mean()),
        expected_mean_cos=expected,
        sigma=float(c.std() / math.sqrt(n)),
        ks=float(ks),
        ks_bound=3.0 / math.sqrt(n),
        chi2_p=float(chi2_p),
    )


def sampler_suite(n=1_000_000, seed=11):
    checks = [sampler_check(d, n, seed) for d in sampling.Distribution]
    rows = [(c.distribution, c.mean_cos, c.expected_mean_cos, c.ks, c.ks_bound, c.chi2_p, c.passed) for c in checks]
    return SuiteResult(
        "sampler fidelity",
        all(c.passed for c in checks),
        rows,
        ("density", "mean cos", "expected", "KS", "KS bound", "chi2 p", "ok"),
    )
