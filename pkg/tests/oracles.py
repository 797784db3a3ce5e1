"""Reference computations that share no code with the package.

Brute-force sums over closed-form pmfs, delete-one jackknife, plain
factorial Poisson. Used to derive (and re-derive) frozen expected values.
"""

from __future__ import annotations

import math

import numpy as np


def poisson_direct(mu: float, m: int) -> float:
    """Poisson pmf with a raw factorial; fine for m <= 20."""
    return mu**m * math.exp(-mu) / math.factorial(m)


def geometric_pmf(mu: float, nmax: int) -> np.ndarray:
    """Single-mode thermal law P(n) = mu^n / (1 + mu)^(n + 1)."""
    n = np.arange(nmax + 1)
    return (mu / (1 + mu)) ** n / (1 + mu)


def moments_from_pmf(p: np.ndarray) -> tuple[float, float]:
    n = np.arange(p.size)
    return float(np.sum(n * p)), float(np.sum(n * n * p))


def thermal_g2_detected(mu: float, nmax: int = 2000) -> float:
    m1, m2 = moments_from_pmf(geometric_pmf(mu, nmax))
    return m2 / m1**2


def thermal_fano(mu: float, nmax: int = 2000) -> float:
    m1, m2 = moments_from_pmf(geometric_pmf(mu, nmax))
    return (m2 - m1**2) / m1


def borel_pmf(lam: float, kmax: int) -> np.ndarray:
    """P(k) = exp(-lam k) (lam k)^(k-1) / k!, k = 1..kmax (index 0 unused)."""
    p = np.zeros(kmax + 1)
    for k in range(1, kmax + 1):
        p[k] = math.exp(-lam * k + (k - 1) * math.log(lam * k) - math.lgamma(k + 1)) if lam > 0 else float(k == 1)
    return p


def borel_mean_bruteforce(lam: float, kmax: int = 200) -> float:
    p = borel_pmf(lam, kmax)
    return float(np.sum(np.arange(kmax + 1) * p))


def compound_poisson_moments(mu: float, gain_var: float) -> tuple[float, float]:
    """Mean and variance of Poisson(G mu), E[G] = 1, Var[G] = gain_var (law of total variance)."""
    return mu, mu + mu * mu * gain_var


def compound_poisson_g2_detected(mu: float, gain_var: float) -> float:
    m, v = compound_poisson_moments(mu, gain_var)
    return (v + m * m) / (m * m)


def split_compound_g11(gain_var: float) -> float:
    """Cross-correlation of the two outputs of a splitter fed with compound-Poisson light.

    Given G the arms are independent Poissons with means proportional to G, so
    E[m1 m2] / (E[m1] E[m2]) = E[G^2] = 1 + gain_var.
    """
    return 1.0 + gain_var


def jackknife_g2_detected(counts: np.ndarray) -> float:
    """Delete-one jackknife standard error of <m^2>/<m>^2."""
    c = np.asarray(counts, dtype=float)
    n = c.size
    s1, s2 = c.sum(), (c * c).sum()
    loo1 = (s1 - c) / (n - 1)
    loo2 = (s2 - c * c) / (n - 1)
    theta = loo2 / loo1**2
    return float(np.sqrt((n - 1) / n * np.sum((theta - theta.mean()) ** 2)))


def expected_occupied(k: int, cells: int) -> float:
    """Mean number of distinct cells hit by k uniformly thrown photons."""
    return cells * (1 - (1 - 1 / cells) ** k)


def marburger_power(lam: float, n0: float, n2: float) -> float:
    return 3.72 * lam * lam / (8 * math.pi * n0 * n2)
