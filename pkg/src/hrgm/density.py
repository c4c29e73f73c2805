"""Exponent measure density and likelihoods of the Hüsler-Reiss Pareto model.

All evaluations are in log space. Functions taking ``y`` accept one point of
shape ``(d,)`` or a batch of shape ``(n, d)``.
"""

from dataclasses import dataclass

import numpy as np

from .data import ExceedanceSample
from .exceptions import NotInSupport
from .linalg import log_pseudo_determinant, pseudo_inverse
from .transforms import gamma_of, sigma_k, theta_of

LOG_2PI = np.log(2 * np.pi)


@dataclass(frozen=True)
class DensityConstants:
    """Pre-computed pieces of the precision-matrix form of the density."""

    gamma: np.ndarray
    theta: np.ndarray
    r_theta: np.ndarray
    e_d: np.ndarray
    log_c1: float
    log_c2: float

    @property
    def d(self):
        return self.gamma.shape[0]


def density_constants(gamma):
    g = np.asarray(gamma, dtype=float)
    d = g.shape[0]
    theta = theta_of(g)
    e_d = np.full(d, 1.0 / d)
    log_c1 = -0.5 * (d - 1) * LOG_2PI + 0.5 * (log_pseudo_determinant(theta)[1] - np.log(d))
    log_c2 = -0.125 * e_d @ (g @ theta @ g + 2 * g) @ e_d
    return DensityConstants(g, theta, -0.5 * theta @ g @ e_d, e_d, float(log_c1), float(log_c2))


def log_lambda_anchor(y, gamma, k):
    """Log density written through the covariance anchored at node ``k``."""
    g = np.asarray(gamma, dtype=float)
    y = np.asarray(y, dtype=float)
    sk = sigma_k(g, k)
    mu = -0.5 * g[sk.index, k]
    resid = y[..., sk.index] - y[..., [k]] - mu
    _, logdet = np.linalg.slogdet(sk.sigma)
    quad = np.einsum("...i,...i->...", resid, np.linalg.solve(sk.sigma, resid.T).T)
    return -y[..., k] - 0.5 * ((g.shape[0] - 1) * LOG_2PI + logdet) - 0.5 * quad


def log_lambda_theta(y, gamma, constants=None):
    """Log density in the precision-matrix form; equal to every anchored form."""
    c = constants if constants is not None else density_constants(gamma)
    y = np.asarray(y, dtype=float)
    quad = np.einsum("...i,ij,...j->...", y, c.theta, y)
    return c.log_c1 + c.log_c2 - 0.5 * quad + y @ c.r_theta - y @ c.e_d


def surrogate_loglik(gamma_bar, theta):
    """``log |Theta|_+ + tr(Gamma_bar Theta) / 2``."""
    return float(log_pseudo_determinant(theta)[1] + 0.5 * np.trace(np.asarray(gamma_bar) @ theta))


def check_mle_stationarity(gamma_bar, graph, completed):
    """Largest edge/diagonal deviation between ``gamma(Theta^+)`` and ``gamma_bar``.

    ``Theta`` is the precision matrix of ``completed``. A value near zero,
    together with ``Theta`` vanishing off the graph, certifies that
    ``completed`` maximises the surrogate likelihood under the graph
    constraint.
    """
    theta = theta_of(completed)
    implied = gamma_of(pseudo_inverse(theta))
    mask = graph.mask()
    return float(np.max(np.abs(implied[mask] - np.asarray(gamma_bar, dtype=float)[mask])))


def log_mass_L(gamma, n_mc=100_000, seed=None):
    """Monte Carlo estimate of ``log Lambda^c(0)`` and its standard error.

    Uses ``Lambda^c(0) = d * P(accept)`` for the rejection sampler in
    :mod:`hrgm.simulation`.
    """
    from .simulation import estimate_exceedance_mass

    mass, se = estimate_exceedance_mass(gamma, n_mc, seed)
    return float(np.log(mass)), float(se / mass)


def pareto_loglik(data, gamma, log_mass):
    """Log-likelihood of multivariate Pareto data with density ``lambda / Lambda^c(0)``."""
    values = data.values if isinstance(data, ExceedanceSample) else data
    y = np.atleast_2d(np.asarray(values, dtype=float))
    bad = np.max(y, axis=1) <= 0
    if np.any(bad):
        raise NotInSupport(f"{int(bad.sum())} rows have no positive coordinate")
    return float(np.sum(log_lambda_theta(y, gamma)) - y.shape[0] * log_mass)
