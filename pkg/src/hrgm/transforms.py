"""Maps between the variogram, covariance and precision parameterizations."""

from dataclasses import dataclass

import numpy as np
from scipy.special import erfc, erfcinv

from .exceptions import DimensionTooSmall, NonPositive, Singular
from .linalg import centering_projector, ones_complement_basis, pseudo_inverse, symmetrize


@dataclass(frozen=True)
class KDroppedCovariance:
    """Covariance of the increments ``(Y_i - Y_k)_{i != k}`` for anchor ``k``.

    ``index`` lists the original node labels of the rows of ``sigma``.
    """

    k: int
    sigma: np.ndarray
    index: np.ndarray

    def padded(self):
        d = self.sigma.shape[0] + 1
        out = np.zeros((d, d))
        out[np.ix_(self.index, self.index)] = self.sigma
        return out

    @property
    def mean(self):
        return -0.5 * np.diag(self.sigma)


def gamma_of(s):
    """``Gamma_ij = S_ii + S_jj - 2 S_ij`` (the covariance transform)."""
    s = np.asarray(s, dtype=float)
    dg = np.diag(s)
    g = dg[:, None] + dg[None, :] - 2 * s
    np.fill_diagonal(g, 0.0)
    return g


def sigma_of(gamma):
    g = np.asarray(gamma, dtype=float)
    p = centering_projector(g.shape[0])
    return symmetrize(p @ (-0.5 * g) @ p)


def theta_of(gamma):
    """Hüsler-Reiss precision matrix ``(Pi (-Gamma/2) Pi)^+``."""
    return pseudo_inverse(sigma_of(gamma))


def gamma_of_theta(theta):
    return gamma_of(pseudo_inverse(theta))


def phi_k(gamma, k):
    """Zero-padded ``d x d`` matrix ``(Gamma_ik + Gamma_jk - Gamma_ij) / 2``."""
    g = np.asarray(gamma, dtype=float)
    s = 0.5 * (g[:, [k]] + g[[k], :] - g)
    s[k, :] = 0.0
    s[:, k] = 0.0
    return s


def sigma_k(gamma, k):
    g = np.asarray(gamma, dtype=float)
    d = g.shape[0]
    idx = np.array([i for i in range(d) if i != k], dtype=int)
    return KDroppedCovariance(k, phi_k(g, k)[np.ix_(idx, idx)], idx)


def theta_via_anchor(gamma, k):
    """Inverse of the anchor covariance, zero-padded at row/column ``k``.

    Only the entries away from row and column ``k`` are meaningful; they agree
    with :func:`theta_of` there.
    """
    g = np.asarray(gamma, dtype=float)
    if g.shape[0] < 3:
        raise DimensionTooSmall("anchor-wise precision needs d >= 3")
    sk = sigma_k(g, k)
    out = np.zeros_like(g)
    out[np.ix_(sk.index, sk.index)] = np.linalg.inv(sk.sigma)
    return out


def theta_limit(gamma, t):
    """``(t 11^T - Gamma/2)^{-1}``, which tends to the precision matrix as t grows.

    Evaluated in an orthonormal basis whose first vector is ``1/sqrt(d)``: the
    large shift then sits in a single scalar pivot and the remaining block is
    inverted through its Schur complement, so the result stays accurate for
    very large ``t`` where a direct inverse loses all digits.
    """
    g = np.asarray(gamma, dtype=float)
    d = g.shape[0]
    u = np.column_stack([np.full(d, 1 / np.sqrt(d)), ones_complement_basis(d)])
    b = u.T @ (-0.5 * g) @ u
    alpha = t * d + b[0, 0]
    col = b[1:, 0]
    schur = b[1:, 1:] - np.outer(col, col) / alpha
    if alpha == 0 or np.linalg.cond(schur) > 1e15:
        raise Singular("shifted matrix is numerically singular")
    si = np.linalg.inv(schur)
    sc = si @ col / alpha
    inv = np.empty((d, d))
    inv[0, 0] = 1 / alpha + col @ sc / alpha
    inv[0, 1:] = inv[1:, 0] = -sc
    inv[1:, 1:] = si
    return u @ inv @ u.T


def t_of_gamma(gamma):
    """``1^T Gamma 1 / (2 d^2)``."""
    g = np.asarray(gamma, dtype=float)
    return 0.5 * g.sum() / g.shape[0] ** 2


def norm_cdf(x):
    return 0.5 * erfc(-np.asarray(x, dtype=float) / np.sqrt(2.0))


def chi_of_gamma(gamma):
    """Extremal correlations ``2 - 2 Phi(sqrt(Gamma) / 2)``, unit diagonal."""
    g = np.asarray(gamma, dtype=float)
    # 2 - 2 Phi(x) = erfc(x / sqrt 2)
    chi = erfc(np.sqrt(np.clip(g, 0.0, None)) / (2 * np.sqrt(2.0)))
    np.fill_diagonal(chi, 1.0)
    return chi


def gamma_of_chi(chi):
    """Inverse of :func:`chi_of_gamma` entrywise (diagonal set to zero)."""
    c = np.clip(np.asarray(chi, dtype=float), 1e-300, 1.0)
    g = (2 * np.sqrt(2.0) * erfcinv(c)) ** 2
    np.fill_diagonal(g, 0.0)
    return g


def exp_margin_transform(y):
    """Exponential margins to standard Pareto margins."""
    return np.exp(np.asarray(y, dtype=float))


def log_margin_transform(z):
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0):
        raise NonPositive("Pareto-margin values must be positive")
    return np.log(z)


def restrict(gamma, nodes):
    """Variogram of the marginal on ``nodes``."""
    nodes = np.asarray(nodes, dtype=int)
    return np.asarray(gamma, dtype=float)[np.ix_(nodes, nodes)]
