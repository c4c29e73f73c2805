"""Dense symmetric kernels on the rank-deficient cones.

The symmetric eigendecomposition is the only spectral primitive used here;
nothing relies on a Cholesky factorisation of a singular matrix.
"""

import warnings

import numpy as np

from .exceptions import (
    NonzeroDiagonal,
    NonzeroRowSums,
    NotConditionallyNegativeDefinite,
    NotPSD,
    WrongRank,
)

RANK_TOL = 1e-10
CND_TOL = 1e-10
PSD_TOL = 1e-10
SYM_TOL = 1e-8


def symmetrize(a, sym_tol=SYM_TOL):
    """Return ``(a + a.T) / 2``; warn when ``a`` was noticeably asymmetric."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    asym = np.max(np.abs(a - a.T)) if a.size else 0.0
    if asym > sym_tol:
        warnings.warn(f"matrix asymmetric by {asym:.3g}; symmetrizing", stacklevel=2)
    return (a + a.T) / 2


def centering_projector(d):
    return np.eye(d) - np.full((d, d), 1.0 / d)


def ones_complement_basis(d):
    """``d x (d-1)`` matrix with orthonormal columns spanning the complement of ``1``."""
    q, _ = np.linalg.qr(np.column_stack([np.ones(d), np.eye(d)[:, : d - 1]]))
    return q[:, 1:]


def _nonzero(w, rank_tol):
    scale = np.max(np.abs(w)) if w.size else 0.0
    return np.abs(w) > rank_tol * scale


def pseudo_inverse(a, rank_tol=RANK_TOL):
    """Moore-Penrose inverse of a symmetric matrix.

    Eigenvalues below ``rank_tol`` times the largest absolute eigenvalue are
    treated as zero.
    """
    a = symmetrize(a)
    w, q = np.linalg.eigh(a)
    keep = _nonzero(w, rank_tol)
    winv = np.zeros_like(w)
    winv[keep] = 1.0 / w[keep]
    out = (q * winv) @ q.T
    return (out + out.T) / 2


def log_pseudo_determinant(a, rank_tol=RANK_TOL):
    """Sign and log of the pseudo-determinant (product of non-zero eigenvalues)."""
    w = np.linalg.eigvalsh(symmetrize(a))
    w = w[_nonzero(w, rank_tol)]
    if w.size == 0:
        return 1.0, 0.0
    sign = -1.0 if np.count_nonzero(w < 0) % 2 else 1.0
    return sign, float(np.sum(np.log(np.abs(w))))


def pseudo_determinant(a, rank_tol=RANK_TOL):
    """Product of the non-zero eigenvalues; 1 when every eigenvalue vanishes."""
    sign, logdet = log_pseudo_determinant(a, rank_tol)
    return sign * float(np.exp(logdet))


def check_variogram(a, cnd_tol=CND_TOL):
    """Validate zero diagonal and strict conditional negative definiteness.

    Returns the symmetrized matrix. The test is on the eigenvalues of
    ``Pi (-Gamma / 2) Pi``: one of them is zero (the ``1`` direction) and all
    others must exceed ``cnd_tol`` times the largest one.
    """
    g = symmetrize(a)
    d = g.shape[0]
    if np.any(np.diag(g) != 0):
        if np.max(np.abs(np.diag(g))) > 1e-12:
            raise NonzeroDiagonal("variogram diagonal must be zero")
        np.fill_diagonal(g, 0.0)
    if d == 1:
        return g
    v = ones_complement_basis(d)
    # same non-zero spectrum as Pi (-Gamma/2) Pi, with the 1-direction removed
    w = np.linalg.eigvalsh(v.T @ (-0.5 * g) @ v)
    scale = max(np.max(np.abs(w)), 1e-300)
    if w[0] <= cnd_tol * scale:
        raise NotConditionallyNegativeDefinite(
            f"matrix is not strictly conditionally negative definite "
            f"(smallest eigenvalue on 1-perp: {w[0]:.3g})",
            eigenvalue=float(w[0]),
        )
    return g


def is_variogram(a, cnd_tol=CND_TOL):
    try:
        check_variogram(a, cnd_tol)
    except (NonzeroDiagonal, NotConditionallyNegativeDefinite):
        return False
    return True


def check_precision(a, psd_tol=PSD_TOL):
    """Validate PSD, zero row sums and rank ``d - 1``; returns the symmetrized matrix."""
    t = symmetrize(a)
    d = t.shape[0]
    scale = max(np.max(np.abs(t)), 1e-300)
    rowsum = np.max(np.abs(t.sum(axis=1)))
    if rowsum > psd_tol * scale * d:
        raise NonzeroRowSums(f"row sums must vanish (max |row sum| = {rowsum:.3g})")
    w = np.linalg.eigvalsh(t)
    if w[0] < -psd_tol * scale:
        raise NotPSD(f"matrix has negative eigenvalue {w[0]:.3g}")
    if d > 1 and w[1] <= psd_tol * scale:
        raise WrongRank("precision matrix must have rank d - 1")
    return t


def is_precision(a, psd_tol=PSD_TOL):
    try:
        check_precision(a, psd_tol)
    except (NonzeroRowSums, NotPSD, WrongRank):
        return False
    return True


def fix_row_sums(theta):
    """Reset the diagonal so every row sums to zero; keeps the off-diagonal pattern.

    Useful for precision matrices printed with rounded entries.
    """
    t = symmetrize(theta).copy()
    np.fill_diagonal(t, 0.0)
    np.fill_diagonal(t, -t.sum(axis=1))
    return t
