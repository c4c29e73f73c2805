"""Estimators of the Hüsler-Reiss variogram from threshold exceedances.

Anchor sets
-----------
Exact Pareto samples (margin ``"pareto"``) use the rows with ``y_k > 0`` as the
exceedances of anchor ``k``; on those rows the increments follow the anchored
Gaussian law exactly. Rank-transformed data (margin ``"exponential"``) use the
top ``floor(n * (1 - p))`` rows of column ``k``. Raw data are rank-transformed
first.
"""

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .completion import PartialVariogram, complete, restrict_to_graph
from .data import ExceedanceSample, as_sample
from .exceptions import DegenerateColumn, NeedsFullInit, NotConnected, TooFewExceedances
from .graph import is_connected, is_decomposable, maximal_cliques, minimum_spanning_tree
from .transforms import gamma_of

MIN_EXCEED = 2


@dataclass(frozen=True)
class EmpiricalVariogram:
    """Anchor-averaged empirical variogram.

    ``counts[k]`` is the number of exceedances used for anchor ``k``.
    """

    gamma_hat: np.ndarray
    p: float
    counts: tuple


def _check_p(p):
    if not 0 < p < 1:
        raise ValueError(f"p must lie in (0, 1), got {p}")


def rank_transform(raw):
    """Empirical-CDF transform to standard exponential margins.

    ``y_ij = -log(1 - r_ij / (n + 1))`` with ``r_ij`` the average rank of
    ``x_ij`` within its column.
    """
    sample = as_sample(raw, margin="raw")
    x = sample.values
    if np.any(~np.isfinite(x)):
        raise ValueError("data contain missing or non-finite values")
    n = x.shape[0]
    for j in range(x.shape[1]):
        if n == 0 or np.all(x[:, j] == x[0, j]):
            raise DegenerateColumn(f"column {j + 1} is constant")
    ranks = rankdata(x, method="average", axis=0)
    return ExceedanceSample(-np.log1p(-ranks / (n + 1)), "exponential", sample.columns)


def _as_exceedance_data(y):
    sample = as_sample(y)
    return rank_transform(sample) if sample.margin == "raw" else sample


def _n_exceed(n, p):
    return int(np.floor(n * (1 - p) + 1e-9))


def _top_rows(column, m):
    """Indices of the ``m`` largest entries; ties broken by row order."""
    order = np.argsort(-column, kind="stable")
    return order[:m]


def empirical_chi(y, p, min_exceed=MIN_EXCEED):
    """Rank-based empirical extremal correlation at quantile level ``p``.

    ``chi_ij`` is the fraction of the ``floor(n (1 - p))`` largest rows of
    column ``j`` that are also among the largest rows of column ``i``.
    """
    _check_p(p)
    sample = as_sample(y)
    x = sample.values
    n, d = x.shape
    m = _n_exceed(n, p)
    if m < min_exceed:
        raise TooFewExceedances(f"only {m} exceedances at p={p} with n={n}")
    exceed = np.zeros((n, d), dtype=bool)
    for j in range(d):
        exceed[_top_rows(x[:, j], m), j] = True
    e = exceed.astype(float)
    return (e.T @ e) / m


def _anchor_rows(values, margin, k, p):
    if margin == "pareto":
        return np.flatnonzero(values[:, k] > 0)
    return _top_rows(values[:, k], _n_exceed(values.shape[0], p))


def empirical_variogram(y, p=None, min_exceed=MIN_EXCEED):
    """Average over anchors of ``gamma(Sigma_hat^(k))``.

    Parameters
    ----------
    y : ExceedanceSample or array
        Arrays are read as exponential margins.
    p : float, optional
        Quantile level defining the exceedances; ignored for exact Pareto
        samples, required otherwise.

    Returns
    -------
    EmpiricalVariogram
    """
    sample = _as_exceedance_data(y)
    if sample.margin != "pareto":
        if p is None:
            raise ValueError("p is required unless the data are exact Pareto samples")
        _check_p(p)
    x = sample.values
    d = x.shape[1]
    total = np.zeros((d, d))
    counts = []
    for k in range(d):
        rows = _anchor_rows(x, sample.margin, k, p)
        if rows.size < min_exceed:
            raise TooFewExceedances(f"anchor {k + 1} has {rows.size} exceedances")
        inc = x[rows] - x[rows, k][:, None]
        total += gamma_of(np.atleast_2d(np.cov(inc, rowvar=False, ddof=1)))
        counts.append(int(rows.size))
    g = total / d
    g = (g + g.T) / 2
    np.fill_diagonal(g, 0.0)
    return EmpiricalVariogram(g, p, tuple(counts))


def cliquewise_variogram(y, graph, p=None, min_exceed=MIN_EXCEED):
    """Partial variogram from per-clique empirical variograms.

    Each maximal clique is estimated on its own columns; edges shared by
    several cliques receive the average. Entries off the graph are unspecified.
    """
    if not is_connected(graph):
        raise NotConnected("graph is not connected")
    sample = _as_exceedance_data(y)
    d = graph.d
    total = np.zeros((d, d))
    hits = np.zeros((d, d))
    for clique in maximal_cliques(graph):
        idx = np.array(clique)
        sub = empirical_variogram(sample.subset(clique), p, min_exceed).gamma_hat
        total[np.ix_(idx, idx)] += sub
        hits[np.ix_(idx, idx)] += 1
    with np.errstate(invalid="ignore"):
        values = np.where(hits > 0, total / np.maximum(hits, 1), np.nan)
    np.fill_diagonal(values, 0.0)
    return PartialVariogram(values)


def learn_tree(gamma_hat):
    """Minimum spanning tree with edge weights ``Gamma_hat``."""
    g = gamma_hat.gamma_hat if isinstance(gamma_hat, EmpiricalVariogram) else gamma_hat
    g = np.asarray(g, dtype=float)
    if not np.all(np.isfinite(g)):
        raise ValueError("variogram estimate must be finite")
    return minimum_spanning_tree(g)


def fit_graph_structured(y, graph, p=None, mode="full", init=None, **completion_kw):
    """Graph-structured estimate: completion of the graph-restricted estimate.

    ``mode="full"`` restricts the empirical variogram to the graph and completes
    it, using the full estimate as the starting point on non-decomposable
    graphs. ``mode="cliquewise"`` completes the clique-wise estimate; on a
    non-decomposable graph that needs an ``init`` agreeing with it on the edges.
    """
    if not is_connected(graph):
        raise NotConnected("graph is not connected")
    if mode == "full":
        g_hat = empirical_variogram(y, p).gamma_hat
        return complete(restrict_to_graph(g_hat, graph), graph, init=g_hat, **completion_kw)
    if mode == "cliquewise":
        partial = cliquewise_variogram(y, graph, p)
        if not graph.is_complete() and not is_decomposable(graph) and init is None:
            raise NeedsFullInit("clique-wise estimates on a non-decomposable graph need an init")
        return complete(partial, graph, init=init, **completion_kw)
    raise ValueError(f"mode must be 'full' or 'cliquewise', got {mode!r}")


def mse(gamma, gamma_hat):
    """Mean squared error over the upper-triangular entries."""
    g = np.asarray(gamma, dtype=float)
    h = np.asarray(gamma_hat, dtype=float)
    iu = np.triu_indices(g.shape[0], 1)
    return float(np.mean((g[iu] - h[iu]) ** 2))
