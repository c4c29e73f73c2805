"""scikit-learn style wrappers around the estimation pipeline."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .completion import DEFAULT_COVER, MAX_ITER, THETA_TOL, complete, restrict_to_graph
from .data import ExceedanceSample
from .density import surrogate_loglik
from .estimation import cliquewise_variogram, empirical_variogram, learn_tree
from .exceptions import NeedsFullInit
from .graph import UndirectedGraph, is_decomposable
from .transforms import chi_of_gamma


class EmpiricalMarginTransformer(TransformerMixin, BaseEstimator):
    """Maps each column to standard exponential margins through its empirical CDF.

    On the training data this is the average-rank transform
    ``-log(1 - rank / (n + 1))``; new data are placed by their position in the
    stored training columns.
    """

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        self.sorted_ = np.sort(X, axis=0)
        self.n_samples_fit_ = X.shape[0]
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "sorted_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} columns, got {X.shape[1]}")
        out = np.empty_like(X)
        for j in range(X.shape[1]):
            col = self.sorted_[:, j]
            below = np.searchsorted(col, X[:, j], side="left")
            upto = np.searchsorted(col, X[:, j], side="right")
            rank = np.where(upto > below, (below + 1 + upto) / 2, below + 0.5)
            out[:, j] = -np.log1p(-rank / (self.n_samples_fit_ + 1))
        return out


class HuslerReissGraphical(BaseEstimator):
    """Graph-structured Hüsler-Reiss estimator.

    The empirical variogram is restricted to the graph and completed, so the
    fitted precision matrix vanishes off the graph.

    Parameters
    ----------
    graph : {"complete", "mst"}, UndirectedGraph or list of (i, j)
        Conditional independence graph; ``"mst"`` learns a tree from the data.
        Edge lists use 0-based labels.
    p : float
        Quantile level of the exceedance threshold (ignored for exact Pareto data).
    mode : {"full", "cliquewise"}
        Estimate every variogram entry at once or each clique separately.
    margins : {"raw", "exponential", "pareto"}
        How to read ``X``: raw observations are rank-transformed first.
    theta_tol, max_iter, cover
        Passed to the cyclic completion for non-decomposable graphs.

    Attributes
    ----------
    variogram_ : ndarray of shape (d, d)
    precision_ : ndarray of shape (d, d)
    extremal_correlation_ : ndarray of shape (d, d)
    empirical_variogram_ : ndarray of shape (d, d)
    graph_ : UndirectedGraph
    converged_ : bool
    n_iter_ : int
    """

    def __init__(self, graph="complete", p=0.95, mode="full", margins="raw",
                 theta_tol=THETA_TOL, max_iter=MAX_ITER, cover=DEFAULT_COVER):
        self.graph = graph
        self.p = p
        self.mode = mode
        self.margins = margins
        self.theta_tol = theta_tol
        self.max_iter = max_iter
        self.cover = cover

    def _sample(self, X):
        return ExceedanceSample(check_array(X, dtype=float), self.margins)

    def _p(self):
        return None if self.margins == "pareto" else self.p

    def _resolve_graph(self, d, g_hat):
        if isinstance(self.graph, UndirectedGraph):
            graph = self.graph
        elif isinstance(self.graph, str):
            if self.graph == "complete":
                graph = UndirectedGraph.complete(d)
            elif self.graph == "mst":
                graph = learn_tree(g_hat)
            else:
                raise ValueError(f"unknown graph spec {self.graph!r}")
        else:
            graph = UndirectedGraph.from_edges(d, self.graph)
        if graph.d != d:
            raise ValueError(f"graph has {graph.d} nodes but the data have {d} columns")
        return graph

    def fit(self, X, y=None):
        if self.mode not in ("full", "cliquewise"):
            raise ValueError(f"mode must be 'full' or 'cliquewise', got {self.mode!r}")
        sample = self._sample(X)
        g_hat = empirical_variogram(sample, self._p()).gamma_hat
        graph = self._resolve_graph(sample.d, g_hat)
        kw = dict(theta_tol=self.theta_tol, max_iter=self.max_iter, cover=self.cover)
        if self.mode == "full":
            report = complete(restrict_to_graph(g_hat, graph), graph, init=g_hat, **kw)
        else:
            if not graph.is_complete() and not is_decomposable(graph):
                raise NeedsFullInit("clique-wise estimation needs a decomposable graph")
            report = complete(cliquewise_variogram(sample, graph, self._p()), graph)

        self.empirical_variogram_ = g_hat
        self.graph_ = graph
        self.variogram_ = report.gamma
        self.precision_ = report.theta
        self.extremal_correlation_ = chi_of_gamma(report.gamma)
        self.converged_ = report.converged
        self.n_iter_ = report.iterations
        self.completion_report_ = report
        self.n_features_in_ = sample.d
        return self

    def score(self, X, y=None):
        """Surrogate log-likelihood of the fitted precision at the empirical variogram of ``X``."""
        check_is_fitted(self, "precision_")
        g_bar = empirical_variogram(self._sample(X), self._p()).gamma_hat
        return surrogate_loglik(g_bar, self.precision_)
