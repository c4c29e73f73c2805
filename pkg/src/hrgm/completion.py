"""Graphical completion of partially specified variogram matrices.

Given a connected graph G and variogram values on its edges, find the unique
conditionally negative definite matrix that keeps those values and whose
precision matrix vanishes on every non-edge. Block graphs have a closed form
(path sums), decomposable graphs are filled clique by clique, and general
graphs are handled by cycling through a cover of decomposable supergraphs.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import shortest_path

from .exceptions import (
    DimensionMismatch,
    EmptySeparator,
    InitMismatch,
    NoConvergence,
    NotBlockGraph,
    NotConditionallyNegativeDefinite,
    NotConnected,
    NotPartiallyCND,
    NotPD,
)
from .graph import (
    UndirectedGraph,
    clique_ordering,
    decomposable_cover,
    is_block_graph,
    is_connected,
    is_decomposable,
    maximal_cliques,
)
from .linalg import check_variogram, log_pseudo_determinant, symmetrize
from .transforms import sigma_of, theta_of

THETA_TOL = 1e-6
MAX_ITER = 10_000
DEFAULT_COVER = "fill-in"


class PartialVariogram:
    """Symmetric matrix with zero diagonal and unspecified entries stored as NaN."""

    def __init__(self, values):
        v = np.array(values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {v.shape}")
        nan = np.isnan(v)
        if np.any(nan != nan.T):
            raise ValueError("specified entries must form a symmetric pattern")
        diag = np.diag(v)
        if np.any(np.isnan(diag)) or np.any(diag != 0):
            raise ValueError("diagonal must be specified and zero")
        filled = np.where(nan, 0.0, v)
        if np.max(np.abs(filled - filled.T)) > 1e-8:
            raise ValueError("partial variogram must be symmetric")
        v = np.where(nan, np.nan, (filled + filled.T) / 2)
        self.values = v

    @property
    def d(self):
        return self.values.shape[0]

    @property
    def mask(self):
        return ~np.isnan(self.values)

    def specified_graph(self):
        return UndirectedGraph.from_adjacency(self.mask & ~np.eye(self.d, dtype=bool))

    def is_specified_on(self, graph):
        return bool(np.all(self.mask[graph.mask()]))

    def __repr__(self):
        return f"PartialVariogram(d={self.d}, specified={int(self.mask.sum())})"


@dataclass
class CompletionReport:
    gamma: np.ndarray
    theta: np.ndarray
    iterations: int = 0
    max_nonedge_theta: float = 0.0
    converged: bool = True
    kl_trace: list = field(default_factory=list)
    nonedge_trace: list = field(default_factory=list)
    non_edges: list = field(default_factory=list)
    method: str = ""

    def to_dict(self):
        return {
            "method": self.method,
            "iterations": self.iterations,
            "converged": self.converged,
            "max_nonedge_theta": self.max_nonedge_theta,
            "kl_trace": [float(x) for x in self.kl_trace],
        }


@dataclass
class Diagnosis:
    status: str  # "infeasible" or "unknown"
    reasons: list = field(default_factory=list)

    @property
    def infeasible(self):
        return self.status == "infeasible"


def restrict_to_graph(gamma, graph):
    g = np.asarray(gamma, dtype=float)
    if g.shape != (graph.d, graph.d):
        raise DimensionMismatch(f"matrix is {g.shape[0]}x{g.shape[1]}, graph has d={graph.d}")
    return PartialVariogram(np.where(graph.mask(), g, np.nan))


def _as_partial(p):
    return p if isinstance(p, PartialVariogram) else PartialVariogram(p)


def _check_inputs(p, graph):
    if p.d != graph.d:
        raise DimensionMismatch(f"matrix has d={p.d}, graph has d={graph.d}")
    if not is_connected(graph):
        raise NotConnected("graph is not connected")
    if not p.is_specified_on(graph):
        raise ValueError("partial matrix is not specified on every edge of the graph")


def _check_cliques_cnd(values, cliques):
    for c in cliques:
        idx = np.array(sorted(c))
        if idx.size < 2:
            continue
        try:
            check_variogram(values[np.ix_(idx, idx)])
        except NotConditionallyNegativeDefinite as exc:
            labels = [int(i) for i in idx]
            raise NotPartiallyCND(f"submatrix on clique {labels} is not CND: {exc}") from exc


def _nonedge_theta(theta, graph):
    off = ~graph.mask()
    return float(np.max(np.abs(theta[off]))) if off.any() else 0.0


def _report(gamma, graph, method, **kw):
    theta = theta_of(gamma)
    return CompletionReport(
        gamma=gamma,
        theta=theta,
        max_nonedge_theta=_nonedge_theta(theta, graph),
        non_edges=graph.non_edges(),
        method=method,
        **kw,
    )


def complete_block(p, graph):
    """Path-sum completion on a connected block graph."""
    p = _as_partial(p)
    _check_inputs(p, graph)
    if not is_block_graph(graph):
        raise NotBlockGraph("graph is not a block graph")
    values = p.values
    _check_cliques_cnd(values, clique_ordering(graph).cliques)

    adj = graph.adjacency_sets()
    gamma = np.zeros((p.d, p.d))
    for src in range(p.d):
        dist = {src: 0.0}
        queue = [src]
        for u in queue:
            for v in sorted(adj[u]):
                if v not in dist:
                    dist[v] = dist[u] + values[u, v]
                    queue.append(v)
        for v, w in dist.items():
            gamma[src, v] = w
    gamma = (gamma + gamma.T) / 2
    # edges are single-hop paths; stamp them so they are bit-exact
    gamma[graph.mask()] = values[graph.mask()]
    return _report(gamma, graph, "block")


def _fill_two_clique(g, c1, c2, check_c1=True, anchor=None):
    """Fill the ``(c1 - c2) x (c2 - c1)`` block of ``g`` in place.

    Works with the covariance anchored at ``anchor`` (default: the smallest
    separator node); the result does not depend on that choice.
    """
    sep = set(c1) & set(c2)
    if not sep:
        raise EmptySeparator("cliques must overlap")
    k = min(sep) if anchor is None else anchor
    if k not in sep:
        raise ValueError(f"anchor {k} is not in the separator")
    a = np.array(sorted(set(c1) - sep), dtype=int)
    b = np.array(sorted(sep - {k}), dtype=int)
    c = np.array(sorted(set(c2) - sep), dtype=int)
    if a.size == 0 or c.size == 0:
        return g

    def cov(rows, cols):
        return 0.5 * (g[rows, k][:, None] + g[k, cols][None, :] - g[np.ix_(rows, cols)])

    blocks = [(np.array(sorted(set(c2) - {k}), dtype=int), "second")]
    if check_c1:
        blocks.append((np.array(sorted(set(c1) - {k}), dtype=int), "first"))
    for idx, name in blocks:
        if idx.size and np.linalg.eigvalsh(symmetrize(cov(idx, idx)))[0] <= 0:
            raise NotPD(f"anchored covariance on the {name} clique is not positive definite")

    if b.size:
        s_ac = cov(a, b) @ np.linalg.solve(cov(b, b), cov(b, c))
    else:
        s_ac = np.zeros((a.size, c.size))
    block = g[a, k][:, None] + g[k, c][None, :] - 2 * s_ac
    g[np.ix_(a, c)] = block
    g[np.ix_(c, a)] = block.T
    return g


def complete_two_clique(p, c1, c2, anchor=None):
    """Completion of a matrix specified on two overlapping cliques covering all nodes."""
    p = _as_partial(p)
    c1, c2 = set(c1), set(c2)
    if c1 | c2 != set(range(p.d)):
        raise ValueError("the two cliques must cover every node")
    for c in (c1, c2):
        idx = np.array(sorted(c))
        if not np.all(p.mask[np.ix_(idx, idx)]):
            raise ValueError("partial matrix must be specified on both cliques")
    g = p.values.copy()
    _fill_two_clique(g, c1, c2, anchor=anchor)
    return g


def _complete_ordered(values, ordering):
    g = values.copy()
    done = set(ordering.cliques[0])
    for clique in ordering.cliques[1:]:
        _fill_two_clique(g, done, clique, check_c1=False)
        done |= clique
    return g


def complete_decomposable(p, graph):
    """Clique-by-clique completion on a connected decomposable graph."""
    p = _as_partial(p)
    _check_inputs(p, graph)
    ordering = clique_ordering(graph)
    values = np.where(graph.mask(), p.values, np.nan)
    _check_cliques_cnd(values, ordering.cliques)
    gamma = _complete_ordered(values, ordering)
    return _report(gamma, graph, "decomposable")


def kl_divergence(gamma1, gamma2):
    """Kullback-Leibler divergence between the degenerate Gaussians of two variograms."""
    g1 = np.asarray(gamma1, dtype=float)
    g2 = np.asarray(gamma2, dtype=float)
    if g1.shape != g2.shape:
        raise DimensionMismatch("variograms must have the same dimension")
    d = g1.shape[0]
    s1 = sigma_of(g1)
    t2 = theta_of(g2)
    # |Theta2 Sigma1|_+ factorises since both have kernel span(1)
    logdet = log_pseudo_determinant(t2)[1] + log_pseudo_determinant(s1)[1]
    return float(-0.5 * (logdet + d - 1 - np.trace(t2 @ s1)))


def complete_general(p, graph, init, theta_tol=THETA_TOL, max_iter=MAX_ITER,
                     cover=None, strict=False):
    """Cyclic completion over a decomposable cover of a general connected graph.

    Parameters
    ----------
    p : PartialVariogram or array
        Values on the edges of ``graph`` (other entries ignored).
    graph : UndirectedGraph
    init : array
        Full variogram agreeing with ``p`` on the edges; the start of the cycle.
    theta_tol : float
        Stop once every non-edge precision entry is at most this in absolute value.
    max_iter : int
        Maximum number of single-graph completion steps.
    cover : str or list of UndirectedGraph, optional
        ``"fill-in"`` (default), ``"one-per-nonedge"`` or explicit chordal
        supergraphs. The naive one-per-nonedge cover converges much more
        slowly on chordless cycles.
    strict : bool
        Raise :class:`NoConvergence` instead of returning an unconverged report.

    Returns
    -------
    CompletionReport
        ``kl_trace[n]`` is the divergence between consecutive iterates and
        ``nonedge_trace[n]`` holds ``|Theta_ij|`` on the non-edges after step n.
    """
    p = _as_partial(p)
    _check_inputs(p, graph)
    init = check_variogram(init)
    if init.shape != (p.d, p.d):
        raise DimensionMismatch("init has the wrong dimension")
    mask = graph.mask()
    edge_values = p.values[mask]
    if np.max(np.abs(init[mask] - edge_values)) > 1e-9 * max(1.0, np.max(np.abs(edge_values))):
        raise InitMismatch("init disagrees with the partial matrix on an edge")

    non_edges = graph.non_edges()
    gamma = init.copy()
    gamma[mask] = edge_values
    theta = theta_of(gamma)
    nonedge_idx = tuple(np.array(non_edges).T) if non_edges else None
    current = _nonedge_theta(theta, graph)
    if current <= theta_tol:
        return CompletionReport(gamma, theta, 0, current, True, [], [], non_edges, "general")

    if isinstance(cover, (list, tuple)):
        graphs = list(cover)
    else:
        graphs = decomposable_cover(graph, cover or DEFAULT_COVER)
    for h in graphs:
        if not set(graph.edges) <= set(h.edges) or not is_decomposable(h):
            raise ValueError("cover graphs must be decomposable supergraphs of the graph")
    orderings = [clique_ordering(h) for h in graphs]
    masks = [h.mask() for h in graphs]

    kl_trace, nonedge_trace = [], []
    best = (current, gamma, theta)
    n = 0
    while n < max_iter:
        t = n % len(graphs)
        values = np.where(masks[t], gamma, np.nan)
        values[mask] = edge_values
        new = _complete_ordered(values, orderings[t])
        new[mask] = edge_values
        n += 1
        kl_trace.append(kl_divergence(gamma, new))
        gamma = new
        theta = theta_of(gamma)
        nonedge_trace.append(np.abs(theta[nonedge_idx]))
        current = _nonedge_theta(theta, graph)
        if current < best[0]:
            best = (current, gamma, theta)
        if current <= theta_tol:
            break

    converged = best[0] <= theta_tol
    report = CompletionReport(best[1], best[2], n, best[0], converged,
                              kl_trace, nonedge_trace, non_edges, "general")
    if not converged and strict:
        raise NoConvergence(f"no convergence after {n} iterations "
                            f"(max non-edge |theta| = {best[0]:.3g})", report)
    return report


def complete(p, graph, init=None, **kwargs):
    """Dispatch to the cheapest exact completion the graph allows."""
    p = _as_partial(p)
    if graph.is_complete():
        _check_inputs(p, graph)
        gamma = check_variogram(p.values)
        return _report(gamma, graph, "complete")
    if is_block_graph(graph):
        return complete_block(p, graph)
    if is_decomposable(graph):
        return complete_decomposable(p, graph)
    if init is None:
        raise ValueError("a full initial variogram is required for non-decomposable graphs")
    return complete_general(p, graph, init, **kwargs)


def detect_noncompletable(p, graph):
    """Cheap screening for partial matrices that have no valid completion.

    Two necessary conditions are checked: every clique submatrix must be
    conditionally negative definite, and the square roots of the specified
    entries, read as distances, must obey the triangle inequality along every
    path of the graph. ``"unknown"`` means neither test fired; it is not a
    proof of completability.
    """
    p = _as_partial(p)
    if p.d != graph.d:
        raise DimensionMismatch("dimension mismatch")
    reasons = []
    values = np.where(graph.mask(), p.values, np.nan)
    if np.any(np.isnan(values[graph.mask()])):
        reasons.append("partial matrix is not specified on every edge")
        return Diagnosis("infeasible", reasons)
    if np.any(values[graph.adjacency_matrix()] <= 0):
        reasons.append("non-positive entry on an edge")

    for c in maximal_cliques(graph):
        if len(c) < 2:
            continue
        idx = np.array(c)
        try:
            check_variogram(values[np.ix_(idx, idx)])
        except NotConditionallyNegativeDefinite:
            reasons.append(f"clique {[i + 1 for i in c]} is not conditionally negative definite")

    dist = np.where(graph.adjacency_matrix(), np.sqrt(np.clip(np.nan_to_num(values), 0, None)), 0.0)
    sp = shortest_path(dist, method="D", directed=False)
    for i, j in sorted(graph.edges):
        if dist[i, j] > sp[i, j] * (1 + 1e-9) + 1e-12:
            reasons.append(
                f"sqrt(Gamma[{i + 1},{j + 1}]) = {dist[i, j]:.4g} exceeds the shortest "
                f"path length {sp[i, j]:.4g} (triangle inequality)"
            )
    return Diagnosis("infeasible" if reasons else "unknown", reasons)
