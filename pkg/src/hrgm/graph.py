"""Undirected graphs and the chordal-graph machinery used by the completions.

Nodes are the integers ``0, ..., d-1``. File formats use 1-based labels; the
conversion happens in :mod:`hrgm.io`.
"""

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .exceptions import CompleteGraph, NotConnected, NotDecomposable


def _edge(i, j):
    i, j = int(i), int(j)
    if i == j:
        raise ValueError(f"self-loop at node {i}")
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class UndirectedGraph:
    """Simple undirected graph on ``d`` nodes.

    Edges are stored as sorted pairs, so ``has_edge(i, j) == has_edge(j, i)``.
    """

    d: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("a graph needs at least one node")
        canon = frozenset(_edge(i, j) for i, j in self.edges)
        for i, j in canon:
            if not (0 <= i < self.d and 0 <= j < self.d):
                raise ValueError(f"edge ({i}, {j}) out of range for d={self.d}")
        object.__setattr__(self, "edges", canon)

    @classmethod
    def from_edges(cls, d, edges):
        return cls(d, frozenset(_edge(i, j) for i, j in edges))

    @classmethod
    def complete(cls, d):
        return cls(d, frozenset(combinations(range(d), 2)))

    @classmethod
    def from_adjacency(cls, adj, tol=0.0):
        adj = np.asarray(adj)
        d = adj.shape[0]
        return cls(d, frozenset((i, j) for i, j in combinations(range(d), 2)
                                if abs(adj[i, j]) > tol))

    def has_edge(self, i, j):
        return i != j and _edge(i, j) in self.edges

    def neighbors(self, i):
        return {b if a == i else a for a, b in self.edges if i in (a, b)}

    def adjacency_sets(self):
        adj = [set() for _ in range(self.d)]
        for i, j in self.edges:
            adj[i].add(j)
            adj[j].add(i)
        return adj

    def adjacency_matrix(self):
        a = np.zeros((self.d, self.d), dtype=bool)
        for i, j in self.edges:
            a[i, j] = a[j, i] = True
        return a

    def mask(self):
        """Boolean matrix of the edge set augmented by the diagonal."""
        return self.adjacency_matrix() | np.eye(self.d, dtype=bool)

    def non_edges(self):
        return sorted(set(combinations(range(self.d), 2)) - self.edges)

    def is_complete(self):
        return len(self.edges) == self.d * (self.d - 1) // 2

    def with_edges(self, extra):
        return UndirectedGraph(self.d, self.edges | {_edge(i, j) for i, j in extra})

    def without_edges(self, removed):
        return UndirectedGraph(self.d, self.edges - {_edge(i, j) for i, j in removed})

    def induced(self, nodes):
        """Edges with both endpoints in ``nodes`` (labels kept)."""
        nodes = set(nodes)
        return {e for e in self.edges if e[0] in nodes and e[1] in nodes}

    def __len__(self):
        return self.d


@dataclass(frozen=True)
class CliqueOrdering:
    """Cliques in an order with the running intersection property.

    ``separators[i]`` belongs to ``cliques[i + 1]``.
    """

    cliques: tuple
    separators: tuple


def is_connected(g):
    if g.d == 1:
        return True
    adj = g.adjacency_sets()
    seen = {0}
    stack = [0]
    while stack:
        for j in adj[stack.pop()]:
            if j not in seen:
                seen.add(j)
                stack.append(j)
    return len(seen) == g.d


def maximum_cardinality_search(g):
    """Visit order of maximum cardinality search (ties broken by lowest label).

    The reverse of the returned order is a perfect elimination ordering iff
    ``g`` is chordal.
    """
    adj = g.adjacency_sets()
    weight = [0] * g.d
    visited = [False] * g.d
    order = []
    for _ in range(g.d):
        v = max((i for i in range(g.d) if not visited[i]), key=lambda i: (weight[i], -i))
        visited[v] = True
        order.append(v)
        for u in adj[v]:
            if not visited[u]:
                weight[u] += 1
    return order


def _earlier_neighbors(g, order):
    adj = g.adjacency_sets()
    pos = {v: n for n, v in enumerate(order)}
    return [{u for u in adj[v] if pos[u] < pos[v]} for v in order]


def is_decomposable(g):
    """True iff ``g`` is chordal, checked by MCS plus elimination verification."""
    order = maximum_cardinality_search(g)
    adj = g.adjacency_sets()
    for earlier in _earlier_neighbors(g, order):
        for a, b in combinations(earlier, 2):
            if b not in adj[a]:
                return False
    return True


def clique_ordering(g):
    """Maximal cliques of a connected chordal graph in running-intersection order."""
    if not is_connected(g):
        raise NotConnected("graph is not connected")
    order = maximum_cardinality_search(g)
    earlier = _earlier_neighbors(g, order)
    adj = g.adjacency_sets()
    for prev in earlier:
        for a, b in combinations(prev, 2):
            if b not in adj[a]:
                raise NotDecomposable("graph has a chordless cycle of length >= 4")

    # {v} | earlier(v) is a clique; the maximal ones, in visit order, satisfy RIP
    candidates = [frozenset(prev | {v}) for v, prev in zip(order, earlier)]
    cliques = []
    for n, c in enumerate(candidates):
        if any(c < other for other in candidates[n + 1:]):
            continue
        if any(c <= kept for kept in cliques):
            continue
        cliques.append(c)

    separators = []
    seen = set(cliques[0])
    for c in cliques[1:]:
        separators.append(frozenset(c & seen))
        seen |= c
    return CliqueOrdering(tuple(cliques), tuple(separators))


def satisfies_rip(ordering):
    cliques = ordering.cliques
    for n in range(1, len(cliques)):
        union = frozenset().union(*cliques[:n])
        sep = cliques[n] & union
        if sep != ordering.separators[n - 1]:
            return False
        if not any(sep <= cliques[m] for m in range(n)):
            return False
    return True


def is_block_graph(g):
    if not is_connected(g) or not is_decomposable(g):
        return False
    return all(len(s) <= 1 for s in clique_ordering(g).separators)


def _elimination_fill(adj, first):
    """Fill edges from eliminating ``first`` then greedily by minimum fill."""
    adj = [set(a) for a in adj]
    remaining = set(range(len(adj)))
    fill = set()

    def eliminate(v):
        nb = adj[v] & remaining
        for a, b in combinations(sorted(nb), 2):
            if b not in adj[a]:
                adj[a].add(b)
                adj[b].add(a)
                fill.add((a, b))
        remaining.discard(v)

    def cost(v):
        nb = sorted(adj[v] & remaining)
        return sum(1 for a, b in combinations(nb, 2) if b not in adj[a])

    eliminate(first)
    while remaining:
        eliminate(min(remaining, key=lambda v: (cost(v), v)))
    return fill


def decomposable_cover(g, strategy="one-per-nonedge"):
    """Chordal supergraphs of ``g`` whose edge sets intersect exactly in ``g``.

    ``one-per-nonedge`` returns the complete graph minus one non-edge for every
    non-edge. ``fill-in`` builds chordal completions that each exclude at least
    one still-uncovered non-edge (by eliminating one of its endpoints first),
    which usually needs far fewer graphs.
    """
    if not is_connected(g):
        raise NotConnected("graph is not connected")
    non_edges = g.non_edges()
    if not non_edges:
        raise CompleteGraph("complete graph has no decomposable cover to build")
    full = UndirectedGraph.complete(g.d)
    if strategy == "one-per-nonedge":
        return [full.without_edges([e]) for e in non_edges]
    if strategy != "fill-in":
        raise ValueError(f"unknown cover strategy {strategy!r}")

    adj = g.adjacency_sets()
    uncovered = list(non_edges)
    cover = []
    while uncovered:
        e = uncovered[0]
        best = None
        for first in e:
            fill = _elimination_fill(adj, first)
            if best is None or len(fill) < len(best):
                best = fill
        h = g.with_edges(best)
        if not is_decomposable(h) or h.has_edge(*e):
            h = full.without_edges([e])
        cover.append(h)
        uncovered = [f for f in uncovered if h.has_edge(*f)]
    return cover


def graph_laplacian(g):
    lap = -g.adjacency_matrix().astype(float)
    np.fill_diagonal(lap, -lap.sum(axis=1))
    return lap


def minimum_spanning_tree(weights):
    """Kruskal on the complete graph; ties broken by lexicographic edge order."""
    w = np.asarray(weights, dtype=float)
    d = w.shape[0]
    parent = list(range(d))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    tree = []
    for _, i, j in sorted((w[i, j], i, j) for i, j in combinations(range(d), 2)):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            tree.append((i, j))
            if len(tree) == d - 1:
                break
    return UndirectedGraph.from_edges(d, tree)


def maximal_cliques(g):
    """All maximal cliques (Bron-Kerbosch with pivoting), as sorted tuples."""
    adj = g.adjacency_sets()
    found = []

    def expand(r, p, x):
        if not p and not x:
            found.append(tuple(sorted(r)))
            return
        pivot = max(p | x, key=lambda u: len(adj[u] & p))
        for v in sorted(p - adj[pivot]):
            expand(r | {v}, p & adj[v], x & adj[v])
            p = p - {v}
            x = x | {v}

    expand(set(), set(range(g.d)), set())
    return sorted(found)
