"""Exact sampling from Hüsler-Reiss Pareto distributions.

Sampler
-------
Conditioned on ``Y_k > 0``, a Hüsler-Reiss Pareto vector has ``Y_k`` standard
exponential and Gaussian increments ``(Y_i - Y_k)_{i != k}`` with mean
``-diag(Sigma^(k)) / 2`` and covariance ``Sigma^(k)``; that law has density
``lambda(y) 1{y_k > 0}`` because each half-space carries unit mass.

Drawing the anchor ``k`` uniformly therefore proposes from
``lambda(y) m(y) / d`` on the support, where ``m(y)`` counts the positive
coordinates. Accepting with probability ``1 / m(y)`` leaves a density
proportional to ``lambda`` on ``{y : y not <= 0}``, and the acceptance
probability is ``Lambda^c(0) / d``. So ``d`` times the acceptance rate is an
unbiased estimate of the exponent measure of the support.

Random numbers come from ``numpy.random.Generator`` with the PCG64 bit
generator; identical seeds give bit-identical samples for a given numpy
release.
"""

from dataclasses import dataclass

import numpy as np

from .data import ExceedanceSample
from .exceptions import NotInCone, RejectionBudgetExceeded
from .linalg import check_precision, symmetrize
from .transforms import gamma_of, sigma_k

BATCH = 4096


def make_rng(seed=None):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class SamplerConfig:
    seed: object = None
    max_rejections: int = None

    def budget(self, n, d):
        if self.max_rejections is None:
            return max(1000 * d * max(n, 1), d)
        if self.max_rejections < d:
            raise ValueError("max_rejections must be at least d")
        return self.max_rejections


@dataclass(frozen=True)
class SamplingInfo:
    proposals: int
    accepted: int

    @property
    def acceptance_rate(self):
        return self.accepted / self.proposals

    def mass(self, d):
        """Estimate of ``Lambda^c(0)`` and its binomial standard error."""
        p = self.acceptance_rate
        return d * p, d * np.sqrt(p * (1 - p) / self.proposals)


def _spectral_factor(sigma):
    w, q = np.linalg.eigh(symmetrize(sigma))
    return q * np.sqrt(np.clip(w, 0.0, None))


class _AnchorLaws:
    """Mean and square-root factor of the increment law for every anchor."""

    def __init__(self, gamma):
        self.gamma = np.asarray(gamma, dtype=float)
        self.d = self.gamma.shape[0]
        self.laws = []
        for k in range(self.d):
            sk = sigma_k(self.gamma, k)
            self.laws.append((sk.index, sk.mean, _spectral_factor(sk.sigma)))

    def draw(self, k, size, rng):
        idx, mean, factor = self.laws[k]
        y = np.empty((size, self.d))
        yk = rng.standard_exponential(size)
        z = rng.standard_normal((size, self.d - 1))
        y[:, k] = yk
        y[:, idx] = yk[:, None] + mean + z @ factor.T
        return y


def sample_anchor(gamma, k, rng=None, size=None):
    """Draws from the Pareto vector conditioned on ``Y_k > 0``."""
    rng = make_rng(rng)
    out = _AnchorLaws(gamma).draw(k, 1 if size is None else size, rng)
    return out[0] if size is None else out


def _propose(laws, size, rng):
    anchors = rng.integers(0, laws.d, size)
    y = np.empty((size, laws.d))
    for k in range(laws.d):
        sel = np.flatnonzero(anchors == k)
        if sel.size:
            y[sel] = laws.draw(k, sel.size, rng)
    m = np.count_nonzero(y > 0, axis=1)
    keep = rng.random(size) * m < 1.0
    return y[keep]


def sample_pareto(gamma, n, cfg=None):
    """Exact multivariate Pareto sample of size ``n`` (exponential scale).

    Returns the sample and a :class:`SamplingInfo` whose acceptance rate times
    ``d`` estimates ``Lambda^c(0)``.
    """
    cfg = cfg if isinstance(cfg, SamplerConfig) else SamplerConfig(seed=cfg)
    laws = _AnchorLaws(gamma)
    rng = make_rng(cfg.seed)
    budget = cfg.budget(n, laws.d)
    chunks, accepted, proposals = [], 0, 0
    while accepted < n:
        rejected = proposals - accepted
        if rejected > budget:
            raise RejectionBudgetExceeded(f"more than {budget} rejections")
        # never propose more than could succeed without breaching the budget
        size = max(BATCH, int(1.2 * (n - accepted) * laws.d))
        size = min(size, n - accepted + budget - rejected + 1)
        got = _propose(laws, size, rng)
        chunks.append(got)
        accepted += got.shape[0]
        proposals += size
    values = np.concatenate(chunks)[:n] if chunks else np.empty((0, laws.d))
    return ExceedanceSample(values, "pareto"), SamplingInfo(proposals, accepted)


def estimate_exceedance_mass(gamma, n_mc=100_000, seed=None):
    """``Lambda^c(0)`` from ``n_mc`` sampler proposals, with standard error."""
    laws = _AnchorLaws(gamma)
    rng = make_rng(seed)
    accepted = 0
    done = 0
    while done < n_mc:
        size = min(BATCH * 16, n_mc - done)
        accepted += _propose(laws, size, rng).shape[0]
        done += size
    return SamplingInfo(n_mc, accepted).mass(laws.d)


def sample_degenerate_gaussian(sigma, n, rng=None):
    """Mean-zero Gaussian rows with covariance ``sigma`` (kernel ``span(1)``)."""
    try:
        s = check_precision(sigma)
    except ValueError as exc:
        raise NotInCone(str(exc)) from exc
    d = s.shape[0]
    factor = _spectral_factor(s)
    z = make_rng(rng).standard_normal((n, d)) @ factor.T
    return z - z.mean(axis=1, keepdims=True)


def random_variogram(d, rng=None, scale=1.0, ridge=0.2):
    """Random strictly conditionally negative definite matrix.

    Built as the covariance transform of a random positive definite matrix,
    normalised so the mean off-diagonal entry equals ``scale``.
    """
    rng = make_rng(rng)
    b = rng.standard_normal((d, d))
    g = gamma_of(b @ b.T / d + ridge * np.eye(d))
    off = g[~np.eye(d, dtype=bool)]
    return g * (scale / off.mean()) if d > 1 else g


def tree_variogram(tree, weights):
    """Path-sum variogram on a tree; ``weights`` maps sorted edges to values."""
    d = tree.d
    adj = tree.adjacency_sets()
    g = np.zeros((d, d))
    for src in range(d):
        dist = {src: 0.0}
        queue = [src]
        for u in queue:
            for v in adj[u]:
                if v not in dist:
                    dist[v] = dist[u] + weights[(min(u, v), max(u, v))]
                    queue.append(v)
        for v, w in dist.items():
            g[src, v] = w
    return g
