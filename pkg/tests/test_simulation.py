import numpy as np
import pytest
from scipy.stats import norm

from hrgm.estimation import empirical_chi, empirical_variogram
from hrgm.exceptions import NotInCone, RejectionBudgetExceeded
from hrgm.linalg import centering_projector, is_variogram
from hrgm.simulation import (SamplerConfig, estimate_exceedance_mass, make_rng, random_variogram,
                             sample_anchor, sample_degenerate_gaussian, sample_pareto,
                             tree_variogram)
from hrgm.transforms import chi_of_gamma, sigma_k, sigma_of

from conftest import random_connected_graph, random_variograms


def batch_se(values, batches=50):
    """Standard error of the mean from batch means."""
    means = np.array([b.mean(axis=0) for b in np.array_split(values, batches)])
    return means.std(axis=0, ddof=1) / np.sqrt(batches)


class TestAnchorLaw:
    def test_support(self):
        g = next(random_variograms(1, [4]))
        y = sample_anchor(g, 2, make_rng(0), size=1000)
        assert np.all(y[:, 2] > 0)
        assert sample_anchor(g, 0, make_rng(0)).shape == (4,)

    def test_increment_moments(self):
        g = next(random_variograms(1, [4], seed=1))
        k = 1
        y = sample_anchor(g, k, make_rng(1), size=100_000)
        sk = sigma_k(g, k)
        inc = y[:, sk.index] - y[:, [k]]
        assert np.all(np.abs(inc.mean(axis=0) + 0.5 * g[sk.index, k]) <= 3 * batch_se(inc))
        centred = inc - inc.mean(axis=0)
        prods = np.einsum("ni,nj->nij", centred, centred).reshape(len(inc), -1)
        cov = prods.mean(axis=0)
        assert np.all(np.abs(cov - sk.sigma.ravel()) <= 3 * batch_se(prods) + 1e-12)


class TestParetoSampler:
    def test_support_and_shape(self):
        g = next(random_variograms(1, [5], seed=2))
        sample, info = sample_pareto(g, 2000, 3)
        assert sample.values.shape == (2000, 5) and sample.margin == "pareto"
        assert np.all(sample.values.max(axis=1) > 0)
        assert 1 / 5 <= info.acceptance_rate <= 1

    def test_reproducible(self):
        g = next(random_variograms(1, [4], seed=3))
        a, _ = sample_pareto(g, 500, SamplerConfig(seed=42))
        b, _ = sample_pareto(g, 500, 42)
        c, _ = sample_pareto(g, 500, 43)
        assert np.array_equal(a.values, b.values)
        assert not np.array_equal(a.values, c.values)

    def test_mass_matches_closed_form(self):
        g = np.array([[0, 4.0], [4.0, 0]])
        mass, se = estimate_exceedance_mass(g, 200_000, seed=4)
        assert abs(mass - 2 * norm.cdf(1.0)) <= 3 * se
        _, info = sample_pareto(g, 50_000, 5)
        m, s = info.mass(2)
        assert abs(m - 2 * norm.cdf(1.0)) <= 3 * s

    def test_variogram_closure(self):
        g = next(random_variograms(1, [4], seed=6))
        sample, _ = sample_pareto(g, 100_000, 7)
        from hrgm.data import ExceedanceSample
        reps = np.array([empirical_variogram(ExceedanceSample(part, "pareto")).gamma_hat
                         for part in np.array_split(sample.values, 20)])
        est = empirical_variogram(sample).gamma_hat
        se = reps.std(axis=0, ddof=1) / np.sqrt(20)
        off = ~np.eye(4, dtype=bool)
        assert np.all(np.abs(est - g)[off] <= 3 * se[off])

    @pytest.mark.parametrize("eta", [1.0, 4.0, 10.0])
    def test_chi_at_d2(self, eta):
        g = np.array([[0, eta], [eta, 0]])
        sample, _ = sample_pareto(g, 100_000, int(eta * 10))
        chi = empirical_chi(sample, 0.99)[0, 1]
        truth = chi_of_gamma(g)[0, 1]
        m = 1000
        se = np.sqrt(truth * (1 - truth) / m)
        assert abs(chi - truth) <= 3 * se

    def test_threshold_stability(self):
        from hrgm.data import ExceedanceSample
        g = next(random_variograms(1, [3], seed=8))
        sample, _ = sample_pareto(g, 200_000, 9)
        a = np.array([0.5, 0.2, 0.8])
        y = sample.values
        keep = np.any(y > a, axis=1)
        shifted = ExceedanceSample(y[keep] - a, "pareto")
        est = empirical_variogram(shifted).gamma_hat
        assert np.abs(est - g).max() < 0.1 * np.abs(g).max()

    def test_budget(self):
        with pytest.raises(ValueError):
            SamplerConfig(max_rejections=1).budget(10, 3)
        # nearly comonotone: about half of all proposals are rejected
        g = np.array([[0, 0.01], [0.01, 0]])
        with pytest.raises(RejectionBudgetExceeded):
            sample_pareto(g, 100_000, SamplerConfig(seed=0, max_rejections=2))


class TestDegenerateGaussian:
    def test_rows_sum_to_zero(self):
        s = sigma_of(next(random_variograms(1, [5], seed=10)))
        z = sample_degenerate_gaussian(s, 1000, make_rng(0))
        assert np.abs(z.sum(axis=1)).max() < 1e-10

    def test_covariance(self):
        s = sigma_of(next(random_variograms(1, [4], seed=11)))
        z = sample_degenerate_gaussian(s, 100_000, make_rng(1))
        prods = np.einsum("ni,nj->nij", z, z).reshape(len(z), -1)
        assert np.all(np.abs(prods.mean(axis=0) - s.ravel()) <= 3 * batch_se(prods) + 1e-12)

    def test_d2_projector(self):
        z = sample_degenerate_gaussian(centering_projector(2), 100_000, make_rng(2))
        assert abs(z[:, 0].var() - 0.5) < 0.01

    def test_invalid(self):
        with pytest.raises(NotInCone):
            sample_degenerate_gaussian(np.eye(3), 10, make_rng(0))


def test_random_variogram_is_valid():
    rng = make_rng(12)
    for d in range(2, 10):
        g = random_variogram(d, rng, scale=2.0)
        assert is_variogram(g)
        assert np.isclose(g[~np.eye(d, dtype=bool)].mean(), 2.0)


def test_tree_variogram_path_sums():
    rng = make_rng(13)
    tree = random_connected_graph(6, rng, p=0.0)
    weights = {e: float(rng.uniform(0.5, 2)) for e in tree.edges}
    g = tree_variogram(tree, weights)
    for (i, j), w in weights.items():
        assert g[i, j] == w
    assert is_variogram(g)
