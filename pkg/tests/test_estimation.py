import numpy as np
import pytest

from hrgm.completion import restrict_to_graph
from hrgm.data import ExceedanceSample
from hrgm.estimation import (cliquewise_variogram, empirical_chi, empirical_variogram,
                             fit_graph_structured, learn_tree, mse, rank_transform)
from hrgm.exceptions import (DegenerateColumn, NeedsFullInit, NotPartiallyCND,
                             TooFewExceedances)
from hrgm.graph import UndirectedGraph
from hrgm.linalg import is_variogram
from hrgm.simulation import make_rng, sample_pareto, tree_variogram
from hrgm.transforms import chi_of_gamma

from conftest import (CYCLE4, DECOMP4, graph_of_precision, published_variogram,
                      published_precision, random_connected_graph,
                      random_variograms)


class TestRankTransform:
    def test_distinct_values(self):
        x = np.array([[3.0], [1.0], [2.0], [5.0]])
        y = rank_transform(x).values[:, 0]
        expected = -np.log1p(-np.array([3, 1, 2, 4]) / 5)
        assert np.allclose(y, expected)
        assert rank_transform(x).margin == "exponential"

    def test_monotone_invariance(self, rng):
        x = rng.normal(size=(200, 3))
        assert np.array_equal(rank_transform(x).values, rank_transform(np.exp(3 * x) + 1).values)

    def test_ties_get_average_rank(self):
        x = np.array([[1.0], [2.0], [2.0], [3.0], [2.0]])
        y = rank_transform(x).values[:, 0]
        # ranks 1, 3, 3, 5, 3 over n + 1 = 6
        assert np.allclose(y, -np.log1p(-np.array([1, 3, 3, 5, 3]) / 6))

    def test_idempotent(self, rng):
        x = rng.normal(size=(100, 2))
        once = rank_transform(x)
        twice = rank_transform(ExceedanceSample(once.values, "raw"))
        assert np.allclose(once.values, twice.values)

    def test_errors(self):
        with pytest.raises(DegenerateColumn):
            rank_transform(np.column_stack([np.arange(5.0), np.ones(5)]))
        with pytest.raises(ValueError):
            rank_transform(np.array([[1.0, np.nan], [2.0, 3.0]]))


class TestEmpiricalChi:
    def test_comonotone(self, rng):
        x = rng.normal(size=1000)
        chi = empirical_chi(rank_transform(np.column_stack([x, 2 * x])), 0.9)
        assert np.allclose(chi, 1.0)

    def test_independent(self, rng):
        chi = empirical_chi(rank_transform(rng.normal(size=(10_000, 2))), 0.95)
        assert chi[0, 1] <= 0.2

    def test_symmetric_unit_diagonal(self, rng):
        chi = empirical_chi(rank_transform(rng.normal(size=(500, 4))), 0.9)
        assert np.array_equal(chi, chi.T)
        assert np.all(np.diag(chi) == 1)

    def test_hr_sample(self):
        g = np.array([[0, 4.0], [4.0, 0]])
        sample, _ = sample_pareto(g, 100_000, 11)
        chi = empirical_chi(sample, 0.99)[0, 1]
        truth = chi_of_gamma(g)[0, 1]
        assert np.isclose(truth, 0.317, atol=5e-4)
        assert abs(chi - truth) <= 3 * np.sqrt(truth * (1 - truth) / 1000)

    def test_too_few(self, rng):
        with pytest.raises(TooFewExceedances):
            empirical_chi(rng.normal(size=(10, 2)), 0.95)
        with pytest.raises(ValueError):
            empirical_chi(rng.normal(size=(10, 2)), 1.5)


class TestEmpiricalVariogram:
    def test_identical_columns(self, rng):
        x = rng.normal(size=300)
        est = empirical_variogram(rank_transform(np.column_stack([x, x, x])), 0.9)
        assert np.allclose(est.gamma_hat, 0)
        assert est.counts == (30, 30, 30)

    def test_needs_p(self, rng):
        with pytest.raises(ValueError):
            empirical_variogram(ExceedanceSample(rng.exponential(size=(50, 2)), "exponential"))

    def test_symmetric_nonnegative(self, rng):
        est = empirical_variogram(rank_transform(rng.normal(size=(400, 4))), 0.9).gamma_hat
        assert np.array_equal(est, est.T) and np.all(est >= 0)
        assert np.all(np.diag(est) == 0)

    def test_consistency(self):
        g = next(random_variograms(1, [4], seed=21))
        errs = {}
        for n in (1_000, 100_000):
            sample, _ = sample_pareto(g, n, 22)
            errs[n] = np.abs(empirical_variogram(sample).gamma_hat - g).max()
        assert errs[100_000] < errs[1_000]


class TestCliquewise:
    def test_single_clique(self, rng):
        y = rank_transform(rng.normal(size=(300, 3)))
        full = UndirectedGraph.complete(3)
        cw = cliquewise_variogram(y, full, 0.9).values
        assert np.allclose(cw, empirical_variogram(y, 0.9).gamma_hat)
        assert np.allclose(cw, restrict_to_graph(empirical_variogram(y, 0.9).gamma_hat, full).values)

    def test_offgraph_unspecified(self, rng):
        y = rank_transform(rng.normal(size=(300, 4)))
        cw = cliquewise_variogram(y, DECOMP4, 0.9).values
        assert np.isnan(cw[0, 3]) and np.isnan(cw[3, 0])
        assert not np.isnan(cw[DECOMP4.mask()]).any()

    def test_failure_path_on_tiny_sample(self):
        # two exceedances per anchor give a rank-one covariance on each clique
        y = ExceedanceSample(np.array([[1, 1, 1, 1], [2, 0.5, 2, 0.5]]), "pareto")
        with pytest.raises(NotPartiallyCND):
            fit_graph_structured(y, DECOMP4, mode="cliquewise")

    def test_needs_full_init(self, rng):
        y = rank_transform(rng.normal(size=(300, 4)))
        with pytest.raises(NeedsFullInit):
            fit_graph_structured(y, CYCLE4, p=0.9, mode="cliquewise")

    def test_d6_small_sample_mse(self):
        g = published_variogram("theta_d6.txt")
        graph = graph_of_precision(_theta_d6())
        errs = [mse(g, fit_graph_structured(sample_pareto(g, 20, r)[0], graph,
                                            mode="cliquewise").gamma) for r in range(60)]
        assert 1.50e-2 / 3 <= np.mean(errs) <= 1.50e-2 * 3


def _theta_d6():
    return published_precision("theta_d6.txt")


class TestLearnTree:
    def test_recovers_tree_metric(self):
        rng = make_rng(31)
        for _ in range(20):
            tree = random_connected_graph(8, rng, p=0.0)
            g = tree_variogram(tree, {e: float(rng.uniform(0.2, 3)) for e in tree.edges})
            assert learn_tree(g).edges == tree.edges

    def test_d2(self):
        assert learn_tree(np.array([[0, 1.0], [1.0, 0]])).edges == {(0, 1)}

    def test_equivariance(self):
        rng = make_rng(32)
        g = next(random_variograms(1, [6], seed=33))
        perm = rng.permutation(6)
        tree = learn_tree(g)
        permuted = learn_tree(g[np.ix_(perm, perm)])
        mapped = {tuple(sorted((int(perm[i]), int(perm[j])))) for i, j in permuted.edges}
        assert mapped == tree.edges

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            learn_tree(np.array([[0, np.nan], [np.nan, 0]]))


class TestFitGraphStructured:
    def test_zero_pattern_on_true_graph(self):
        g = published_variogram("theta_d6.txt")
        graph = graph_of_precision(_theta_d6())
        sample, _ = sample_pareto(g, 2000, 41)
        rep = fit_graph_structured(sample, graph)
        off = ~graph.mask() & ~np.eye(6, dtype=bool)
        assert np.abs(rep.theta[off]).max() < 1e-8
        assert graph_of_precision(np.where(np.abs(rep.theta) < 1e-8, 0, rep.theta)).edges == graph.edges

    def test_complete_graph_returns_estimate(self):
        g = next(random_variograms(1, [5], seed=42))
        sample, _ = sample_pareto(g, 5000, 43)
        g_hat = empirical_variogram(sample).gamma_hat
        assert is_variogram(g_hat)
        rep = fit_graph_structured(sample, UndirectedGraph.complete(5))
        assert np.allclose(rep.gamma, g_hat, atol=1e-12)

    def test_cycle_full_mode_converges(self):
        g = next(random_variograms(1, [4], seed=44))
        sample, _ = sample_pareto(g, 3000, 45)
        rep = fit_graph_structured(sample, CYCLE4)
        assert rep.converged and rep.max_nonedge_theta <= 1e-6

    def test_consistency_trend(self):
        g = published_variogram("theta_d6.txt")
        graph = graph_of_precision(_theta_d6())
        wins = 0
        for r in range(50):
            small = fit_graph_structured(sample_pareto(g, 200, 1000 + r)[0], graph).gamma
            large = fit_graph_structured(sample_pareto(g, 2000, 2000 + r)[0], graph).gamma
            wins += np.abs(large - g).max() < np.abs(small - g).max()
        assert wins >= 40

    def test_bad_mode(self, rng):
        with pytest.raises(ValueError):
            fit_graph_structured(rng.exponential(size=(100, 4)), DECOMP4, p=0.9, mode="x")


def test_mse_metric():
    a = np.zeros((3, 3))
    b = np.array([[0, 1, 2], [1, 0, 3], [2, 3, 0.0]])
    assert mse(a, b) == pytest.approx((1 + 4 + 9) / 3)
