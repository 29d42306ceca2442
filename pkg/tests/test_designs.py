"""Samplers: densities, exactness oracles, determinism, failure modes."""

import numpy as np
import pytest
from scipy import stats

from dppfit import (christoffel_density, sample_christoffel_iid, sample_cvs,
                    sample_projection_dpp, sample_subset_esp)
from dppfit.designs import (ResampleBudgetExceeded, dpp_joint_density,
                            esp_log_table, subset_log_prob)


class TestChristoffelDensity:
    def test_uniform_for_odd_order(self, sobolev1):
        x = np.linspace(0, 1, 33)
        np.testing.assert_allclose(christoffel_density(sobolev1, 7, x), 1.0)

    def test_uniform_on_sphere_full_degrees(self, sphere15, rng):
        # complete degree blocks 0..2 hold 9 functions; rotation invariance
        pts = sphere15.domain.sample(rng, 20)
        np.testing.assert_allclose(christoffel_density(sphere15, 9, pts), 1.0, rtol=1e-10)

    def test_integrates_to_one(self, sobolev1):
        x, w = sobolev1.domain.quadrature()
        for M in (4, 10):
            val = np.sum(w * christoffel_density(sobolev1, M, x))
            assert val == pytest.approx(1.0, abs=1e-9)


class TestChristoffelSampler:
    def test_odd_order_has_no_density_rejections(self, sobolev1):
        d = sample_christoffel_iid(sobolev1, 40, 7, rng=11)
        assert d.attempts["density_rejections"] == 0
        assert len(d) == 40

    def test_single_node_condition(self, sobolev1):
        # N = M = 1 and q = 1/c_1 reduce the event to a scalar check
        d = sample_christoffel_iid(sobolev1, 1, 1, rng=3)
        q = 1.0 / christoffel_density(sobolev1, 1, d.nodes)
        g = q[0] * sobolev1.eigen_block([1], d.nodes)[0, 0] ** 2
        assert abs(g - 1.0) <= 0.5

    def test_histogram_matches_density(self, sobolev1):
        # oracle: the density itself, binned; chi-squared on 50 bins
        M, n = 4, 100_000
        d = sample_christoffel_iid(sobolev1, n, M, rng=7, conditioned=False)
        edges = np.linspace(0, 1, 51)
        counts, _ = np.histogram(d.nodes, edges)
        x, w = sobolev1.domain.quadrature()
        dens = christoffel_density(sobolev1, M, x)
        probs = np.array([
            np.sum(w[(x >= a) & (x < b)] * dens[(x >= a) & (x < b)])
            for a, b in zip(edges[:-1], edges[1:])
        ])
        probs /= probs.sum()
        _, p = stats.chisquare(counts, probs * n)
        assert p > 1e-3

    def test_conditioning_event_holds(self, sobolev1):
        from dppfit.designs import christoffel_q, empirical_gram
        M = 4
        for seed in range(5):
            d = sample_christoffel_iid(sobolev1, 60, M, rng=seed)
            q = christoffel_q(sobolev1, M, d.nodes)
            G = empirical_gram(sobolev1, M, d.nodes, q)
            assert np.abs(np.linalg.eigvalsh(G) - 1).max() <= 0.5

    def test_resample_budget_error(self, sobolev1):
        # N = M = 30 cannot satisfy the Gram event; budget must surface
        with pytest.raises(ResampleBudgetExceeded):
            sample_christoffel_iid(sobolev1, 10, 10, rng=0, max_resamples=3)

    def test_uniform_q_mode(self, sobolev1):
        d = sample_christoffel_iid(sobolev1, 30, 4, q_mode="uniform", rng=5, conditioned=False)
        assert len(d) == 30
        assert "uniform" in d.distribution


class TestProjectionDPP:
    def test_single_node_constant_projection_is_uniform(self, sobolev1):
        xs = np.array([
            sample_projection_dpp(sobolev1, [1], seed).nodes[0] for seed in range(2000)
        ])
        # e_1 is constant, so the single node follows the reference measure
        assert stats.kstest(xs, "uniform").pvalue > 1e-3

    def test_cardinality_and_domain(self, sobolev1):
        d = sample_projection_dpp(sobolev1, range(1, 9), 4)
        assert len(d) == 8
        assert np.all(sobolev1.domain.contains(d.nodes))
        assert d.indices == tuple(range(1, 9))

    def test_joint_density_nonnegative_and_repulsive(self, sobolev1):
        d = sample_projection_dpp(sobolev1, range(1, 5), 9)
        val = dpp_joint_density(sobolev1, range(1, 5), d.nodes)
        assert val > 0
        clumped = np.full(4, d.nodes[0])
        assert dpp_joint_density(sobolev1, range(1, 5), clumped) == pytest.approx(0.0, abs=1e-9)

    def test_pair_density_matches_determinant(self, sobolev1_small):
        # oracle: direct evaluation of the two-point determinant density,
        # integrated per cell; cells under 5 expected counts pooled
        n = 100_000
        pts = np.empty((n, 2))
        for i in range(n):
            pts[i] = sample_projection_dpp(sobolev1_small, [1, 2], [17, i]).nodes
        bins, sub = 30, 10
        edges = np.linspace(0, 1, bins + 1)
        counts, _, _ = np.histogram2d(pts[:, 0], pts[:, 1], bins=[edges, edges])
        fine = (np.arange(bins * sub) + 0.5) / (bins * sub)
        X, Y = np.meshgrid(fine, fine, indexing="ij")
        c_x = np.sqrt(2) * np.cos(2 * np.pi * X)  # e_2 at x
        c_y = np.sqrt(2) * np.cos(2 * np.pi * Y)  # e_2 at y
        dens = ((1 + c_x**2) * (1 + c_y**2) - (1 + c_x * c_y) ** 2) / 2.0
        cell = dens.reshape(bins, sub, bins, sub).mean(axis=(1, 3))
        probs = (cell / cell.sum()).ravel()
        observed = counts.ravel()
        keep = probs * n >= 5.0
        obs = np.append(observed[keep], observed[~keep].sum())
        exp = np.append(probs[keep], probs[~keep].sum()) * n
        _, p = stats.chisquare(obs, exp * obs.sum() / exp.sum())
        assert p > 1e-3

    def test_marginal_matches_mixture_density(self, sobolev1):
        # pooled nodes of the size-3 process: here the marginal is uniform
        n = 30_000
        pool = np.concatenate([
            sample_projection_dpp(sobolev1, [1, 2, 3], [23, i]).nodes for i in range(n)
        ])
        ks = stats.kstest(pool, "uniform").statistic
        assert ks < 0.01

    def test_determinism(self, sobolev1):
        a = sample_projection_dpp(sobolev1, range(1, 6), 123)
        b = sample_projection_dpp(sobolev1, range(1, 6), 123)
        assert np.array_equal(a.nodes, b.nodes)

    def test_rejects_duplicate_indices(self, sobolev1):
        with pytest.raises(ValueError):
            sample_projection_dpp(sobolev1, [1, 1, 2], 0)

    def test_sphere_sampling(self, sphere15):
        d = sample_projection_dpp(sphere15, range(1, 5), 2)
        assert d.nodes.shape == (4, 3)
        assert np.all(sphere15.domain.contains(d.nodes))

    def test_pswf_sampling_beyond_clip(self, pswf):
        # eigenfunctions stay orthonormal past the clipped part of the spectrum
        d = sample_projection_dpp(pswf, range(1, 21), 5)
        assert len(d) == 20


class TestSubsetESP:
    def test_exact_probabilities_small_spectrum(self):
        # oracle: enumeration of all size-2 subsets of (1, 0.5, 0.25)
        sig = np.array([1.0, 0.5, 0.25])
        expect = {(1, 2): 0.5 / 0.875, (1, 3): 0.25 / 0.875, (2, 3): 0.125 / 0.875}
        for T, p in expect.items():
            assert np.exp(subset_log_prob(sig, np.array(T))) == pytest.approx(p)

    def test_full_set_certain(self):
        sig = np.array([0.9, 0.5, 0.1])
        T = sample_subset_esp(sig, 3, 0)
        np.testing.assert_array_equal(T, [1, 2, 3])

    def test_empirical_frequencies(self):
        # oracle: the same enumeration, 3-sigma multinomial bands
        sig = np.array([1.0, 0.5, 0.25])
        n = 100_000
        rng = np.random.default_rng(31)
        table = esp_log_table(sig, 2)
        counts = {(1, 2): 0, (1, 3): 0, (2, 3): 0}
        for _ in range(n):
            counts[tuple(sample_subset_esp(sig, 2, rng, table=table).tolist())] += 1
        for T in counts:
            p = np.exp(subset_log_prob(sig, np.array(T)))
            se = np.sqrt(p * (1 - p) * n)
            assert abs(counts[T] - p * n) <= 3 * se

    def test_log_space_survives_tiny_values(self):
        sig = np.geomspace(1.0, 1e-200, 120)
        T = sample_subset_esp(sig, 40, 1)
        assert len(T) == 40
        assert np.all(np.diff(T) > 0)

    def test_validates_inputs(self):
        with pytest.raises(ValueError):
            sample_subset_esp(np.array([1.0, -0.5]), 1, 0)
        with pytest.raises(ValueError):
            sample_subset_esp(np.array([1.0, 0.5]), 3, 0)


class TestCVS:
    def test_single_node_uniform_for_flat_diagonal(self, sobolev1_small):
        # k(x, x) constant makes the one-node distribution uniform
        xs = np.array([sample_cvs(sobolev1_small, 1, [3, i]).nodes[0] for i in range(2000)])
        assert stats.kstest(xs, "uniform").pvalue > 1e-3

    def test_records_subset(self, sobolev1_small):
        d = sample_cvs(sobolev1_small, 5, 44)
        assert d.indices is not None and len(d.indices) == 5
        assert len(d) == 5

    def test_mixture_component_frequency(self):
        # oracle: enumerated weight of the leading subset on a 10-value spectrum
        from dppfit import make_periodic_sobolev
        m = make_periodic_sobolev(1, 10)
        N, n = 3, 4000
        hits = 0
        for i in range(n):
            d = sample_cvs(m, N, [71, i])
            hits += d.indices == (1, 2, 3)
        p = np.exp(subset_log_prob(m.sigmas, np.arange(1, N + 1)))
        se = np.sqrt(p * (1 - p) * n)
        assert abs(hits - p * n) <= 3 * se

    def test_excludes_clipped_indices(self, pswf):
        top = len(pswf.design_eligible())
        for seed in range(5):
            d = sample_cvs(pswf, 6, seed)
            assert max(d.indices) <= top
        with pytest.raises(ValueError):
            sample_cvs(pswf, top + 1, 0)

    def test_determinism(self, sobolev1_small):
        a = sample_cvs(sobolev1_small, 4, 99)
        b = sample_cvs(sobolev1_small, 4, 99)
        assert np.array_equal(a.nodes, b.nodes) and a.indices == b.indices
