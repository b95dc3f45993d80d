"""
Tests for the density power divergence objective and its minimizer
"""
import math

import numpy as np
from django.test import SimpleTestCase, tag
from scipy.integrate import quad
from scipy.stats import norm

from apps.diffusion.exceptions import ParameterError
from apps.diffusion.services.mdpde import (
    MdpdeConfig, fit_alphas, gaussian_power_integral, influence_profile, mdpde_estimate,
    mdpde_gradient, mdpde_objective, negative_log_likelihood, observation_bracket, robust_discrepancy,
)
from apps.diffusion.services.params import DiffusionParams, JumpParams, SamplingScheme
from apps.diffusion.services.regression import build_design, ols_estimate
from apps.diffusion.services.simulation import SimConfig, simulate

PARAMS = DiffusionParams(beta1=1.0, beta2=0.8, sigma=0.3, gamma=0.7)


def design_for(n=1000, lam=0.0, mu_j=0.0, seed=1):
    path = simulate(SimConfig(
        params=PARAMS,
        jumps=JumpParams(lam=lam, mu_j=mu_j, sigma_j=0.1),
        scheme=SamplingScheme.high_frequency(n, x0=PARAMS.mean_level),
        seed=seed,
    ))
    return build_design(path, PARAMS.gamma)


class PowerIntegralTestCase(SimpleTestCase):

    def test_matches_quadrature(self):
        pairs = [(0.3, 0.05), (0.3, 0.5), (1.0, 0.1), (1.0, 0.5), (0.5, 0.25),
                 (2.0, 0.15), (0.1, 0.3), (1.5, 0.45), (0.8, 0.01), (3.0, 0.2)]
        for sigma, alpha in pairs:
            with self.subTest(sigma=sigma, alpha=alpha):
                numeric, _ = quad(lambda x: norm.pdf(x, scale=sigma) ** (1.0 + alpha), -np.inf, np.inf,
                                  epsabs=1e-12, epsrel=1e-12)
                self.assertAlmostEqual(gaussian_power_integral(sigma, alpha), numeric, delta=1e-6)

    def test_alpha_zero_is_one(self):
        self.assertAlmostEqual(gaussian_power_integral(0.7, 0.0), 1.0, places=15)

    def test_standard_normal_half(self):
        self.assertAlmostEqual(gaussian_power_integral(1.0, 0.5),
                               (2.0 * math.pi) ** -0.25 / math.sqrt(1.5), places=12)

    def test_rejects_nonpositive_sigma(self):
        with self.assertRaises(ParameterError):
            gaussian_power_integral(0.0, 0.5)


class ObjectiveTestCase(SimpleTestCase):

    def setUp(self):
        self.design = design_for(n=500, seed=4)
        self.ols = ols_estimate(self.design)

    def test_small_alpha_tends_to_likelihood(self):
        objective = mdpde_objective(self.ols, self.design, 1e-4)
        nll = negative_log_likelihood(self.ols, self.design)
        self.assertLessEqual(abs(objective - nll), 1e-3 * self.design.n)

    def test_alpha_zero_is_likelihood(self):
        self.assertAlmostEqual(mdpde_objective(self.ols, self.design, 0.0),
                               negative_log_likelihood(self.ols, self.design), places=9)

    def test_bracket_is_bounded_for_positive_alpha(self):
        residuals = np.array([0.0, 1.0, 10.0, 1e3])
        bounded = observation_bracket(residuals, 1.0, 0.5)
        self.assertAlmostEqual(bounded[-1], gaussian_power_integral(1.0, 0.5) + 2.0, places=12)
        self.assertTrue(np.all(np.diff(bounded) >= 0))
        unbounded = observation_bracket(residuals, 1.0, 0.0)
        self.assertGreater(unbounded[-1], 1e5)

    def test_gap_to_likelihood_shrinks_with_alpha(self):
        nll = negative_log_likelihood(self.ols, self.design)
        gaps = [abs(mdpde_objective(self.ols, self.design, alpha) - nll)
                for alpha in (1e-1, 1e-2, 1e-3, 1e-4)]
        for larger, smaller in zip(gaps, gaps[1:]):
            self.assertLess(smaller, larger)

    def test_bracket_slope_bounded_for_positive_alpha(self):
        grid = np.linspace(-100.0, 100.0, 20001)
        for alpha in (0.1, 0.25, 0.5):
            with self.subTest(alpha=alpha):
                slope = np.gradient(observation_bracket(grid, 1.0, alpha), grid)
                # peak of (1 + a) f^a r at r = 1 / sqrt(a)
                peak = (1.0 + alpha) * (2.0 * math.pi) ** (-alpha / 2.0) / math.sqrt(alpha * math.e)
                self.assertLessEqual(np.max(np.abs(slope)), peak + 1e-3)
                self.assertLess(abs(slope[0]), 1e-6)
                self.assertLess(abs(slope[-1]), 1e-6)

    def test_bracket_slope_linear_for_likelihood(self):
        grid = np.linspace(-100.0, 100.0, 20001)
        slope = np.gradient(observation_bracket(grid, 1.0, 0.0), grid)
        # d/dr of r^2 / 2
        np.testing.assert_allclose(slope[1:-1], grid[1:-1], atol=1e-6)
        self.assertAlmostEqual(slope[-1], 100.0, delta=0.01)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(2024)
        base = self.ols.as_vector()
        for _ in range(20):
            alpha = float(rng.choice([0.0, 0.05, 0.2, 0.5]))
            theta = base * rng.uniform(0.8, 1.2, size=3)
            analytic = mdpde_gradient(theta, self.design, alpha)
            numeric = np.empty(3)
            for k in range(3):
                h = 1e-6 * max(1.0, abs(theta[k]))
                up, down = theta.copy(), theta.copy()
                up[k] += h
                down[k] -= h
                numeric[k] = (mdpde_objective(up, self.design, alpha)
                              - mdpde_objective(down, self.design, alpha)) / (2.0 * h)
            np.testing.assert_allclose(analytic, numeric, rtol=1e-5, atol=1e-6 * self.design.n)

    def test_rejects_nonpositive_sigma(self):
        with self.assertRaises(ParameterError):
            mdpde_objective((1.0, 0.8, 0.0), self.design, 0.2)


class EstimateTestCase(SimpleTestCase):

    def test_alpha_zero_is_ols(self):
        design = design_for(n=300, seed=8)
        fit = mdpde_estimate(design, MdpdeConfig(alpha=0.0))
        ols = ols_estimate(design)
        self.assertEqual(fit.as_vector().tolist(), ols.as_vector().tolist())

    def test_fit_lowers_objective(self):
        design = design_for(n=500, seed=9)
        ols = ols_estimate(design)
        fit = mdpde_estimate(design, MdpdeConfig(alpha=0.3, init=ols))
        self.assertTrue(fit.converged)
        self.assertEqual(fit.alpha, 0.3)
        self.assertLessEqual(fit.objective_value, mdpde_objective(ols, design, 0.3))
        self.assertAlmostEqual(fit.objective_value, mdpde_objective(fit, design, 0.3), places=9)

    def test_robust_scale_under_jumps(self):
        design = design_for(n=1000, lam=5.0, mu_j=3.0, seed=12)
        ols = ols_estimate(design)
        robust = mdpde_estimate(design, MdpdeConfig(alpha=0.25, init=ols))
        self.assertLess(robust.sigma_hat, ols.sigma_hat)
        self.assertLess(abs(robust.sigma_hat - 0.3), abs(ols.sigma_hat - 0.3))
        gaps = robust_discrepancy(ols, robust)
        self.assertLess(gaps['sigma_hat'], 0.0)

    def test_estimate_is_stationary(self):
        tol = 1e-10
        for seed in (21, 22, 23):
            design = design_for(n=1000, lam=5.0, mu_j=3.0, seed=seed)
            fit = mdpde_estimate(design, MdpdeConfig(alpha=0.25, tol=tol))
            self.assertTrue(fit.converged)
            theta = fit.as_vector()
            base = mdpde_objective(theta, design, 0.25)
            slack = 1e-12 * max(abs(base), 1.0)
            for k in range(3):
                for step in (10 * tol, -10 * tol):
                    with self.subTest(seed=seed, coordinate=k, step=step):
                        moved = theta.copy()
                        moved[k] += step
                        self.assertGreaterEqual(mdpde_objective(moved, design, 0.25), base - slack)
            np.testing.assert_allclose(mdpde_gradient(theta, design, 0.25), 0.0, atol=1e-6 * design.n)

    def test_restarts_report_non_convergence(self):
        design = design_for(n=300, seed=13)
        fit = mdpde_estimate(design, MdpdeConfig(alpha=0.2, max_iters=1))
        self.assertFalse(fit.converged)
        self.assertGreater(fit.iterations, 0)

    def test_config_validation(self):
        with self.assertRaises(ParameterError):
            MdpdeConfig(alpha=-0.1)
        with self.assertRaises(ParameterError):
            MdpdeConfig(alpha=0.1, tol=0.0)

    def test_fit_alphas_shares_ols(self):
        design = design_for(n=300, seed=14)
        fits = fit_alphas(design, [0.0, 0.1])
        self.assertEqual(set(fits), {0.0, 0.1})
        self.assertEqual(fits[0.0].as_vector().tolist(), ols_estimate(design).as_vector().tolist())

    def test_influence_profile(self):
        design = design_for(n=300, seed=15)
        theta = ols_estimate(design)
        profile = influence_profile(theta, design, 0.25)
        self.assertEqual(len(profile.residuals), 300)
        np.testing.assert_allclose(profile.likelihoods, norm.pdf(profile.residuals))
        self.assertTrue(np.all(profile.contributions <= gaussian_power_integral(theta.sigma_hat, 0.25) + 4.0 + 1e-12))

    def test_robust_discrepancy_identity(self):
        theta = ols_estimate(design_for(n=300, seed=16))
        self.assertEqual(robust_discrepancy(theta, theta),
                         {'beta1_hat': 0.0, 'beta2_hat': 0.0, 'sigma_hat': 0.0})

    @tag('slow')
    def test_small_alpha_agrees_with_ols(self):
        gaps = []
        for rep in range(50):
            design = design_for(n=1000, seed=500 + rep)
            ols = ols_estimate(design)
            fit = mdpde_estimate(design, MdpdeConfig(alpha=0.01, init=ols))
            gaps.append(np.abs(fit.as_vector() - ols.as_vector()) / np.abs(ols.as_vector()))
        self.assertTrue(np.all(np.median(gaps, axis=0) <= 0.02))

    @tag('slow')
    def test_robust_scale_stability(self):
        smaller = 0
        for rep in range(100):
            design = design_for(n=1000, lam=5.0, mu_j=3.0, seed=700 + rep)
            ols = ols_estimate(design)
            robust = mdpde_estimate(design, MdpdeConfig(alpha=0.25, init=ols))
            smaller += robust.sigma_hat < ols.sigma_hat
        self.assertGreaterEqual(smaller, 95)
