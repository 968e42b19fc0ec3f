"""Tests for the GP regressor and classifier.

Oracles used here:
  * naive log marginal likelihood via slogdet + dense solve
  * central finite differences for the LML gradient
  * dense-solve posterior mean
  * direct numerical optimization of the Laplace objective for the mode
  * adaptive quadrature for the link-marginalized class probability
"""

import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.optimize import minimize
from scipy.special import expit

from orderedbo.gp import (
    ClassifierFitConfig,
    ConvergenceError,
    EmptyDataError,
    GpClassifier,
    GpRegressor,
    IllConditionedKernelError,
    RegressorFitConfig,
    _chol_with_jitter,
    _gh_bernoulli_mean,
    _laplace_mode,
    classifier_posterior_samples,
    fit_classifier,
    fit_regressor,
    lml_and_grad,
    matern52,
    regressor_posterior_samples,
)


def naive_lml(X, y, theta):
    """Direct LML: quadratic form and slogdet, no Cholesky reuse."""
    n, d = X.shape
    ls = np.exp(theta[:d])
    sv = np.exp(theta[d])
    nv = np.exp(theta[d + 1])
    mean = theta[d + 2]
    kn = matern52(X, X, ls, sv) + nv * np.eye(n)
    resid = y - mean
    sign, logdet = np.linalg.slogdet(kn)
    assert sign > 0
    return -0.5 * resid @ np.linalg.solve(kn, resid) - 0.5 * logdet \
        - 0.5 * n * math.log(2.0 * math.pi)


def fd_gradient(X, y, theta, eps=1e-5):
    g = np.zeros_like(theta)
    for i in range(theta.size):
        up = theta.copy()
        dn = theta.copy()
        up[i] += eps
        dn[i] -= eps
        g[i] = (lml_and_grad(X, y, up)[0] - lml_and_grad(X, y, dn)[0]) / (2 * eps)
    return g


def random_setting(rng, n=12, d=3):
    X = rng.random((n, d))
    y = rng.standard_normal(n)
    theta = np.concatenate([
        rng.uniform(math.log(0.2), math.log(1.5), size=d),
        [rng.uniform(math.log(0.3), math.log(4.0))],
        [rng.uniform(math.log(1e-3), math.log(0.2))],
        [rng.uniform(-0.5, 0.5)],
    ])
    return X, y, theta


class TestLmlAndGrad:
    def test_value_matches_naive(self):
        rng = np.random.default_rng(11)
        for _ in range(6):
            X, y, theta = random_setting(rng)
            val, _ = lml_and_grad(X, y, theta)
            assert val == pytest.approx(naive_lml(X, y, theta), rel=1e-10)

    def test_gradient_matches_central_differences(self):
        rng = np.random.default_rng(42)
        for _ in range(10):
            X, y, theta = random_setting(rng)
            _, grad = lml_and_grad(X, y, theta)
            fd = fd_gradient(X, y, theta)
            rel = np.linalg.norm(grad - fd) / np.linalg.norm(fd)
            assert rel < 1e-4

    def test_gradient_componentwise(self):
        rng = np.random.default_rng(3)
        X, y, theta = random_setting(rng, n=15, d=2)
        _, grad = lml_and_grad(X, y, theta)
        fd = fd_gradient(X, y, theta, eps=1e-6)
        np.testing.assert_allclose(grad, fd, rtol=1e-5, atol=1e-7)


class TestCholJitter:
    def test_clean_matrix_gets_zero_jitter(self):
        a = np.array([[2.0, 0.5], [0.5, 1.0]])
        lo, jitter = _chol_with_jitter(a)
        assert jitter == 0.0
        np.testing.assert_allclose(lo @ lo.T, a, atol=1e-12)

    def test_semidefinite_matrix_needs_jitter(self):
        a = np.ones((3, 3))
        lo, jitter = _chol_with_jitter(a)
        assert jitter > 0.0
        np.testing.assert_allclose(lo @ lo.T, a + jitter * np.eye(3), atol=1e-12)

    def test_indefinite_matrix_raises(self):
        a = np.array([[1.0, 2.0], [2.0, 1.0]])  # eigenvalues 3 and -1
        with pytest.raises(IllConditionedKernelError):
            _chol_with_jitter(a)


class TestRegressor:
    def make_data(self, n=25, seed=0):
        rng = np.random.default_rng(seed)
        X = rng.random((n, 2))
        y = np.sin(3.0 * X[:, 0]) + 0.5 * X[:, 1] ** 2 \
            + 0.01 * rng.standard_normal(n)
        return X, y

    def test_empty_raises(self):
        with pytest.raises(EmptyDataError):
            fit_regressor(np.zeros((0, 2)), np.zeros(0))

    def test_length_mismatch_raises(self):
        with pytest.raises(ValueError):
            fit_regressor(np.zeros((3, 2)), np.zeros(4))

    def test_interpolates_training_data(self):
        X, y = self.make_data()
        model = fit_regressor(X, y)
        mean, cov = model.predict(X)
        assert np.max(np.abs(mean - y)) < 0.05
        assert np.all(np.diag(cov) < 0.05)

    def test_posterior_mean_matches_dense_solve(self):
        X, y = self.make_data(n=20, seed=7)
        model = fit_regressor(X, y)
        Xq = np.random.default_rng(1).random((8, 2))
        mean, _ = model.predict(Xq)

        ys = (y - model.y_mean) / model.y_scale
        kn = matern52(X, X, model.lengthscales, model.signal_var) \
            + model.noise_var * np.eye(len(y))
        k_star = matern52(Xq, X, model.lengthscales, model.signal_var)
        dense = model.mean_const + k_star @ np.linalg.solve(kn, ys - model.mean_const)
        np.testing.assert_allclose(mean, model.y_mean + model.y_scale * dense,
                                   atol=1e-8)

    def test_fit_is_deterministic(self):
        X, y = self.make_data(seed=5)
        a = fit_regressor(X, y)
        b = fit_regressor(X, y)
        np.testing.assert_array_equal(a.lengthscales, b.lengthscales)
        assert a.noise_var == b.noise_var
        assert a.log_marginal_likelihood == b.log_marginal_likelihood

    def test_affine_target_equivariance(self):
        # standardization makes the internal fit invariant under y -> 3y + 7
        X, y = self.make_data(seed=9)
        base = fit_regressor(X, y)
        shifted = fit_regressor(X, 3.0 * y + 7.0)
        Xq = np.random.default_rng(2).random((5, 2))
        m0, c0 = base.predict(Xq)
        m1, c1 = shifted.predict(Xq)
        # equality only up to optimizer precision: standardizing 3y + 7
        # reproduces ys to the last ulp, not exactly
        np.testing.assert_allclose(m1, 3.0 * m0 + 7.0, rtol=1e-5, atol=1e-6)
        np.testing.assert_allclose(c1, 9.0 * c0, rtol=1e-4, atol=1e-8)

    def test_single_observation(self):
        # one point, noise hugs its lower bound: exact interpolation
        model = fit_regressor(np.array([[0.5, 0.5]]), np.array([2.0]))
        mean, _ = model.predict([[0.5, 0.5]])
        assert mean[0] == pytest.approx(2.0, abs=1e-6)

    def test_far_query_reverts_to_prior(self):
        X, y = self.make_data(n=20, seed=3)
        model = fit_regressor(X, y)
        far = np.full((1, 2), 1.0 + 20.0 * float(np.max(model.lengthscales)))
        _, cov = model.predict(far)
        assert abs(cov[0, 0] - model.y_scale ** 2 * model.signal_var) \
            < 0.01 * model.y_scale ** 2 * model.signal_var

    def test_variance_non_increasing_with_added_point(self):
        # condition on one extra row at the query, hyperparameters held fixed
        X, y = self.make_data(n=15, seed=8)
        model = fit_regressor(X, y)
        xq = np.array([[0.42, 0.61]])
        _, cov_before = model.predict(xq)

        from scipy.linalg import cho_solve, cholesky
        X2 = np.vstack([X, xq])
        ys2 = np.append((y - model.y_mean) / model.y_scale, 0.0)
        kn = matern52(X2, X2, model.lengthscales, model.signal_var) \
            + model.noise_var * np.eye(len(ys2))
        lo = cholesky(kn, lower=True)
        grown = GpRegressor(
            X=X2, lengthscales=model.lengthscales, signal_var=model.signal_var,
            noise_var=model.noise_var, mean_const=model.mean_const,
            y_mean=model.y_mean, y_scale=model.y_scale, _chol=lo,
            _alpha=cho_solve((lo, True), ys2 - model.mean_const))
        _, cov_after = grown.predict(xq)
        assert cov_after[0, 0] <= cov_before[0, 0] + 1e-12

    def test_power_of_two_rescaling_is_exact(self):
        # scaling targets by 4 leaves the standardized fit bit-identical,
        # so predictions scale exactly
        X, y = self.make_data(seed=12)
        base = fit_regressor(X, y)
        scaled = fit_regressor(X, 4.0 * y)
        Xq = np.random.default_rng(6).random((5, 2))
        m0, c0 = base.predict(Xq)
        m1, c1 = scaled.predict(Xq)
        np.testing.assert_allclose(m1, 4.0 * m0, rtol=1e-10, atol=0.0)
        np.testing.assert_allclose(c1, 16.0 * c0, rtol=1e-10, atol=1e-30)

    def test_module_level_sampler_wrapper(self):
        X, y = self.make_data(n=10)
        model = fit_regressor(X, y)
        Xq = np.array([[0.2, 0.8]])
        a = regressor_posterior_samples(model, Xq, 16, seed=5, include_noise=True)
        b = model.posterior_samples(Xq, 16, seed=5, include_noise=True)
        np.testing.assert_array_equal(a, b)

    def test_constant_targets(self):
        X = np.random.default_rng(0).random((10, 2))
        model = fit_regressor(X, np.full(10, 4.0))
        mean, _ = model.predict(X)
        np.testing.assert_allclose(mean, 4.0, atol=1e-3)

    def test_duplicate_inputs_fit(self):
        X = np.vstack([np.full((5, 2), 0.3), np.full((5, 2), 0.7)])
        y = np.concatenate([np.full(5, 1.0), np.full(5, -1.0)])
        y += 0.01 * np.random.default_rng(4).standard_normal(10)
        model = fit_regressor(X, y)
        mean, _ = model.predict([[0.3, 0.3], [0.7, 0.7]])
        assert mean[0] > mean[1]

    def test_posterior_samples_shape_and_seed(self):
        X, y = self.make_data()
        model = fit_regressor(X, y)
        Xq = np.random.default_rng(3).random((6, 2))
        s1 = model.posterior_samples(Xq, 32, seed=123)
        s2 = model.posterior_samples(Xq, 32, seed=123)
        s3 = model.posterior_samples(Xq, 32, seed=124)
        assert s1.shape == (32, 6)
        np.testing.assert_array_equal(s1, s2)
        assert not np.array_equal(s1, s3)

    def test_posterior_samples_match_moments(self):
        X, y = self.make_data(n=15, seed=2)
        model = fit_regressor(X, y)
        Xq = np.array([[0.1, 0.9], [0.9, 0.1], [0.5, 0.5]])
        mean, cov = model.predict(Xq)
        draws = model.posterior_samples(Xq, 200_000, seed=7)
        se = np.sqrt(np.diag(cov) / draws.shape[0])
        assert np.all(np.abs(draws.mean(axis=0) - mean) < 5 * se + 1e-8)
        emp_cov = np.cov(draws.T)
        assert np.max(np.abs(emp_cov - cov)) < 0.02 * max(np.max(np.diag(cov)), 1e-6) + 1e-6

    def test_prior_model(self):
        prior = GpRegressor.prior(n_dims=2, signal_var=2.0, mean_const=0.5)
        assert prior.n_train == 0
        mean, cov = prior.predict([[0.2, 0.2], [0.8, 0.8]])
        np.testing.assert_allclose(mean, 0.5)
        np.testing.assert_allclose(np.diag(cov), 2.0, rtol=1e-12)
        draws = prior.posterior_samples([[0.2, 0.2]], 50_000, seed=0)
        assert abs(draws.mean() - 0.5) < 0.03
        assert abs(draws.std() - math.sqrt(2.0)) < 0.02

    def test_restart_count_respected(self):
        X, y = self.make_data(n=10)
        cfg = RegressorFitConfig(n_restarts=1)
        model = fit_regressor(X, y, cfg)
        assert np.isfinite(model.log_marginal_likelihood)


def laplace_objective_oracle(K, y01):
    """Mode of log p(y|f) - 0.5 f^T K^-1 f by direct optimization."""
    k_inv = np.linalg.inv(K)

    def neg(f):
        val = np.sum(np.where(y01 > 0.5, np.log(expit(f)), np.log(expit(-f))))
        val -= 0.5 * f @ k_inv @ f
        grad = (y01 - expit(f)) - k_inv @ f
        return -val, -grad

    res = minimize(neg, np.zeros(len(y01)), jac=True, method="L-BFGS-B",
                   options={"maxiter": 500, "ftol": 1e-15, "gtol": 1e-12})
    return res.x


class TestLaplaceMode:
    def test_mode_matches_direct_optimizer(self):
        rng = np.random.default_rng(21)
        for _ in range(5):
            X = rng.random((12, 2))
            y01 = (rng.random(12) < 0.5).astype(float)
            if y01.sum() in (0, 12):
                y01[0] = 1.0 - y01[0]
            K = matern52(X, X, np.full(2, 0.5), 4.0)
            f, _, _, _, _, iters = _laplace_mode(K, y01, 100, 1e-10)
            oracle = laplace_objective_oracle(K, y01)
            np.testing.assert_allclose(f, oracle, atol=1e-5)
            assert iters < 100

    def test_non_convergence_raises(self):
        X = np.random.default_rng(0).random((10, 2))
        y01 = np.array([0, 1] * 5, dtype=float)
        K = matern52(X, X, np.full(2, 0.5), 25.0)
        with pytest.raises(ConvergenceError):
            _laplace_mode(K, y01, 1, 1e-12)


class TestClassifier:
    def separable_data(self, n=40):
        x = np.linspace(0.0, 1.0, n)[:, None]
        labels = (x[:, 0] > 0.5).astype(int)
        return x, labels

    def test_empty_raises(self):
        with pytest.raises(EmptyDataError):
            fit_classifier(np.zeros((0, 1)), np.zeros(0))

    def test_non_binary_labels_raise(self):
        with pytest.raises(ValueError):
            fit_classifier(np.zeros((2, 1)), np.array([0.0, 0.5]))

    def test_separable_problem(self):
        X, labels = self.separable_data()
        model = fit_classifier(X, labels)
        p = model.predict_proba(np.array([[0.05], [0.95]]))
        assert p[0] < 0.25
        assert p[1] > 0.75
        assert not model.is_degenerate
        assert model.newton_iterations > 0

    def test_probabilities_in_unit_interval(self):
        X, labels = self.separable_data(25)
        model = fit_classifier(X, labels)
        p = model.predict_proba(np.linspace(-0.2, 1.2, 50)[:, None])
        assert np.all(p > 0.0) and np.all(p < 1.0)

    def test_quadrature_matches_adaptive_quad(self):
        # marginal prob = E[sigmoid(m + s Z)] under Z ~ N(0, 1)
        X, labels = self.separable_data(30)
        model = fit_classifier(X, labels)
        Xq = np.array([[0.2], [0.5], [0.8]])
        mean, cov = model.latent_posterior(Xq)
        sd = np.sqrt(np.diag(cov))
        p = model.predict_proba(Xq)
        for i in range(3):
            ref, err = quad(
                lambda z: expit(mean[i] + sd[i] * z)
                * math.exp(-0.5 * z * z) / math.sqrt(2 * math.pi),
                -12.0, 12.0, epsabs=1e-12)
            assert p[i] == pytest.approx(ref, abs=1e-7 + 10 * err)

    def test_fit_is_deterministic(self):
        rng = np.random.default_rng(5)
        X = rng.random((30, 2))
        labels = (X[:, 0] + X[:, 1] > 1.0).astype(int)
        a = fit_classifier(X, labels)
        b = fit_classifier(X, labels)
        np.testing.assert_array_equal(a.lengthscales, b.lengthscales)
        assert a.signal_var == b.signal_var
        assert a.evidence == b.evidence
        np.testing.assert_array_equal(a._f_hat, b._f_hat)

    def test_grid_override(self):
        X, labels = self.separable_data(20)
        cfg = ClassifierFitConfig(lengthscale_grid=(0.7,), signal_var_grid=(2.0,))
        model = fit_classifier(X, labels, cfg)
        assert model.lengthscales[0] == 0.7
        assert model.signal_var == 2.0

    def test_single_class_degenerate(self):
        X = np.random.default_rng(0).random((8, 2))
        ones = fit_classifier(X, np.ones(8))
        zeros = fit_classifier(X, np.zeros(8))
        assert ones.is_degenerate and zeros.is_degenerate
        assert ones.constant_prob == pytest.approx((8 + 1) / (8 + 2))
        assert zeros.constant_prob == pytest.approx(1 / (8 + 2))
        np.testing.assert_allclose(ones.predict_proba(X), 0.9)

    def test_degenerate_sampling_rate(self):
        model = GpClassifier.degenerate(2, 0.3)
        draws = model.posterior_samples(np.zeros((4, 2)), 50_000, seed=1)
        assert draws.shape == (50_000, 4)
        assert set(np.unique(draws)) <= {0.0, 1.0}
        assert abs(draws.mean() - 0.3) < 0.01

    def test_pinned_always_one(self):
        model = GpClassifier.pinned(3)
        draws = model.posterior_samples(np.zeros((5, 3)), 100, seed=0)
        np.testing.assert_array_equal(draws, 1.0)
        np.testing.assert_allclose(model.predict_proba(np.zeros((2, 3))), 1.0)

    def test_joint_samples_match_marginals(self):
        X, labels = self.separable_data(30)
        model = fit_classifier(X, labels)
        Xq = np.array([[0.1], [0.5], [0.9]])
        p = model.predict_proba(Xq)
        draws = model.posterior_samples(Xq, 100_000, seed=11)
        rate = draws.mean(axis=0)
        se = np.sqrt(p * (1 - p) / draws.shape[0])
        assert np.all(np.abs(rate - p) < 5 * se + 1e-3)

    def test_samples_seed_reproducible(self):
        X, labels = self.separable_data(20)
        model = fit_classifier(X, labels)
        Xq = np.array([[0.3], [0.6]])
        s1 = model.posterior_samples(Xq, 64, seed=9)
        s2 = model.posterior_samples(Xq, 64, seed=9)
        np.testing.assert_array_equal(s1, s2)

    def test_joint_samples_are_correlated(self):
        # nearby points share one latent draw, so their labels co-vary
        X, labels = self.separable_data(30)
        model = fit_classifier(X, labels)
        Xq = np.array([[0.49], [0.51]])
        draws = model.posterior_samples(Xq, 40_000, seed=3)
        a, b = draws[:, 0], draws[:, 1]
        cov = np.mean(a * b) - a.mean() * b.mean()
        assert cov > 0.01

    def test_symmetric_pair_gives_half_at_midpoint(self):
        X = np.array([[0.4], [0.6]])
        model = fit_classifier(X, np.array([0, 1]))
        p = model.predict_proba(np.array([[0.5]]))
        assert p[0] == pytest.approx(0.5, abs=1e-6)

    def test_all_positive_labels_bias_everywhere(self):
        X = np.random.default_rng(2).random((12, 2))
        model = fit_classifier(X, np.ones(12))
        p = model.predict_proba(np.random.default_rng(3).random((20, 2)))
        assert np.all(p > 0.5)

    def test_against_importance_sampling_oracle(self):
        # tiny dataset: weight joint latent prior draws by the likelihood
        X3 = np.array([[0.1, 0.2], [0.8, 0.3], [0.4, 0.9]])
        labels = np.array([1.0, 0.0, 1.0])
        xq = np.array([[0.5, 0.5]])
        ls, sv = 0.5, 4.0
        cfg = ClassifierFitConfig(lengthscale_grid=(ls,), signal_var_grid=(sv,))
        model = fit_classifier(X3, labels, cfg)
        p = model.predict_proba(xq)[0]

        X4 = np.vstack([X3, xq])
        K4 = matern52(X4, X4, np.full(2, ls), sv) + 1e-10 * np.eye(4)
        lo = np.linalg.cholesky(K4)
        rng = np.random.default_rng(17)
        f = rng.standard_normal((2_000_000, 4)) @ lo.T
        lik = np.prod(np.where(labels > 0.5, expit(f[:, :3]), expit(-f[:, :3])),
                      axis=1)
        oracle = float(np.sum(lik * expit(f[:, 3])) / np.sum(lik))
        assert abs(p - oracle) < 0.05

    def test_saturated_probability_sampling(self):
        # constant-prob model with logit above 8: a full block of 512 draws
        # is all-ones with probability p^512 >= 0.8
        n = 4000
        model = fit_classifier(np.random.default_rng(0).random((n, 1)),
                               np.ones(n))
        p = model.constant_prob
        assert math.log(p / (1 - p)) >= 8.0
        assert p ** 512 >= 0.8
        draws = model.posterior_samples(np.array([[0.5]]), 512, seed=0)
        assert np.all(draws == 1.0)

    def test_module_level_sampler_wrapper(self):
        X, labels = self.separable_data(15)
        model = fit_classifier(X, labels)
        Xq = np.array([[0.25], [0.75]])
        a = classifier_posterior_samples(model, Xq, 32, seed=8)
        b = model.posterior_samples(Xq, 32, seed=8)
        np.testing.assert_array_equal(a, b)


class TestGhQuadrature:
    def test_matches_adaptive_quad(self):
        for m, s in [(0.0, 1.0), (1.3, 0.4), (-2.0, 2.5), (0.5, 3.0)]:
            ref, err = quad(
                lambda z: expit(m + s * z)
                * math.exp(-0.5 * z * z) / math.sqrt(2 * math.pi),
                -12.0, 12.0, epsabs=1e-12)
            got = _gh_bernoulli_mean(np.array([m]), np.array([s]))[0]
            assert got == pytest.approx(ref, abs=1e-7 + 10 * err)

    def test_monotone_in_mean(self):
        means = np.linspace(-6.0, 6.0, 200)
        for s in (0.0, 0.5, 2.0):
            p = _gh_bernoulli_mean(means, np.full_like(means, s))
            assert np.all(np.diff(p) > 0)

    def test_zero_sd_is_plain_sigmoid(self):
        means = np.array([-1.0, 0.0, 2.0])
        p = _gh_bernoulli_mean(means, np.zeros(3))
        np.testing.assert_allclose(p, expit(means), atol=1e-12)
