"""Gaussian process regression and classification on the unit hypercube.

Both models use a Matern-5/2 kernel.  The regressor standardizes its
targets internally, carries a constant mean, and fits hyperparameters by
maximizing the exact log marginal likelihood with analytic gradients
(multi-start L-BFGS-B).  The classifier uses a Laplace approximation to
the logistic-link posterior, with hyperparameters picked from a small
deterministic grid by approximate evidence.

Inputs are expected to be normalized to [0, 1]^D by the caller (campaign
design-space bounds, not per-dataset bounds); nothing enforces this, so
slightly out-of-range queries from noisy perturbations are fine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve, cholesky, solve_triangular
from scipy.optimize import minimize
from scipy.special import expit, log_expit

__all__ = [
    "EmptyDataError",
    "IllConditionedKernelError",
    "ConvergenceError",
    "RegressorFitConfig",
    "ClassifierFitConfig",
    "GpRegressor",
    "GpClassifier",
    "matern52",
    "lml_and_grad",
    "fit_regressor",
    "fit_classifier",
    "regressor_posterior_samples",
    "classifier_posterior_samples",
]

_SQRT5 = math.sqrt(5.0)


class EmptyDataError(ValueError):
    """Fitting requires at least one observation."""


class IllConditionedKernelError(RuntimeError):
    """Cholesky failed even after the jitter escalation schedule."""


class ConvergenceError(RuntimeError):
    """An iterative fit did not converge within its iteration budget."""


def matern52(x1, x2, lengthscales, signal_var: float) -> np.ndarray:
    """Matern-5/2 kernel matrix with per-dimension lengthscales."""
    x1 = np.atleast_2d(np.asarray(x1, dtype=float))
    x2 = np.atleast_2d(np.asarray(x2, dtype=float))
    ls = np.asarray(lengthscales, dtype=float)
    diff = (x1[:, None, :] - x2[None, :, :]) / ls
    r2 = np.sum(diff * diff, axis=-1)
    r = np.sqrt(np.maximum(r2, 0.0))
    return signal_var * (1.0 + _SQRT5 * r + (5.0 / 3.0) * r2) * np.exp(-_SQRT5 * r)


def _chol_with_jitter(a: np.ndarray, start: float = 1e-8, cap: float = 1e-4):
    """Lower Cholesky of ``a``, escalating additive jitter 10x up to ``cap``."""
    try:
        return cholesky(a, lower=True), 0.0
    except np.linalg.LinAlgError:
        pass
    jitter = start
    eye = np.eye(a.shape[0])
    while jitter <= cap:
        try:
            return cholesky(a + jitter * eye, lower=True), jitter
        except np.linalg.LinAlgError:
            jitter *= 10.0
    raise IllConditionedKernelError(
        f"kernel matrix not positive definite at jitter cap {cap:g}")


def lml_and_grad(X: np.ndarray, y: np.ndarray, theta: np.ndarray):
    """Exact log marginal likelihood and its gradient.

    ``theta`` packs ``[log lengthscales (D), log signal_var, log noise_var,
    mean]``.  Returns ``(lml, grad)`` with ``grad`` in the same packing.
    The targets ``y`` are used as given (callers standardize beforehand).
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, d = X.shape
    ls = np.exp(theta[:d])
    signal_var = float(np.exp(theta[d]))
    noise_var = float(np.exp(theta[d + 1]))
    mean = float(theta[d + 2])

    diff = (X[:, None, :] - X[None, :, :]) / ls
    d2 = diff * diff
    r2 = np.sum(d2, axis=-1)
    r = np.sqrt(np.maximum(r2, 0.0))
    expo = np.exp(-_SQRT5 * r)
    k = signal_var * (1.0 + _SQRT5 * r + (5.0 / 3.0) * r2) * expo
    kn = k + noise_var * np.eye(n)

    lo, jitter = _chol_with_jitter(kn)
    resid = y - mean
    alpha = cho_solve((lo, True), resid)
    lml = (-0.5 * float(resid @ alpha)
           - float(np.sum(np.log(np.diag(lo))))
           - 0.5 * n * math.log(2.0 * math.pi))

    kn_inv = cho_solve((lo, True), np.eye(n))
    inner = np.outer(alpha, alpha) - kn_inv

    grad = np.empty(d + 3)
    # d k / d log ls_j = (5/3) * sv * (1 + sqrt5 r) * exp(-sqrt5 r) * d2_j
    common = (5.0 / 3.0) * signal_var * (1.0 + _SQRT5 * r) * expo
    for j in range(d):
        grad[j] = 0.5 * float(np.sum(inner * (common * d2[..., j])))
    grad[d] = 0.5 * float(np.sum(inner * k))
    grad[d + 1] = 0.5 * noise_var * float(np.trace(inner))
    grad[d + 2] = float(np.sum(alpha))
    return lml, grad


@dataclass(frozen=True)
class RegressorFitConfig:
    n_restarts: int = 5
    lengthscale_bounds: tuple[float, float] = (5e-3, 10.0)
    signal_var_bounds: tuple[float, float] = (1e-2, 1e2)
    noise_var_bounds: tuple[float, float] = (1e-6, 1.0)
    mean_bounds: tuple[float, float] = (-5.0, 5.0)
    max_iter: int = 200
    seed: int = 0


@dataclass(frozen=True)
class ClassifierFitConfig:
    lengthscale_grid: tuple[float, ...] = (0.1, 0.25, 0.5, 1.0, 2.0)
    signal_var_grid: tuple[float, ...] = (1.0, 9.0, 25.0)
    max_newton_iter: int = 100
    tol: float = 1e-8


@dataclass
class GpRegressor:
    """Fitted exact GP with constant mean and standardized targets.

    Predictions are returned in the original target units.  A regressor
    with ``n_train == 0`` represents the prior (used as a fallback when a
    surrogate has no data for one objective).
    """

    X: np.ndarray
    lengthscales: np.ndarray
    signal_var: float
    noise_var: float
    mean_const: float
    y_mean: float
    y_scale: float
    _chol: np.ndarray | None = field(default=None, repr=False)
    _alpha: np.ndarray | None = field(default=None, repr=False)
    log_marginal_likelihood: float = float("nan")

    @property
    def n_train(self) -> int:
        return self.X.shape[0]

    @classmethod
    def prior(cls, n_dims: int, lengthscales=None, signal_var: float = 1.0,
              noise_var: float = 1e-6, mean_const: float = 0.0,
              y_mean: float = 0.0, y_scale: float = 1.0) -> "GpRegressor":
        ls = np.full(n_dims, 0.5) if lengthscales is None else np.asarray(
            lengthscales, dtype=float)
        return cls(X=np.zeros((0, n_dims)), lengthscales=ls,
                   signal_var=signal_var, noise_var=noise_var,
                   mean_const=mean_const, y_mean=y_mean, y_scale=y_scale)

    def predict(self, Xq, include_noise: bool = False):
        """Posterior mean and covariance at ``Xq`` in original units."""
        Xq = np.atleast_2d(np.asarray(Xq, dtype=float))
        m = Xq.shape[0]
        k_qq = matern52(Xq, Xq, self.lengthscales, self.signal_var)
        if self.n_train == 0:
            mean_std = np.full(m, self.mean_const)
            cov_std = k_qq
        else:
            k_star = matern52(Xq, self.X, self.lengthscales, self.signal_var)
            mean_std = self.mean_const + k_star @ self._alpha
            v = solve_triangular(self._chol, k_star.T, lower=True)
            cov_std = k_qq - v.T @ v
        if include_noise:
            cov_std = cov_std + self.noise_var * np.eye(m)
        cov_std = 0.5 * (cov_std + cov_std.T)
        mean = self.y_mean + self.y_scale * mean_std
        cov = (self.y_scale ** 2) * cov_std
        return mean, cov

    def posterior_samples(self, Xq, n_samples: int, seed,
                          include_noise: bool = False) -> np.ndarray:
        """Joint posterior draws of shape (n_samples, len(Xq))."""
        mean, cov = self.predict(Xq, include_noise=include_noise)
        scale = max(float(np.max(np.diag(cov))), 1.0)
        lo, _ = _chol_with_jitter(cov, start=1e-12 * scale, cap=1e-6 * scale)
        rng = np.random.default_rng(seed)
        z = rng.standard_normal((n_samples, mean.shape[0]))
        return mean[None, :] + z @ lo.T


def fit_regressor(X, y, config: RegressorFitConfig | None = None) -> GpRegressor:
    """ML-II fit: multi-start L-BFGS-B on the exact marginal likelihood."""
    config = config or RegressorFitConfig()
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    n, d = X.shape
    if n == 0:
        raise EmptyDataError("regressor fit needs at least one observation")
    if y.shape[0] != n:
        raise ValueError(f"X has {n} rows but y has {y.shape[0]}")

    y_mean = float(np.mean(y))
    y_scale = float(np.std(y))
    if y_scale == 0.0 or n == 1:
        y_scale = 1.0
    ys = (y - y_mean) / y_scale

    lb = np.concatenate([
        np.full(d, math.log(config.lengthscale_bounds[0])),
        [math.log(config.signal_var_bounds[0])],
        [math.log(config.noise_var_bounds[0])],
        [config.mean_bounds[0]],
    ])
    ub = np.concatenate([
        np.full(d, math.log(config.lengthscale_bounds[1])),
        [math.log(config.signal_var_bounds[1])],
        [math.log(config.noise_var_bounds[1])],
        [config.mean_bounds[1]],
    ])
    bounds = list(zip(lb, ub))

    def neg(theta):
        try:
            val, grad = lml_and_grad(X, ys, theta)
        except IllConditionedKernelError:
            return 1e25, np.zeros_like(theta)
        return -val, -grad

    default = np.concatenate([
        np.full(d, math.log(0.5)), [0.0], [math.log(1e-2)], [0.0]])
    rng = np.random.default_rng(config.seed)
    starts = [default]
    for _ in range(max(config.n_restarts - 1, 0)):
        starts.append(np.concatenate([
            rng.uniform(math.log(0.05), math.log(2.0), size=d),
            [rng.uniform(math.log(0.1), math.log(10.0))],
            [rng.uniform(math.log(1e-5), math.log(0.1))],
            [rng.uniform(-1.0, 1.0)],
        ]))

    best = None
    for theta0 in starts:
        res = minimize(neg, np.clip(theta0, lb, ub), jac=True,
                       method="L-BFGS-B", bounds=bounds,
                       options={"maxiter": config.max_iter})
        if not np.all(np.isfinite(res.x)) or res.fun >= 1e24:
            continue
        if best is None or res.fun < best.fun:
            best = res
    if best is None:
        raise IllConditionedKernelError("every restart failed to factor the kernel")

    theta = best.x
    ls = np.exp(theta[:d])
    signal_var = float(np.exp(theta[d]))
    noise_var = float(np.exp(theta[d + 1]))
    mean_const = float(theta[d + 2])
    kn = matern52(X, X, ls, signal_var) + noise_var * np.eye(n)
    lo, _ = _chol_with_jitter(kn)
    alpha = cho_solve((lo, True), ys - mean_const)
    return GpRegressor(X=X, lengthscales=ls, signal_var=signal_var,
                       noise_var=noise_var, mean_const=mean_const,
                       y_mean=y_mean, y_scale=y_scale, _chol=lo, _alpha=alpha,
                       log_marginal_likelihood=-float(best.fun))


@dataclass
class GpClassifier:
    """Laplace-approximate GP binary classifier with a logistic link.

    A degenerate single-class fit is represented by ``constant_prob`` with
    no latent model; a pinned classifier (probability one) is built via
    :meth:`pinned`.
    """

    X: np.ndarray
    y: np.ndarray
    lengthscales: np.ndarray
    signal_var: float
    constant_prob: float | None = None
    _f_hat: np.ndarray | None = field(default=None, repr=False)
    _grad_at_mode: np.ndarray | None = field(default=None, repr=False)
    _sqrt_w: np.ndarray | None = field(default=None, repr=False)
    _chol_b: np.ndarray | None = field(default=None, repr=False)
    evidence: float = float("nan")
    newton_iterations: int = 0

    @property
    def n_train(self) -> int:
        return self.X.shape[0]

    @property
    def is_degenerate(self) -> bool:
        return self.constant_prob is not None

    @classmethod
    def degenerate(cls, n_dims: int, prob: float) -> "GpClassifier":
        return cls(X=np.zeros((0, n_dims)), y=np.zeros(0, dtype=int),
                   lengthscales=np.full(n_dims, 0.5), signal_var=1.0,
                   constant_prob=float(prob))

    @classmethod
    def pinned(cls, n_dims: int) -> "GpClassifier":
        return cls.degenerate(n_dims, 1.0)

    def latent_posterior(self, Xq):
        """Mean and covariance of the latent function at ``Xq``."""
        if self.is_degenerate:
            raise ValueError("degenerate classifier has no latent posterior")
        Xq = np.atleast_2d(np.asarray(Xq, dtype=float))
        k_star = matern52(Xq, self.X, self.lengthscales, self.signal_var)
        mean = k_star @ self._grad_at_mode
        v = solve_triangular(self._chol_b, self._sqrt_w[:, None] * k_star.T,
                             lower=True)
        k_qq = matern52(Xq, Xq, self.lengthscales, self.signal_var)
        cov = k_qq - v.T @ v
        return mean, 0.5 * (cov + cov.T)

    def predict_proba(self, Xq) -> np.ndarray:
        """Marginal probability of class 1, via Gauss-Hermite quadrature."""
        Xq = np.atleast_2d(np.asarray(Xq, dtype=float))
        if self.is_degenerate:
            return np.full(Xq.shape[0], self.constant_prob)
        mean, cov = self.latent_posterior(Xq)
        sd = np.sqrt(np.maximum(np.diag(cov), 0.0))
        return _gh_bernoulli_mean(mean, sd)

    def posterior_samples(self, Xq, n_samples: int, seed) -> np.ndarray:
        """Joint binary draws of shape (n_samples, len(Xq)).

        One multivariate latent draw per sample path, squashed through the
        logistic link, then one Bernoulli per point.
        """
        Xq = np.atleast_2d(np.asarray(Xq, dtype=float))
        m = Xq.shape[0]
        rng = np.random.default_rng(seed)
        if self.is_degenerate:
            return (rng.random((n_samples, m)) < self.constant_prob).astype(float)
        mean, cov = self.latent_posterior(Xq)
        scale = max(float(np.max(np.diag(cov))), 1.0)
        lo, _ = _chol_with_jitter(cov, start=1e-12 * scale, cap=1e-6 * scale)
        z = rng.standard_normal((n_samples, m))
        latent = mean[None, :] + z @ lo.T
        return (rng.random((n_samples, m)) < expit(latent)).astype(float)


_GH_NODES, _GH_WEIGHTS = np.polynomial.hermite.hermgauss(64)


def _gh_bernoulli_mean(mean, sd) -> np.ndarray:
    """E[sigmoid(m + s Z)] with Z standard normal, 64-node quadrature."""
    mean = np.asarray(mean, dtype=float)
    sd = np.asarray(sd, dtype=float)
    z = math.sqrt(2.0) * _GH_NODES
    probs = expit(mean[..., None] + sd[..., None] * z)
    return probs @ (_GH_WEIGHTS / math.sqrt(math.pi))


def regressor_posterior_samples(model: GpRegressor, Xq, n_samples: int, seed,
                                include_noise: bool = False) -> np.ndarray:
    """Joint predictive draws, shape (n_samples, len(Xq))."""
    return model.posterior_samples(Xq, n_samples, seed,
                                   include_noise=include_noise)


def classifier_posterior_samples(model: GpClassifier, Xq, n_samples: int,
                                 seed) -> np.ndarray:
    """Joint binary draws, shape (n_samples, len(Xq))."""
    return model.posterior_samples(Xq, n_samples, seed)


def _laplace_mode(K: np.ndarray, y01: np.ndarray, max_iter: int, tol: float):
    """Newton iteration for the logistic-link Laplace mode (stable form)."""
    n = K.shape[0]
    f = np.zeros(n)
    last_step = np.inf
    for it in range(1, max_iter + 1):
        pi = expit(f)
        w = pi * (1.0 - pi)
        sw = np.sqrt(w)
        b_mat = np.eye(n) + sw[:, None] * K * sw[None, :]
        lo = cholesky(b_mat, lower=True)
        grad = y01 - pi
        b = w * f + grad
        rhs = sw * (K @ b)
        a = b - sw * cho_solve((lo, True), rhs)
        f_new = K @ a
        last_step = float(np.max(np.abs(f_new - f)))
        f = f_new
        if last_step < tol:
            pi = expit(f)
            w = pi * (1.0 - pi)
            sw = np.sqrt(w)
            b_mat = np.eye(n) + sw[:, None] * K * sw[None, :]
            lo = cholesky(b_mat, lower=True)
            # evidence: -0.5 a^T f + log p(y|f) - 0.5 log|B|, with f = K a
            log_lik = float(np.sum(np.where(y01 > 0.5, log_expit(f),
                                            log_expit(-f))))
            evidence = (-0.5 * float(a @ f) + log_lik
                        - float(np.sum(np.log(np.diag(lo)))))
            return f, sw, lo, y01 - pi, evidence, it
    raise ConvergenceError(
        f"Laplace Newton iteration did not converge in {max_iter} steps "
        f"(last step max-change {last_step:.3e})")


def fit_classifier(X, labels, config: ClassifierFitConfig | None = None
                   ) -> GpClassifier:
    """Fit the Laplace classifier, or a smoothed constant on one-class data.

    Hyperparameters are chosen by approximate evidence over a small
    deterministic grid of isotropic lengthscales and signal variances.
    """
    config = config or ClassifierFitConfig()
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y01 = np.asarray(labels, dtype=float).ravel()
    n, d = X.shape
    if n == 0:
        raise EmptyDataError("classifier fit needs at least one observation")
    if y01.shape[0] != n:
        raise ValueError(f"X has {n} rows but labels has {y01.shape[0]}")
    if not np.all((y01 == 0.0) | (y01 == 1.0)):
        raise ValueError("labels must be binary")

    ones = int(y01.sum())
    if ones == 0 or ones == n:
        # Laplace-smoothed constant: (count + 1) / (N + 2)
        return GpClassifier.degenerate(d, (ones + 1) / (n + 2))

    best = None
    failures = []
    for ls in config.lengthscale_grid:
        for sv in config.signal_var_grid:
            K = matern52(X, X, np.full(d, ls), sv)
            try:
                f, sw, lo, grad, evidence, iters = _laplace_mode(
                    K, y01, config.max_newton_iter, config.tol)
            except (ConvergenceError, np.linalg.LinAlgError) as exc:
                failures.append(f"ls={ls} sv={sv}: {exc}")
                continue
            if best is None or evidence > best[0]:
                best = (evidence, ls, sv, f, sw, lo, grad, iters)
    if best is None:
        raise ConvergenceError(
            "no hyperparameter setting converged: " + "; ".join(failures))
    evidence, ls, sv, f, sw, lo, grad, iters = best
    return GpClassifier(X=X, y=y01.astype(int), lengthscales=np.full(d, ls),
                        signal_var=sv, _f_hat=f, _grad_at_mode=grad,
                        _sqrt_w=sw, _chol_b=lo, evidence=evidence,
                        newton_iterations=iters)
