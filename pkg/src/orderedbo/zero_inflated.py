"""Per-objective zero-inflated surrogates with joint posterior sampling.

Each objective gets a binary classifier for the zero/non-zero event and a
regressor for the non-zero magnitude.  The predictive distribution is a
mixture: a point mass at zero weighted by the classifier's failure
probability, and the regressor's Gaussian weighted by its success
probability.  Two degenerate kinds collapse one half of the pair: a
binary-only objective keeps only the classifier (its magnitude sampler is
a fixed narrow zero-mean Gaussian), and a continuous objective without
inflation keeps only the regressor (its classifier is pinned to 1).

Training rows are masked per objective: the classifier sees every row
whose DAG ancestors were all measured (a gate closed by a failing
ancestor is itself a zero event, label 0), and the regressor sees only
rows where the objective was measured with a strictly positive value.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .dag import PropertyDag
from .gp import (
    ClassifierFitConfig,
    GpClassifier,
    GpRegressor,
    RegressorFitConfig,
    classifier_posterior_samples,
    fit_classifier,
    fit_regressor,
    regressor_posterior_samples,
)

__all__ = [
    "ObjectiveKind",
    "ObservationSet",
    "JointPosteriorDraw",
    "SurrogateConfig",
    "ZeroInflatedSurrogate",
    "fit_surrogates",
    "zero_inflated_density",
    "draw_joint",
]


class ObjectiveKind(enum.Enum):
    ZERO_INFLATED = "zero-inflated"
    BINARY_ONLY = "binary-only"
    CONTINUOUS_NO_INFLATION = "continuous-no-inflation"


@dataclass(frozen=True)
class ObservationSet:
    """Fitting dataset: inputs (already normalized), values, measured flags.

    Entries of ``values`` at unmeasured coordinates are ignored by every
    fit (they may be NaN); measured entries must be finite.
    """

    X: np.ndarray
    values: np.ndarray
    measured: np.ndarray

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        values = np.atleast_2d(np.asarray(self.values, dtype=float))
        measured = np.atleast_2d(np.asarray(self.measured, dtype=bool))
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "measured", measured)
        if values.shape != measured.shape:
            raise ValueError(
                f"values shape {values.shape} != measured shape "
                f"{measured.shape}")
        if X.shape[0] != values.shape[0]:
            raise ValueError(
                f"X has {X.shape[0]} rows, values has {values.shape[0]}")
        if not np.all(np.isfinite(X)):
            raise ValueError("inputs must be finite")
        if not np.all(np.isfinite(values[measured])):
            raise ValueError("measured values must be finite")

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    @property
    def n_objectives(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class JointPosteriorDraw:
    """Binary and real samples, both shaped (S, M, K)."""

    beta: np.ndarray
    rho: np.ndarray

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=float)
        rho = np.asarray(self.rho, dtype=float)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "rho", rho)
        if beta.shape != rho.shape or beta.ndim != 3:
            raise ValueError(
                f"expected matching (S, M, K) shapes, got {beta.shape} "
                f"and {rho.shape}")
        if not np.all((beta == 0.0) | (beta == 1.0)):
            raise ValueError("binary samples must be 0 or 1")
        if not np.all(np.isfinite(rho)):
            raise ValueError("real samples must be finite")

    @property
    def n_samples(self) -> int:
        return self.beta.shape[0]


@dataclass(frozen=True)
class SurrogateConfig:
    kinds: tuple[ObjectiveKind, ...]
    narrow_sigma: float = 1e-6
    regressor: RegressorFitConfig = field(default_factory=RegressorFitConfig)
    classifier: ClassifierFitConfig = field(default_factory=ClassifierFitConfig)


@dataclass(frozen=True)
class ZeroInflatedSurrogate:
    """One fitted classifier/regressor pair per objective."""

    classifiers: tuple[GpClassifier, ...]
    regressors: tuple[GpRegressor, ...]
    kinds: tuple[ObjectiveKind, ...]
    # True where a fit was expected but no positive rows existed, so the
    # regressor fell back to the prior
    prior_fallback: tuple[bool, ...]
    n_dims: int

    def __post_init__(self):
        k = len(self.kinds)
        if not (len(self.classifiers) == len(self.regressors)
                == len(self.prior_fallback) == k):
            raise ValueError("per-objective field lengths disagree")

    @property
    def n_objectives(self) -> int:
        return len(self.kinds)


def fit_surrogates(dataset: ObservationSet, dag: PropertyDag,
                   config: SurrogateConfig) -> ZeroInflatedSurrogate:
    """Fit the per-objective pairs under kind- and flag-based masking.

    The measured flags must be downward-closed with respect to the DAG
    (a measured child implies measured ancestors).
    """
    if dataset.n_rows == 0:
        raise ValueError("dataset must contain at least one observation")
    n_obj = dataset.n_objectives
    if len(config.kinds) != n_obj:
        raise ValueError(
            f"{len(config.kinds)} kinds declared for {n_obj} objectives")
    if dag.n_objectives != n_obj:
        raise ValueError(
            f"dag has {dag.n_objectives} objectives, dataset has {n_obj}")
    for k in range(n_obj):
        for j in dag.predecessors[k]:
            bad = dataset.measured[:, k] & ~dataset.measured[:, j]
            if np.any(bad):
                raise ValueError(
                    f"row {int(np.argmax(bad))}: objective {k} measured "
                    f"while its ancestor {j} is not")

    n_dims = dataset.X.shape[1]
    classifiers = []
    regressors = []
    fallback = []
    for k in range(n_obj):
        kind = config.kinds[k]
        meas = dataset.measured[:, k]

        # The classifier models the zero mode, and a gate closed by the
        # immediate ancestors IS a zero event, so it trains on every row
        # whose ancestors were all measured: gated rows enter with label
        # 0, measured rows with label 1{value > 0}.  Rows where some
        # ancestor is itself unmeasured carry no information about this
        # objective's zero mode and are excluded.
        pred = sorted(dag.predecessors[k])
        eligible = (np.all(dataset.measured[:, pred], axis=1)
                    if pred else np.ones(dataset.n_rows, dtype=bool))

        if kind is ObjectiveKind.CONTINUOUS_NO_INFLATION:
            classifiers.append(GpClassifier.pinned(n_dims))
        elif eligible.sum() == 0:
            # no informative rows yet: maximally uncertain constant
            classifiers.append(GpClassifier.degenerate(n_dims, 0.5))
        else:
            values = np.nan_to_num(dataset.values[eligible, k], nan=0.0)
            labels = (meas[eligible] & (values > 0.0)).astype(float)
            classifiers.append(fit_classifier(dataset.X[eligible], labels,
                                              config.classifier))

        if kind is ObjectiveKind.BINARY_ONLY:
            regressors.append(GpRegressor.prior(
                n_dims, signal_var=config.narrow_sigma ** 2, noise_var=0.0))
            fallback.append(False)
        else:
            if kind is ObjectiveKind.ZERO_INFLATED:
                pos = meas & (dataset.values[:, k] > 0.0)
            else:
                pos = meas
            if pos.sum() == 0:
                regressors.append(GpRegressor.prior(n_dims))
                fallback.append(True)
            else:
                regressors.append(fit_regressor(
                    dataset.X[pos], dataset.values[pos, k], config.regressor))
                fallback.append(False)

    return ZeroInflatedSurrogate(
        classifiers=tuple(classifiers), regressors=tuple(regressors),
        kinds=tuple(config.kinds), prior_fallback=tuple(fallback),
        n_dims=n_dims)


def zero_inflated_density(surrogate: ZeroInflatedSurrogate, x, k: int,
                          c: float) -> float:
    """Mixture density of objective k's observable value at ``c``.

    At c = 0 this is the zero-mode mass; elsewhere it is the success
    probability times the regressor's noisy predictive density.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[0] != 1:
        raise ValueError("one design point at a time")
    p_pos = float(surrogate.classifiers[k].predict_proba(x)[0])
    if c == 0.0:
        return 1.0 - p_pos
    mean, cov = surrogate.regressors[k].predict(x, include_noise=True)
    var = max(float(cov[0, 0]), 0.0)
    if var == 0.0:
        return 0.0 if c != float(mean[0]) else math.inf
    z = (c - float(mean[0])) ** 2 / var
    return p_pos * math.exp(-0.5 * z) / math.sqrt(2.0 * math.pi * var)


def draw_joint(surrogate: ZeroInflatedSurrogate, Xq, n_samples: int, seed,
               include_noise: bool) -> JointPosteriorDraw:
    """Joint posterior draw at Xq: (S, M, K) binaries and reals.

    One seed stream is split deterministically into two children per
    objective (classifier first, regressor second), so adding objectives
    never reshuffles earlier ones.
    """
    Xq = np.atleast_2d(np.asarray(Xq, dtype=float))
    m = Xq.shape[0]
    n_obj = surrogate.n_objectives
    # Spawn from a fresh copy: SeedSequence.spawn advances the parent's
    # child counter, which would make repeated calls with the same
    # sequence object return different draws.
    if isinstance(seed, np.random.SeedSequence):
        root = np.random.SeedSequence(seed.entropy, spawn_key=seed.spawn_key)
    else:
        root = np.random.SeedSequence(seed)
    children = root.spawn(2 * n_obj)
    beta = np.empty((n_samples, m, n_obj))
    rho = np.empty((n_samples, m, n_obj))
    for k in range(n_obj):
        beta[:, :, k] = classifier_posterior_samples(
            surrogate.classifiers[k], Xq, n_samples, children[2 * k])
        rho[:, :, k] = regressor_posterior_samples(
            surrogate.regressors[k], Xq, n_samples, children[2 * k + 1],
            include_noise=include_noise)
    return JointPosteriorDraw(beta=beta, rho=rho)
