"""Closed-form Bayesian models: conjugate updates and exact predictive densities.

Three conjugate families are implemented with family-specific closed forms:

* Beta-Bernoulli (binary outputs, inputs ignored),
* Gaussian observations with known variance and an unknown mean
  (real outputs, inputs ignored),
* Bayesian linear regression with known noise variance and a zero-mean
  isotropic Gaussian prior on the weights.

Every family exposes additive sufficient statistics, the standard conjugate
posterior update in the (pseudo-count, mean-sufficient-statistic)
parametrization, and the exact log density of a validation set under the
posterior predictive, both jointly (chain-rule consistent) and per point.
Gaussian-process regression lives in :mod:`truthval.gp`; the dispatch
functions here accept its hyperparameter object and delegate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import ClassVar, Union

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.special import betaln

from . import gp as _gp
from .data import BINARY, REGRESSION, Dataset
from .errors import ConfigurationError, InputError

LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class SuffStats:
    """Additive sufficient statistics of a dataset.

    ``vector`` holds family-specific sums; statistics of disjoint datasets
    add elementwise, and an empty dataset has all-zero statistics.
    """

    family: str
    count: int
    vector: np.ndarray

    def __post_init__(self) -> None:
        vector = np.array(self.vector, dtype=float)
        vector.setflags(write=False)
        object.__setattr__(self, "vector", vector)


@dataclass(frozen=True)
class NaturalParams:
    """Conjugate prior/posterior parameters.

    ``nu0`` is the pseudo-count and ``sigma0`` the mean sufficient-statistic
    vector, so the conjugate update is a weighted average of ``sigma0`` and
    the observed statistics.
    """

    family: str
    nu0: float
    sigma0: np.ndarray

    def __post_init__(self) -> None:
        if self.nu0 < 0:
            raise ConfigurationError(f"pseudo-count must be >= 0, got {self.nu0}")
        sigma0 = np.array(self.sigma0, dtype=float)
        sigma0.setflags(write=False)
        object.__setattr__(self, "sigma0", sigma0)


@dataclass(frozen=True)
class BetaBernoulliModel:
    """Bernoulli likelihood with a Beta(alpha, beta) prior on the success rate."""

    alpha: float = 1.0
    beta: float = 1.0

    family: ClassVar[str] = "beta-bernoulli"
    data_kind: ClassVar[str] = BINARY

    def __post_init__(self) -> None:
        if self.alpha <= 0 or self.beta <= 0:
            raise ConfigurationError("Beta prior requires alpha > 0 and beta > 0")


@dataclass(frozen=True)
class GaussianMeanModel:
    """Gaussian observations with known variance and an unknown mean.

    Prior: mean ~ N(prior_mean, prior_var). Observation y ~ N(mean, noise_var).
    Inputs are ignored, only outputs enter the likelihood.
    """

    prior_mean: float = 0.0
    prior_var: float = 1.0
    noise_var: float = 1.0

    family: ClassVar[str] = "gaussian-known-var"
    data_kind: ClassVar[str] = REGRESSION

    def __post_init__(self) -> None:
        if self.prior_var <= 0 or self.noise_var <= 0:
            raise ConfigurationError("prior_var and noise_var must be positive")


@dataclass(frozen=True)
class LinearRegressionModel:
    """Bayesian linear regression with known noise variance.

    Weights w ~ N(0, prior_var * I); outputs y = X w + N(0, noise_var).
    The marginal likelihood of any output vector is an exact Gaussian.
    """

    n_features: int
    prior_var: float = 1.0
    noise_var: float = 1.0

    family: ClassVar[str] = "bayes-linreg"
    data_kind: ClassVar[str] = REGRESSION

    def __post_init__(self) -> None:
        if self.n_features < 1:
            raise ConfigurationError("linear regression needs n_features >= 1")
        if self.prior_var <= 0 or self.noise_var <= 0:
            raise ConfigurationError("prior_var and noise_var must be positive")


ConjugateModel = Union[BetaBernoulliModel, GaussianMeanModel, LinearRegressionModel]
BayesianModel = Union[ConjugateModel, _gp.GpHyper]


def _check_kind(model, data: Dataset, what: str) -> None:
    if data.kind != model.data_kind:
        raise InputError(
            f"{what} kind {data.kind!r} does not match model family "
            f"{model.family!r} (expects {model.data_kind!r})"
        )


def suff_stats(data: Dataset, model: ConjugateModel) -> SuffStats:
    """Family-specific additive sufficient statistics of ``data``."""
    _check_kind(model, data, "data")
    n = len(data)
    if isinstance(model, BetaBernoulliModel):
        return SuffStats(model.family, n, np.array([data.outputs.sum()]))
    if isinstance(model, GaussianMeanModel):
        return SuffStats(model.family, n, np.array([data.outputs.sum()]))
    if isinstance(model, LinearRegressionModel):
        d = model.n_features
        if n and data.n_features != d:
            raise InputError(
                f"data has {data.n_features} features, model expects {d}"
            )
        x, y = data.inputs, data.outputs
        if n == 0:
            return SuffStats(model.family, 0, np.zeros(1 + d + d * d))
        vec = np.concatenate([[y @ y], x.T @ y, (x.T @ x).ravel()])
        return SuffStats(model.family, n, vec)
    raise ConfigurationError(f"no sufficient statistics for model {model!r}")


def combine_stats(*stats: SuffStats) -> SuffStats:
    """Sum statistics of disjoint datasets (multiset-union semantics)."""
    if not stats:
        raise InputError("combine_stats requires at least one argument")
    family = stats[0].family
    for s in stats[1:]:
        if s.family != family:
            raise ConfigurationError(f"family mismatch: {s.family} vs {family}")
    count = sum(s.count for s in stats)
    vector = np.sum([s.vector for s in stats], axis=0)
    return SuffStats(family, count, vector)


def prior_params(model: ConjugateModel) -> NaturalParams:
    """Prior in the (pseudo-count, mean sufficient statistics) parametrization."""
    if isinstance(model, BetaBernoulliModel):
        nu0 = model.alpha + model.beta
        return NaturalParams(model.family, nu0, np.array([model.alpha / nu0]))
    if isinstance(model, GaussianMeanModel):
        nu0 = model.noise_var / model.prior_var
        return NaturalParams(model.family, nu0, np.array([model.prior_mean]))
    if isinstance(model, LinearRegressionModel):
        d = model.n_features
        nu0 = model.noise_var / model.prior_var
        # Pseudo-data worth nu0 points whose Gram matrix is the ridge term
        # (noise_var / prior_var) * I and whose output moments are zero.
        sums = np.concatenate([[0.0], np.zeros(d), (nu0 * np.eye(d)).ravel()])
        return NaturalParams(model.family, nu0, sums / nu0)
    raise ConfigurationError(f"no conjugate prior for model {model!r}")


def posterior_update(prior: NaturalParams, stats: SuffStats) -> NaturalParams:
    """Conjugate update: add counts, average the mean sufficient statistics.

    Composes: updating with stats(A) then stats(B) equals one update with
    stats(A) + stats(B). Updating with empty statistics returns ``prior``
    unchanged (bit-identical).
    """
    if prior.family != stats.family:
        raise ConfigurationError(
            f"family mismatch: prior {prior.family!r} vs stats {stats.family!r}"
        )
    if stats.count == 0:
        return prior
    nu = prior.nu0 + stats.count
    sigma = (prior.nu0 * prior.sigma0 + stats.vector) / nu
    return NaturalParams(prior.family, nu, sigma)


def posterior_params(model: ConjugateModel, data: Dataset) -> NaturalParams:
    return posterior_update(prior_params(model), suff_stats(data, model))


# -- family-specific parameter decoding --------------------------------------


def _beta_ab(params: NaturalParams) -> tuple[float, float]:
    a = params.nu0 * params.sigma0[0]
    return a, params.nu0 - a


def _gaussian_mean_nu(params: NaturalParams) -> tuple[float, float]:
    return params.sigma0[0], params.nu0


def _linreg_design(model: LinearRegressionModel, params: NaturalParams):
    """Return (A, b): A = ridge + sum x x^T, b = sum x y (prior included)."""
    d = model.n_features
    sums = params.nu0 * params.sigma0
    b = sums[1 : 1 + d]
    a = sums[1 + d :].reshape(d, d)
    return a, b


def _chol_logdet(factor) -> float:
    return 2.0 * float(np.sum(np.log(np.diag(factor[0]))))


# -- log predictive densities -------------------------------------------------


def _check_validation(model, validation: Dataset) -> None:
    if len(validation) == 0:
        raise InputError("validation set must be non-empty")
    _check_kind(model, validation, "validation")


def log_predictive_from_params(
    model: ConjugateModel, params: NaturalParams, validation: Dataset
) -> float:
    """Joint log density of ``validation`` under the predictive at ``params``.

    The joint is chain-rule consistent: scoring points sequentially while
    updating the posterior after each one gives the same total.
    """
    _check_validation(model, validation)
    if params.family != model.family:
        raise ConfigurationError(
            f"params family {params.family!r} does not match model {model.family!r}"
        )
    y = validation.outputs
    if isinstance(model, BetaBernoulliModel):
        a, b = _beta_ab(params)
        s = float(y.sum())
        f = len(y) - s
        return float(betaln(a + s, b + f) - betaln(a, b))
    if isinstance(model, GaussianMeanModel):
        mu, nu = _gaussian_mean_nu(params)
        s2 = model.noise_var
        total = 0.0
        for obs in y:
            var = s2 + s2 / nu
            total += -0.5 * (math.log(2.0 * math.pi * var) + (obs - mu) ** 2 / var)
            mu = (nu * mu + obs) / (nu + 1.0)
            nu += 1.0
        return total
    if isinstance(model, LinearRegressionModel):
        return _linreg_joint_logpdf(model, params, validation)
    raise ConfigurationError(f"no closed-form predictive for model {model!r}")


def linreg_validation_summary(model: LinearRegressionModel, validation: Dataset):
    """Validation-set moments (count, y'y, X'y, X'X) for repeated scoring.

    The joint predictive density depends on the validation set only through
    these moments, so computing them once makes scoring many posteriors cheap.
    """
    _check_validation(model, validation)
    if validation.n_features != model.n_features:
        raise InputError(
            f"validation has {validation.n_features} features, model expects "
            f"{model.n_features}"
        )
    xs, ys = validation.inputs, validation.outputs
    return len(ys), float(ys @ ys), xs.T @ ys, xs.T @ xs


def linreg_log_predictive_from_summary(
    model: LinearRegressionModel, params: NaturalParams, summary
) -> float:
    """Joint log predictive density from precomputed validation moments.

    The predictive covariance is noise_var * (I + Xs A^{-1} Xs^T); both the
    log-determinant and the quadratic form reduce to d x d solves.
    """
    m, yty, xty, xtx = summary
    a, b = _linreg_design(model, params)
    s2 = model.noise_var
    ca = cho_factor(a, lower=True)
    w_mean = cho_solve(ca, b)
    cfull = cho_factor(a + xtx, lower=True)
    # r'r and Xs'r for the residual r = ys - Xs w, via the moments alone
    xtx_w = xtx @ w_mean
    rtr = yty - 2.0 * (w_mean @ xty) + w_mean @ xtx_w
    u = xty - xtx_w
    quad = (rtr - u @ cho_solve(cfull, u)) / s2
    logdet = m * math.log(s2) + _chol_logdet(cfull) - _chol_logdet(ca)
    return float(-0.5 * (m * LOG_2PI + logdet + quad))


def _linreg_joint_logpdf(
    model: LinearRegressionModel, params: NaturalParams, validation: Dataset
) -> float:
    return linreg_log_predictive_from_summary(
        model, params, linreg_validation_summary(model, validation)
    )


def pointwise_log_predictive_from_params(
    model: ConjugateModel, params: NaturalParams, validation: Dataset
) -> np.ndarray:
    """Per-point log predictive density, every point scored at the same params."""
    _check_validation(model, validation)
    y = validation.outputs
    if isinstance(model, BetaBernoulliModel):
        a, b = _beta_ab(params)
        p1 = a / (a + b)
        return np.where(y == 1.0, math.log(p1), math.log(1.0 - p1))
    if isinstance(model, GaussianMeanModel):
        mu, nu = _gaussian_mean_nu(params)
        var = model.noise_var * (1.0 + 1.0 / nu)
        return -0.5 * (np.log(2.0 * np.pi * var) + (y - mu) ** 2 / var)
    if isinstance(model, LinearRegressionModel):
        a, b = _linreg_design(model, params)
        ca = cho_factor(a, lower=True)
        w_mean = cho_solve(ca, b)
        xs = validation.inputs
        solve = cho_solve(ca, xs.T)
        var = model.noise_var * (1.0 + np.einsum("ij,ji->i", xs, solve))
        mean = xs @ w_mean
        return -0.5 * (np.log(2.0 * np.pi * var) + (y - mean) ** 2 / var)
    raise ConfigurationError(f"no closed-form predictive for model {model!r}")


def log_predictive(model: BayesianModel, data: Dataset, validation: Dataset) -> float:
    """Exact joint log density of the validation set given ``data``.

    With empty ``data`` this is the log marginal density under the prior.
    """
    if isinstance(model, _gp.GpHyper):
        _check_validation(model, validation)
        _check_kind(model, data, "data")
        return _gp.gp_log_predictive(data, validation, model)
    return log_predictive_from_params(model, posterior_params(model, data), validation)


def mean_log_predictive(model: BayesianModel, data: Dataset, validation: Dataset) -> float:
    """Average per-point log predictive density (no posterior chaining)."""
    if isinstance(model, _gp.GpHyper):
        _check_validation(model, validation)
        _check_kind(model, data, "data")
        return float(np.mean(_gp.gp_pointwise_log_predictive(data, validation, model)))
    params = posterior_params(model, data)
    return float(np.mean(pointwise_log_predictive_from_params(model, params, validation)))
