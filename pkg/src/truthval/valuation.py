"""Data valuation functions and characteristic-table construction.

The headline valuation is the log-score

    v(D) = log p(T | D) - log p(T)

for an agreed Bayesian model and a held-out validation set T, plus a
per-point (mean) variant. Four classic validation-set-free valuations are
included as baselines precisely because they are gameable: cardinality,
input-volume, information gain, and posterior divergence from the prior.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import betaln, digamma

from .data import Dataset, concat_datasets, empty_like
from .errors import ConfigurationError, InputError, UnsupportedConfigurationError
from .gp import GpHyper, se_ard_kernel
from .models import (
    BetaBernoulliModel,
    GaussianMeanModel,
    LinearRegressionModel,
    _beta_ab,
    _gaussian_mean_nu,
    log_predictive,
    mean_log_predictive,
    posterior_params,
)

LOG_SCORE = "log-score"
MEAN_LOG_SCORE = "mean-log-score"
CARDINALITY = "cardinality"
VOLUME = "volume"
INFO_GAIN = "info-gain"
KL_FROM_PRIOR = "kl-from-prior"

DVF_KINDS = (LOG_SCORE, MEAN_LOG_SCORE, CARDINALITY, VOLUME, INFO_GAIN, KL_FROM_PRIOR)
LOG_SCORE_KINDS = (LOG_SCORE, MEAN_LOG_SCORE)


class RankDeficientVolumeWarning(UserWarning):
    """Volume of a rank-deficient Gram matrix; the value is reported as 0."""


@dataclass(frozen=True)
class DvfSpec:
    """A data valuation function: which score, which model, which validation set.

    Log-score kinds require both a model and a non-empty validation set.
    Baseline kinds must not be given one; they never see held-out data,
    which is exactly why they are manipulable.
    """

    kind: str
    model: object | None = None
    validation: Dataset | None = None

    def __post_init__(self) -> None:
        if self.kind not in DVF_KINDS:
            raise ConfigurationError(f"unknown valuation kind {self.kind!r}")
        if self.kind in LOG_SCORE_KINDS:
            if self.model is None:
                raise ConfigurationError(f"{self.kind} requires a model")
            if self.validation is None or len(self.validation) == 0:
                raise ConfigurationError(f"{self.kind} requires a non-empty validation set")
        else:
            if self.validation is not None:
                raise ConfigurationError(
                    f"{self.kind} is validation-set-free; do not supply one"
                )
            if self.kind == INFO_GAIN and not isinstance(
                self.model, (GpHyper, LinearRegressionModel)
            ):
                raise UnsupportedConfigurationError(
                    "info-gain needs a model with an input-space kernel "
                    "(GP or linear regression)"
                )
            if self.kind == KL_FROM_PRIOR and not isinstance(
                self.model, (BetaBernoulliModel, GaussianMeanModel)
            ):
                raise UnsupportedConfigurationError(
                    "kl-from-prior has closed form only for the Beta-Bernoulli "
                    "and Gaussian-mean families"
                )


def _volume(data: Dataset) -> float:
    if len(data) == 0 or data.n_features == 0:
        return 0.0
    gram = data.inputs.T @ data.inputs
    det = float(np.linalg.det(gram))
    if len(data) < data.n_features or det <= 0.0:
        warnings.warn(
            f"Gram matrix of {len(data)} x {data.n_features} inputs is rank "
            "deficient; volume is 0",
            RankDeficientVolumeWarning,
            stacklevel=3,
        )
        return 0.0
    return float(np.sqrt(det))


def _info_gain(model, data: Dataset) -> float:
    if len(data) == 0:
        return 0.0
    if isinstance(model, GpHyper):
        kernel = se_ard_kernel(data.inputs, data.inputs, model)
        noise_var = model.noise_var
    else:  # LinearRegressionModel, linear kernel with the prior weight variance
        kernel = model.prior_var * (data.inputs @ data.inputs.T)
        noise_var = model.noise_var
    m = np.eye(len(data)) + kernel / noise_var
    sign, logdet = np.linalg.slogdet(m)
    if sign <= 0:
        raise ConfigurationError("information-gain matrix is not positive definite")
    return 0.5 * float(logdet)


def _kl_from_prior(model, data: Dataset) -> float:
    post = posterior_params(model, data)
    if isinstance(model, BetaBernoulliModel):
        a1, b1 = _beta_ab(post)
        a0, b0 = model.alpha, model.beta
        return float(
            betaln(a0, b0)
            - betaln(a1, b1)
            + (a1 - a0) * digamma(a1)
            + (b1 - b0) * digamma(b1)
            + (a0 + b0 - a1 - b1) * digamma(a1 + b1)
        )
    mean1, nu1 = _gaussian_mean_nu(post)
    var1 = model.noise_var / nu1
    mean0, var0 = model.prior_mean, model.prior_var
    return float(
        0.5 * (np.log(var0 / var1) + (var1 + (mean1 - mean0) ** 2) / var0 - 1.0)
    )


def dvf_value(spec: DvfSpec, data: Dataset) -> float:
    """Evaluate the valuation function on one dataset."""
    if spec.kind == CARDINALITY:
        return float(len(data))
    if spec.kind == VOLUME:
        return _volume(data)
    if spec.kind == INFO_GAIN:
        return _info_gain(spec.model, data)
    if spec.kind == KL_FROM_PRIOR:
        return _kl_from_prior(spec.model, data)
    # Log-score kinds. An empty dataset carries no information about the
    # validation set, so its value is exactly zero.
    if len(data) == 0:
        return 0.0
    if spec.kind == LOG_SCORE:
        return log_predictive(spec.model, data, spec.validation) - log_predictive(
            spec.model, empty_like(data), spec.validation
        )
    return mean_log_predictive(spec.model, data, spec.validation) - mean_log_predictive(
        spec.model, empty_like(data), spec.validation
    )


@dataclass(frozen=True)
class CharacteristicTable:
    """Cooperative-game values indexed by coalition bitmask (bit i = source i)."""

    n: int
    values: np.ndarray

    def __post_init__(self) -> None:
        if not 1 <= self.n <= 64:
            raise ConfigurationError(f"source count must be in [1, 64], got {self.n}")
        values = np.array(self.values, dtype=float)
        if values.shape != (2**self.n,):
            raise ConfigurationError(
                f"table for n={self.n} needs {2**self.n} values, got {values.shape}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)


def coalition_members(mask: int, n: int) -> list[int]:
    return [i for i in range(n) if mask >> i & 1]


def coalition_size(mask: int) -> int:
    return int(mask).bit_count()


def coalition_data(sources: list[Dataset], mask: int) -> Dataset:
    """Multiset union (row concatenation) of the member datasets."""
    members = [sources[i] for i in coalition_members(mask, len(sources))]
    return concat_datasets(
        members, n_features=sources[0].n_features, kind=sources[0].kind
    )


def build_char_table(
    sources: list[Dataset], spec: DvfSpec, exact_limit: int = 20
) -> CharacteristicTable:
    """Evaluate the valuation on every coalition of sources.

    This is exhaustive (2^n evaluations); beyond ``exact_limit`` sources the
    caller should switch to :func:`truthval.semivalues.sampled_shapley` with a
    coalition evaluator instead.
    """
    n = len(sources)
    if n < 1:
        raise ConfigurationError("need at least one source")
    if n > exact_limit:
        raise ConfigurationError(
            f"{n} sources means 2^{n} coalition evaluations; beyond the exact "
            f"limit ({exact_limit}), use the sampled estimator"
        )
    first = sources[0]
    for i, src in enumerate(sources):
        if src.n_features != first.n_features or src.kind != first.kind:
            raise InputError(f"source {i} is inconsistent with source 0")
    values = np.empty(2**n)
    for mask in range(2**n):
        values[mask] = dvf_value(spec, coalition_data(sources, mask))
    return CharacteristicTable(n, values)
