"""Brute-force truthfulness oracle for small discrete instances.

The claims under test are statements about expectations over everything a
source does not know: the validation set, and (for semivalues) the other
sources' data. For the Beta-Bernoulli family both spaces are finite binary
sequences, so the expectations can be enumerated exactly and the claims
checked as arithmetic identities:

* submitting anything that changes the posterior lowers the expected
  log-score value, and the drop equals the KL divergence between the two
  posterior predictive distributions over the validation space;
* the same holds for semivalues once the others' data is marginalized
  against the posterior given the source's true dataset;
* a source's own expected semivalue drop from lying is at least as large as
  the drop it inflicts on any other source.

Other sources' datasets enter only through their sizes: their contents are
the random variables being enumerated, as exchangeable Bernoulli sequences of
the given lengths.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Sequence

import numpy as np

from .data import BINARY, Dataset, binary_dataset, concat_datasets
from .errors import InputError, NumericalError, UnsupportedConfigurationError
from .models import (
    BetaBernoulliModel,
    log_predictive_from_params,
    posterior_params,
    suff_stats,
)
from .semivalues import SemivalueWeights, exact_semivalue
from .valuation import LOG_SCORE, DvfSpec, build_char_table, dvf_value

_IDENTITY_TOL = 1e-9
_RANK_TOL = 1e-10
_DEFAULT_MAX_OUTCOMES = 1 << 20


@dataclass(frozen=True)
class OracleVerdict:
    """Exact expectations under truthful belief, their gap, and the matching KL.

    ``strict`` reports whether the two posterior predictive distributions over
    the scored validation space differ. That is the condition under which the
    gap is strictly positive; a posterior change alone is not always enough
    (e.g. duplicating a balanced dataset moves the Beta posterior but leaves a
    single-point Bernoulli predictive untouched).
    """

    expected_truthful: float
    expected_alt: float
    gap: float
    kl_total: float
    strict: bool


def _require_enumerable(model) -> None:
    if not isinstance(model, BetaBernoulliModel):
        raise UnsupportedConfigurationError(
            "exhaustive enumeration needs a discrete-outcome model "
            "(Beta-Bernoulli); got " + type(model).__name__
        )


def _stats_differ(model, a: Dataset, b: Dataset) -> bool:
    sa, sb = suff_stats(a, model), suff_stats(b, model)
    return sa.count != sb.count or not np.array_equal(sa.vector, sb.vector)


def _labels_only(dataset: Dataset) -> Dataset:
    # The Bernoulli likelihood ignores inputs; dropping them keeps provided
    # datasets concatenable with the enumerated (feature-free) outcomes.
    return binary_dataset(dataset.outputs)


def _predictives_differ(model, params_a, params_b, validation_size: int) -> bool:
    """Whether two posteriors imply different predictives over the outcome space.

    By exchangeability the joint predictive of a binary sequence depends only
    on its success count, so comparing one sequence per count is exhaustive.
    """
    for successes in range(validation_size + 1):
        t = binary_dataset([1.0] * successes + [0.0] * (validation_size - successes))
        pa = np.exp(log_predictive_from_params(model, params_a, t))
        pb = np.exp(log_predictive_from_params(model, params_b, t))
        if abs(pa - pb) > 1e-12:
            return True
    return False


def _binary_outcomes(length: int) -> list[np.ndarray]:
    return [np.array(bits, dtype=float) for bits in product((0.0, 1.0), repeat=length)]


def _check_weight_sum(total: float) -> None:
    # The outcome probabilities must sum to one; anything else means the
    # enumeration itself is broken.
    if abs(total - 1.0) > 1e-9:
        raise NumericalError(f"outcome probabilities sum to {total!r}, not 1")


def oracle_dvf_truthfulness(
    model: BetaBernoulliModel,
    true_data: Dataset,
    alt_data: Dataset,
    validation_size: int,
    max_outcomes: int = _DEFAULT_MAX_OUTCOMES,
) -> OracleVerdict:
    """Enumerate every validation outcome and compare the two expected values.

    The expectation weights each outcome by its probability under the
    posterior predictive given ``true_data``. The returned ``kl_total`` is
    computed directly from the model's predictive densities and must equal
    the gap; a mismatch raises :class:`NumericalError`.
    """
    _require_enumerable(model)
    if validation_size < 1:
        raise InputError("validation_size must be >= 1")
    if 2**validation_size > max_outcomes:
        raise UnsupportedConfigurationError(
            f"2^{validation_size} validation outcomes exceed the budget {max_outcomes}"
        )
    true_data = _labels_only(true_data)
    alt_data = _labels_only(alt_data)
    post_true = posterior_params(model, true_data)
    post_alt = posterior_params(model, alt_data)
    expected_truthful = expected_alt = kl_total = total_weight = 0.0
    for bits in _binary_outcomes(validation_size):
        t = binary_dataset(bits)
        lp_true = log_predictive_from_params(model, post_true, t)
        lp_alt = log_predictive_from_params(model, post_alt, t)
        weight = float(np.exp(lp_true))
        spec = DvfSpec(LOG_SCORE, model=model, validation=t)
        expected_truthful += weight * dvf_value(spec, true_data)
        expected_alt += weight * dvf_value(spec, alt_data)
        kl_total += weight * (lp_true - lp_alt)
        total_weight += weight
    _check_weight_sum(total_weight)
    gap = expected_truthful - expected_alt
    if abs(gap - kl_total) > _IDENTITY_TOL:
        raise NumericalError(
            f"expected-value gap {gap!r} does not match the predictive KL {kl_total!r}"
        )
    return OracleVerdict(
        expected_truthful,
        expected_alt,
        gap,
        kl_total,
        strict=_predictives_differ(model, post_true, post_alt, validation_size),
    )


def _semivalue_enumeration(
    model: BetaBernoulliModel,
    true_datasets: Sequence[Dataset],
    alt_data: Dataset,
    target: int,
    weights: SemivalueWeights,
    validation_size: int,
    max_outcomes: int,
):
    """Shared enumeration for the semivalue and rank-gap oracles.

    Returns exact expected semivalue vectors under truthful and alternative
    submission by the target, plus the weighted predictive-KL total and a
    strictness flag (here: the two submissions have different sufficient
    statistics, i.e. they change the posterior). Only the sizes of the other
    sources' datasets matter; their contents are integrated out against the
    posterior given the target's true dataset.
    """
    _require_enumerable(model)
    n = len(true_datasets)
    if not 0 <= target < n:
        raise InputError(f"target index {target} out of range for {n} sources")
    if weights.n != n:
        raise InputError(f"weights are for n={weights.n}, have {n} sources")
    if validation_size < 1:
        raise InputError("validation_size must be >= 1")
    true_datasets = [_labels_only(ds) for ds in true_datasets]
    alt_data = _labels_only(alt_data)
    other_idx = [j for j in range(n) if j != target]
    other_sizes = [len(true_datasets[j]) for j in other_idx]
    total_bits = validation_size + sum(other_sizes)
    if 2**total_bits > max_outcomes:
        raise UnsupportedConfigurationError(
            f"joint enumeration needs 2^{total_bits} outcomes "
            f"({validation_size} validation bits + others of sizes {other_sizes}); "
            f"budget is {max_outcomes}"
        )
    true_target = true_datasets[target]
    post_target = posterior_params(model, true_target)
    outcome_lists = [_binary_outcomes(size) for size in other_sizes]
    validation_outcomes = _binary_outcomes(validation_size)
    other_subsets = list(product((0, 1), repeat=len(other_idx)))

    phi_true = np.zeros(n)
    phi_alt = np.zeros(n)
    kl_total = 0.0
    total_weight = 0.0
    for combo in product(*outcome_lists, validation_outcomes):
        *other_bits, t_bits = combo
        others = [binary_dataset(bits) for bits in other_bits]
        t = binary_dataset(t_bits)
        # Joint probability of (others' data, validation) given the target's
        # true data: one exchangeable sequence under the same parameter.
        hypothetical = concat_datasets(others + [t], n_features=0, kind=BINARY)
        weight = float(
            np.exp(log_predictive_from_params(model, post_target, hypothetical))
        )
        total_weight += weight

        sources_true = list(true_datasets)
        sources_alt = list(true_datasets)
        for j, ds in zip(other_idx, others):
            sources_true[j] = ds
            sources_alt[j] = ds
        sources_true[target] = true_target
        sources_alt[target] = alt_data
        spec = DvfSpec(LOG_SCORE, model=model, validation=t)
        phi_true += weight * exact_semivalue(build_char_table(sources_true, spec), weights)
        phi_alt += weight * exact_semivalue(build_char_table(sources_alt, spec), weights)

        # Independent accumulation of the weighted predictive-KL bound, from
        # the model's predictive densities rather than the semivalue pipeline.
        for picks in other_subsets:
            members = [others[k] for k, bit in enumerate(picks) if bit]
            size = sum(picks)
            w_c = weights.w[size]
            if w_c == 0.0:
                continue
            post_with_true = posterior_params(
                model, concat_datasets([true_target] + members, n_features=0, kind=BINARY)
            )
            post_with_alt = posterior_params(
                model, concat_datasets([alt_data] + members, n_features=0, kind=BINARY)
            )
            kl_total += (
                weight
                * w_c
                * (
                    log_predictive_from_params(model, post_with_true, t)
                    - log_predictive_from_params(model, post_with_alt, t)
                )
            )
    _check_weight_sum(total_weight)
    strict = _stats_differ(model, true_target, alt_data)
    return phi_true, phi_alt, kl_total, strict


def oracle_semivalue_truthfulness(
    model: BetaBernoulliModel,
    true_datasets: Sequence[Dataset],
    alt_data: Dataset,
    target: int,
    weights: SemivalueWeights,
    validation_size: int,
    max_outcomes: int = _DEFAULT_MAX_OUTCOMES,
) -> OracleVerdict:
    """Exact expected semivalue of ``target`` under truthful vs alternative data."""
    phi_true, phi_alt, kl_total, strict = _semivalue_enumeration(
        model, true_datasets, alt_data, target, weights, validation_size, max_outcomes
    )
    expected_truthful = float(phi_true[target])
    expected_alt = float(phi_alt[target])
    gap = expected_truthful - expected_alt
    if abs(gap - kl_total) > _IDENTITY_TOL:
        raise NumericalError(
            f"semivalue gap {gap!r} does not match the weighted predictive KL "
            f"{kl_total!r}"
        )
    return OracleVerdict(expected_truthful, expected_alt, gap, kl_total, strict)


def oracle_rank_gap(
    model: BetaBernoulliModel,
    true_datasets: Sequence[Dataset],
    alt_data: Dataset,
    target: int,
    other: int,
    weights: SemivalueWeights,
    validation_size: int,
    max_outcomes: int = _DEFAULT_MAX_OUTCOMES,
) -> tuple[float, float]:
    """Expected semivalue drop of the deviating source vs any other source.

    Returns (own drop, other's drop); the own drop can never be the smaller
    one, so lying never improves the deviator's ranking against anyone.
    """
    if other == target:
        raise InputError("other must differ from target")
    if not 0 <= other < len(true_datasets):
        raise InputError(f"other index {other} out of range")
    phi_true, phi_alt, _, _ = _semivalue_enumeration(
        model, true_datasets, alt_data, target, weights, validation_size, max_outcomes
    )
    gap_target = float(phi_true[target] - phi_alt[target])
    gap_other = float(phi_true[other] - phi_alt[other])
    if gap_target < gap_other - _RANK_TOL:
        raise NumericalError(
            f"rank property violated: own drop {gap_target!r} < other's drop "
            f"{gap_other!r}"
        )
    return gap_target, gap_other
