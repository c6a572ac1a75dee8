"""Semivalue weight families, exact and sampled computation, reward post-processing.

A semivalue assigns source i the weighted sum of its marginal contributions,

    phi_i = sum_{C subset of N\\{i}} w_{|C|} [v(C + i) - v(C)],

with nonnegative coalition-size weights normalized so that
sum_c w_c * binom(n-1, c) = 1. The Shapley value (w_c * binom(n-1, c) = 1/n)
additionally satisfies group rationality: the values sum to v(N) - v(empty).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import betaln

from .errors import ConfigurationError
from .valuation import CharacteristicTable

SHAPLEY = "shapley"
BANZHAF = "banzhaf"
INDIVIDUAL = "individual"
BETA = "beta"

_NORMALIZATION_TOL = 1e-12


@dataclass(frozen=True)
class SemivalueWeights:
    """Coalition-size weights (w_0, ..., w_{n-1}) defining a semivalue."""

    n: int
    w: np.ndarray
    family: str = "custom"

    def __post_init__(self) -> None:
        w = np.array(self.w, dtype=float)
        if w.shape != (self.n,):
            raise ConfigurationError(f"need {self.n} weights, got shape {w.shape}")
        if (w < 0).any():
            raise ConfigurationError("semivalue weights must be nonnegative")
        total = sum(w[c] * math.comb(self.n - 1, c) for c in range(self.n))
        if abs(total - 1.0) > _NORMALIZATION_TOL:
            raise ConfigurationError(
                f"weights violate the normalization constraint: sum = {total!r}"
            )
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @property
    def is_fair(self) -> bool:
        """True when every coalition size has positive weight (strict monotonicity)."""
        return bool((self.w > 0).all())


def make_weights(
    family: str, n: int, alpha: float | None = None, beta: float | None = None
) -> SemivalueWeights:
    """Construct a standard weight family for an n-source game.

    ``beta`` weights follow w_c proportional to B(c + beta, n - c - 1 + alpha),
    renormalized to meet the semivalue constraint; (alpha, beta) = (1, 1)
    reproduces the Shapley value exactly, and larger ``alpha`` shifts weight
    toward smaller coalitions.
    """
    if n < 1:
        raise ConfigurationError(f"need n >= 1, got {n}")
    if family == SHAPLEY:
        w = np.array([1.0 / (n * math.comb(n - 1, c)) for c in range(n)])
    elif family == BANZHAF:
        w = np.full(n, 0.5 ** (n - 1))
    elif family == INDIVIDUAL:
        w = np.zeros(n)
        w[0] = 1.0
    elif family == BETA:
        if alpha is None or beta is None or alpha < 1 or beta < 1:
            raise ConfigurationError("beta weights require alpha >= 1 and beta >= 1")
        raw = np.exp(
            np.array([betaln(c + beta, n - c - 1 + alpha) for c in range(n)])
            - betaln(alpha, beta)
        )
        norm = sum(raw[c] * math.comb(n - 1, c) for c in range(n))
        w = raw / norm
        family = f"beta({alpha:g},{beta:g})"
    else:
        raise ConfigurationError(f"unknown weight family {family!r}")
    return SemivalueWeights(n, w, family)


def _popcounts(size: int) -> np.ndarray:
    masks = np.arange(size, dtype=np.int64)
    counts = np.zeros(size, dtype=np.int64)
    while masks.any():
        counts += masks & 1
        masks >>= 1
    return counts


def exact_semivalue(table: CharacteristicTable, weights: SemivalueWeights) -> np.ndarray:
    """Semivalue of every source by full enumeration of coalitions."""
    if weights.n != table.n:
        raise ConfigurationError(
            f"weights are for n={weights.n} but table has n={table.n}"
        )
    n = table.n
    v = table.values
    masks = np.arange(2**n, dtype=np.int64)
    sizes = _popcounts(2**n)
    phi = np.empty(n)
    for i in range(n):
        without = masks[(masks >> i) & 1 == 0]
        gains = v[without | (1 << i)] - v[without]
        phi[i] = float(np.dot(weights.w[sizes[without]], gains))
    return phi


@dataclass(frozen=True)
class ShapleyEstimate:
    """Monte-Carlo Shapley estimate with per-source standard errors."""

    values: np.ndarray
    stderr: np.ndarray
    n_permutations: int
    seed: int

    def __post_init__(self) -> None:
        for name in ("values", "stderr"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def sampled_shapley(
    evaluator: Callable[[int], float],
    n: int,
    n_permutations: int,
    seed: int,
    n_workers: int = 1,
) -> ShapleyEstimate:
    """Unbiased permutation-sampling Shapley estimator.

    For each uniformly random permutation, the coalition is grown one source
    at a time and each source is credited its marginal contribution; the
    estimate is the per-source mean across permutations. ``evaluator`` maps a
    coalition bitmask to its value.

    The permutation sequence is drawn up front from a single generator, so
    results are identical regardless of ``n_workers``; workers only evaluate
    marginals in parallel and the reduction order is fixed.
    """
    if n < 1:
        raise ConfigurationError(f"need n >= 1, got {n}")
    if n_permutations < 1:
        raise ConfigurationError("need at least one permutation")
    rng = np.random.default_rng(seed)
    perms = [rng.permutation(n) for _ in range(n_permutations)]

    def marginals(perm: np.ndarray) -> np.ndarray:
        out = np.empty(n)
        mask = 0
        prev = evaluator(0)
        for idx in perm:
            mask |= 1 << int(idx)
            cur = evaluator(mask)
            out[idx] = cur - prev
            prev = cur
        return out

    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            per_perm = list(pool.map(marginals, perms))
    else:
        per_perm = [marginals(p) for p in perms]

    stacked = np.vstack(per_perm)
    values = stacked.mean(axis=0)
    if n_permutations >= 2:
        stderr = stacked.std(axis=0, ddof=1) / math.sqrt(n_permutations)
    else:
        stderr = np.zeros(n)
    return ShapleyEstimate(values, stderr, n_permutations, seed)


def budget_cap(phi: np.ndarray, a: float, budget: float) -> np.ndarray:
    """Feasible rewards min(phi / a, budget); ``a`` must be fixed in advance.

    Capping trades strict truthfulness for plain truthfulness: any submission
    whose semivalue clears a * budget receives the same reward.
    """
    if a <= 0 or budget <= 0:
        raise ConfigurationError("budget_cap requires a > 0 and budget > 0")
    return np.minimum(np.asarray(phi, dtype=float) / a, budget)


def scaled_reward(phi: np.ndarray, budget: float, gamma: float) -> np.ndarray:
    """Rewards budget * phi / (max phi + gamma), all guaranteed <= budget.

    The denominator depends on the submissions, so only the ratio of
    expectations is known to favor truthful submission; that guarantee is
    about expectations and is exercised by the enumeration oracle on discrete
    instances rather than asserted per realization.
    """
    phi = np.asarray(phi, dtype=float)
    if budget <= 0:
        raise ConfigurationError("scaled_reward requires budget > 0")
    denom = float(phi.max()) + gamma
    if denom <= 0:
        raise ConfigurationError(
            f"max semivalue + gamma must be positive, got {denom!r}"
        )
    return budget * phi / denom


@dataclass(frozen=True)
class RewardReport:
    """Per-source rewards with full provenance."""

    rewards: np.ndarray
    weights: SemivalueWeights
    dvf: str
    post: str
    seed: int
    estimator: str
    stderr: np.ndarray | None = field(default=None)

    def __post_init__(self) -> None:
        rewards = np.array(self.rewards, dtype=float)
        rewards.setflags(write=False)
        object.__setattr__(self, "rewards", rewards)
