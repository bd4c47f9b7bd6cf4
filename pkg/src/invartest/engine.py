"""The randomization test: order-statistic rule, p-values, the exhaustive
full-group oracle, and nuisance projection.

The decision rule follows the strict-inequality convention: reject when the
observed statistic strictly exceeds the k-th smallest value of the multiset
{f(X)} union {f(G_1 X), ..., f(G_K X)}, so ties never reject and the level
guarantee survives discrete statistics.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .groups import GroupAction
from .numerics import RngStream, as_generator, as_matrix
from .statistics import TestStatistic

__all__ = [
    "RandTestConfig",
    "RandTestOutcome",
    "order_index",
    "count_below",
    "decide",
    "p_value_from_counts",
    "run_randomization_test",
    "run_max_test",
    "brute_force_full_group_test",
    "project_out_nuisance",
]

MAX_SIGNFLIP_ROWS = 16   # 2^16 orbit points
MAX_PERMUTE_ROWS = 7     # 7! = 5040 <= 4e4; 8! would exceed it


@dataclass(frozen=True)
class RandTestConfig:
    """K random transforms, level alpha, and the comparison variant."""

    K: int
    alpha: float
    variant: str = "quantile"

    def __post_init__(self):
        if self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(
                f"alpha must lie in the open interval (0, 1), got {self.alpha}"
            )
        if self.variant not in ("quantile", "max"):
            raise ValueError(f"variant must be 'quantile' or 'max', got {self.variant!r}")


@dataclass(frozen=True)
class RandTestOutcome:
    t0: float
    randomized: np.ndarray
    k: int
    reject: bool
    p_value: float


def order_index(K: int, alpha: float) -> int:
    """k = ceil((1 - alpha) * (K + 1)).

    A tiny downward nudge protects values like alpha = 1/(K+1) whose product
    lands an ulp above the integer it represents exactly; without it the
    float ceil would overshoot to K + 2 - 1 and break the max-test identity.
    """
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    k = math.ceil((1.0 - alpha) * (K + 1) - 1e-9)
    return max(k, 1)


def count_below(t0: float, randomized: np.ndarray) -> int:
    return int(np.sum(randomized < t0))


def decide(t0: float, randomized: np.ndarray, k: int) -> bool:
    """Reject iff at least k of the K+1 multiset values lie strictly below t0.

    Equivalent to t0 > (k-th smallest of {t0} union randomized): t0 itself is
    never below t0, so the count over the randomized values suffices.
    """
    return count_below(t0, randomized) >= k


def p_value_from_counts(t0: float, randomized: np.ndarray) -> float:
    return (1.0 + int(np.sum(randomized >= t0))) / (randomized.size + 1.0)


def all_sign_patterns(n: int) -> np.ndarray:
    """All 2^n sign vectors as a (2^n, n) float array; row 0 is the identity."""
    masks = np.arange(2 ** n, dtype=np.uint32)[:, None]
    bits = (masks >> np.arange(n, dtype=np.uint32)[None, :]) & 1
    return 1.0 - 2.0 * bits.astype(float)


def run_randomization_test(
    x,
    f: TestStatistic,
    action: GroupAction,
    cfg: RandTestConfig,
    rng: RngStream | np.random.Generator,
) -> RandTestOutcome:
    """Sample K iid group elements, compare f(X) against the randomized orbit.

    The identity enters the multiset exactly once, as the observed value
    itself. The reported p-value uses the >= convention, so reject and
    p_value <= alpha coincide only in the absence of ties.
    """
    gen = as_generator(rng)
    t0 = f(x)
    randomized = np.empty(cfg.K)
    for i in range(cfg.K):
        randomized[i] = f(action.randomize(x, gen))
    k = cfg.K if cfg.variant == "max" else order_index(cfg.K, cfg.alpha)
    return RandTestOutcome(
        t0=t0,
        randomized=randomized,
        k=k,
        reject=decide(t0, randomized, k),
        p_value=p_value_from_counts(t0, randomized),
    )


def run_max_test(
    x,
    f: TestStatistic,
    action: GroupAction,
    K: int,
    rng: RngStream | np.random.Generator,
) -> RandTestOutcome:
    """Reject iff f(X) strictly exceeds all K randomized values.

    This is the quantile rule at alpha = 1/(K+1); both paths consume the
    stream identically, so they agree outcome-for-outcome.
    """
    cfg = RandTestConfig(K=K, alpha=1.0 / (K + 1), variant="max")
    return run_randomization_test(x, f, action, cfg, rng)


def brute_force_full_group_test(
    x,
    f: TestStatistic,
    kind: str,
    alpha: float,
) -> RandTestOutcome:
    """Enumerate the whole group and apply the k-rule with K + 1 = |group|.

    The exact-level oracle used to validate the sampled tests. Enumeration is
    refused above 2^16 signflips or 7! permutations.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    arr = as_matrix(x)
    n = arr.shape[0]
    values = []
    if kind == "signflip_rows":
        if n > MAX_SIGNFLIP_ROWS:
            raise ValueError(
                f"full signflip enumeration limited to n <= {MAX_SIGNFLIP_ROWS}, got {n}"
            )
        signs = all_sign_patterns(n)
        for row in signs:
            values.append(f(row[:, None] * arr))
    elif kind == "permute_rows":
        if n > MAX_PERMUTE_ROWS:
            raise ValueError(
                f"full permutation enumeration limited to n <= {MAX_PERMUTE_ROWS}, got {n}"
            )
        for perm in itertools.permutations(range(n)):
            values.append(f(arr[list(perm)]))
    else:
        raise ValueError(
            f"brute force covers the discrete kinds signflip_rows/permute_rows, got {kind!r}"
        )
    values = np.asarray(values)
    t0 = values[0]
    randomized = values[1:]
    k = order_index(randomized.size, alpha)
    return RandTestOutcome(
        t0=float(t0),
        randomized=randomized,
        k=k,
        reject=decide(float(t0), randomized, k),
        p_value=p_value_from_counts(float(t0), randomized),
    )


def project_out_nuisance(x, basis) -> np.ndarray:
    """Project the rows' space against a known nuisance span.

    Returns P X where P is the orthogonal projector onto the complement of
    span(basis); e.g. basis = [ones(n)] centers every column.
    """
    arr = as_matrix(x)
    b = np.column_stack([np.asarray(v, dtype=float) for v in basis])
    if b.shape[0] != arr.shape[0]:
        raise ValueError(
            f"basis vectors have length {b.shape[0]}, data has {arr.shape[0]} rows"
        )
    sv = np.linalg.svd(b, compute_uv=False)
    if sv[-1] <= 1e-10 * sv[0]:
        raise ValueError("nuisance basis is (numerically) linearly dependent")
    q, _ = np.linalg.qr(b)
    return arr - q @ (q.T @ arr)
