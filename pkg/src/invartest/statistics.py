"""Test statistics and their subadditivity constants.

Each statistic f comes with the constant psi in (0, 1] for which
psi * f(a + b) <= f(a) + f(b); the consistency margins in the theory module
depend on psi, so it travels with the statistic instead of being assumed.
All shipped statistics are norms of linear images of the data, hence psi = 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .numerics import (
    RngStream,
    as_generator,
    as_matrix,
    as_vector,
    operator_norm,
    pseudo_inverse,
)

__all__ = [
    "TestStatistic",
    "stat_colmean_linf",
    "stat_linf",
    "stat_opnorm",
    "stat_kyfan",
    "stat_ols_linf",
    "stat_twosample_diff",
    "check_psi_subadditive",
    "make_statistic",
    "shipped_statistics",
]


@dataclass(frozen=True)
class TestStatistic:
    """A real-valued functional of a data matrix with its psi constant.

    ``sample_shape`` is the input shape used when property tests draw random
    arguments for this statistic.
    """

    name: str
    psi: float
    fn: Callable[[np.ndarray], float]
    sample_shape: tuple[int, ...]

    __test__ = False  # not a test case despite the Test* name

    def __post_init__(self):
        if not 0.0 < self.psi <= 1.0:
            raise ValueError(f"psi must lie in (0, 1], got {self.psi}")

    def __call__(self, x) -> float:
        value = float(self.fn(x))
        if not np.isfinite(value):
            raise ValueError(f"statistic {self.name} returned non-finite value")
        return value


def stat_colmean_linf(x) -> float:
    """Largest absolute column mean, n^{-1} ||1^T X||_inf."""
    a = as_matrix(x)
    return float(np.max(np.abs(a.mean(axis=0))))


def stat_linf(x) -> float:
    """Sup norm of a vector."""
    return float(np.max(np.abs(as_vector(x))))


def stat_opnorm(x) -> float:
    """Largest singular value."""
    return operator_norm(x)


def stat_kyfan(x, kappa: int, zeta: float = 1.0) -> float:
    """Generalized Ky Fan norm: the zeta-norm of the kappa largest
    singular values."""
    a = as_matrix(x)
    limit = min(a.shape)
    if not 1 <= kappa <= limit:
        raise ValueError(f"kappa must lie in [1, {limit}], got {kappa}")
    if zeta < 1.0:
        raise ValueError(f"zeta must be >= 1, got {zeta}")
    sv = np.linalg.svd(a, compute_uv=False)[:kappa]
    return float(np.sum(sv ** zeta) ** (1.0 / zeta))


def stat_ols_linf(y, design=None, design_pinv=None) -> float:
    """Sup norm of the least-squares coefficient estimate X^dagger y.

    Pass ``design_pinv`` when evaluating repeatedly against one fixed design;
    it is the Moore-Penrose pseudo-inverse of the design matrix.
    """
    yv = as_vector(y, "y")
    if design_pinv is None:
        if design is None:
            raise ValueError("stat_ols_linf needs a design matrix or its pseudo-inverse")
        design_pinv = pseudo_inverse(design)
    design_pinv = np.asarray(design_pinv, dtype=float)
    if design_pinv.shape[1] != yv.shape[0]:
        raise ValueError(
            f"design has {design_pinv.shape[1]} rows, y has {yv.shape[0]} entries"
        )
    return float(np.max(np.abs(design_pinv @ yv)))


def stat_twosample_diff(x, n: int, n_prime: int, norm: str = "linf") -> float:
    """Norm of the difference of block means of a stacked (n+n') x p matrix."""
    a = as_matrix(x)
    if a.shape[0] != n + n_prime:
        raise ValueError(
            f"stacked matrix has {a.shape[0]} rows, expected n + n' = {n + n_prime}"
        )
    if n < 1 or n_prime < 1:
        raise ValueError("both sample sizes must be >= 1")
    diff = a[:n].mean(axis=0) - a[n:].mean(axis=0)
    if norm == "linf":
        return float(np.max(np.abs(diff)))
    if norm == "l2":
        return float(np.linalg.norm(diff))
    raise ValueError(f"norm must be 'linf' or 'l2', got {norm!r}")


def check_psi_subadditive(
    f: TestStatistic,
    trials: int,
    scale: float,
    rng: RngStream | np.random.Generator,
) -> int:
    """Count violations of psi * f(a+b) <= f(a) + f(b) on random Gaussian pairs.

    Returns the number of sampled pairs that violate the inequality beyond a
    floating-point tolerance; every shipped statistic must return 0.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    gen = as_generator(rng)
    violations = 0
    for _ in range(trials):
        a = scale * gen.standard_normal(f.sample_shape)
        b = scale * gen.standard_normal(f.sample_shape)
        fa, fb = f(a), f(b)
        tol = 1e-12 * (abs(fa) + abs(fb) + 1.0)
        if f.psi * f(a + b) > fa + fb + tol:
            violations += 1
    return violations


def make_statistic(name: str, **params) -> TestStatistic:
    """Build one of the shipped statistics by name.

    Recognized names: colmean_linf, linf, opnorm, kyfan, ols_linf,
    twosample_diff. Shape-dependent parameters (kappa, design, n, n_prime,
    sample_shape, ...) are passed as keywords.
    """
    shape = params.pop("sample_shape", None)
    if name == "colmean_linf":
        return TestStatistic("colmean_linf", 1.0, stat_colmean_linf, shape or (8, 5))
    if name == "linf":
        return TestStatistic("linf", 1.0, stat_linf, shape or (12,))
    if name == "opnorm":
        return TestStatistic("opnorm", 1.0, stat_opnorm, shape or (6, 4))
    if name == "kyfan":
        kappa = params.pop("kappa", 2)
        zeta = params.pop("zeta", 1.0)
        if params:
            raise ValueError(f"unknown parameters {sorted(params)} for kyfan")
        return TestStatistic(
            f"kyfan_{kappa}_{zeta:g}",
            1.0,
            lambda x: stat_kyfan(x, kappa, zeta),
            shape or (6, 4),
        )
    if name == "ols_linf":
        design = params.pop("design", None)
        if design is None:
            raise ValueError("ols_linf needs design=")
        design = as_matrix(design, "design")
        pinv = pseudo_inverse(design)
        if params:
            raise ValueError(f"unknown parameters {sorted(params)} for ols_linf")
        return TestStatistic(
            "ols_linf",
            1.0,
            lambda y: stat_ols_linf(y, design_pinv=pinv),
            shape or (design.shape[0],),
        )
    if name == "twosample_diff":
        n = params.pop("n")
        n_prime = params.pop("n_prime")
        norm = params.pop("norm", "linf")
        if params:
            raise ValueError(f"unknown parameters {sorted(params)} for twosample_diff")
        return TestStatistic(
            f"twosample_diff_{norm}",
            1.0,
            lambda x: stat_twosample_diff(x, n, n_prime, norm),
            shape or (n + n_prime, 1),
        )
    raise ValueError(f"unknown statistic {name!r}")


def shipped_statistics(design_seed: int = 20260815) -> list[TestStatistic]:
    """The catalog of statistics covered by the property suites."""
    design = RngStream(design_seed).generator().standard_normal((10, 3))
    return [
        make_statistic("colmean_linf"),
        make_statistic("linf"),
        make_statistic("opnorm"),
        make_statistic("kyfan", kappa=2, zeta=1.0),
        make_statistic("kyfan", kappa=3, zeta=2.0),
        make_statistic("ols_linf", design=design),
        make_statistic("twosample_diff", n=4, n_prime=4, norm="linf"),
        make_statistic("twosample_diff", n=4, n_prime=4, norm="l2"),
    ]
