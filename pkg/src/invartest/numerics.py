"""Dense linear algebra, quantile functions, and reproducible RNG streams.

Everything here is a pure function of its inputs; RngStream is the one
stateful-looking object and it is a frozen address, not a mutable state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "RngStream",
    "as_generator",
    "as_matrix",
    "as_vector",
    "qr_orthonormalize",
    "operator_norm",
    "pseudo_inverse",
    "normal_quantile",
    "normal_cdf",
    "student_t_quantile",
    "student_t_cdf",
    "sample_chi2",
    "sample_f",
]


@dataclass(frozen=True)
class RngStream:
    """Address of a reproducible random stream.

    Same (seed, stream_id, path) always yields the same sample sequence, no
    matter which thread or worker draws it.  Distinct stream ids (or child
    paths) give statistically independent streams via SeedSequence spawning.
    """

    seed: int
    stream_id: int = 0
    path: tuple[int, ...] = field(default=())

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(
            entropy=self.seed, spawn_key=(self.stream_id, *self.path)
        )
        return np.random.Generator(np.random.PCG64(seq))

    def child(self, index: int) -> "RngStream":
        """Derived independent stream, e.g. one per randomization method."""
        return RngStream(self.seed, self.stream_id, self.path + (index,))


def as_generator(rng: RngStream | np.random.Generator) -> np.random.Generator:
    """Accept either a stream address or a live generator."""
    if isinstance(rng, RngStream):
        return rng.generator()
    return rng


def as_matrix(x, name: str = "X") -> np.ndarray:
    """Validate an n-by-p data matrix: 2d, nonempty, finite float entries.

    1d input is viewed as a single-column matrix (a p=1 vector).
    """
    a = np.asarray(x, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2:
        raise ValueError(f"{name} must be a vector or a 2d matrix, got ndim={a.ndim}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"{name} must have at least one row and one column")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def as_vector(x, name: str = "x") -> np.ndarray:
    """Validate a 1d real vector with finite entries."""
    a = np.asarray(x, dtype=float)
    if a.ndim == 2 and 1 in a.shape:
        a = a.ravel()
    if a.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if a.size < 1:
        raise ValueError(f"{name} must be nonempty")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def qr_orthonormalize(a) -> tuple[np.ndarray, np.ndarray]:
    """QR factorization of a square matrix with the R diagonal forced positive.

    The sign correction makes the factorization unique and is what turns a
    Gaussian matrix into a Haar-distributed orthogonal factor downstream.

    Raises ValueError on (numerically) rank-deficient input.
    """
    a = as_matrix(a, "A")
    n, p = a.shape
    if n != p:
        raise ValueError(f"A must be square, got {n}x{p}")
    q, r = np.linalg.qr(a)
    diag = np.diagonal(r).copy()
    scale = np.linalg.norm(a)
    if np.any(np.abs(diag) < 1e-12 * scale) or scale == 0.0:
        raise ValueError("degenerate QR input")
    signs = np.sign(diag)
    q = q * signs[None, :]
    r = r * signs[:, None]
    return q, r


def operator_norm(a) -> float:
    """Largest singular value."""
    a = as_matrix(a, "A")
    return float(np.linalg.svd(a, compute_uv=False)[0])


def pseudo_inverse(x) -> np.ndarray:
    """Moore-Penrose pseudo-inverse with singular values below
    1e-12 * sigma_max treated as zero."""
    x = as_matrix(x, "X")
    if not np.any(x):
        return np.zeros((x.shape[1], x.shape[0]))
    return np.linalg.pinv(x, rcond=1e-12)


# Acklam's rational approximation to the inverse normal CDF: three regions,
# relative error ~1.15e-9 before refinement.
_ACKLAM_A = (
    -3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
    1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00,
)
_ACKLAM_B = (
    -5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
    6.680131188771972e+01, -1.328068155288572e+01,
)
_ACKLAM_C = (
    -7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
    -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00,
)
_ACKLAM_D = (
    7.784695709041462e-03, 3.224671290700398e-01,
    2.445134137142996e+00, 3.754408661907416e+00,
)
_ACKLAM_LOW = 0.02425


def normal_cdf(z: float) -> float:
    """Standard normal CDF through the error function."""
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def _acklam(u: float) -> float:
    a, b, c, d = _ACKLAM_A, _ACKLAM_B, _ACKLAM_C, _ACKLAM_D
    if u < _ACKLAM_LOW:
        q = math.sqrt(-2.0 * math.log(u))
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / \
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    if u > 1.0 - _ACKLAM_LOW:
        q = math.sqrt(-2.0 * math.log(1.0 - u))
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / \
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    q = u - 0.5
    r = q * q
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q / \
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0)


def normal_quantile(u: float) -> float:
    """Inverse standard normal CDF, absolute error well below 1e-8.

    Acklam's rational approximation followed by one Halley-corrected Newton
    step against the erf-based CDF.
    """
    u = float(u)
    if not 0.0 < u < 1.0:
        raise ValueError(f"u must lie in (0, 1), got {u}")
    z = _acklam(u)
    # one refinement step; the residual e is tiny so this is exact to fp noise
    e = normal_cdf(z) - u
    density = math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
    step = e / density
    return z - step / (1.0 + 0.5 * z * step)


def _log_beta(a: float, b: float) -> float:
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def _betacf(a: float, b: float, x: float) -> float:
    # Lentz continued fraction for the incomplete beta; converges for
    # x < (a+1)/(a+b+2), which callers guarantee via the symmetry relation.
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 300):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            break
    return h


def _reg_inc_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    front = math.exp(
        a * math.log(x) + b * math.log1p(-x) - _log_beta(a, b)
    )
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - math.exp(
        b * math.log1p(-x) + a * math.log(x) - _log_beta(b, a)
    ) * _betacf(b, a, 1.0 - x) / b


def student_t_cdf(t: float, df: float) -> float:
    """CDF of Student's t with df degrees of freedom."""
    if df <= 0:
        raise ValueError(f"df must be positive, got {df}")
    if t == 0.0:
        return 0.5
    x = df / (df + t * t)
    tail = 0.5 * _reg_inc_beta(0.5 * df, 0.5, x)
    return 1.0 - tail if t > 0 else tail


def _student_t_pdf(t: float, df: float) -> float:
    lognorm = math.lgamma(0.5 * (df + 1.0)) - math.lgamma(0.5 * df) \
        - 0.5 * math.log(df * math.pi)
    return math.exp(lognorm - 0.5 * (df + 1.0) * math.log1p(t * t / df))


def student_t_quantile(u: float, df: float) -> float:
    """Inverse CDF of Student's t, absolute error below 1e-7.

    Newton iteration on the incomplete-beta CDF, started from the normal
    quantile; df=1 uses the closed Cauchy form.
    """
    u = float(u)
    if not 0.0 < u < 1.0:
        raise ValueError(f"u must lie in (0, 1), got {u}")
    if df < 1:
        raise ValueError(f"df must be >= 1, got {df}")
    if u == 0.5:
        return 0.0
    if df == 1:
        return math.tan(math.pi * (u - 0.5))
    t = normal_quantile(u)
    for _ in range(60):
        err = student_t_cdf(t, df) - u
        dens = _student_t_pdf(t, df)
        if dens <= 0.0:
            break
        step = err / dens
        # clamp to keep the iterate in the basin for extreme u
        limit = 1.0 + abs(t)
        if step > limit:
            step = limit
        elif step < -limit:
            step = -limit
        t -= step
        if abs(step) < 1e-12 * (1.0 + abs(t)):
            break
    return t


def sample_chi2(df: int, size, rng: RngStream | np.random.Generator) -> np.ndarray:
    """Chi-squared draws: sum of squared normals for small integer df,
    a gamma sampler otherwise (identical in distribution)."""
    if df <= 0:
        raise ValueError(f"df must be positive, got {df}")
    gen = as_generator(rng)
    shape = (size,) if isinstance(size, int) else tuple(size)
    if float(df).is_integer() and df <= 16:
        z = gen.standard_normal((*shape, int(df)))
        return np.sum(z * z, axis=-1)
    return 2.0 * gen.standard_gamma(df / 2.0, size=shape)


def sample_f(d1: int, d2: int, size, rng: RngStream | np.random.Generator) -> np.ndarray:
    """F(d1, d2) draws as a ratio of scaled chi-squared variables."""
    gen = as_generator(rng)
    num = sample_chi2(d1, size, gen) / d1
    den = sample_chi2(d2, size, gen) / d2
    return num / den
