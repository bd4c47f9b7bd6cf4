"""Noise families and deterministic signal constructors.

The families cover exactly what the scenarios need: iid entries (normal,
Student t, Cauchy), spherically contoured rows (uniform direction times a
radial law), and the sign-symmetric heteroskedastic rows used by the
regression scenario. Student entries are built as Normal / sqrt(chi2_d / d)
and spherical rows as radius * (Gaussian direction normalized), which are the
definitional decompositions rather than CDF inversions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import RngStream, as_generator, sample_chi2, sample_f

__all__ = ["NoiseSpec", "SignalSpec", "sample_noise", "build_signal"]

FAMILIES = ("iid_normal", "iid_student", "iid_cauchy", "spherical",
            "heteroskedastic_sign_symmetric")
RADIAL_LAWS = ("normal", "student", "cauchy")
SIGNAL_SHAPES = ("sparse_vector", "rank_one", "regression_beta")


@dataclass(frozen=True)
class NoiseSpec:
    """An n x p noise distribution.

    family:
      iid_normal / iid_student / iid_cauchy  independent entries (df for t)
      spherical           rows with uniform direction and the radial law
                          implied by ``radial`` ("normal" -> chi2_p radius
                          squared, "student" -> p * F_{p, df}, "cauchy" ->
                          student with df = 1)
      heteroskedastic_sign_symmetric
                          row i = scale_i * b_i * |V_i| with b_i Rademacher
                          and V_i entries Student t(df); default scale is
                          1 + (i - 1)/n
    """

    family: str
    n: int
    p: int
    df: float | None = None
    radial: str = "normal"
    scale: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown noise family {self.family!r}")
        if self.n < 1 or self.p < 1:
            raise ValueError("dimensions must be >= 1")
        if self.family == "iid_student" and (self.df is None or self.df <= 0):
            raise ValueError(f"iid_student needs df > 0, got {self.df}")
        if self.family == "spherical":
            if self.radial not in RADIAL_LAWS:
                raise ValueError(f"unknown radial law {self.radial!r}")
            if self.radial == "student" and (self.df is None or self.df <= 0):
                raise ValueError(f"student radial law needs df > 0, got {self.df}")
        if self.family == "heteroskedastic_sign_symmetric":
            if self.scale is not None and len(self.scale) != self.n:
                raise ValueError(
                    f"scale vector has length {len(self.scale)}, expected n = {self.n}"
                )
            if self.df is not None and self.df <= 0:
                raise ValueError(f"base law needs df > 0, got {self.df}")


@dataclass(frozen=True)
class SignalSpec:
    """A deterministic signal: sparse vector, rank-one matrix, or
    regression coefficient vector.

    ``support`` holds 1-based coordinate indices. For rank_one, the signal is
    sqrt(n/2) * tau * outer(u, v) with u of length n and v of length p.
    """

    shape: str
    mu: float = 0.0
    tau: float = 0.0
    support: tuple[int, ...] = (1,)
    p: int | None = None
    u: tuple[float, ...] | None = None
    v: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.shape not in SIGNAL_SHAPES:
            raise ValueError(f"unknown signal shape {self.shape!r}")
        if self.shape in ("sparse_vector", "regression_beta"):
            if self.p is None or self.p < 1:
                raise ValueError(f"{self.shape} needs p >= 1")
            for idx in self.support:
                if not 1 <= idx <= self.p:
                    raise ValueError(
                        f"support index {idx} outside 1..{self.p}"
                    )
        if self.shape == "rank_one" and (self.u is None or self.v is None):
            raise ValueError("rank_one needs u and v")


def sample_noise(spec: NoiseSpec, rng: RngStream | np.random.Generator) -> np.ndarray:
    """Draw one n x p noise matrix from the spec's family."""
    gen = as_generator(rng)
    n, p = spec.n, spec.p
    if spec.family == "iid_normal":
        return gen.standard_normal((n, p))
    if spec.family == "iid_student":
        return _student_entries(n, p, spec.df, gen)
    if spec.family == "iid_cauchy":
        return _student_entries(n, p, 1.0, gen)
    if spec.family == "spherical":
        direction = gen.standard_normal((n, p))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        if spec.radial == "normal":
            radius = np.sqrt(sample_chi2(p, n, gen))
        elif spec.radial == "student":
            radius = np.sqrt(p * sample_f(p, spec.df, n, gen))
        else:
            radius = np.sqrt(p * sample_f(p, 1, n, gen))
        return radius[:, None] * direction
    scale = np.asarray(
        spec.scale if spec.scale is not None else 1.0 + np.arange(n) / n
    )
    df = spec.df if spec.df is not None else 3.0
    magnitudes = np.abs(_student_entries(n, p, df, gen))
    signs = gen.integers(0, 2, size=n) * 2.0 - 1.0
    return scale[:, None] * signs[:, None] * magnitudes


def _student_entries(n: int, p: int, df: float, gen: np.random.Generator) -> np.ndarray:
    z = gen.standard_normal((n, p))
    w = sample_chi2(df, (n, p), gen) if float(df).is_integer() else \
        2.0 * gen.standard_gamma(df / 2.0, size=(n, p))
    return z / np.sqrt(w / df)


def build_signal(spec: SignalSpec) -> np.ndarray:
    """Materialize the deterministic signal described by the spec."""
    if spec.shape == "sparse_vector":
        s = np.zeros(spec.p)
        for idx in spec.support:
            s[idx - 1] = spec.mu
        return s
    if spec.shape == "regression_beta":
        beta = np.zeros(spec.p)
        for idx in spec.support:
            beta[idx - 1] = spec.tau
        return beta
    u = np.asarray(spec.u, dtype=float)
    v = np.asarray(spec.v, dtype=float)
    if u.ndim != 1 or v.ndim != 1:
        raise ValueError("u and v must be vectors")
    return np.sqrt(u.size / 2.0) * spec.tau * np.outer(u, v)
