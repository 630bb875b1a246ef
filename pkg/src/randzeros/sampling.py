"""Coefficient laws and reproducible series sampling.

Randomness is counter-based: draw j of substream s under seed q is a
fixed 64-bit hash of (q, s, j), so samples are bit-identical across
runs, platforms, and evaluation order, and any coefficient can be
regenerated without replaying the stream.

Laws hand back log-magnitude / phase pairs.  Heavy-tailed magnitudes
(log_pareto, heavy_no_logmoment) routinely exceed the float range of
exp, so the series is assembled in the log domain end to end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ensembles import EnsembleSpec, log_coeff, truncation_index, validity_radius
from .errors import ValidationError
from .polyzero import LogPoly

LAW_NAMES = ("complex_gaussian", "rademacher", "uniform_disk",
             "log_pareto", "heavy_no_logmoment")

_PHI = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_SUB = np.uint64(0xD1B54A32D192ED03)


def _mix64(z):
    z = z ^ (z >> np.uint64(30))
    z = z * _MIX1
    z = z ^ (z >> np.uint64(27))
    z = z * _MIX2
    return z ^ (z >> np.uint64(31))


def u01(seed: int, index, substream: int = 0):
    """Uniform draws in (0, 1), a pure function of (seed, index, substream)."""
    if seed < 0 or seed != int(seed):
        raise ValidationError("seed must be a nonnegative integer")
    index = np.asarray(index)
    scalar = index.ndim == 0
    idx = np.atleast_1d(index).astype(np.int64)
    if np.any(idx < 0):
        raise ValidationError("draw index must be nonnegative")
    with np.errstate(over="ignore"):
        base = _mix64(np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF) * _PHI + _SUB)
        base = _mix64(base + np.uint64(int(substream)) * _PHI)
        h = _mix64(base + (idx.view(np.uint64) + np.uint64(1)) * _PHI)
    u = ((h >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53
    return float(u[0]) if scalar else u


@dataclass(frozen=True)
class CoeffLaw:
    """Distribution of the i.i.d. coefficients xi_k."""

    name: str
    param: float = 0.0

    def __post_init__(self):
        if self.name not in LAW_NAMES:
            raise ValidationError(f"law must be one of {LAW_NAMES}")
        if self.name == "log_pareto" and not self.param > 0:
            raise ValidationError("log_pareto needs a positive tail exponent")

    @classmethod
    def complex_gaussian(cls):
        return cls("complex_gaussian")

    @classmethod
    def rademacher(cls):
        return cls("rademacher")

    @classmethod
    def uniform_disk(cls):
        return cls("uniform_disk")

    @classmethod
    def log_pareto(cls, exponent):
        return cls("log_pareto", param=float(exponent))

    @classmethod
    def heavy_no_logmoment(cls):
        return cls("heavy_no_logmoment")

    @property
    def has_log_moment(self) -> bool:
        """Whether E log(1 + |xi|) is finite (the LLN hypothesis)."""
        if self.name == "heavy_no_logmoment":
            return False
        if self.name == "log_pareto":
            # E log xi = 1 + int_1^inf t^{-a} dt, finite iff a > 1
            return self.param > 1.0
        return True

    def label(self) -> str:
        if self.name == "log_pareto":
            return f"log_pareto({self.param:g})"
        return self.name

    def sample_log(self, seed: int, ks, substream: int = 0):
        """(log|xi_k|, arg xi_k) for the given coefficient indices.

        Index k owns draws 2k and 2k+1 of the substream, so different
        truncation lengths see identical coefficients.
        """
        ks = np.atleast_1d(np.asarray(ks)).astype(np.int64)
        u1 = u01(seed, 2 * ks, substream)
        if self.name == "complex_gaussian":
            # |xi|^2 ~ Exp(1), so E|xi|^2 = 1; phase uniform
            u2 = u01(seed, 2 * ks + 1, substream)
            return 0.5 * np.log(-np.log(u1)), 2.0 * math.pi * u2
        if self.name == "rademacher":
            return np.zeros(ks.size), np.where(u1 < 0.5, math.pi, 0.0)
        if self.name == "uniform_disk":
            u2 = u01(seed, 2 * ks + 1, substream)
            return 0.5 * np.log(u1), 2.0 * math.pi * u2
        if self.name == "log_pareto":
            # P(log xi > x) = x^(-param) for x >= 1
            return u1 ** (-1.0 / self.param), np.zeros(ks.size)
        # heavy_no_logmoment: xi = exp(1/U - 1) - 1, so
        # P(log(1 + xi) > x) = 1/(1 + x) and E log(1 + xi) diverges
        x = 1.0 / u1 - 1.0
        lm = np.where(x > 30.0, x, np.log(np.expm1(np.minimum(x, 30.0))))
        return lm, np.zeros(ks.size)

    def sample(self, seed: int, ks, substream: int = 0):
        """Coefficients as complex numbers (may overflow for heavy tails)."""
        lm, ph = self.sample_log(seed, ks, substream)
        with np.errstate(over="ignore"):
            return np.exp(lm + 1j * ph)


def sample_coeff(law: CoeffLaw, seed: int, ks, substream: int = 0):
    return law.sample(seed, ks, substream)


def sample_series(spec: EnsembleSpec, n: int, law: CoeffLaw, seed: int,
                  radius: float | None = None, tol: float = 1e-12,
                  trust_factor: float = 0.9) -> LogPoly:
    """Draw sum_k xi_k f_{k,n} z^k as a LogPoly.

    Polynomial families keep their exact degree and an unlimited trust
    radius.  Entire families must pass ``radius``: the series is cut
    where the remaining tail on |z| = radius falls below ``tol`` times
    the dominant term there, and the trust radius is trust_factor *
    radius.  Inside it the cut tail is further suppressed by
    trust_factor^K, so the kept zeros are the zeros of the full series
    to within evaluation noise.  Raising trust_factor toward 1 is only
    sound when the truncation index K is large; sample at a slightly
    larger radius instead when in doubt.
    """
    if n < 1 or n != int(n):
        raise ValidationError("n must be a positive integer")
    if not 0 < trust_factor <= 0.99:
        raise ValidationError("trust_factor must be in (0, 0.99]")
    if spec.is_polynomial:
        k_top = spec.degree(n)
        trust = math.inf
    else:
        if radius is None:
            raise ValidationError(f"{spec.kind} is an entire-function family; "
                                  "pass the working radius")
        if not radius < validity_radius(spec):
            raise ValidationError(f"radius {radius} is not inside the validity "
                                  f"radius {validity_radius(spec)}")
        k_top = truncation_index(spec, n, radius, tol, relative=True)
        trust = trust_factor * radius
    ks = np.arange(k_top + 1)
    lm, ph = law.sample_log(seed, ks)
    log_mag = log_coeff(spec, ks, n) + lm
    if not np.isfinite(log_mag[-1]):
        # keep the stated degree: the top coefficient of every catalog
        # schedule is nonzero and no law puts mass at exactly 0
        raise ValidationError("leading coefficient vanished; degenerate sample")
    return LogPoly(log_mag, ph + 0.0, n=n, trust_radius=trust,
                   label=f"{spec.label()} n={n} {law.label()} seed={seed}")
