"""Named coefficient schedules f_{k,n} and their decay profiles.

Each family fixes deterministic magnitudes f_{k,n} >= 0 for the random
series sum_k xi_k f_{k,n} z^k.  All magnitudes are computed in the log
domain through log-gamma, never by multiplying factorials.

The decay profile u(t) ~ -(1/n) log f_{tn,n} is returned as a
PiecewiseFn on a grid whose node density follows sqrt(u''), so the
piecewise-linear interpolant keeps a uniform worst-case error and the
conjugate computed from it is accurate to the same target everywhere.

Families whose schedule is n-free (the Littlewood-Offord kinds) push
the degree dependence into the zero map instead: raw zeros are
multiplied by exp(-beta_eff) * n^(-alpha).  The variant fixes part of
that drift (1/k!^alpha has none, k^(-alpha k) drifts by alpha,
1/Gamma(alpha k + 1) by alpha log alpha) and the user beta adds to it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import NumericError, ValidationError
from .piecewise import TAIL_INFINITE, PiecewiseFn

POLY_KINDS = ("kac", "elliptic", "lo_poly", "three_circles")
ENTIRE_KINDS = ("flat", "hyperbolic", "lo_entire", "theta")
LO_VARIANTS = ("factorial", "k_power_k", "gamma")

_GRID_TARGET = 1e-8  # worst-case PL interpolation error of u
_LOG2 = math.log(2.0)


@dataclass(frozen=True)
class EnsembleSpec:
    """A named coefficient family plus its parameters."""

    kind: str
    alpha: float = 0.0
    beta: float = 0.0
    variant: str = ""
    u: PiecewiseFn | None = None

    def __post_init__(self):
        k = self.kind
        if k in ("elliptic", "flat", "hyperbolic"):
            if not (self.alpha > 0 and math.isfinite(self.alpha)):
                raise ValidationError(f"{k} needs alpha > 0")
        elif k in ("lo_poly", "lo_entire"):
            if not (self.alpha > 0 and math.isfinite(self.alpha)):
                raise ValidationError(f"{k} needs alpha > 0")
            if self.variant not in LO_VARIANTS:
                raise ValidationError(f"variant must be one of {LO_VARIANTS}")
            if not math.isfinite(self.beta):
                raise ValidationError("beta must be finite")
        elif k == "theta":
            if not (self.alpha > 0 and math.isfinite(self.alpha)) or self.alpha == 1.0:
                raise ValidationError("theta needs alpha > 0, alpha != 1")
        elif k in ("kac", "three_circles"):
            pass
        elif k == "custom":
            if not isinstance(self.u, PiecewiseFn):
                raise ValidationError("custom ensembles need a decay profile u")
            if float(self.u.x[0]) != 0.0:
                raise ValidationError("custom decay profile must start at t = 0")
        else:
            raise ValidationError(f"unknown ensemble kind {k!r}")

    # -- constructors ---------------------------------------------

    @classmethod
    def kac(cls):
        return cls("kac")

    @classmethod
    def elliptic(cls, alpha):
        return cls("elliptic", alpha=float(alpha))

    @classmethod
    def flat(cls, alpha):
        return cls("flat", alpha=float(alpha))

    @classmethod
    def hyperbolic(cls, alpha):
        return cls("hyperbolic", alpha=float(alpha))

    @classmethod
    def lo_poly(cls, variant, alpha, beta=0.0):
        return cls("lo_poly", alpha=float(alpha), beta=float(beta), variant=variant)

    @classmethod
    def lo_entire(cls, variant, alpha, beta=0.0):
        return cls("lo_entire", alpha=float(alpha), beta=float(beta), variant=variant)

    @classmethod
    def theta(cls, alpha):
        return cls("theta", alpha=float(alpha))

    @classmethod
    def three_circles(cls):
        return cls("three_circles")

    @classmethod
    def custom(cls, u: PiecewiseFn):
        return cls("custom", u=u)

    # -- structure ------------------------------------------------

    @property
    def is_polynomial(self) -> bool:
        if self.kind == "custom":
            return math.isfinite(self.u.domain_end)
        return self.kind in POLY_KINDS

    def degree(self, n: int) -> int:
        """Exact degree for polynomial kinds (the entire kinds truncate)."""
        if not self.is_polynomial:
            raise ValidationError(f"{self.kind} is an entire-function family; "
                                  "use truncation_index")
        if self.kind == "three_circles":
            return 3 * n
        if self.kind == "custom":
            return int(math.floor(n * self.u.domain_end + 1e-9))
        return n

    def label(self) -> str:
        bits = [self.kind]
        if self.kind in ("elliptic", "flat", "hyperbolic", "theta"):
            bits.append(f"alpha={self.alpha:g}")
        if self.kind in ("lo_poly", "lo_entire"):
            bits += [self.variant, f"alpha={self.alpha:g}", f"beta={self.beta:g}"]
        return " ".join(bits)


def implied_beta(variant: str, alpha: float) -> float:
    """Linear drift already present in a Littlewood-Offord variant."""
    if variant == "factorial":
        return 0.0
    if variant == "k_power_k":
        return alpha
    if variant == "gamma":
        return alpha * math.log(alpha)
    raise ValidationError(f"variant must be one of {LO_VARIANTS}")


def _lo_core(variant, alpha, k):
    if variant == "factorial":
        return -alpha * gammaln(k + 1.0)
    if variant == "k_power_k":
        out = np.zeros_like(k, dtype=float)
        pos = k > 0
        out[pos] = -alpha * k[pos] * np.log(k[pos])
        return out
    # 1 / Gamma(alpha k + 1)
    return -gammaln(alpha * k + 1.0)


def log_coeff(spec: EnsembleSpec, k, n: int):
    """log f_{k,n}, vectorized over k; -inf past a polynomial's degree."""
    if n < 1 or int(n) != n:
        raise ValidationError("n must be a positive integer")
    k = np.asarray(k)
    scalar = k.ndim == 0
    k = np.atleast_1d(k).astype(float)
    if np.any(k < 0) or np.any(k != np.floor(k)):
        raise ValidationError("coefficient index k must be a nonnegative integer")
    a = spec.alpha
    out = np.full(k.shape, -math.inf)
    if spec.kind == "kac":
        out[k <= n] = 0.0
    elif spec.kind == "elliptic":
        m = k <= n
        out[m] = a * (gammaln(n + 1.0) - gammaln(k[m] + 1.0) - gammaln(n - k[m] + 1.0))
    elif spec.kind == "flat":
        out = a * (k * math.log(n) - gammaln(k + 1.0))
    elif spec.kind == "hyperbolic":
        out = a * (gammaln(n + k) - gammaln(float(n)) - gammaln(k + 1.0))
    elif spec.kind in ("lo_poly", "lo_entire"):
        vals = _lo_core(spec.variant, a, k) - spec.beta * k
        if spec.kind == "lo_poly":
            out[k <= n] = vals[k <= n]
        else:
            out = vals
    elif spec.kind == "theta":
        sgn = -1.0 if a > 1.0 else 1.0
        out = sgn * float(n) ** (1.0 - a) * k ** a
    elif spec.kind == "three_circles":
        b1, b2, b3 = k <= n, (k > n) & (k <= 2 * n), (k > 2 * n) & (k <= 3 * n)
        out[b1] = 0.0
        out[b2] = (n - k[b2]) * _LOG2
        out[b3] = n * math.log(4.5) - k[b3] * math.log(3.0)
    elif spec.kind == "custom":
        uv = spec.u(k / n)
        fin = np.isfinite(uv)
        out[fin] = -n * uv[fin]
    return float(out[0]) if scalar else out


def coefficient_rescale(spec: EnsembleSpec, n: int) -> float:
    """log c such that the profile-normalized schedule is f_{k,n} c^k.

    Nonzero only for the Littlewood-Offord families, whose schedules are
    n-free; the rescale matches them to the t log t - t profile.
    """
    if spec.kind in ("lo_poly", "lo_entire"):
        beta_eff = implied_beta(spec.variant, spec.alpha) + spec.beta
        return beta_eff + spec.alpha * math.log(n)
    return 0.0


def log_coeff_scaled(spec: EnsembleSpec, k, n: int):
    """log of the coefficient schedule after the normalizing substitution."""
    return log_coeff(spec, k, n) + np.asarray(k, dtype=float) * coefficient_rescale(spec, n)


@dataclass(frozen=True)
class ScalingMap:
    """Raw zeros are multiplied by ``factor`` to get normalized zeros."""

    factor: float
    description: str

    def apply(self, z):
        return np.asarray(z) * self.factor


def scaling(spec: EnsembleSpec, n: int) -> ScalingMap:
    """Zero-normalization map for a sample at parameter n."""
    if n < 1:
        raise ValidationError("n must be a positive integer")
    log_c = coefficient_rescale(spec, n)
    if log_c == 0.0:
        return ScalingMap(1.0, "identity")
    return ScalingMap(math.exp(-log_c),
                      f"z -> z * exp(-{log_c:.12g}) (undoes the coefficient drift)")


# ---------------------------------------------------------------------
# decay profiles


def _sqrt_spaced(t_max, n_nodes):
    i = np.arange(n_nodes + 1, dtype=float)
    return (i / n_nodes) ** 2 * t_max


def _nodes_from_budget(total_curv, t_max, power):
    """Node count from the curvature integral, placed as t = q^power * t_max."""
    n_nodes = int(min(max(math.ceil(total_curv / math.sqrt(8.0 * _GRID_TARGET)), 64),
                      600_000))
    q = np.arange(n_nodes + 1, dtype=float) / n_nodes
    return q ** power * t_max


def u_profile(spec: EnsembleSpec, t_max: float | None = None,
              cover_radius: float | None = None) -> PiecewiseFn:
    """Decay profile u of the family, gridded for conjugation.

    ``t_max`` widens the grid for families on [0, inf); the default
    covers predictions out to moderate radii (|z| up to ~8 for the flat
    scale, |z| up to ~0.9 R0 for the bounded-disk families).  Passing
    ``cover_radius`` instead picks t_max so the dual transform is exact
    out to that |z|.  Linear stretches of the exact profiles carry
    interior nodes so the dual measure recognizes their atoms.
    """
    a = spec.alpha
    if t_max is None and cover_radius is not None:
        t_max = _t_max_covering(spec, cover_radius)
    if spec.kind == "custom":
        return spec.u
    if spec.kind == "kac":
        return PiecewiseFn(np.array([0.0, 0.5, 1.0]), np.zeros(3), TAIL_INFINITE)
    if spec.kind == "three_circles":
        x = np.array([0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0])
        v = np.array([0.0, 0.0, 0.0,
                      0.5 * _LOG2, _LOG2,
                      2.5 * math.log(3.0) - math.log(4.5),
                      3.0 * math.log(3.0) - math.log(4.5)])
        return PiecewiseFn(x, v, TAIL_INFINITE)
    if spec.kind == "elliptic":
        n_nodes = int(min(max(math.ceil(math.sqrt(a) * math.pi
                                        / math.sqrt(8.0 * _GRID_TARGET)), 64),
                          600_000))
        th = np.linspace(0.0, 0.5 * math.pi, n_nodes + 1)
        t = np.sin(th) ** 2
        t[-1] = 1.0
        v = np.zeros_like(t)
        inner = (t > 0) & (t < 1)
        ti = t[inner]
        v[inner] = a * (ti * np.log(ti) + (1 - ti) * np.log1p(-ti))
        return PiecewiseFn(t, v, TAIL_INFINITE)
    if spec.kind == "lo_poly":
        t = _nodes_from_budget(2.0 * math.sqrt(a), 1.0, 2.0)
        return PiecewiseFn(t, _tlogt(a, t), TAIL_INFINITE)
    if spec.kind in ("flat", "lo_entire"):
        if t_max is None:
            t_max = max(4.0, 1.3 * 8.0 ** (1.0 / a))
        t = _nodes_from_budget(2.0 * math.sqrt(a * t_max), t_max, 2.0)
        return PiecewiseFn(t, _tlogt(a, t), a * math.log(t_max))
    if spec.kind == "hyperbolic":
        if t_max is None:
            t_max = 64.0
        total = 2.0 * math.sqrt(a) * math.asinh(math.sqrt(t_max))
        n_nodes = int(min(max(math.ceil(total / math.sqrt(8.0 * _GRID_TARGET)), 64),
                          600_000))
        f = np.linspace(0.0, math.asinh(math.sqrt(t_max)), n_nodes + 1)
        t = np.sinh(f) ** 2
        t[-1] = t_max
        v = np.zeros_like(t)
        pos = t > 0
        v[pos] = a * (t[pos] * np.log(t[pos]) - (1 + t[pos]) * np.log1p(t[pos]))
        return PiecewiseFn(t, v, a * math.log(t_max / (1.0 + t_max)))
    if spec.kind == "theta":
        sgn = 1.0 if a > 1.0 else -1.0
        if t_max is None:
            if a > 1.0:
                t_max = max(4.0, 1.3 * (math.log(8.0) / a) ** (1.0 / (a - 1.0)))
            else:
                t_max = 1.3 * (a / 0.1) ** (1.0 / (1.0 - a))
        total = 2.0 * math.sqrt(a * abs(a - 1.0)) * t_max ** (0.5 * a) / a
        t = _nodes_from_budget(total, t_max, 2.0 / a)
        return PiecewiseFn(t, sgn * t ** a, sgn * a * t_max ** (a - 1.0))
    raise ValidationError(f"no profile for kind {spec.kind!r}")


def _tlogt(a, t):
    v = np.zeros_like(t)
    pos = t > 0
    v[pos] = a * (t[pos] * np.log(t[pos]) - t[pos])
    return v


def _t_cover(spec, r):
    """Smallest t where the profile's slope reaches log r (0 if never needed).

    This is where terms at radius r peak; indices below n*t still grow.
    """
    a = spec.alpha
    if spec.kind in ("flat", "lo_entire"):
        return r ** (1.0 / a)
    if spec.kind == "hyperbolic":
        s = r ** (1.0 / a)
        return s / (1.0 - s)
    if spec.kind == "theta":
        if a > 1.0:
            return 0.0 if r <= 1.0 else (math.log(r) / a) ** (1.0 / (a - 1.0))
        return (a / abs(math.log(r))) ** (1.0 / (1.0 - a)) if r < 1.0 else 0.0
    if spec.kind == "custom":
        return float(spec.u.x_end)
    return 0.0


def _t_max_covering(spec, r):
    """Grid end t_max whose tail slope reaches past log r."""
    if not (r > 0 and math.isfinite(r)):
        raise ValidationError("cover_radius must be positive and finite")
    a = spec.alpha
    if spec.kind in ("flat", "lo_entire"):
        return max(4.0, 1.3 * 8.0 ** (1.0 / a), 1.6 * r ** (1.0 / a))
    if spec.kind == "hyperbolic":
        if r >= 1.0:
            raise ValidationError("hyperbolic profiles live on |z| < 1")
        return max(64.0, 3.0 * r / (1.0 - r))
    if spec.kind == "theta":
        if a > 1.0:
            base = max(4.0, 1.3 * (math.log(8.0) / a) ** (1.0 / (a - 1.0)))
            if r <= 1.0:
                return base
            return max(base, (1.5 * math.log(r) / a) ** (1.0 / (a - 1.0)))
        if r >= 1.0:
            raise ValidationError("theta profiles with alpha < 1 live on |z| < 1")
        return max(1.3 * (a / 0.1) ** (1.0 / (1.0 - a)),
                   1.5 * (a / abs(math.log(r))) ** (1.0 / (1.0 - a)))
    return None  # bounded-support and custom profiles ignore the hint


def validity_radius(spec: EnsembleSpec) -> float:
    """Radius of convergence scale R0 of the family (analytic, not gridded)."""
    if spec.kind == "hyperbolic":
        return 1.0
    if spec.kind == "theta" and spec.alpha < 1.0:
        return 1.0
    if spec.kind == "custom":
        ts = spec.u.tail_slope
        return math.inf if math.isinf(ts) else float(np.exp(ts))
    return math.inf


def truncation_index(spec: EnsembleSpec, n: int, R: float, tol: float,
                     relative: bool = False) -> int:
    """Smallest K with sum_{k>K} f_{k,n} R^k < tol (geometric tail bound).

    With ``relative=True`` the tail is compared against tol times the
    largest term at R instead; that is the right scale when the value
    of the series at R is itself astronomically large.  The bound sums
    computed terms exactly and closes the far tail with a geometric
    estimate once the log-term increments settle below a fixed margin.
    Polynomial kinds have an exact degree and nothing to truncate.
    """
    if tol <= 0:
        raise ValidationError("tol must be positive")
    if not (R > 0 and math.isfinite(R)):
        raise ValidationError("R must be a positive finite radius")
    if spec.is_polynomial:
        raise ValidationError(f"{spec.label()} is a polynomial family of exact "
                              f"degree {spec.degree(n)}; nothing to truncate")
    if R >= validity_radius(spec):
        raise ValidationError(f"R = {R} is not inside the validity radius "
                              f"{validity_radius(spec)}")
    log_r = math.log(R)
    # never truncate inside the portion of the profile grid that covers R:
    # predictions drawn from that grid must see every index they price in
    floor = int(math.ceil(n * _t_cover(spec, R) * (1.0 - 1e-12)))
    cap = max(4 * n + 64, 256, 2 * floor)
    if spec.kind == "custom":
        # past the profile grid the term ratio is constant R/R0 < 1
        cap = max(cap, int(math.ceil(n * spec.u.x_end)) + 64)
    while True:
        ks = np.arange(cap + 1)
        term = log_coeff(spec, ks, n) + ks * log_r
        inc = np.diff(term)
        log_rho = np.max(inc[-8:])
        if log_rho < -1e-3:
            # suffix log-sums of computed terms, geometric bound for the rest
            rev = np.logaddexp.accumulate(term[::-1])[::-1]
            beyond = term[-1] + log_rho - math.log1p(-math.exp(log_rho))
            log_tail = np.logaddexp(np.concatenate((rev[1:], [-math.inf])), beyond)
            thresh = math.log(tol) + (float(np.max(term)) if relative else 0.0)
            ok = np.nonzero(log_tail < thresh)[0]
            if ok.size:
                return max(int(ok[0]), floor)
        cap *= 2
        if cap > 20_000_000:
            raise NumericError(f"series terms at R = {R} decay too slowly; "
                               "cannot truncate")


def gaussian_expected_count(kind: str, n: float, r: float) -> float:
    """Exact mean zero count in D_r at alpha = 1/2 with complex Gaussian xi.

    Closed forms exist for the three invariant kernels:
    elliptic n r^2/(1+r^2), flat n r^2, hyperbolic n r^2/(1-r^2) (r < 1).
    """
    kind = getattr(kind, "kind", kind)
    if not (n > 0 and math.isfinite(n)):
        raise ValidationError("n must be positive")
    if r < 0:
        raise ValidationError("radius must be nonnegative")
    if kind == "elliptic":
        return n if math.isinf(r) else n * r * r / (1.0 + r * r)
    if kind == "flat":
        return n * r * r
    if kind == "hyperbolic":
        if r >= 1.0:
            raise ValidationError("hyperbolic counts need r < 1")
        return n * r * r / (1.0 - r * r)
    raise ValidationError(f"no closed-form Gaussian intensity for kind {kind!r}")
