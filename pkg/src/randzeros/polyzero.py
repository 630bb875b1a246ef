"""Polynomials in log-coefficient form and their zeros.

Coefficients live as (log|a_k|, arg a_k) pairs because the schedules
span thousands of orders of magnitude at high degree.  Every evaluation
rescales by the dominant log term at the working radius, so values stay
inside float range for any coefficient profile, and the whole pipeline
is exactly equivariant under z -> cz (the rescale absorbs c).

Zeros come from Aberth-Ehrlich simultaneous iteration seeded on the
Newton polygon rings, with deterministic sweeps (Jacobi updates from a
snapshot), so results are reproducible bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import (ContourZeroError, NumericError, RootConvergenceError,
                     ValidationError)

_EPS = float(np.finfo(np.float64).eps)
_MERGE_TOL = 1e-6  # relative cluster-merge radius; resolves multiplicity <= 2


@dataclass(frozen=True)
class LogPoly:
    """sum_k a_k z^k with a_k = exp(log_mag[k] + i phase[k]).

    log_mag entries of -inf mark structurally absent coefficients.  The
    leading entry must be finite.  ``n`` is the normalizer used when the
    zero set is turned into a measure (counts are divided by n, not by
    the degree: entire-family truncations have degree >> n).
    """

    log_mag: np.ndarray
    phase: np.ndarray
    n: int
    trust_radius: float = math.inf
    label: str = ""

    def __post_init__(self):
        lm = np.ascontiguousarray(np.asarray(self.log_mag, dtype=np.float64))
        ph = np.ascontiguousarray(np.asarray(self.phase, dtype=np.float64))
        if lm.ndim != 1 or lm.shape != ph.shape or lm.size == 0:
            raise ValidationError("log_mag and phase must be equal-length 1-d arrays")
        if np.any(np.isnan(lm)) or lm[-1] == -math.inf or np.any(lm == math.inf):
            raise ValidationError("log_mag must be -inf or finite, with a "
                                  "finite leading coefficient")
        if not np.all(np.isfinite(ph[np.isfinite(lm)])):
            raise ValidationError("phases of present coefficients must be finite")
        if self.n < 1:
            raise ValidationError("normalizer n must be a positive integer")
        if not self.trust_radius > 0:
            raise ValidationError("trust_radius must be positive")
        object.__setattr__(self, "log_mag", lm)
        object.__setattr__(self, "phase", ph)

    @property
    def degree(self) -> int:
        return self.log_mag.size - 1

    @classmethod
    def from_coeffs(cls, coeffs, n: int | None = None, **kw) -> "LogPoly":
        """Build from ordinary complex coefficients (lowest order first)."""
        c = np.atleast_1d(np.asarray(coeffs, dtype=np.complex128))
        while c.size > 1 and c[-1] == 0:
            c = c[:-1]
        if c[-1] == 0:
            raise ValidationError("the zero polynomial has no zero set")
        with np.errstate(divide="ignore"):
            lm = np.log(np.abs(c))
        return cls(lm, np.angle(c), n=n if n is not None else max(c.size - 1, 1), **kw)


def eval_log(poly: LogPoly, z):
    """(log|p(z)|, arg p(z)), vectorized; log|p| = -inf at exact zeros."""
    z = np.asarray(z)
    scalar = z.ndim == 0
    zs = np.ascontiguousarray(np.atleast_1d(z).astype(np.complex128))
    logabs, args = _kernels.eval_many(poly.log_mag, poly.phase, zs)
    if scalar:
        return float(logabs[0]), float(args[0])
    return logabs, args


def _finite_part(poly):
    fin = np.nonzero(np.isfinite(poly.log_mag))[0]
    return fin, int(fin[0])


def newton_polygon_rings(poly: LogPoly):
    """Rings (radius, count) from the upper hull of {(k, log|a_k|)}.

    Edge slopes of the hull estimate -log|root| for blocks of roots; the
    counts sum to degree minus the origin multiplicity.
    """
    fin, k_min = _finite_part(poly)
    ks = fin.astype(np.float64)
    idx = _kernels.lower_hull_indices(ks, -poly.log_mag[fin], 0.0)
    hk = fin[idx]
    hv = poly.log_mag[hk]
    rings = []
    for j in range(hk.size - 1):
        cnt = int(hk[j + 1] - hk[j])
        # clamp: radii beyond float range are not representable anyway
        rad = math.exp(min(max((hv[j] - hv[j + 1]) / cnt, -690.0), 690.0))
        rings.append((rad, cnt))
    return rings


def newton_polygon_roots(poly: LogPoly):
    """Deterministic initial root guesses on the Newton polygon rings.

    Returns (guesses, origin_mult): origin_mult exact zeros sit at 0 and
    are not represented among the guesses.
    """
    _, k_min = _finite_part(poly)
    rings = newton_polygon_rings(poly)
    out = []
    for j, (rad, cnt) in enumerate(rings):
        # irrational per-ring rotation: no axis alignment, no ring locking
        off = math.fmod(0.5 + (j + 1) * 0.6180339887498949, 1.0)
        th = 2.0 * math.pi * ((np.arange(cnt) + off) / cnt)
        out.append(rad * np.exp(1j * th))
    guesses = np.concatenate(out) if out else np.empty(0, np.complex128)
    return guesses, k_min


@dataclass(frozen=True)
class ZeroMeasure:
    """Zero set with multiplicities, normalized by n (not by the degree)."""

    zeros: np.ndarray
    mults: np.ndarray
    n: int
    trust_radius: float = math.inf
    certificates: np.ndarray = field(default=None)  # type: ignore[assignment]
    label: str = ""

    def __post_init__(self):
        z = np.ascontiguousarray(np.asarray(self.zeros, dtype=np.complex128))
        m = np.ascontiguousarray(np.asarray(self.mults, dtype=np.int64))
        if z.shape != m.shape or z.ndim != 1:
            raise ValidationError("zeros and mults must be equal-length 1-d arrays")
        if z.size and np.any(m < 1):
            raise ValidationError("multiplicities must be >= 1")
        c = self.certificates
        c = np.zeros(z.size) if c is None else np.asarray(c, dtype=np.float64)
        if c.shape != z.shape:
            raise ValidationError("certificates must match zeros")
        object.__setattr__(self, "zeros", z)
        object.__setattr__(self, "mults", m)
        object.__setattr__(self, "certificates", np.ascontiguousarray(c))

    @property
    def total(self) -> int:
        return int(self.mults.sum())

    @property
    def radii(self):
        return np.abs(self.zeros)

    def scaled(self, factor: float) -> "ZeroMeasure":
        """The measure of z -> factor * z (same multiplicities and n)."""
        if not (factor > 0 and math.isfinite(factor)):
            raise ValidationError("scale factor must be positive and finite")
        return ZeroMeasure(self.zeros * factor, self.mults, self.n,
                           self.trust_radius * factor, self.certificates,
                           self.label)


def _merge_clusters(zs, noise_floor, la, ph):
    """Group converged iterates within the relative merge radius."""
    order = np.argsort(zs.real, kind="stable")
    zs = zs[order]
    m = zs.size
    parent = np.arange(m)

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(m):
        tol_i = _MERGE_TOL * (1.0 + abs(zs[i]))
        j = i + 1
        while j < m and zs[j].real - zs[i].real <= tol_i:
            if abs(zs[j] - zs[i]) <= tol_i:
                parent[find(j)] = find(i)
            j += 1
    groups = {}
    for i in range(m):
        groups.setdefault(find(i), []).append(i)
    reps = np.array([zs[g].mean() for g in groups.values()], dtype=np.complex128)
    mults = np.array([len(g) for g in groups.values()], dtype=np.int64)
    logabs = _kernels.eval_many(la, ph, reps)[0]
    certs = logabs - _kernels.scale_at(la, np.abs(reps))
    return reps, mults, certs


def find_zeros(poly: LogPoly, tol: float = 1e-10, max_iter: int = 400) -> ZeroMeasure:
    """All zeros inside the trust radius, by Aberth-Ehrlich iteration.

    Deterministic: polygon-seeded, Jacobi sweeps, one jittered restart
    for stragglers.  A root is accepted when its step is below tol
    relatively or its residual reaches the evaluation noise floor (the
    only reachable state near a multiple root).  Raises
    RootConvergenceError, carrying the partial results, if roots remain.
    """
    if not 0 < tol < 1e-2:
        raise ValidationError("tol must be in (0, 1e-2)")
    la, ph = poly.log_mag, poly.phase
    guesses, origin_mult = newton_polygon_roots(poly)
    la_d, ph_d = la[origin_mult:], ph[origin_mult:]
    deg_d = guesses.size
    noise = math.log(8.0 * _EPS * (deg_d + 4.0))
    z = guesses.copy()
    if deg_d:
        active = np.ones(deg_d, dtype=np.bool_)
        new_z = np.empty_like(z)
        corr = np.zeros(deg_d)
        resid = np.zeros(deg_d)
        restarts = 1
        it = 0
        while True:
            it += 1
            _kernels.aberth_sweep(la_d, ph_d, z, active, new_z, corr, resid)
            done = active & ((corr <= tol * (1.0 + np.abs(new_z))) | (resid <= noise))
            active &= ~done
            z = new_z.copy()
            if not active.any():
                break
            if it >= max_iter:
                if restarts > 0:
                    restarts -= 1
                    it = 0
                    idx = np.nonzero(active)[0]
                    wob = np.exp(2j * math.pi * np.modf(0.7548776662466927
                                                        * (idx + 1.0))[0])
                    z[idx] *= 1.0 + 1e-4 * wob
                    continue
                raise RootConvergenceError(
                    f"{int(active.sum())} of {deg_d} roots unconverged "
                    f"after {max_iter} sweeps and a restart",
                    zeros=z[~active], unconverged=z[active])
    zs, mults, certs = (_merge_clusters(z, noise, la, ph) if deg_d
                        else (np.empty(0, np.complex128),
                              np.empty(0, np.int64), np.empty(0)))
    if origin_mult:
        zs = np.concatenate(([0.0 + 0.0j], zs))
        mults = np.concatenate(([origin_mult], mults))
        certs = np.concatenate(([-math.inf], certs))
    keep = np.abs(zs) <= poly.trust_radius * (1.0 + 1e-12)
    return ZeroMeasure(zs[keep], mults[keep], poly.n, poly.trust_radius,
                       certs[keep], poly.label)


def _wrap(d):
    return (d + math.pi) % (2.0 * math.pi) - math.pi


def count_zeros_argument(poly: LogPoly, r: float, max_nodes: int = 1 << 20) -> int:
    """Zeros in |z| < r (with multiplicity) by the argument principle.

    The contour phase is refined until every increment is below pi/2,
    which pins the winding number.  A contour running into a zero is
    detected through the residual certificate; the radius is jittered a
    few times before giving up with ContourZeroError.
    """
    if not (r > 0 and math.isfinite(r)):
        raise ValidationError("contour radius must be positive and finite")
    if not r <= poly.trust_radius * (1.0 + 1e-12):
        raise ValidationError("contour lies outside the trust radius")
    floor = math.log(64.0 * _EPS * (poly.degree + 4.0))
    for attempt in range(4):
        rr = r * (1.0 + (1e-4 * attempt if attempt % 2 else -1e-4 * attempt))
        ok, winding = _winding_or_none(poly, rr, floor, max_nodes)
        if ok:
            return winding
    raise ContourZeroError(f"a zero sits on (or hugs) every tried contour "
                           f"near |z| = {r}")


def _winding_or_none(poly, r, floor, max_nodes):
    scale = float(_kernels.scale_at(poly.log_mag, np.array([r]))[0])
    # one zero per interval at most, else a 2 pi phase loop can hide
    # inside a single step and wrap to an innocuous increment
    n0 = 512
    while n0 < 8 * poly.degree and 2 * n0 <= max_nodes:
        n0 *= 2
    th = np.linspace(0.0, 2.0 * math.pi, n0 + 1)[:-1]
    la, args = _kernels.eval_many(poly.log_mag, poly.phase,
                                  np.ascontiguousarray(r * np.exp(1j * th)))
    if np.min(la) - scale < floor:
        return False, 0
    while True:
        d = _wrap(np.diff(args, append=args[:1]))
        bad = np.nonzero(np.abs(d) > 0.5 * math.pi)[0]
        if bad.size == 0:
            total = float(d.sum())
            w = round(total / (2.0 * math.pi))
            if abs(total / (2.0 * math.pi) - w) > 0.1:
                raise NumericError("winding number failed to settle")
            return True, int(w)
        if th.size + bad.size > max_nodes:
            raise NumericError("contour refinement exceeded the node budget")
        nxt = (bad + 1) % th.size
        gaps = (th[nxt] - th[bad]) % (2.0 * math.pi)
        mid = (th[bad] + 0.5 * gaps) % (2.0 * math.pi)
        la_m, args_m = _kernels.eval_many(poly.log_mag, poly.phase,
                                          np.ascontiguousarray(r * np.exp(1j * mid)))
        if np.min(la_m) - scale < floor:
            return False, 0
        th = np.concatenate((th, mid))
        order = np.argsort(th, kind="stable")
        th = th[order]
        args = np.concatenate((args, args_m))[order]


def vieta_check(poly: LogPoly, zm: ZeroMeasure) -> dict:
    """Coefficient-side consistency of a complete zero set.

    Compares sum(mult * log|z|) over nonzero zeros with
    log|a_low / a_top|, and the multiplicity count with the degree.
    Only meaningful when no zeros were dropped (infinite trust radius).
    """
    fin, k_min = _finite_part(poly)
    nz = zm.zeros != 0
    origin = int(zm.mults[~nz].sum())
    log_prod = float(np.sum(zm.mults[nz] * np.log(np.abs(zm.zeros[nz]))))
    expected = float(poly.log_mag[k_min] - poly.log_mag[-1])
    return {
        "degree_ok": zm.total == poly.degree and origin == k_min,
        "log_product_error": abs(log_prod - expected),
    }
