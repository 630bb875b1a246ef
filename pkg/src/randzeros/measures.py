"""Empirical zero statistics against predicted limit measures.

The radial comparisons normalize both sides to probability on the
working disk, so they measure shape agreement; absolute zero counts are
reported separately (they test the law-of-large-numbers scaling).

Radial KS needs care at atoms: the limit puts a jump at radius rho, the
finite-n zeros put a belt of width O(log n / n) around it.  The sup is
therefore taken outside a small relative window around each atom, with
the window edges compared against the one-sided limits of the jump;
this converges to the honest KS distance as n grows while never hiding
a misplaced or missing atom.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .ensembles import (EnsembleSpec, scaling, truncation_index, u_profile,
                        validity_radius)
from .errors import NumericError, ValidationError
from .fenchel import LimitMeasure, limit_measure
from .polyzero import LogPoly, ZeroMeasure, find_zeros
from .sampling import CoeffLaw, sample_series
from . import _kernels


def empirical_radial_mass(zm: ZeroMeasure, r):
    """(1/n) * #{zeros with |z| <= r}, vectorized over r."""
    r = np.asarray(r, dtype=float)
    scalar = r.ndim == 0
    rr = np.atleast_1d(r)
    if np.any(rr < 0):
        raise ValidationError("radii must be nonnegative")
    if np.any(rr > zm.trust_radius * (1.0 + 1e-9)):
        raise ValidationError("radius beyond the trust radius: zeros out there "
                              "were discarded, the count would lie")
    order = np.argsort(zm.radii)
    rad = zm.radii[order]
    cum = np.concatenate(([0], np.cumsum(zm.mults[order])))
    out = cum[np.searchsorted(rad, rr * (1.0 + 1e-15), side="right")] / zm.n
    return float(out[0]) if scalar else out


def merge_measures(zms) -> ZeroMeasure:
    """Pool zero measures of independent samples (normalizers add)."""
    zms = list(zms)
    if not zms:
        raise ValidationError("nothing to merge")
    return ZeroMeasure(np.concatenate([z.zeros for z in zms]),
                       np.concatenate([z.mults for z in zms]),
                       n=sum(z.n for z in zms),
                       trust_radius=min(z.trust_radius for z in zms),
                       certificates=np.concatenate([z.certificates for z in zms]),
                       label=zms[0].label + (" pooled" if len(zms) > 1 else ""))


def _emp_cdf_factory(zm, total):
    order = np.argsort(zm.radii)
    rad = zm.radii[order]
    cum = np.concatenate(([0], np.cumsum(zm.mults[order])))

    def cdf(r):
        return cum[np.searchsorted(rad, np.asarray(r) * (1.0 + 1e-15),
                                   side="right")] / total
    return cdf


def _radial_grid(mu, r_max, atom_window, n_grid=2048):
    """Comparison radii: uniform grid minus atom windows, plus their edges.

    Returns (grid, r_eff): r_eff extends past r_max when an atom sits at
    the very edge, so its finite-n belt is counted with it.
    """
    rs = np.linspace(0.0, r_max, n_grid + 1)[1:]
    keep = np.ones(rs.size, dtype=bool)
    edges = []
    r_eff = r_max
    end_covered = False
    for rho, _ in mu.atoms:
        if rho > r_max:
            continue
        lo, hi = rho * (1.0 - atom_window), rho * (1.0 + atom_window)
        keep &= ~((rs > lo) & (rs < hi))
        edges += [lo, hi] if hi <= r_max else [lo]
        if hi > r_max:
            end_covered = True  # the final comparison happens at r_eff
        r_eff = max(r_eff, hi)
    if not end_covered:
        edges.append(r_max)
    grid = np.unique(np.concatenate((rs[keep], edges)))
    return grid[grid > 0], r_eff


def ks_radial(zm: ZeroMeasure, mu: LimitMeasure, r_max: float,
              atom_window: float = 0.01) -> float:
    """sup |empirical - predicted| of probability-normalized radial CDFs.

    Both measures are restricted to the disk of radius r_max and scaled
    to total mass one.  Grid nodes inside a +-atom_window relative
    window around each atom are replaced by the window edges (see the
    module docstring); when an atom sits at r_max its whole belt, up to
    rho * (1 + atom_window), counts as inside.
    """
    if not (0 < r_max < mu.R0 * (1.0 - 1e-12) or
            (math.isinf(mu.R0) and r_max > 0)):
        raise ValidationError("r_max must sit inside the limit measure's disk")
    grid, r_eff = _radial_grid(mu, r_max, atom_window)
    if r_eff > zm.trust_radius * (1.0 + 1e-9):
        raise ValidationError("comparison radius exceeds the trust radius")
    lim_tot = float(mu.radial_mass_at(r_max, closed=True))
    if lim_tot <= 0:
        raise ValidationError("the limit measure has no mass inside r_max")
    emp_tot = float(empirical_radial_mass(zm, r_eff)) * zm.n
    if emp_tot <= 0:
        raise ValidationError("no zeros inside r_max")
    emp = _emp_cdf_factory(zm, emp_tot)
    lim = mu.radial_mass_at(grid, closed=True) / lim_tot
    d = float(np.max(np.abs(emp(grid) - lim)))
    # the edge atom's belt: everything out to r_eff belongs to r_max
    return max(d, abs(emp(np.array([r_eff]))[0] - 1.0))


def w1_radial(zm: ZeroMeasure, mu: LimitMeasure, r_max: float) -> float:
    """L1 distance between the normalized radial CDFs on [0, r_max].

    Atom belts need no special handling here: a jump displaced by the
    belt width costs only mass * width.
    """
    if not (0 < r_max < mu.R0 * (1.0 - 1e-12) or
            (math.isinf(mu.R0) and r_max > 0)):
        raise ValidationError("r_max must sit inside the limit measure's disk")
    if r_max > zm.trust_radius * (1.0 + 1e-9):
        raise ValidationError("comparison radius exceeds the trust radius")
    lim_tot = float(mu.radial_mass_at(r_max, closed=True))
    emp_tot = float(empirical_radial_mass(zm, r_max)) * zm.n
    if lim_tot <= 0 or emp_tot <= 0:
        raise ValidationError("both measures need mass inside r_max")
    rad = zm.radii
    grid = np.unique(np.concatenate((np.linspace(0.0, r_max, 4097),
                                     rad[rad <= r_max],
                                     [r for r, _ in mu.atoms if r <= r_max])))
    emp = _emp_cdf_factory(zm, emp_tot)
    lim = mu.radial_mass_at(grid, closed=True) / lim_tot
    return float(np.trapezoid(np.abs(emp(grid) - lim), grid))


def ks_angular(zm: ZeroMeasure, r_lo: float = 0.0, r_hi: float = math.inf,
               min_zeros: int = 10) -> float:
    """Rotation-free angular discrepancy against the uniform law.

    Kuiper's statistic halved: V/2 = (D+ + D-)/2, invariant under
    rotations of the sample, so it tests equidistribution of angles
    without privileging the branch cut.  Four equispaced angles score
    exactly 1/8.  Only zeros in the annulus r_lo < |z| <= r_hi enter.
    """
    if not 0.0 <= r_lo < r_hi:
        raise ValidationError("need 0 <= r_lo < r_hi")
    if math.isfinite(r_hi) and r_hi > zm.trust_radius * (1.0 + 1e-9):
        raise ValidationError("annulus exceeds the trust radius")
    rad = zm.radii
    nz = (zm.zeros != 0) & (rad > r_lo) & (rad <= min(r_hi, zm.trust_radius))
    w = zm.mults[nz].astype(float)
    if w.sum() < min_zeros:
        raise ValidationError(f"need at least {min_zeros} nonzero zeros "
                              "for an angular statistic")
    th = np.mod(np.angle(zm.zeros[nz]), 2.0 * math.pi)
    order = np.argsort(th)
    u = th[order] / (2.0 * math.pi)
    w = w[order]
    cum = np.cumsum(w) / w.sum()
    d_plus = float(np.max(cum - u))
    d_minus = float(np.max(u - (cum - w / w.sum())))
    return 0.5 * (d_plus + d_minus)


def normalize_zeros(zm: ZeroMeasure, s) -> ZeroMeasure:
    """Apply the ensemble's zero normalization (z -> factor * z)."""
    return zm.scaled(s.factor)


def potential_profile(poly: LogPoly, z_points):
    """(1/n) log|p(z)| at each point: the empirical log-potential.

    A point landing exactly on a zero returns -inf; the probability of
    that is zero for the continuous laws.
    """
    z = np.asarray(z_points)
    scalar = z.ndim == 0
    zs = np.atleast_1d(z).astype(np.complex128)
    if np.any(np.abs(zs) > poly.trust_radius * (1.0 + 1e-9)):
        raise ValidationError("potential points must stay inside the "
                              "trust radius")
    la, _ = _kernels.eval_many(poly.log_mag, poly.phase,
                               np.ascontiguousarray(zs))
    out = la / poly.n
    return float(out[0]) if scalar else out


def zero_count_lln(spec: EnsembleSpec, law: CoeffLaw, r_list, seed: int,
                   tol: float = 1e-10, trunc_tol: float = 1e-12):
    """Raw zero counts N(r) of one sampled entire series, as (r, N(r)).

    Counts are neither normalized nor rescaled: for the n-free entire
    families the counts themselves carry the law of large numbers.
    """
    rs = np.atleast_1d(np.asarray(r_list, dtype=float))
    if rs.size == 0 or rs[0] <= 0 or np.any(np.diff(rs) <= 0):
        raise ValidationError("r_list must be increasing positive radii")
    if spec.is_polynomial:
        raise ValidationError("zero counts over growing disks need an "
                              "entire-function family")
    poly = sample_series(spec, 1, law, seed, radius=float(rs[-1]) / 0.9,
                         tol=trunc_tol)
    zm = find_zeros(poly, tol=tol)
    counts = empirical_radial_mass(zm, rs) * zm.n
    return [(float(r), int(round(c))) for r, c in zip(rs, counts)]


def szego_curve_distance(zm: ZeroMeasure) -> float:
    """Mean distance of (normalized) zeros from the curve |z e^(1-z)| = 1."""
    if zm.total == 0:
        raise ValidationError("no zeros")
    z = zm.zeros
    return float(np.average(np.abs(np.abs(z * np.exp(1.0 - z)) - 1.0),
                            weights=zm.mults))


def _szego_curve_upper(t):
    """Radius r(t) of the curve |z e^(1-z)| = 1 at arg z = t, vectorized."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    lo = np.full_like(t, 1e-12)
    hi = np.ones_like(t)
    c = np.cos(t)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        pos = np.log(mid) + 1.0 - mid * c >= 0.0
        hi = np.where(pos, mid, hi)
        lo = np.where(pos, lo, mid)
    return 0.5 * (lo + hi)


def szego_partial_sum_zeros(n: int) -> ZeroMeasure:
    """The n zeros of sum_{k<=n} (nz)^k / k!, located to ~1e-12.

    Everywhere except near z = 1 this sum is a cancellation of terms
    that dwarf its value by factors up to exp(n r (1 - cos arg z)), so
    beyond n ~ 60 no double-precision method (ours included) can see the
    true zeros: rounding the coefficients already moves them O(1).  The
    sum equals e^(nz) Q(n+1, nz) with Q the regularized upper incomplete
    gamma, and Q is free of that cancellation, so Newton's iteration on
    Q in extended precision pins every zero.  Seeds walk the limit curve
    at the phase spacing of the zeros.
    """
    import mpmath as mp

    if n < 1:
        raise ValidationError("need n >= 1")
    if n <= 12:
        # shallow cancellation: the direct solver is exact enough here
        ks = np.arange(n + 1, dtype=float)
        return find_zeros(LogPoly(ks * math.log(n) - gammaln(ks + 1.0),
                                  np.zeros(n + 1), n=n,
                                  label="szego_partial_sum"))
    # first-order seeds: P(n+1, nz) ~ (nz)^(n+1) e^(-nz) / ((n+1)! (1-z)),
    # so the upper-half zeros solve F(z) = 2 pi i m for m = 1..(n+1)//2
    # (the last m is the lone real zero when n is odd)
    m = np.arange(1, (n + 1) // 2 + 1, dtype=float)
    t = np.linspace(1e-6, math.pi, 32 * n)
    r = _szego_curve_upper(t)
    phase = n * (t - r * np.sin(t))
    i0 = np.clip(np.searchsorted(phase, 2.0 * math.pi * m), 1, t.size - 1)
    z = r[i0] * np.exp(1j * t[i0])
    half_log = 0.5 * math.log(2.0 * math.pi * (n + 1))
    target = 2j * math.pi * m
    for _ in range(24):
        f = n * (np.log(z) + 1.0 - z) + np.log(z / (1.0 - z)) - half_log
        df = n * (1.0 / z - 1.0) + 1.0 / z + 1.0 / (1.0 - z)
        z = z - (f - target) / df
    seeds = np.where(np.abs(z - r[i0] * np.exp(1j * t[i0])) < 0.5,
                     z, r[i0] * np.exp(1j * t[i0]))
    logfac = float(gammaln(n + 1))
    found = []
    with mp.workdps(30):
        a = n + 1
        for z0 in seeds:
            z = mp.mpc(z0)
            for _ in range(20):
                q = mp.gammainc(a, n * z, mp.inf, regularized=True)
                step = q * mp.exp(logfac - a * mp.log(n) + n * z
                                  - n * mp.log(z))
                z = z + step
                if abs(step) <= 1e-13 * (1.0 + abs(z)):
                    break
            else:
                raise NumericError(f"zero refinement stalled near {complex(z0)}")
            found.append(complex(z))
    zs = np.array(found, dtype=np.complex128)
    zs[np.abs(zs.imag) <= 1e-9] = zs[np.abs(zs.imag) <= 1e-9].real
    upper = zs[zs.imag > 0]
    real = zs[zs.imag == 0]
    zs = np.concatenate((real, upper, upper.conj()))
    # distinct zeros are far apart (>> 1e-4); a collision means a seed
    # jumped basins and some other zero went missing
    srt = zs[np.argsort(zs.real, kind="stable")]
    collide = False
    for i in range(1, srt.size):
        j = i - 1
        while j >= 0 and srt[i].real - srt[j].real < 1e-4:
            collide = collide or abs(srt[i] - srt[j]) < 1e-4
            j -= 1
    if zs.size != n or collide:
        raise NumericError(f"failed to separate all {n} partial-sum zeros")
    return ZeroMeasure(zs, np.ones(n, dtype=np.int64), n=n,
                       label="szego_partial_sum")


@dataclass(frozen=True)
class ComparisonReport:
    """Summary of empirical zeros of one ensemble against its limit."""

    ensemble: str
    law: str
    n: int
    seeds: tuple
    r_max: float
    ks_radial: float
    w1_radial: float
    ks_angular: float
    count_mean: float
    count_expected: float
    zeros_pooled: int
    trust_radius: float
    atoms: tuple
    r0: float
    per_seed_counts: tuple = ()

    def to_json_dict(self) -> dict:
        d = {k: getattr(self, k) for k in
             ("ensemble", "law", "n", "r_max", "ks_radial", "w1_radial",
              "ks_angular", "count_mean", "count_expected", "zeros_pooled")}
        d["seeds"] = list(self.seeds)
        d["per_seed_counts"] = list(self.per_seed_counts)
        d["atoms"] = [[r, m] for r, m in self.atoms]
        d["R0"] = "inf" if math.isinf(self.r0) else self.r0
        d["trust_radius"] = ("inf" if math.isinf(self.trust_radius)
                             else self.trust_radius)
        return d


def compare_ensemble(spec: EnsembleSpec, n: int, law: CoeffLaw, seeds,
                     r_max: float, tol: float = 1e-10,
                     atom_window: float = 0.01,
                     trunc_tol: float = 1e-12) -> ComparisonReport:
    """Sample, solve, normalize, and score one ensemble end to end.

    Zeros from all seeds are pooled for the distributional statistics;
    counts are also reported per seed.  For entire families the series
    is truncated at radius r_max / 0.9 (in normalized coordinates), so
    the trust region exactly covers the comparison disk.
    """
    seeds = tuple(int(s) for s in np.atleast_1d(seeds))
    if not seeds:
        raise ValidationError("need at least one seed")
    mu = limit_measure(u_profile(spec, cover_radius=_cover(spec, r_max)))
    factor = scaling(spec, n).factor
    # counting radius: an atom sitting at r_max owns its finite-n belt
    r_count = max([r_max] + [rho * (1.0 + atom_window)
                             for rho, _ in mu.atoms if rho <= r_max])
    radius, tf = None, 0.9
    if not spec.is_polynomial:
        # near a finite R0 the truncation index explodes like 1/(R0 - R);
        # a large K lets the trust circle hug the sample radius (the cut
        # tail shrinks by tf^K inside), keeping the degree affordable
        k_probe = truncation_index(spec, n, 1.02 * r_count / factor,
                                   trunc_tol, relative=True)
        tf = min(max(0.9, math.exp(-120.0 / k_probe)), 0.98)
        radius = (r_count / tf) / factor
    zms = []
    counts = []
    for s in seeds:
        poly = sample_series(spec, n, law, s, radius=radius, tol=trunc_tol,
                             trust_factor=tf)
        zm = find_zeros(poly, tol=tol)
        if factor != 1.0:
            zm = zm.scaled(factor)
        zms.append(zm)
        counts.append(float(empirical_radial_mass(zm, r_count)) * n)
    return score_measure(merge_measures(zms), spec, r_max, atom_window,
                         law=law.label(), seeds=seeds, per_seed_counts=counts)


def score_measure(zm: ZeroMeasure, spec: EnsembleSpec, r_max: float,
                  atom_window: float = 0.01, law: str = "", seeds=(),
                  per_seed_counts=None) -> ComparisonReport:
    """Score one (possibly pooled) zero measure against spec's limit.

    ``zm.n`` must be the total normalizer (sum over pooled samples);
    counts are reported per sample.
    """
    mu = limit_measure(u_profile(spec, cover_radius=_cover(spec, r_max)))
    r_count = max([r_max] + [rho * (1.0 + atom_window)
                             for rho, _ in mu.atoms if rho <= r_max])
    if per_seed_counts is None:
        per_seed_counts = [float(empirical_radial_mass(zm, r_count)) * zm.n]
    n_samples = max(len(per_seed_counts), 1)
    expected = float(mu.radial_mass_at(r_max, closed=True)) * zm.n / n_samples
    return ComparisonReport(
        ensemble=spec.label(), law=law, n=zm.n // n_samples,
        seeds=tuple(seeds), r_max=r_max,
        ks_radial=ks_radial(zm, mu, r_max, atom_window),
        w1_radial=w1_radial(zm, mu, r_max),
        ks_angular=ks_angular(zm),
        count_mean=float(np.mean(per_seed_counts)), count_expected=expected,
        zeros_pooled=zm.total, trust_radius=zm.trust_radius,
        atoms=mu.atoms, r0=mu.R0, per_seed_counts=tuple(per_seed_counts))


def _cover(spec, r_max):
    """Radius the profile grid must reach; entire kinds need headroom."""
    if spec.is_polynomial or spec.kind == "custom":
        return None
    r0 = validity_radius(spec)
    if math.isinf(r0):
        return 1.25 * r_max
    if not r_max < 0.95 * r0:
        raise ValidationError(f"r_max must stay below 0.95 * R0 = {0.95 * r0}")
    return min(1.25 * r_max, 0.5 * (r_max + r0))
