"""End-to-end acceptance runs: sampled zero clouds against predicted limits.

Each test covers one headline property, records its clauses on the
shared scoreboard (printed after the run), and enforces its own runtime
budget.  Tolerances are pinned from pilot calibration runs.
"""
import math
import time

import numpy as np
import pytest

from randzeros.ensembles import (EnsembleSpec, gaussian_expected_count,
                                 scaling, u_profile)
from randzeros.errors import ContourZeroError, NumericError
from randzeros.fenchel import (LimitMeasure, construct_ensemble, convex_hull,
                               fenchel_transform, limit_measure)
from randzeros.measures import (ks_angular, ks_radial, potential_profile,
                                szego_curve_distance, szego_partial_sum_zeros,
                                zero_count_lln)
from randzeros.piecewise import TAIL_INFINITE, PiecewiseFn
from randzeros.polyzero import (LogPoly, count_zeros_argument, find_zeros,
                                vieta_check)
from randzeros.sampling import CoeffLaw, sample_series


GAUSS = CoeffLaw.complex_gaussian()


def criterion_grid(r0: float) -> np.ndarray:
    hi = min(5.0, math.log(r0) if math.isfinite(r0) else math.inf)
    return np.linspace(-5.0, hi, 1024, endpoint=False)


def solve(spec, n, law, seed, radius=None):
    return find_zeros(sample_series(spec, n, law, seed, radius=radius))


# 1 -------------------------------------------------------------------------

def test_c01_conjugate_catalog(criterion):
    title = "closed-form conjugate catalog (max abs <= 1e-6)"
    t0 = time.perf_counter()
    e5, e10 = math.exp(5.0), math.exp(10.0)
    cases = [
        ("kac", EnsembleSpec.kac(), None,
         lambda s: np.maximum(0.0, s)),
        ("elliptic", EnsembleSpec.elliptic(0.5), None,
         lambda s: 0.5 * np.log1p(np.exp(2.0 * s))),
        ("flat", EnsembleSpec.flat(0.5), 1.05 * e10,
         lambda s: 0.5 * np.exp(2.0 * s)),
        ("hyperbolic", EnsembleSpec.hyperbolic(0.5), 256.0,
         lambda s: -0.5 * np.log1p(-np.exp(2.0 * s))),
        ("lo_poly", EnsembleSpec.lo_poly("factorial", 1.0), None,
         lambda s: np.where(s <= 0, np.exp(s), s + 1.0)),
        ("lo_entire", EnsembleSpec.lo_entire("factorial", 1.0), 1.05 * e5,
         lambda s: np.exp(s)),
        ("theta(2)", EnsembleSpec.theta(2.0), 2.8,
         lambda s: np.maximum(0.0, s) ** 2 / 4.0),
        ("theta(1/2)", EnsembleSpec.theta(0.5), 11_000.0,
         lambda s: -0.25 / s),
        ("three_circles", EnsembleSpec.three_circles(), None,
         lambda s: np.maximum.reduce([np.zeros_like(s), s,
                                      2.0 * s - math.log(2.0),
                                      3.0 * s - math.log(6.0)])),
    ]
    oks = []
    for name, spec, t_max, form in cases:
        s = criterion_grid(spec_r0(spec))
        I = fenchel_transform(u_profile(spec, t_max=t_max), s_grid=s)
        err = float(np.max(np.abs(I(s) - form(s))))
        oks.append(criterion(1, title, f"{name} max err", err <= 1e-6,
                             f"{err:.3e}"))
    dt = time.perf_counter() - t0
    oks.append(criterion(1, title, "runtime < 1 s", dt < 1.0, f"{dt:.2f}s"))
    assert all(oks)


def spec_r0(spec):
    from randzeros.ensembles import validity_radius
    return validity_radius(spec)


# 2 -------------------------------------------------------------------------

def test_c02_biconjugation(criterion):
    title = "biconjugation equals convex hull (100 profiles, 1e-8)"
    t0 = time.perf_counter()
    rng = np.random.default_rng(20250812)
    worst = 0.0
    for _ in range(100):
        nodes = int(rng.integers(8, 64))
        x = np.concatenate(([0.0], np.sort(rng.uniform(0.05, 4.0, nodes - 1))))
        v = rng.uniform(-3.0, 3.0, nodes)
        if rng.random() < 0.5:
            u = PiecewiseFn(x, v, TAIL_INFINITE)
        else:
            steep = float(np.max(np.diff(v) / np.diff(x)))
            u = PiecewiseFn(x, v, steep + rng.uniform(0.0, 2.0))
        back = fenchel_transform(fenchel_transform(u))
        worst = max(worst, float(np.max(np.abs(back(x) - convex_hull(u).v))))
    dt = time.perf_counter() - t0
    ok1 = criterion(2, title, "max gap over 100 profiles", worst <= 1e-8,
                    f"{worst:.3e}")
    ok2 = criterion(2, title, "runtime < 10 s", dt < 10.0, f"{dt:.2f}s")
    assert ok1 and ok2


# 3 -------------------------------------------------------------------------

def test_c03_gaussian_intensities(criterion):
    title = "exact mean zero counts, gaussian coefficients (3 SE, 200 seeds)"
    t0 = time.perf_counter()
    n_seeds = 200
    cases = [
        (EnsembleSpec.elliptic(0.5), 200, (0.5, 1.0, 2.0), None),
        (EnsembleSpec.flat(0.5), 200, (0.5, 1.0), 1.35),
        (EnsembleSpec.hyperbolic(0.5), 50, (0.3, 0.6), 0.75),
    ]
    oks = []
    for spec, n, radii, radius in cases:
        counts = np.zeros((n_seeds, len(radii)))
        for seed in range(n_seeds):
            zm = solve(spec, n, GAUSS, seed, radius=radius)
            for j, r in enumerate(radii):
                counts[seed, j] = float(np.sum(zm.mults[zm.radii <= r]))
        for j, r in enumerate(radii):
            want = gaussian_expected_count(spec.kind, n, r)
            got = float(np.mean(counts[:, j]))
            se = float(np.std(counts[:, j], ddof=1)) / math.sqrt(n_seeds)
            z = abs(got - want) / se
            oks.append(criterion(
                3, title, f"{spec.kind} n={n} r={r}", z <= 3.0,
                f"mean {got:.2f} vs {want:.2f}, {z:.2f} SE"))
    dt = time.perf_counter() - t0
    oks.append(criterion(3, title, "runtime < 10 min", dt < 600, f"{dt:.0f}s"))
    assert all(oks)


# 4 -------------------------------------------------------------------------

def test_c04_weyl_universality(criterion):
    title = "scaled factorial-schedule zeros fill the unit disk, any law"
    t0 = time.perf_counter()
    spec = EnsembleSpec.lo_poly("factorial", 0.5)
    n = 2000
    mu = limit_measure(u_profile(spec))
    factor = scaling(spec, n).factor
    laws = [GAUSS, CoeffLaw.rademacher(), CoeffLaw.log_pareto(4.0)]
    oks = []
    for law in laws:
        ksr, ksa = [], []
        for seed in range(5):
            zm = solve(spec, n, law, seed).scaled(factor)
            ksr.append(ks_radial(zm, mu, 1.0))
            ksa.append(ks_angular(zm, r_lo=0.2, r_hi=0.9))
        med_r = float(np.median(ksr))
        med_a = float(np.median(ksa))
        oks.append(criterion(4, title, f"{law.label()} median ks_radial",
                             med_r <= 0.05, f"{med_r:.4f}"))
        oks.append(criterion(4, title, f"{law.label()} median ks_angular",
                             med_a <= 0.05, f"{med_a:.4f}"))
    dt = time.perf_counter() - t0
    oks.append(criterion(4, title, "runtime < 15 min", dt < 900, f"{dt:.0f}s"))
    assert all(oks)


# 5 -------------------------------------------------------------------------

def test_c05_kac_concentration(criterion):
    title = "kac zeros concentrate on the unit circle"
    t0 = time.perf_counter()
    fracs = []
    for seed in range(5):
        zm = solve(EnsembleSpec.kac(), 2000, GAUSS, seed)
        r = np.repeat(zm.radii, zm.mults)
        fracs.append(float(np.mean((r > 0.9) & (r < 1.1))))
    med = float(np.median(fracs))
    dt = time.perf_counter() - t0
    ok1 = criterion(5, title, "median fraction in 0.9<|z|<1.1 >= 0.95",
                    med >= 0.95, f"{med:.4f}")
    ok2 = criterion(5, title, "runtime < 5 min", dt < 300, f"{dt:.0f}s")
    assert ok1 and ok2


# 6 -------------------------------------------------------------------------

def test_c06_three_circles(criterion):
    title = "three-circles schedule splits zeros equally across rings"
    t0 = time.perf_counter()
    spec = EnsembleSpec.three_circles()
    per_ring = {1.0: [], 2.0: [], 3.0: []}
    for seed in range(5):
        zm = solve(spec, 500, GAUSS, seed)
        r = np.repeat(zm.radii, zm.mults)
        for ring in per_ring:
            inside = (r >= 0.85 * ring) & (r <= 1.15 * ring)
            per_ring[ring].append(float(np.mean(inside)))
    oks = []
    for ring, vals in per_ring.items():
        med = float(np.median(vals))
        oks.append(criterion(6, title, f"ring {ring:g} mass 1/3 +- 0.05",
                             abs(med - 1.0 / 3.0) <= 0.05, f"{med:.4f}"))
    dt = time.perf_counter() - t0
    oks.append(criterion(6, title, "runtime < 5 min", dt < 300, f"{dt:.0f}s"))
    assert all(oks)


# 7 -------------------------------------------------------------------------

def test_c07_theta_split(criterion):
    title = "theta schedules: hollow center (a=2), disk filling (a=1/2)"
    t0 = time.perf_counter()
    inner, m2, m4 = [], [], []
    for seed in range(5):
        zm = solve(EnsembleSpec.theta(2.0), 500, GAUSS, seed, radius=4.6)
        inner.append(float(np.sum(zm.mults[zm.radii <= 0.95])) / zm.total)
        m2.append(float(np.sum(zm.mults[zm.radii <= 2.0])) / zm.n)
        m4.append(float(np.sum(zm.mults[zm.radii <= 4.0])) / zm.n)
    oks = [
        criterion(7, title, "a=2: fraction inside |z|<=0.95 <= 0.02",
                  float(np.median(inner)) <= 0.02,
                  f"{float(np.median(inner)):.4f}"),
        criterion(7, title, "a=2: mass at r=2 is (1/2)log 2 +- 0.1",
                  abs(float(np.median(m2)) - 0.5 * math.log(2.0)) <= 0.1,
                  f"{float(np.median(m2)):.4f}"),
        criterion(7, title, "a=2: mass at r=4 is (1/2)log 4 +- 0.1",
                  abs(float(np.median(m4)) - 0.5 * math.log(4.0)) <= 0.1,
                  f"{float(np.median(m4)):.4f}"),
    ]
    unit = []
    for seed in range(5):
        zm = solve(EnsembleSpec.theta(0.5), 500, GAUSS, seed, radius=0.7)
        r = np.repeat(zm.radii, zm.mults)
        unit.append(float(np.mean(r < 1.0)) if r.size else 1.0)
    oks.append(criterion(7, title,
                         "a=1/2: >= 0.98 of trusted zeros inside the disk",
                         float(np.median(unit)) >= 0.98,
                         f"{float(np.median(unit)):.4f}"))
    dt = time.perf_counter() - t0
    oks.append(criterion(7, title, "runtime < 10 min", dt < 600, f"{dt:.0f}s"))
    assert all(oks)


# 8 -------------------------------------------------------------------------

def test_c08_entire_lln(criterion):
    title = "zero counts of the factorial entire series track N(r)=r"
    t0 = time.perf_counter()
    spec = EnsembleSpec.lo_entire("factorial", 1.0)
    hits = 0
    ratios = []
    for seed in range(20):
        ((_, count),) = zero_count_lln(spec, GAUSS, [20.0], seed)
        ratios.append(count / 20.0)
        hits += 0.8 <= count / 20.0 <= 1.2
    dt = time.perf_counter() - t0
    ok1 = criterion(8, title, "N(20)/20 in [0.8, 1.2] for >= 16/20 seeds",
                    hits >= 16, f"{hits}/20, ratios {min(ratios):.2f}"
                    f"..{max(ratios):.2f}")
    ok2 = criterion(8, title, "runtime < 10 min", dt < 600, f"{dt:.0f}s")
    assert ok1 and ok2


# 9 -------------------------------------------------------------------------

def test_c09_potential_convergence(criterion):
    title = "log-potential of the flat series converges pointwise"
    t0 = time.perf_counter()
    spec = EnsembleSpec.flat(0.5)
    radii = np.linspace(0.3, 2.0, 10)
    golden = 2.0 * math.pi * 0.6180339887498949
    pts = radii * np.exp(1j * golden * np.arange(10))
    want = 0.5 * radii ** 2  # the conjugate at log|z|
    hits = 0
    for seed in range(50):
        poly = sample_series(spec, 1000, GAUSS, seed, radius=2.25)
        p = potential_profile(poly, pts)
        hits += int(np.sum(np.abs(p - want) <= 0.05))
    dt = time.perf_counter() - t0
    ok1 = criterion(9, title, ">= 400/500 (point, seed) pairs within 0.05",
                    hits >= 400, f"{hits}/500")
    ok2 = criterion(9, title, "runtime < 5 min", dt < 300, f"{dt:.0f}s")
    assert ok1 and ok2


# 10 ------------------------------------------------------------------------

def _gap_disk_radii(zm, count=4):
    """Contour radii in wide gaps of the sorted zero radii, off all zeros."""
    r = np.sort(np.repeat(zm.radii, zm.mults))
    r = r[r > 0]
    out = []
    for q in (0.125, 0.375, 0.625, 0.875):
        i = min(int(q * (r.size - 1)), r.size - 2)
        lo = max(0, i - 3)
        hi = min(r.size - 2, i + 3)
        j = lo + int(np.argmax(r[lo + 1: hi + 2] / r[lo: hi + 1]))
        if r[j + 1] > r[j] * (1.0 + 1e-9):
            out.append(math.sqrt(r[j] * r[j + 1]))
        else:
            out.append(r[j] * (1.0 + 1e-7))
    return out


def test_c10_solver_certification(criterion):
    title = "solved zero sets certified by products and contour counts"
    t0 = time.perf_counter()
    specs = [EnsembleSpec.kac(), EnsembleSpec.elliptic(0.5),
             EnsembleSpec.lo_poly("factorial", 0.5)]
    laws = [GAUSS, CoeffLaw.rademacher(), CoeffLaw.log_pareto(4.0)]
    trials = failures = 0
    notes = []
    for n in (30, 100, 500):
        for spec in specs:
            for law in laws:
                for seed in range(5):
                    trials += 1
                    poly = sample_series(spec, n, law, seed)
                    zm = find_zeros(poly)
                    rep = vieta_check(poly, zm)
                    good = rep["degree_ok"] and \
                        rep["log_product_error"] <= 1e-6
                    for rr in _gap_disk_radii(zm):
                        direct = int(np.sum(zm.mults[zm.radii <= rr]))
                        try:
                            good &= count_zeros_argument(poly, rr) == direct
                        except (ContourZeroError, NumericError):
                            good = False
                    if not good:
                        failures += 1
                        notes.append(f"{spec.kind}/{law.label()}"
                                     f"/n={n}/seed={seed}")
    rate = 1.0 - failures / trials
    dt = time.perf_counter() - t0
    ok1 = criterion(10, title, ">= 99% of 135 instances fully certified",
                    rate >= 0.99, f"{trials - failures}/{trials} "
                    + ",".join(notes[:3]))
    ok2 = criterion(10, title, "runtime < 10 min", dt < 600, f"{dt:.0f}s")
    assert ok1 and ok2


# 11 ------------------------------------------------------------------------

def test_c11_inverse_construction(criterion):
    title = "schedule rebuilt from a uniform-disk target reproduces it"
    t0 = time.perf_counter()
    s = np.linspace(-10.0, 0.0, 257)
    target = LimitMeasure(PiecewiseFn(s, np.exp(2.0 * s), 0.0), (), math.inf)
    spec = construct_ensemble(target, 1000)
    ks = []
    for seed in range(5):
        zm = solve(spec, 1000, GAUSS, seed)
        ks.append(ks_radial(zm, target, 1.0))
    med = float(np.median(ks))
    dt = time.perf_counter() - t0
    ok1 = criterion(11, title, "median ks_radial vs target <= 0.07",
                    med <= 0.07, f"{med:.4f}")
    ok2 = criterion(11, title, "runtime < 5 min", dt < 300, f"{dt:.0f}s")
    assert ok1 and ok2


# 12 ------------------------------------------------------------------------

def test_c12_szego_contrast(criterion):
    title = "deterministic partial sums hug the szego curve; random do not"
    t0 = time.perf_counter()
    from scipy.special import gammaln
    n = 200
    det = szego_curve_distance(szego_partial_sum_zeros(n))
    ks = np.arange(n + 1)
    lg, ar = GAUSS.sample_log(0, ks)
    rnd_poly = LogPoly(ks * math.log(n) - gammaln(ks + 1.0) + lg, ar, n=n)
    rnd = szego_curve_distance(find_zeros(rnd_poly))
    dt = time.perf_counter() - t0
    ok1 = criterion(12, title, "deterministic curve distance <= 0.05",
                    det <= 0.05, f"{det:.4f}")
    ok2 = criterion(12, title, "randomized curve distance >= 0.1",
                    rnd >= 0.1, f"{rnd:.4f}")
    ok3 = criterion(12, title, "runtime < 1 min", dt < 60, f"{dt:.0f}s")
    assert ok1 and ok2 and ok3
