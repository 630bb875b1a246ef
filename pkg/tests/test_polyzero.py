import math

import mpmath
import numpy as np
import pytest

from randzeros.ensembles import EnsembleSpec
from randzeros.errors import ContourZeroError, ValidationError
from randzeros.polyzero import (LogPoly, ZeroMeasure, count_zeros_argument,
                                eval_log, find_zeros, newton_polygon_rings,
                                newton_polygon_roots, vieta_check)
from randzeros.sampling import CoeffLaw, sample_series


def mp_eval_log(log_mag, phase, z, dps=60):
    """Oracle: evaluate sum exp(lm + i ph) z^k in 60-digit arithmetic."""
    with mpmath.workdps(dps):
        acc = mpmath.mpc(0)
        zz = mpmath.mpc(z)
        for k in range(len(log_mag)):
            if math.isinf(log_mag[k]):
                continue
            a = mpmath.exp(mpmath.mpc(log_mag[k], phase[k]))
            acc += a * zz ** k
        return float(mpmath.log(abs(acc))), float(mpmath.arg(acc))


# -- evaluation -------------------------------------------------------------

def test_eval_log_simple_values():
    p = LogPoly.from_coeffs([1.0, 0.0, 1.0])  # 1 + z^2
    la, _ = eval_log(p, 1.0 + 0.0j)
    assert la == pytest.approx(math.log(2.0), abs=1e-14)
    la, _ = eval_log(p, 1j)
    assert la < -30.0  # sits on a zero up to rounding
    q = LogPoly.from_coeffs([0.0, 0.0, 1.0])  # z^2
    la, ar = eval_log(q, 3.0 + 0.0j)
    assert la == pytest.approx(2.0 * math.log(3.0), abs=1e-14)
    assert ar == pytest.approx(0.0, abs=1e-14)
    const = LogPoly.from_coeffs([2.0])
    la, _ = eval_log(const, 123.0 + 4.0j)
    assert la == pytest.approx(math.log(2.0), abs=1e-14)


def test_eval_log_matches_mpmath_at_extreme_scales():
    # coefficient magnitudes spanning e^{+-5000}: linear scale would overflow
    rng = np.random.default_rng(5)
    lm = rng.uniform(-5000.0, 5000.0, 41)
    ph = rng.uniform(-math.pi, math.pi, 41)
    p = LogPoly(lm, ph, n=40)
    for z in (0.3 + 0.2j, -1.1 + 0.7j, 2.0 - 0.1j):
        la, ar = eval_log(p, z)
        la0, ar0 = mp_eval_log(lm, ph, z)
        assert la == pytest.approx(la0, rel=1e-10, abs=1e-10)
        assert math.cos(ar - ar0) == pytest.approx(1.0, abs=1e-10)


def test_eval_log_vectorized_agrees_with_scalar():
    p = LogPoly.from_coeffs([1.0, -2.5, 0.0, 1.0j])
    zs = np.array([0.5 + 0.1j, -0.3 + 0.9j, 2.0 + 0.0j])
    la, ar = eval_log(p, zs)
    for i, z in enumerate(zs):
        sla, sar = eval_log(p, z)
        assert sla == la[i]
        assert sar == ar[i]


# -- ring estimates ------------------------------------------------------------

def test_newton_polygon_rings_simple():
    p = LogPoly.from_coeffs([1.0, 0.0, 1.0])  # 1 + z^2
    rings = newton_polygon_rings(p)
    assert len(rings) == 1
    r, cnt = rings[0]
    assert cnt == 2
    assert r == pytest.approx(1.0)


def test_newton_polygon_rings_tiny_root():
    # 1 + z/eps has its root at -eps, far below float underflow in |a_1|
    p = LogPoly(np.array([0.0, 100.0]), np.zeros(2), n=1)
    ((r, cnt),) = newton_polygon_rings(p)
    assert cnt == 1
    assert math.log(r) == pytest.approx(-100.0)


def test_newton_polygon_counts_sum_to_degree():
    p = sample_series(EnsembleSpec.three_circles(), 5, CoeffLaw.rademacher(),
                      seed=2)
    rings = newton_polygon_rings(p)
    assert sum(c for _, c in rings) == p.degree
    radii = [r for r, _ in rings]
    # unit-magnitude draws leave the hull alone: rings at the schedule circles
    assert min(radii) == pytest.approx(1.0, rel=0.3)
    assert max(radii) == pytest.approx(3.0, rel=0.3)
    guesses, origin_mult = newton_polygon_roots(p)
    assert guesses.size + origin_mult == p.degree
    assert origin_mult == 0


# -- the solver ----------------------------------------------------------------

def test_find_zeros_quadratic():
    zm = find_zeros(LogPoly.from_coeffs([1.0, 0.0, 1.0]))
    assert zm.total == 2
    got = np.sort_complex(zm.zeros)
    np.testing.assert_allclose(got, [-1j, 1j], atol=1e-12)


def test_find_zeros_double_root():
    zm = find_zeros(LogPoly.from_coeffs([1.0, -2.0, 1.0]))  # (z-1)^2
    assert zm.total == 2
    assert zm.zeros.size == 1
    assert zm.mults[0] == 2
    assert zm.zeros[0] == pytest.approx(1.0, abs=1e-6)


def test_find_zeros_origin_deflation():
    zm = find_zeros(LogPoly.from_coeffs([0.0, 0.0, 1.0, 1.0]))  # z^2 (z+1)
    by_r = np.argsort(np.abs(zm.zeros))
    assert zm.total == 3
    assert zm.zeros[by_r[0]] == 0.0
    assert zm.mults[by_r[0]] == 2
    assert zm.zeros[by_r[1]] == pytest.approx(-1.0, abs=1e-12)


def test_find_zeros_certificates_and_vieta():
    p = sample_series(EnsembleSpec.kac(), 30, CoeffLaw.rademacher(), seed=7)
    zm = find_zeros(p)
    assert zm.total == 30
    assert np.all(zm.certificates <= math.log(1e-8))
    rep = vieta_check(p, zm)
    assert rep["degree_ok"]
    assert rep["log_product_error"] <= 1e-6


def test_find_zeros_conjugate_symmetry():
    # real coefficients: the zero set is closed under conjugation
    p = sample_series(EnsembleSpec.kac(), 80, CoeffLaw.rademacher(), seed=3)
    zm = find_zeros(p)
    zs = np.repeat(zm.zeros, zm.mults)
    for z in zs:
        assert np.min(np.abs(zs - np.conj(z))) < 1e-9


def test_find_zeros_scaling_equivariance():
    # multiplying coefficient k by c^k divides every zero by c
    base = sample_series(EnsembleSpec.kac(), 40, CoeffLaw.complex_gaussian(),
                         seed=11)
    for log_c in (-5.0, 0.0, 5.0):
        ks = np.arange(base.log_mag.size)
        scaled = LogPoly(base.log_mag + ks * log_c, base.phase, n=base.n)
        a = np.sort(np.abs(find_zeros(base).radii))
        b = np.sort(np.abs(find_zeros(scaled).radii)) * math.exp(log_c)
        np.testing.assert_allclose(a, b, rtol=1e-8)


def test_find_zeros_total_is_degree():
    for seed in range(3):
        p = sample_series(EnsembleSpec.elliptic(0.5), 60,
                          CoeffLaw.complex_gaussian(), seed=seed)
        assert find_zeros(p).total == 60


def test_find_zeros_trust_filter():
    p = sample_series(EnsembleSpec.flat(0.5), 50, CoeffLaw.complex_gaussian(),
                      seed=1, radius=1.5, trust_factor=0.9)
    zm = find_zeros(p)
    assert zm.trust_radius == pytest.approx(1.35)
    assert np.all(zm.radii <= 1.35 * (1.0 + 1e-9))
    assert zm.total < p.degree  # the far cloud was dropped


def test_vieta_exact_quadratic():
    p = LogPoly.from_coeffs([2.0, -3.0, 1.0])  # (z-1)(z-2)
    zm = find_zeros(p)
    rep = vieta_check(p, zm)
    assert rep["degree_ok"]
    assert rep["log_product_error"] <= 1e-12


def test_vieta_detects_perturbation():
    p = sample_series(EnsembleSpec.kac(), 25, CoeffLaw.complex_gaussian(),
                      seed=5)
    zm = find_zeros(p)
    base = vieta_check(p, zm)["log_product_error"]
    bumped = ZeroMeasure(zm.zeros * 1.01, zm.mults, zm.n, zm.trust_radius,
                         zm.certificates)
    worse = vieta_check(p, bumped)["log_product_error"]
    assert worse > base + 0.2  # 25 * log 1.01 = 0.249


def test_vieta_lo_poly_high_degree():
    p = sample_series(EnsembleSpec.lo_poly("factorial", 0.5), 100,
                      CoeffLaw.complex_gaussian(), seed=9)
    zm = find_zeros(p)
    rep = vieta_check(p, zm)
    assert rep["degree_ok"]
    assert rep["log_product_error"] <= 1e-6


# -- argument-principle counts ---------------------------------------------------

def test_winding_monomial_and_quadratic():
    assert count_zeros_argument(LogPoly.from_coeffs([0.0, 0.0, 0.0, 1.0]),
                                1.0) == 3
    p = LogPoly.from_coeffs([1.0, 0.0, 1.0])
    assert count_zeros_argument(p, 2.0) == 2
    assert count_zeros_argument(p, 0.5) == 0


def test_winding_cross_checks_direct_solver():
    p = sample_series(EnsembleSpec.kac(), 50, CoeffLaw.complex_gaussian(),
                      seed=21)
    zm = find_zeros(p)
    for r in (0.5, 0.9, 1.1, 2.0):
        direct = int(np.sum(zm.mults[zm.radii <= r]))
        assert count_zeros_argument(p, r) == direct


def test_winding_raises_when_zeros_pin_the_contour():
    # zeros planted at the contour radius and at all three jitter fallbacks
    r = 1.0
    roots = []
    for i in range(4):
        rho = r * (1.0 + (1e-4 * i if i % 2 else -1e-4 * i))
        roots += [rho * np.exp(2j * math.pi * (i / 4.0)),
                  rho * np.exp(2j * math.pi * (i / 4.0 + 0.5))]
    coeffs = np.poly(np.array(roots))[::-1]
    p = LogPoly.from_coeffs(coeffs)
    with pytest.raises(ContourZeroError):
        count_zeros_argument(p, r)


def test_winding_outside_trust_raises():
    p = sample_series(EnsembleSpec.flat(0.5), 30, CoeffLaw.complex_gaussian(),
                      seed=0, radius=1.0)
    with pytest.raises(ValidationError):
        count_zeros_argument(p, 5.0)


# -- validation -----------------------------------------------------------------

def test_logpoly_validation():
    with pytest.raises(ValidationError):
        LogPoly(np.array([0.0, math.inf]), np.zeros(2), n=1)
    with pytest.raises(ValidationError):
        LogPoly(np.array([0.0, -math.inf]), np.zeros(2), n=1)  # -inf leading
    with pytest.raises(ValidationError):
        LogPoly(np.array([0.0, 1.0]), np.zeros(3), n=1)
    with pytest.raises(ValidationError):
        LogPoly(np.array([0.0, 1.0]), np.zeros(2), n=0)
    with pytest.raises(ValidationError):
        LogPoly(np.array([0.0, 1.0]), np.zeros(2), n=5, trust_radius=0.0)
    with pytest.raises(ValidationError):
        LogPoly.from_coeffs([0.0])


def test_zero_measure_scaled():
    zm = ZeroMeasure(np.array([1.0 + 1j]), np.array([2]), n=2,
                     trust_radius=4.0)
    half = zm.scaled(0.5)
    assert half.zeros[0] == 0.5 + 0.5j
    assert half.trust_radius == 2.0
    assert half.total == 2
