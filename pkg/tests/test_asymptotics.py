"""Final-size function f, incomplete-gamma helpers, and zero classification."""

import math

import numpy as np
import pytest
import scipy.optimize
import scipy.special
import scipy.stats

from rumorlab.asymptotics import (
    asymptotic_summary,
    classify_zeros,
    f_eval,
    f_standard,
    gamma_lower,
    poisson_partial_mean,
    poisson_tail,
    rho,
    series_coefficients,
    sign_f,
    x_infinity,
    y_infinity,
)
from rumorlab.model import InitialConfiguration

STD = {k: InitialConfiguration.standard(k) for k in range(1, 9)}

# limiting ignorant fractions for the standard start, frozen from the root
# finder and double-checked against the incomplete-gamma form below
X_INF = {
    1: 0.2031878699797945,
    2: 0.1165860327582062,
    3: 0.0680168816203051,
}


def test_rho_hand_values():
    # standard start: only the j = 0 term survives, coefficient k - r + 1
    for k in (1, 2, 3, 5):
        for r in range(k):
            assert rho(r, STD[k]) == pytest.approx(k - r + 1)
    mixed = InitialConfiguration(x0=0.5, yi0=(0.3,), y0=0.1)
    assert rho(0, mixed) == pytest.approx(3 * 0.5 + 2 * 0.3)
    assert rho(1, mixed) == pytest.approx(2 * 0.5)


def test_f_at_x0_equals_y0():
    for init in (STD[2], InitialConfiguration(x0=0.8, yi0=(0.1,), y0=0.05)):
        assert f_eval(init.x0, init) == pytest.approx(init.y0, abs=1e-14)


def test_f_eval_domain():
    with pytest.raises(ValueError):
        f_eval(0.0, STD[1])
    with pytest.raises(ValueError):
        f_eval(1.0 + 1e-9, STD[1])
    small = InitialConfiguration(x0=0.5, yi0=(), y0=0.2)
    with pytest.raises(ValueError):
        f_eval(0.6, small)  # above x0


def test_f_eval_vectorized():
    xs = np.array([0.05, 0.2, 0.9])
    vals = f_eval(xs, STD[2])
    assert vals.shape == xs.shape
    for x, v in zip(xs, vals):
        assert f_eval(float(x), STD[2]) == pytest.approx(v, abs=1e-15)


@pytest.mark.parametrize("k", [1, 2, 3, 4, 6, 8])
def test_gamma_lower_against_scipy(k):
    # scipy's regularized P(k, t) times (k-1)! is the same integral
    for t in np.geomspace(1e-3, 60.0, 50):
        mine = gamma_lower(k, float(t))
        ref = scipy.special.gammainc(k, t) * math.factorial(k - 1)
        assert mine == pytest.approx(ref, rel=3e-13, abs=1e-300)
    assert gamma_lower(k, 0.0) == 0.0


def test_gamma_lower_validation():
    with pytest.raises(ValueError):
        gamma_lower(0, 1.0)
    with pytest.raises(ValueError):
        gamma_lower(2, -0.5)


@pytest.mark.parametrize("k", [1, 2, 3, 5, 8, 12])
def test_gamma_recurrence_residual(k):
    # gamma(k+1, t) = k gamma(k, t) - t^k e^{-t}, residual taken relative
    # to the largest participating magnitude
    for t in np.geomspace(1e-2, 50.0, 40):
        t = float(t)
        lhs = gamma_lower(k + 1, t)
        direct = math.exp(k * math.log(t) - t)
        rhs = k * gamma_lower(k, t) - direct
        scale = max(abs(lhs), abs(direct), k * gamma_lower(k, t))
        assert abs(lhs - rhs) <= 1e-12 * scale


@pytest.mark.parametrize("k", [1, 2, 4, 7])
def test_poisson_tail_and_partial_mean(k):
    for t in (0.3, 1.0, 2.7, 9.0):
        tail = poisson_tail(k, t)
        assert tail == pytest.approx(scipy.stats.poisson.sf(k - 1, t), rel=1e-12)
        # explicit truncated series for E[R; R > k]
        j = np.arange(k + 1, k + 200)
        ref = float(np.sum(j * scipy.stats.poisson.pmf(j, t)))
        assert poisson_partial_mean(k, t) == pytest.approx(ref, rel=1e-11)
        # complementary split of the full mean
        head = float(np.sum(np.arange(0, k + 1) * scipy.stats.poisson.pmf(np.arange(0, k + 1), t)))
        assert head + poisson_partial_mean(k, t) == pytest.approx(t, rel=1e-12)


@pytest.mark.parametrize("k", [1, 2, 3, 5, 8])
def test_f_standard_matches_f_eval(k):
    xs = np.geomspace(1e-6, 1.0, 200)
    a = f_eval(xs, STD[k])
    b = f_standard(xs, k)
    assert np.max(np.abs(a - b)) <= 1e-12


def test_series_is_exponential_rescaling_of_f():
    # sum a_n t^n reproduces e^t f(x0 e^{-t}) for any configuration
    for init in (
        STD[1],
        STD[3],
        InitialConfiguration(x0=0.9, yi0=(0.05,), y0=0.02),
        InitialConfiguration(x0=0.6, yi0=(0.1, 0.05), y0=0.08),
    ):
        a = np.array(series_coefficients(init, n_max=70))
        for t in (0.05, 0.3, 1.0, 2.5, 6.0):
            series = float(np.polynomial.polynomial.polyval(t, a))
            direct = math.exp(t) * f_eval(init.x0 * math.exp(-t), init)
            assert series == pytest.approx(direct, abs=1e-10 * math.exp(t))


def test_series_coefficient_formulas():
    init = InitialConfiguration(x0=0.7, yi0=(0.1,), y0=0.05)
    a = series_coefficients(init, n_max=8)
    r0 = rho(0, init)
    assert a[0] == pytest.approx(init.y0)
    assert a[1] == pytest.approx(init.y0 + r0 - rho(1, init) - 1)
    for n in range(2, 9):  # k = 2, so plain form from n = 2 on
        assert a[n] == pytest.approx((init.y0 + r0 - n) / math.factorial(n))
    with pytest.raises(ValueError):
        series_coefficients(init, n_max=2)  # needs at least k + 2


def test_sign_f_agrees_with_f_away_from_zeros():
    init = STD[2]
    xs = np.geomspace(1e-4, 0.99, 300)
    f = f_eval(xs, init)
    s = sign_f(xs, init)
    big = np.abs(f) > 1e-9
    assert np.array_equal(s[big], np.sign(f[big]))


@pytest.mark.parametrize("k", [2, 3, 5])
def test_sign_f_stable_just_below_one(k):
    # f(1) = 0 and f ~ t^k/k! > 0 immediately below (t = -ln x); the plain
    # formula is pure cancellation noise there, the series sign is not
    assert sign_f(1.0 - 1e-13, STD[k]) == 1.0
    assert sign_f(1.0 - 1e-14, STD[k]) == 1.0


@pytest.mark.parametrize("k", [1, 2, 3])
def test_x_infinity_golden(k):
    assert x_infinity(STD[k]) == pytest.approx(X_INF[k], abs=1e-10)


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5, 6])
def test_x_infinity_is_a_root_with_negative_left_side(k):
    xi = x_infinity(STD[k])
    assert abs(f_eval(xi, STD[k])) <= 1e-9
    assert f_eval(xi * (1.0 - 1e-6), STD[k]) < 0.0


@pytest.mark.parametrize("k", [1, 2, 3, 4, 6])
def test_x_infinity_agrees_with_gamma_form_root(k):
    # independent location of the same root through the gamma-form profile
    ref = scipy.optimize.brentq(lambda x: f_standard(x, k), 1e-8, 0.9, xtol=1e-14)
    assert x_infinity(STD[k]) == pytest.approx(ref, abs=1e-10)


def test_y_infinity_golden_and_conservation():
    xi2 = x_infinity(STD[2])
    y2, z2 = y_infinity(STD[2], xi2)
    assert y2[0] == pytest.approx(0.2505580509093856, abs=1e-10)
    assert xi2 + sum(y2) + z2 == pytest.approx(1.0, abs=1e-12)

    xi3 = x_infinity(STD[3])
    y3, z3 = y_infinity(STD[3], xi3)
    assert y3[0] == pytest.approx(0.1828293332779973, abs=1e-10)
    assert y3[1] == pytest.approx(0.2457225640942805, abs=1e-10)
    assert xi3 + sum(y3) + z3 == pytest.approx(1.0, abs=1e-12)


def test_y_infinity_formula_direct():
    # y_{i,inf} = (x_inf/x0) sum_{r<=i} y_{i-r,0} L^r / r!, with y_{0,0} = x0
    init = InitialConfiguration(x0=0.9, yi0=(0.04, 0.02), y0=0.01)
    xi = x_infinity(init)
    L = math.log(init.x0 / xi)
    y00 = (init.x0, *init.yi0)
    got, _ = y_infinity(init, xi)
    for i in range(1, init.k):
        want = (xi / init.x0) * sum(
            y00[i - r] * L**r / math.factorial(r) for r in range(i + 1)
        )
        assert got[i - 1] == pytest.approx(want, rel=1e-12)


@pytest.mark.parametrize("k", list(range(1, 9)))
def test_standard_zero_structure(k):
    cls = classify_zeros(STD[k], scan_points=50_000)
    assert cls.sign_changes == 1
    assert cls.family_case == "standard"
    assert cls.theorem_counts == (2,)
    assert len(cls.zeros) == 2
    assert cls.zeros[1] == pytest.approx(1.0, abs=1e-12)
    assert cls.zeros[0] == pytest.approx(x_infinity(STD[k]), abs=1e-8)
    assert cls.boundary_zero  # y0 = 0, so f(x0) = 0


def test_unique_zero_at_x0_family():
    for k, x0 in [(1, 0.5), (2, 0.6), (2, 2.0 / 3.0), (3, 0.7)]:
        init = InitialConfiguration(x0=x0, yi0=(0.0,) * (k - 1), y0=0.0)
        cls = classify_zeros(init, scan_points=50_000)
        assert cls.family_case == "unique-zero-at-x0"
        assert cls.theorem_counts == (1,)
        assert cls.zeros == (pytest.approx(x0, abs=1e-12),)


def test_one_or_three_with_x0_family():
    init = InitialConfiguration(x0=0.9, yi0=(0.0,), y0=0.0)
    cls = classify_zeros(init, scan_points=50_000)
    assert cls.family_case == "one-or-three-with-x0"
    assert cls.theorem_counts == (1, 3)
    assert len(cls.zeros) in (1, 3)
    assert cls.boundary_zero


def test_unique_interior_zero_family():
    init = InitialConfiguration(x0=0.3, yi0=(0.0,), y0=0.05)
    cls = classify_zeros(init, scan_points=50_000)
    assert cls.family_case == "unique-interior-zero"
    assert cls.theorem_counts == (1,)
    assert len(cls.zeros) == 1
    assert not cls.boundary_zero
    assert abs(f_eval(cls.zeros[0], init)) <= 1e-9


def test_one_or_three_interior_profiles():
    # two seeded k = 3 profiles with the same x0 but different y0 land on
    # opposite sides of the fold: one root vs three
    lo = InitialConfiguration(x0=0.95, yi0=(0.0, 0.0), y0=0.02)
    cls_lo = classify_zeros(lo)
    assert cls_lo.family_case == "one-or-three-interior"
    assert len(cls_lo.zeros) == 1
    assert cls_lo.zeros[0] == pytest.approx(0.10905134, abs=1e-6)

    hi = InitialConfiguration(x0=0.95, yi0=(0.0, 0.0), y0=0.01)
    cls_hi = classify_zeros(hi)
    assert cls_hi.family_case == "one-or-three-interior"
    assert len(cls_hi.zeros) == 3
    for z, want in zip(cls_hi.zeros, (0.11751935, 0.48906296, 0.75418027)):
        assert z == pytest.approx(want, abs=1e-6)
    # every located zero is a genuine root
    for z in cls_hi.zeros:
        assert abs(f_eval(z, hi)) <= 1e-9


def test_possible_counts_parity():
    cls = classify_zeros(STD[4], scan_points=20_000)
    c = cls.sign_changes
    assert cls.possible_interior_counts == tuple(range(c, -1, -2))


def test_degenerate_summary():
    init = InitialConfiguration(x0=0.6, yi0=(0.0,), y0=0.0)
    s = asymptotic_summary(init)
    assert s.degenerate
    assert s.x_inf == pytest.approx(0.6)
    assert s.tau_inf == 0.0
    assert s.y_inf == (pytest.approx(0.0),)
    assert s.z_inf == pytest.approx(0.4)


def test_summary_bundle_consistency():
    s = asymptotic_summary(STD[3])
    assert not s.degenerate
    assert s.k == 3
    assert s.x_inf == pytest.approx(X_INF[3], abs=1e-10)
    assert s.tau_inf == pytest.approx(math.log(1.0 / s.x_inf), rel=1e-12)
    assert s.zero_count_bound == (2,)
    assert s.x_inf + sum(s.y_inf) + s.z_inf == pytest.approx(1.0, abs=1e-12)
