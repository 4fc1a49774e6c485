import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from subharmonics.poincare import fixed_points
from subharmonics.twoperiodic import (
    curvature_diagnostic, eval_dphi2, eval_phi2, pitchfork_data, solve_2T, trace_2T_curve,
)


def oracle_phi(A, B, x):
    """The reduced 2T equation written with the raw exponential ratio, no tanh."""
    e = mpmath.exp((1 - x) * A)
    return x * (mpmath.exp((e - 1) / (e + 1) * B) + 1) - 2


def mp(q):
    q = Fraction(q)
    return mpmath.mpf(q.numerator) / q.denominator


def _bisect(f, a, b, steps=200):
    fa = f(a)
    for _ in range(steps):
        m = (a + b) / 2
        fm = f(m)
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return (a + b) / 2


def oracle_zeros(A, B):
    mpmath.mp.dps = 60
    f = lambda x: oracle_phi(mp(A), mp(B), x)  # noqa: E731
    # one zero on each side of the trivial one; stay clear of x = 1 itself
    eps = mpmath.mpf(10) ** -12
    return _bisect(f, mpmath.mpf(0), 1 - eps), _bisect(f, 1 + eps, mpmath.mpf(2))


def _has(z, value, slack=mpmath.mpf(10) ** -50):
    # slack covers the 60-digit oracle, which is coarser than our enclosures
    return mp(z.lo) - slack <= value <= mp(z.hi) + slack


def test_phi_boundary_values():
    for A, B in ((3, 3), (Fraction(1, 2), 7), (4, Fraction(101, 100))):
        assert eval_phi2(A, B, 0).contains(-2)
        assert eval_phi2(A, B, 1).contains(0)
        assert eval_phi2(A, B, 2).sign() == 1


@given(st.builds(Fraction, st.integers(1, 500), st.just(100)), st.builds(Fraction, st.integers(1, 500), st.just(100)),
       st.builds(Fraction, st.integers(0, 200), st.just(100)))
@settings(max_examples=150, deadline=None)
def test_phi_matches_raw_form(A, B, x):
    mpmath.mp.dps = 50
    ref = oracle_phi(mpmath.mpf(A.numerator) / A.denominator, mpmath.mpf(B.numerator) / B.denominator,
                     mpmath.mpf(x.numerator) / x.denominator)
    enc = eval_phi2(A, B, x, prec=200)
    assert enc.lo - mpmath.mpf(10) ** -45 <= ref <= enc.hi + mpmath.mpf(10) ** -45
    mpmath.mp.dps = 15


@pytest.mark.parametrize("A,B", [(3, 3), (4, Fraction(101, 100)), (Fraction(1, 2), 9), (2, 50)])
def test_two_zeros_match_oracle(A, B):
    res = solve_2T(A, B)
    assert len(res) == 2
    z1, z2 = res.zeros
    assert z1.hi < 1 < z2.lo
    r1, r2 = oracle_zeros(A, B)
    assert _has(z1, r1) and _has(z2, r2)
    for s in res.states:
        assert s.slope.sign() == 1
        assert s.symmetry_holds()
        assert 0 < s.u0.lo and s.u0.hi < 2
    mpmath.mp.dps = 15


@pytest.mark.parametrize("A,B", [(Fraction(19, 10), Fraction(19, 10)), (1, 4), (2, 2), (Fraction(1, 10), 3)])
def test_no_zeros_up_to_threshold(A, B):
    assert len(solve_2T(A, B)) == 0


def test_random_multiplicity():
    rng = random.Random(11)
    for _ in range(25):
        A = Fraction(rng.randint(10, 1000), 100)
        assert len(solve_2T(A, 4 / A * Fraction(rng.randint(1001, 4000), 1000))) == 2
        assert len(solve_2T(A, 4 / A * Fraction(rng.randint(100, 1000), 1000))) == 0


def test_symmetric_case_agrees_with_fixed_points():
    for A in (Fraction(5, 2), 3, Fraction(7, 2)):
        res = solve_2T(A, A)
        fp = fixed_points(2, A).nontrivial()
        assert len(fp) == 2
        for z, p in zip(res.zeros, fp):
            assert z.lo <= p.hi and p.lo <= z.hi


def test_pitchfork_values():
    pf = pitchfork_data(2)
    assert pf.B_crit == 2
    assert pf.dphi_at_1 == 0 and pf.d2phi_at_1 == 0
    assert pitchfork_data(2, 3).dphi_at_1 == 2 - Fraction(6, 2)


@pytest.mark.parametrize("A", [Fraction(1, 2), 1, 2, 3])
def test_third_derivative_against_finite_differences(A):
    pf = pitchfork_data(A)
    mpmath.mp.dps = 50
    a = mp(A)
    b = 4 / a
    fd = mpmath.diff(lambda x: oracle_phi(a, b, x), 1, 3)
    assert abs(fd - mp(pf.d3phi_at_1)) < mpmath.mpf(10) ** -20
    mpmath.mp.dps = 15


def test_dphi_at_one_is_linearization():
    for A, B in ((3, 3), (1, 2)):
        assert eval_dphi2(A, B, 1).contains(pitchfork_data(A, B).dphi_at_1)


def test_curve_monotone_and_limits():
    curve = trace_2T_curve(2, 50, steps=30, spacing="geometric")
    assert not curve.failures
    assert curve.is_monotone()
    lo, up = curve.lower_branch(), curve.upper_branch()
    assert float(lo[0][1]) > 0.5 and float(up[0][1]) < 1.5
    assert float(lo[-1][1]) < 0.05 and float(up[-1][1]) > 1.95
    rows = curve.to_csv().strip().splitlines()
    assert rows[0] == "B,z1_lo,z1_hi,z2_lo,z2_hi" and len(rows) == 31


def test_curve_rejects_bad_range():
    with pytest.raises(ValueError):
        trace_2T_curve(2, 2)


def test_curvature_dichotomy():
    for A, B in ((3, 3), (2, 5), (4, Fraction(101, 100))):
        diag = curvature_diagnostic(A, B)
        assert diag
        for z, sign in diag:
            assert sign == (-1 if z.hi < 1 else 1)
