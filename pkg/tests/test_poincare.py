import math
import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from subharmonics.interval import PrecisionExhausted, PrecisionInterval, PrecisionPolicy
from subharmonics.poincare import (
    EvalContext, ForcingProfile, eval_dphi_dx, eval_E, eval_phi, fixed_points, fixed_points_csv,
    iterate_oracle, oracle_monodromy, orbit, period_sums, phi_and_derivative, poincare_map, trajectory,
)
from subharmonics.polychain import ChainContext

solve_ivp = pytest.importorskip("scipy.integrate").solve_ivp

pos_A = st.builds(Fraction, st.integers(1, 400), st.just(100))
pos_x = st.builds(Fraction, st.integers(1, 200), st.just(100))


def test_E_examples():
    assert eval_E(1, 2, Fraction(1, 2)).contains(PrecisionInterval(1).exp())
    for n in range(12):
        assert eval_E(n, 3, 1).contains(1)
        assert eval_E(n, 0, Fraction(7, 10)).contains(1)


def test_map_examples():
    s = poincare_map(1, 2, Fraction(1, 2))
    mpmath.mp.dps = 40
    assert s.u.lo <= mpmath.e / 2 <= s.u.hi
    mpmath.mp.dps = 15
    one = poincare_map(5, Fraction(13, 10), 1)
    assert one.u.contains(1) and one.v.contains(1)


def test_oracle_examples():
    s = oracle_monodromy(1, 1, 3, Fraction(1, 2))
    assert s.u.contains(1) and s.v.contains(1)
    s = oracle_monodromy(Fraction(3, 7), 1, 2, 5)
    assert s.u.contains(Fraction(3, 7))


@given(st.integers(1, 12), pos_A, pos_x)
@settings(max_examples=100, deadline=None)
def test_map_matches_iterated_oracle(n, A, x):
    assert poincare_map(n, A, x).overlaps(iterate_oracle(n, x, x, A, A))


def test_phi_examples():
    for n in range(1, 8):
        assert eval_phi(n, Fraction(27, 10), 0).contains(-n)
        assert eval_phi(n, 0, Fraction(3, 5)).contains(n * (Fraction(3, 5) - 1))
    assert eval_dphi_dx(1, 3, Fraction(1, 3)).contains(1)
    assert eval_dphi_dx(2, 4, 1).contains(-2)


def test_linearization_on_random_A():
    chain = ChainContext(20)
    rng = random.Random(7)
    for _ in range(20):
        A = Fraction(rng.randint(1, 4000), 1000)
        for n in range(1, 21):
            assert eval_dphi_dx(n, A, 1).contains(chain[n](A))


def _mid(iv):
    return iv.mid


@pytest.mark.parametrize("n,A,x", [(3, Fraction(3, 2), Fraction(7, 10)), (5, 2, Fraction(6, 5)), (7, 1, Fraction(1, 2))])
def test_derivatives_match_finite_differences(n, A, x):
    mpmath.mp.prec = 256
    h = Fraction(1, 10 ** 12)
    f = lambda q: _mid(eval_phi(n, A, q, policy=PrecisionPolicy(256, 256)))  # noqa: E731
    fd = (f(x + h) - f(x - h)) / (2 * mpmath.mpf(h.numerator) / h.denominator)
    d = _mid(eval_dphi_dx(n, A, x, policy=PrecisionPolicy(256, 256)))
    err = abs(fd - d) / max(1, abs(d))
    assert err < 1e-18
    ctx = EvalContext(PrecisionInterval(A, prec=256), PrecisionInterval(x, prec=256), derivatives=2, wrt_A=True)
    d2 = ctx.d2phi(n).mid
    fd2 = (f(x + h) - 2 * f(x) + f(x - h)) / (mpmath.mpf(h.numerator) / h.denominator) ** 2
    assert abs(fd2 - d2) / max(1, abs(d2)) < 1e-8
    g = lambda a: _mid(eval_phi(n, a, x, policy=PrecisionPolicy(256, 256)))  # noqa: E731
    fdA = (g(A + h) - g(A - h)) / (2 * mpmath.mpf(h.numerator) / h.denominator)
    assert abs(fdA - ctx.dphi_dA(n).mid) / max(1, abs(fdA)) < 1e-18
    mpmath.mp.prec = 53


def test_phi_and_derivative_consistent():
    A, x = PrecisionInterval(Fraction(5, 2)), PrecisionInterval(Fraction(4, 5))
    f, d = phi_and_derivative(4, A, x)
    assert f.overlaps(eval_phi(4, Fraction(5, 2), Fraction(4, 5)))
    assert d.overlaps(eval_dphi_dx(4, Fraction(5, 2), Fraction(4, 5)))


def test_precision_target_escalates_or_raises():
    tight = eval_phi(5, 5, Fraction(1, 10), target=Fraction(1, 10 ** 40), relative=True)
    lo, hi = tight.endpoints_fraction()
    assert (hi - lo) <= abs(lo) * Fraction(1, 10 ** 40)
    with pytest.raises(PrecisionExhausted):
        eval_phi(6, 5, Fraction(1, 10), target=Fraction(1, 10 ** 60), policy=PrecisionPolicy(64, 128))


def test_fixed_points_two_three():
    fp = fixed_points(2, 3)
    xs = [float(p) for p in fp]
    assert len(fp) == 3 and fp.trivial_isolated
    assert 0 < xs[0] < 1 == xs[1] < xs[2] < 2
    assert all(p.hi - p.lo <= Fraction(1, 10 ** 20) for p in fp)


def test_fixed_points_below_threshold():
    fp = fixed_points(2, 1)
    assert [p.trivial for p in fp] == [True]


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_fixed_points_contain_one_and_pair_up(n):
    fp = fixed_points(n, 3)
    assert any(p.trivial and p.contains(1) for p in fp)
    for p in fp.nontrivial():
        assert eval_phi(n, 3, p.interval()).contains_zero()
        u_sum, v_sum = period_sums(n, 3, p.interval())
        assert u_sum.contains(n) and v_sum.contains(n)


@pytest.mark.parametrize("n", range(2, 7))
def test_orbit_symmetry(n):
    for p in fixed_points(n, 3, Fraction(1, 10 ** 25)).nontrivial():
        states = orbit(n, 3, p.interval())
        for h in range(1, n):
            assert states[h].u.overlaps(states[n - h].v)


def test_tangential_parameter_keeps_trivial_point():
    # A = 2 is a root of p_4, so x = 1 is degenerate there
    fp = fixed_points(4, 2)
    assert not fp.trivial_isolated
    assert sum(p.trivial for p in fp) == 1


def test_fixed_points_csv():
    text = fixed_points_csv([fixed_points(2, 3)])
    lines = text.strip().splitlines()
    assert lines[0] == "n,A,x_lo,x_hi,residual_width"
    assert len(lines) == 4


def _integrate(profile, u0, v0, t_end):
    f = lambda t, y: [profile.alpha(t) * y[0] * (1 - y[1]), profile.beta(t) * y[1] * (y[0] - 1)]  # noqa: E731
    T = float(profile.T)
    # split at T/2 where the forcing switches off and on
    y = [float(u0), float(v0)]
    for a, b in ((0, min(t_end, T / 2)), (T / 2, t_end)):
        if b > a:
            y = solve_ivp(f, (a, b), y, rtol=1e-12, atol=1e-14, method="DOP853").y[:, -1]
    return y


@pytest.mark.parametrize("shape", ["sine", "constant"])
def test_trajectory_matches_ode_solver(shape):
    prof = ForcingProfile(Fraction(2), Fraction(3, 2), Fraction(5, 2), shape)
    u0, v0 = Fraction(7, 10), Fraction(6, 5)
    for t in (Fraction(1, 3), Fraction(1), Fraction(3, 2), Fraction(2)):
        s = trajectory(prof, u0, v0, t)
        ref = _integrate(prof, u0, v0, float(t))
        assert math.isclose(float(s.u.mid), ref[0], rel_tol=1e-8)
        assert math.isclose(float(s.v.mid), ref[1], rel_tol=1e-8)


def test_trajectory_endpoints():
    for shape in ("sine", "constant"):
        prof = ForcingProfile(Fraction(1), Fraction(2), Fraction(3), shape)
        s0 = trajectory(prof, Fraction(1, 2), Fraction(3, 2), 0)
        assert s0.u.contains(Fraction(1, 2)) and s0.v.contains(Fraction(3, 2))
        half = trajectory(prof, Fraction(1, 2), 1, Fraction(1, 2))
        assert half.u.contains(Fraction(1, 2)) and half.v.contains(1)
        end = trajectory(prof, Fraction(1, 2), Fraction(3, 2), 1)
        assert end.overlaps(oracle_monodromy(Fraction(1, 2), Fraction(3, 2), 2, 3))


def test_profiles_with_equal_integrals_agree_at_period():
    a = trajectory(ForcingProfile(3, 2, 5, "sine"), Fraction(2, 3), Fraction(1, 4), 3)
    b = trajectory(ForcingProfile(3, 2, 5, "constant"), Fraction(2, 3), Fraction(1, 4), 3)
    assert a.overlaps(b)


def test_bad_profile():
    with pytest.raises(ValueError):
        ForcingProfile(1, 1, 1, "square")
    with pytest.raises(ValueError):
        trajectory(ForcingProfile(1, 1, 1), 1, 1, 2)
