from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from subharmonics.interval import PrecisionInterval, PrecisionPolicy
from subharmonics.zeros import UnresolvedCluster, bits_for, isolate_zeros


def _neg_sin(X):
    # -sin x = cos(x + pi/2)
    return (X + PrecisionInterval.pi(X.prec) / 2).cos()


def test_cosine_zeros_certified():
    zs = isolate_zeros(lambda X: X.cos(), _neg_sin, [(Fraction(0), Fraction(10))], Fraction(1, 10 ** 30))
    mpmath.mp.dps = 50
    refs = [(2 * k + 1) * mpmath.pi / 2 for k in range(3)]
    assert len(zs) == 3
    for z, r in zip(zs, refs):
        assert mpmath.mpf(z.lo.numerator) / z.lo.denominator <= r <= mpmath.mpf(z.hi.numerator) / z.hi.denominator
        assert z.width <= Fraction(1, 10 ** 30)
        assert z.method in ("newton", "sign-change")
    mpmath.mp.dps = 15


@given(st.lists(st.builds(Fraction, st.integers(1, 199), st.integers(1, 7)), min_size=1, max_size=4, unique=True))
@settings(max_examples=40, deadline=None)
def test_planted_polynomial_zeros(roots):
    roots = sorted(r for r in roots if r < 20)
    if not roots:
        return

    def f(X):
        v = X * 0 + 1
        for r in roots:
            v = v * (X - r)
        return v

    def df(X):
        total = X * 0
        for i in range(len(roots)):
            t = X * 0 + 1
            for j, r in enumerate(roots):
                t = t * (1 if i == j else (X - r))
            total = total + t
        return total

    zs = isolate_zeros(f, df, [(Fraction(0), Fraction(20))], Fraction(1, 10 ** 20), cells=64)
    assert len(zs) == len(roots)
    for z, r in zip(zs, roots):
        assert z.contains(r)


def test_double_zero_is_reported_not_hidden():
    f = lambda X: (X - 1).square()  # noqa: E731
    df = lambda X: (X - 1) * 2  # noqa: E731
    with pytest.raises(UnresolvedCluster):
        isolate_zeros(f, df, [(Fraction(1, 2), Fraction(3, 2))], Fraction(1, 10 ** 10),
                      policy=PrecisionPolicy(64, 128), cells=16)


def test_zero_free_segment():
    assert isolate_zeros(lambda X: X.exp(), lambda X: X.exp(), [(Fraction(-5), Fraction(5))], Fraction(1, 10 ** 12)) == []


def test_bits_for():
    assert bits_for(Fraction(1, 2 ** 100)) >= 100
