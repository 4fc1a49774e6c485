from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from conftest import TABLE_1, product_form, to_mpf
from subharmonics.polychain import (
    IntPolynomial, NonzeroRemainder, TWO_MINUS_A, build_chain_recurrence, build_chain_via_eprime,
    chain_from_json, chain_to_json, check_structure, divides, exact_divide, expected_leading,
    prime_divisibility,
)

polys = st.lists(st.integers(-50, 50), min_size=0, max_size=7).map(lambda c: IntPolynomial(tuple(c)))


def test_table_rows_exact():
    chain = build_chain_recurrence(13)
    assert [list(p.coeffs) for p in chain] == [TABLE_1[n] for n in range(1, 14)]


def test_dual_routes_agree_to_40():
    assert build_chain_recurrence(40) == build_chain_via_eprime(40)


def test_chain_matches_product_form(chain30):
    mpmath.mp.dps = 60
    for n in range(1, 31):
        for A in (Fraction(1, 7), Fraction(3, 2), Fraction(19, 5)):
            exact = to_mpf(chain30[n](A))
            ref = product_form(n, to_mpf(A))
            assert abs(exact - ref) <= mpmath.mpf(10) ** -45 * max(1, abs(ref))
    mpmath.mp.dps = 15


def test_structure_clean(chain30):
    rep = check_structure(chain30.upto(30))
    assert rep.ok, rep.violations
    assert len(rep.divisibility) > 30


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 13, 30])
def test_constant_degree_leading(chain30, n):
    p = chain30[n]
    assert p(0) == n
    assert p.degree == n - 1
    assert p.leading == (1 if n % 4 in (0, 1) else -1) == expected_leading(n)


def test_known_quotients():
    chain = build_chain_recurrence(6)
    assert exact_divide(chain[3], TWO_MINUS_A) == IntPolynomial((2, 0, -1))
    assert divides(chain[2], chain[5])
    with pytest.raises(NonzeroRemainder) as err:
        exact_divide(chain[4], TWO_MINUS_A)
    assert err.value.remainder == IntPolynomial((1,))  # p_5(2) = 1


def test_divide_by_zero_rejected():
    with pytest.raises(ZeroDivisionError):
        exact_divide(IntPolynomial((1, 1)), IntPolynomial())


def test_damaged_chain_reports_violations():
    chain = build_chain_recurrence(8)
    chain[5] = chain[5] + IntPolynomial((0, 1))
    rep = check_structure(chain)
    assert not rep.ok
    assert any("n=6" in v for v in rep.violations)
    assert not rep.divisibility[(3, 6)]


def test_prime_divisibility_informational():
    flags = prime_divisibility(build_chain_recurrence(13))
    assert sorted(flags) == [2, 3, 5, 7, 11, 13]
    assert flags[13] and flags[7]


def test_json_round_trip():
    chain = build_chain_recurrence(20)
    assert chain_from_json(chain_to_json(chain)) == chain


def test_big_coefficients_stay_exact():
    big = build_chain_recurrence(120)[-1]
    assert max(abs(c) for c in big.coeffs) > 2 ** 64
    assert big(0) == 120


@given(polys, polys)
@settings(max_examples=200, deadline=None)
def test_product_divides_back(a, b):
    if b.is_zero():
        return
    assert exact_divide(a * b, b) == a


@given(polys, st.fractions(min_value=-5, max_value=5, max_denominator=20))
@settings(max_examples=200, deadline=None)
def test_mul_linear_evaluates(p, x):
    assert p.mul_linear(2, -1)(x) == p(x) * (2 - x)
    assert p.derivative()(x) == sum(k * c * x ** (k - 1) for k, c in enumerate(p.coeffs) if k)
