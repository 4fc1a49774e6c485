from fractions import Fraction

import mpmath
import pytest

from subharmonics.continuation import (
    BranchSample, InsufficientAtlasDepth, MinOrder, build_atlas, local_expansion, min_order, owner_of,
    trace_branch,
)
from subharmonics.poincare import eval_phi, fixed_points
from subharmonics.polychain import ChainContext
from subharmonics.roots import RootTable
from subharmonics.twoperiodic import solve_2T


def raw_phi(n, A, x):
    """phi_n from the plain monodromy iterated from (x, x); independent of the package."""
    u, v, w = x, x, []
    while len(w) < n - 1:
        u = u * mpmath.exp((1 - v) * A)
        w.append(u)
        v = v * mpmath.exp((u - 1) * A)
        w.append(v)
    return x + sum(w[: n - 1]) - n


def oracle_coefficients(n, r, s=mpmath.mpf("1e-6")):
    """A1, A2 from four solves of phi_n(A, 1 +- s) = 0 and one Richardson step."""
    A = lambda t: mpmath.findroot(lambda a: raw_phi(n, a, 1 + t), r)  # noqa: E731
    vals = {t: A(t) for t in (s, -s, s / 2, -s / 2)}
    d1 = lambda h: (vals[h] - vals[-h]) / (2 * h)  # noqa: E731
    d2 = lambda h: (vals[h] + vals[-h] - 2 * r) / (2 * h * h)  # noqa: E731
    return (4 * d1(s / 2) - d1(s)) / 3, (4 * d2(s / 2) - d2(s)) / 3


@pytest.fixture(scope="module")
def table8():
    return RootTable.build(8)


@pytest.mark.parametrize("n,k", [(2, 1), (3, 1), (4, 1), (4, 2), (5, 1), (6, 1), (7, 2)])
def test_expansion_matches_raw_oracle(table8, n, k):
    mpmath.mp.dps = 60
    r = 2 * mpmath.sin(k * mpmath.pi / n)
    a1, a2 = oracle_coefficients(n, r)
    root = min(table8[n], key=lambda q: abs(float(q.mid) - float(r)))
    exp = local_expansion(n, root)
    assert 1.5 <= exp.order <= 2.5
    assert abs(exp.A1 - float(a1)) <= max(1e-9, exp.A1_err)
    if abs(a1) < 1e-15:
        assert exp.A1_encloses_zero()
        assert abs(exp.A2 - float(a2)) <= 1e-9 * max(1, abs(float(a2)))
    mpmath.mp.dps = 15


def test_expansion_closed_values(table8):
    e3 = local_expansion(3, table8[3][0])
    assert abs(e3.A1 - (3 ** 0.5 - 3) / 4) < 1e-12
    e2 = local_expansion(2, table8[2][0])
    assert e2.A1_encloses_zero() and abs(e2.A2 - 2 / 3) < 1e-12
    e4 = local_expansion(4, table8[4][0])
    assert e4.A1_encloses_zero() and abs(e4.A2 + (1 - 2 ** -0.5)) < 1e-12


def _check_branch(b):
    assert b.reached, b.message
    assert not b.uncertified()
    assert not b.side_violations()
    assert not b.touches_trivial(1e-6)
    assert max(s.A for s in b.samples) >= b.A_max


def test_order_two_branches_match_2T_curve(table8):
    for side in (1, -1):
        b = trace_branch(2, table8[2][0], side, 3.0)
        _check_branch(b)
        for s in b.samples[5::40]:
            A = Fraction(s.A_lo + s.A_hi) / 2
            res = solve_2T(A, A, Fraction(1, 10 ** 15))
            want = res.zeros[1] if side > 0 else res.zeros[0]
            # A-box half-width is tiny, so the x-boxes must meet up to the slope times it
            pad = Fraction(1, 10 ** 12)
            assert want.lo - pad <= s.x_hi and s.x_lo <= want.hi + pad


def test_order_three_plus_side_folds(table8):
    root = table8[3][0]
    exp = local_expansion(3, root)
    b = trace_branch(3, root, 1, 3.0)
    _check_branch(b)
    assert exp.initial_direction(1) == -1
    assert b.samples[3].A < b.r
    assert len(b.folds) == 1
    assert b.A_min < b.r - 0.05
    minus = trace_branch(3, root, -1, 3.0)
    _check_branch(minus)
    assert exp.initial_direction(-1) == 1 and not minus.folds


def test_order_four_subcritical_both_sides(table8):
    root = table8[4][0]
    exp = local_expansion(4, root)
    for side in (1, -1):
        b = trace_branch(4, root, side, 3.0)
        _check_branch(b)
        assert exp.initial_direction(side) == -1
        assert len(b.folds) == 1 and b.A_min < b.r


def test_samples_are_fixed_points(table8):
    b = trace_branch(3, table8[3][0], 1, 2.5)
    for s in b.samples[10::60]:
        A = (s.A_lo + s.A_hi) / 2
        assert eval_phi(3, A, (s.x_lo + s.x_hi) / 2).magnitude_bounds()[0] < 1e-15
        fp = fixed_points(3, A, Fraction(1, 10 ** 15))
        assert any(p.lo - Fraction(1, 10 ** 12) <= s.x_hi and s.x_lo <= p.hi + Fraction(1, 10 ** 12) for p in fp)


def test_ownership(table8):
    chain = ChainContext(8)
    owners = {n: [owner_of(r, n, chain) for r in table8[n]] for n in range(2, 9)}
    assert owners[4] == [4, 2]
    assert owners[6] == [6, 3, 2]
    assert owners[8] == [8, 4, 8, 2]


def test_small_atlas_and_min_order():
    atlas = build_atlas(4, 3.0)
    assert atlas.census_counts() == [1, 1, 1, 2]
    assert not atlas.failures and not atlas.disjointness_violations()
    assert min_order(2.5, atlas) == 2
    assert min_order(1.8, atlas) == 3
    assert min_order(1.5, atlas) == 4  # the fold of the sqrt(2) component reaches below sqrt(2)
    assert str(min_order(2.5, atlas)) == "2 (up to order 4)"
    with pytest.raises(InsufficientAtlasDepth):
        min_order(0.5, atlas)
    with pytest.raises(ValueError):
        min_order(5, atlas)
    data = atlas.to_json()
    assert '"n_max": 4' in data


def test_min_order_type():
    m = MinOrder(3, 8)
    assert m == 3 and int(m) == 3 and m != 4


def test_sample_overlap():
    a = BranchSample(Fraction(0), Fraction(1), Fraction(0), Fraction(1), 0.0, "x")
    b = BranchSample(Fraction(1), Fraction(2), Fraction(1), Fraction(2), 0.0, "x")
    c = BranchSample(Fraction(3), Fraction(4), Fraction(0), Fraction(1), 0.0, "x")
    assert a.overlaps(b) and not a.overlaps(c)


def test_step_budget_reports_stall(table8):
    b = trace_branch(3, table8[3][0], 1, 3.0, max_steps=5)
    assert b.status == "stall" and "budget" in b.message
    assert not b.reached and len(b.samples) >= 2


def test_bad_side_rejected(table8):
    with pytest.raises(ValueError):
        trace_branch(3, table8[3][0], 0)


def test_branch_csv_has_enclosure_columns(table8):
    b = trace_branch(2, table8[2][0], -1, 2.2)
    rows = b.to_csv().strip().splitlines()
    assert rows[0] == "index,A_lo,A_hi,x_lo,x_hi,residual,certified_by,fold"
    assert rows[1].split(",")[6] == "trivial"
    assert len(rows) == len(b.samples) + 1
