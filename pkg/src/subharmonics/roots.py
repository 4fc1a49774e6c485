"""Certified isolation of the positive roots of the chain polynomials.

Everything runs on exact rationals: Sturm sequences for counting, dyadic
bisection for isolation and refinement.  Because every root of p_n is
known to be simple, a Sturm sequence whose last member is not constant
means the chain itself is corrupt.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence

from .polychain import TWO_MINUS_A, ChainContext, IntPolynomial, exact_divide


class MultipleRootError(ArithmeticError):
    pass


class IntervalsOverlap(ValueError):
    """Isolating intervals of two rows are not yet pairwise disjoint."""


# rational polynomial helpers (lowest power first, Fraction coefficients)

def _as_fractions(p: IntPolynomial) -> List[Fraction]:
    return [Fraction(c) for c in p.coeffs]


def _trim(c):
    while c and c[-1] == 0:
        c.pop()
    return c


def _rem(f, g):
    f = list(f)
    dg = len(g) - 1
    lead = g[-1]
    while len(f) - 1 >= dg and f:
        q = f[-1] / lead
        shift = len(f) - 1 - dg
        for j, b in enumerate(g):
            f[shift + j] -= q * b
        f.pop()
        _trim(f)
    return f


def _primitive_positive(c):
    """Scale by a positive rational so the coefficients are coprime integers."""
    if not c:
        return c
    den = 1
    for a in c:
        den = den * a.denominator // math.gcd(den, a.denominator)
    ints = [int(a * den) for a in c]
    g = 0
    for a in ints:
        g = math.gcd(g, a)
    return [Fraction(a // g) for a in ints]


def _eval(c, x):
    acc = Fraction(0)
    for a in reversed(c):
        acc = acc * x + a
    return acc


def sturm_sequence(p: IntPolynomial) -> List[List[Fraction]]:
    """Sturm chain of ``p``; each member rescaled by a positive constant."""
    f0 = _as_fractions(p)
    f1 = [k * a for k, a in enumerate(f0)][1:]
    seq = [f0, _trim(f1)]
    while seq[-1] and len(seq[-1]) > 1:
        r = _rem(seq[-2], seq[-1])
        if not r:
            break
        seq.append(_primitive_positive([-a for a in r]))
    if len(seq[-1]) > 1:
        raise MultipleRootError(f"repeated root: gcd(p, p') has degree {len(seq[-1]) - 1}")
    return seq


def _variations(signs: Iterable[int]) -> int:
    out, prev = 0, 0
    for s in signs:
        if s == 0:
            continue
        if prev and s != prev:
            out += 1
        prev = s
    return out


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def sign_variations_at(seq, x: Fraction) -> int:
    return _variations(_sign(_eval(c, x)) for c in seq)


def sign_variations_at_infinity(seq) -> int:
    return _variations(_sign(c[-1]) for c in seq if c)


def count_roots(seq, a: Fraction, b: Optional[Fraction]) -> int:
    """Distinct roots in ``(a, b]``; ``b=None`` means +infinity. Needs p(a) != 0."""
    va = sign_variations_at(seq, a)
    vb = sign_variations_at_infinity(seq) if b is None else sign_variations_at(seq, b)
    return va - vb


def cauchy_bound(p: IntPolynomial) -> Fraction:
    """Every root satisfies |A| < 1 + max|c_k / c_lead|; returned as a power of two."""
    lead = abs(p.leading)
    m = max((Fraction(abs(c), lead) for c in p.coeffs[:-1]), default=Fraction(0))
    bound = 1 + m
    k = 0
    while Fraction(2) ** k < bound:
        k += 1
    return Fraction(2) ** k


@dataclass(frozen=True)
class CertifiedRoot:
    """Isolating interval ``[lo, hi]`` for one positive root of ``p_n``.

    ``lo == hi`` marks an exactly verified rational root.
    """

    lo: Fraction
    hi: Fraction
    n: int
    sign_lo: int
    sign_hi: int
    poly: IntPolynomial = field(repr=False, compare=False)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def is_exact(self) -> bool:
        return self.lo == self.hi

    @property
    def is_exact_two(self) -> bool:
        return self.is_exact and self.lo == 2

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __float__(self) -> float:
        return float(self.mid)

    def overlaps(self, other: "CertifiedRoot") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def contains(self, value) -> bool:
        return self.lo <= value <= self.hi


def _certified(p, lo, hi, n):
    return CertifiedRoot(lo, hi, n, _sign(p(lo)), _sign(p(hi)), p)


def _nonroot_split(p, a, b):
    """Dyadic point strictly inside (a, b) where p does not vanish."""
    mid = (a + b) / 2
    step = (b - a) / 8
    k = 1
    while p(mid) == 0:
        mid = (a + b) / 2 + (step if k % 2 else -step) / (1 << (k // 2))
        k += 1
    return mid


def _isolate(p: IntPolynomial, seq, a: Fraction, b: Fraction, n: int, out: List[CertifiedRoot]):
    c = count_roots(seq, a, b)
    if c == 0:
        return
    if c == 1:
        out.append(_certified(p, a, b, n))
        return
    m = _nonroot_split(p, a, b)
    _isolate(p, seq, a, m, n, out)
    _isolate(p, seq, m, b, n, out)


def _pull_off(q, root, point):
    """Bisect on the sign of ``q`` until the closed interval excludes ``point``."""
    lo, hi = root.lo, root.hi
    s_lo = _sign(q(lo))
    while lo <= point <= hi and lo < hi:
        mid = (lo + hi) / 2
        s = _sign(q(mid))
        if s == 0:
            return CertifiedRoot(mid, mid, root.n, 0, 0, q)
        if s == s_lo:
            lo = mid
        else:
            hi = mid
    return _certified(q, lo, hi, root.n)


def isolate_positive_roots(p: IntPolynomial, n: Optional[int] = None) -> List[CertifiedRoot]:
    """All roots of ``p`` in (0, inf), sorted, each in its own isolating interval.

    For even chain members the factor (2 - A) is divided out first and the
    root 2 is returned as the exact point [2, 2].
    """
    if p.is_zero():
        raise ValueError("zero polynomial has no isolated roots")
    n = p.degree + 1 if n is None else n
    exact_two = False
    q = p
    if p(2) == 0:
        q = exact_divide(p, TWO_MINUS_A)
        exact_two = True
        if q(2) == 0:
            raise MultipleRootError(f"p_{n} has a repeated root at 2")
    out: List[CertifiedRoot] = []
    if q.degree >= 1:
        seq = sturm_sequence(q)
        if q(0) == 0:
            raise ValueError("root at A = 0 is not positive")
        bound = cauchy_bound(q)
        if q(bound) == 0:
            bound *= 2
        # split at 2: intervals never straddle it, and chain roots land in (0, 2]
        _isolate(q, seq, Fraction(0), Fraction(2), n, out)
        if bound > 2:
            _isolate(q, seq, Fraction(2), bound, n, out)
        out = [_pull_off(q, r, Fraction(2)) for r in out] if exact_two else out
        # re-certify each interval against p itself, not only the quotient
        out = [_certified(p, r.lo, r.hi, n) for r in out]
    if exact_two:
        out.append(CertifiedRoot(Fraction(2), Fraction(2), n, 0, 0, p))
        out.sort(key=lambda r: (r.lo, r.hi))
    return out


def positive_root_count(p: IntPolynomial, upto: Optional[Fraction] = None) -> int:
    """Sturm count of distinct roots in (0, upto]; ``None`` for (0, inf)."""
    seq = sturm_sequence(p)
    return count_roots(seq, Fraction(0), upto)


def refine(root: CertifiedRoot, width) -> CertifiedRoot:
    """Bisect until ``hi - lo <= width``; exact rational arithmetic throughout."""
    width = Fraction(width)
    if width <= 0:
        raise ValueError("width must be positive")
    p = root.poly
    lo, hi = root.lo, root.hi
    if hi - lo <= width:
        return root
    s_lo = _sign(p(lo))
    while hi - lo > width:
        mid = (lo + hi) / 2
        s = _sign(p(mid))
        if s == 0:
            return CertifiedRoot(mid, mid, root.n, 0, 0, p)
        if s == s_lo:
            lo = mid
        else:
            hi = mid
    return _certified(p, lo, hi, root.n)


def expected_root_count(n: int) -> int:
    return n // 2


class RootTable:
    """Certified positive roots of p_2 .. p_{n_max}, keyed by n."""

    def __init__(self, rows: Optional[Dict[int, List[CertifiedRoot]]] = None):
        self.rows: Dict[int, List[CertifiedRoot]] = dict(rows or {})

    @classmethod
    def build(cls, n_max: int, chain: Optional[ChainContext] = None, n_min: int = 2) -> "RootTable":
        chain = chain or ChainContext(n_max)
        return cls({n: isolate_positive_roots(chain[n], n) for n in range(n_min, n_max + 1)})

    def __getitem__(self, n: int) -> List[CertifiedRoot]:
        return self.rows[n]

    def __contains__(self, n: int) -> bool:
        return n in self.rows

    def __iter__(self):
        return iter(sorted(self.rows))

    def total(self) -> int:
        return sum(len(v) for v in self.rows.values())

    def refine_all(self, width) -> "RootTable":
        return RootTable({n: [refine(r, width) for r in row] for n, row in self.rows.items()})

    def to_csv(self, digits: int = 20) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "index", "lo", "hi", "is_exact_two"])
        for n in sorted(self.rows):
            for i, r in enumerate(self.rows[n], start=1):
                w.writerow([n, i, decimal_string(r.lo, digits, down=True),
                            decimal_string(r.hi, digits, down=False), int(r.is_exact_two)])
        return buf.getvalue()


def decimal_string(q: Fraction, digits: int, down: bool) -> str:
    """``q`` rounded outward to ``digits`` places after the point."""
    scale = 10 ** digits
    num = q.numerator * scale
    k = num // q.denominator if down else -((-num) // q.denominator)
    sign = "-" if k < 0 else ""
    k = abs(k)
    whole, frac = divmod(k, scale)
    return f"{sign}{whole}.{frac:0{digits}d}" if digits else f"{sign}{whole}"


@dataclass
class InterlaceReport:
    n: int
    passed: bool
    ordering: List[str]
    reason: str = ""


def separate_rows(table: RootTable, n: int, max_rounds: int = 200) -> RootTable:
    """Refine rows n-1 and n until no interval of one row meets one of the other."""
    rows = dict(table.rows)
    for _ in range(max_rounds):
        a, b = rows[n - 1], rows[n]
        clash = [(i, j) for i, r in enumerate(a) for j, s in enumerate(b) if r.overlaps(s)]
        if not clash:
            return RootTable(rows)
        a, b = list(a), list(b)
        for i, j in clash:
            if a[i].is_exact and b[j].is_exact and a[i].lo == b[j].lo:
                raise IntervalsOverlap(f"rows {n - 1} and {n} share the exact root {a[i].lo}")
            a[i] = refine(a[i], a[i].width / 4) if not a[i].is_exact else a[i]
            b[j] = refine(b[j], b[j].width / 4) if not b[j].is_exact else b[j]
        rows[n - 1], rows[n] = a, b
    raise IntervalsOverlap(f"rows {n - 1} and {n} still overlap after {max_rounds} refinements")


def check_interlacing(table: RootTable, n: int) -> InterlaceReport:
    """Do the positive roots of p_{n-1} separate those of p_n?

    When n-1 is even its root 2 is left out of the separators.  Raises
    :class:`IntervalsOverlap` if some intervals of the two rows still meet.
    """
    targets = list(table[n])
    if n - 1 >= 2:
        seps = [r for r in table[n - 1] if not ((n - 1) % 2 == 0 and r.is_exact_two)]
    else:
        seps = []
    for r in targets:
        for s in seps:
            if r.overlaps(s):
                raise IntervalsOverlap(f"p_{n} and p_{n - 1} intervals overlap near {float(r.mid):.6g}")
    merged = sorted([(r.lo, "T", r) for r in targets] + [(s.lo, "S", s) for s in seps], key=lambda t: t[0])
    pattern = "".join(t[1] for t in merged)
    ordering = [f"{'p_%d' % (n if t[1] == 'T' else n - 1)}:{float(t[2].mid):.10f}" for t in merged]
    if len(targets) <= 1 and not seps:
        return InterlaceReport(n, True, ordering, "trivial")
    expected = "TS" * (len(targets) - 1) + "T"
    passed = pattern == expected
    return InterlaceReport(n, passed, ordering, "" if passed else f"pattern {pattern} != {expected}")


def gap_statistics(table: RootTable) -> Dict[str, float]:
    """Largest and mean gap between distinct bifurcation values in (0, 2]."""
    fine = table.refine_all(Fraction(1, 2 ** 60))
    points = sorted({round(float(r.mid), 12) for n in fine for r in fine[n]})
    pts = [0.0] + points
    gaps = [b - a for a, b in zip(pts, pts[1:])]
    return {"distinct_roots": len(points), "max_gap": max(gaps) if gaps else 0.0,
            "mean_gap": sum(gaps) / len(gaps) if gaps else 0.0}


def shared_root(divisor_poly: IntPolynomial, root: CertifiedRoot) -> bool:
    """Is the root isolated by ``root`` also a root of ``divisor_poly``?

    Exact test, valid when ``divisor_poly`` divides ``root.poly``: the
    divisor's roots are then roots of ``root.poly``, and the interval holds
    exactly one of those.
    """
    if root.is_exact:
        return divisor_poly(root.lo) == 0
    if divisor_poly.degree < 1:
        return False
    q = divisor_poly
    if q(2) == 0 and not root.contains(2):
        q = exact_divide(q, TWO_MINUS_A)
        if q.degree < 1:
            return False
    seq = sturm_sequence(q)
    lo = root.lo
    if q(lo) == 0:
        return True
    return count_roots(seq, lo, root.hi) >= 1
