"""Certified zeros of a scalar function on a real segment.

Branch and bound over exact dyadic cells.  A cell is discarded when the
enclosure of f excludes 0, accepted as holding at most one zero when the
enclosure of f' excludes 0, and otherwise split.  Accepted cells with a
certified sign change are polished by interval Newton steps, with
bisection as the fallback.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

from .interval import DEFAULT_POLICY, PrecisionInterval, PrecisionPolicy

Evaluator = Callable[[PrecisionInterval], PrecisionInterval]


class UnresolvedCluster(ArithmeticError):
    """Zeros that stay inseparable at the precision ceiling."""

    def __init__(self, message, cells=()):
        super().__init__(message)
        self.cells = list(cells)


@dataclass(frozen=True)
class CertifiedZero:
    """``[lo, hi]`` holds exactly one zero.

    ``method`` is ``"sign-change"`` when f has certified opposite signs at
    the endpoints and ``"newton"`` when uniqueness comes from an interval
    Newton contraction.
    """

    lo: Fraction
    hi: Fraction
    method: str
    residual_width: float
    prec: int

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __float__(self):
        return float(self.mid)

    def contains(self, value) -> bool:
        return self.lo <= value <= self.hi

    def overlaps(self, other) -> bool:
        lo, hi = (other.lo, other.hi) if hasattr(other, "lo") else (other, other)
        return self.lo <= Fraction(hi) and Fraction(lo) <= self.hi

    def interval(self, prec: Optional[int] = None) -> PrecisionInterval:
        return PrecisionInterval(self.lo, self.hi, prec=prec or self.prec)


def _box(lo: Fraction, hi: Fraction, prec: int) -> PrecisionInterval:
    return PrecisionInterval(lo, hi, prec=prec)


def bits_for(tol: Fraction) -> int:
    """Bits needed to resolve a width ``tol`` on a unit-scale segment."""
    tol = Fraction(tol)
    return max(0, math.ceil(math.log2(1 / tol))) if tol < 1 else 0


class ZeroFinder:
    """Reusable search configuration for one scalar function.

    ``jet(X, order)`` returns enclosures ``[f(X), f'(X), ...]`` up to the
    requested derivative order.  When ``max_order`` is 2 the cell tests use
    second-order centred forms, which keeps the number of cells bounded near
    degenerate zeros.
    """

    def __init__(
        self,
        jet: Callable[[PrecisionInterval, int], Sequence[PrecisionInterval]],
        *,
        max_order: int = 1,
        policy: PrecisionPolicy = DEFAULT_POLICY,
        cells: int = 1024,
        depth: int = 60,
    ):
        self.jet = jet
        self.max_order = max_order
        self.policy = policy
        self.cells = cells
        self.depth = depth

    @classmethod
    def from_functions(cls, f: Evaluator, df: Evaluator, d2f: Optional[Evaluator] = None, **kw):
        fns = [f, df] + ([d2f] if d2f else [])

        def jet(X, order):
            return [fn(X) for fn in fns[: order + 1]]

        return cls(jet, max_order=len(fns) - 1, **kw)

    def f(self, X):
        return self.jet(X, 0)[0]

    def df(self, X):
        return self.jet(X, 1)[1]

    # point and cell evaluation -------------------------------------------
    def point_sign(self, x: Fraction, start: int) -> Tuple[Optional[int], int]:
        """Sign of f(x), escalating precision until certain; (None, bits) if never."""
        for bits in self.policy.ladder():
            if bits < start:
                continue
            s = self.f(PrecisionInterval(x, prec=bits)).sign()
            if s is not None:
                return s, bits
        return None, self.policy.ceiling_bits

    def _cell(self, lo, hi, prec):
        X = _box(lo, hi, prec)
        order = self.max_order
        vals = self.jet(X, order)
        F, D = vals[0], vals[1]
        if not F.contains_zero() or not D.is_finite():
            return F, D
        m = (lo + hi) / 2
        M = PrecisionInterval(m, prec=prec)
        h = X - M
        pm = self.jet(M, order - 1)
        if order >= 2 and vals[2].is_finite():
            D = _tighten(D, pm[1] + vals[2] * h)
            F = _tighten(F, pm[0] + pm[1] * h + vals[2] * h.square() / 2)
        F = _tighten(F, pm[0] + D * h)
        return F, D

    # search -----------------------------------------------------------------
    def isolate(self, segments: Sequence[Tuple[Fraction, Fraction]], tol) -> List[CertifiedZero]:
        tol = Fraction(tol)
        start = max(self.policy.start_bits, min(self.policy.ceiling_bits, bits_for(tol) + 64))
        found: List[CertifiedZero] = []
        unresolved = []
        total = sum(b - a for a, b in segments)
        min_width = total / (self.cells * (1 << self.depth))
        for a, b in segments:
            a, b = Fraction(a), Fraction(b)
            share = max(1, round(self.cells * (b - a) / total)) if total else 1
            step = (b - a) / share
            stack = [(a + k * step, a + (k + 1) * step, start) for k in range(share - 1, -1, -1)]
            while stack:
                lo, hi, prec = stack.pop()
                F, D = self._cell(lo, hi, prec)
                if not F.contains_zero():
                    continue
                if not D.contains_zero():
                    s_lo, p1 = self.point_sign(lo, prec)
                    s_hi, p2 = self.point_sign(hi, prec)
                    if s_lo is None or s_hi is None:
                        unresolved.append((lo, hi))
                        continue
                    if s_lo == s_hi:
                        continue
                    found.append(self.polish(lo, hi, s_lo, tol, max(p1, p2)))
                    continue
                if hi - lo > min_width:
                    mid = (lo + hi) / 2
                    stack.append((mid, hi, prec))
                    stack.append((lo, mid, prec))
                    continue
                nxt = next((b2 for b2 in self.policy.ladder() if b2 > prec), None)
                if nxt is None:
                    unresolved.append((lo, hi))
                else:
                    stack.append((lo, hi, nxt))
        if unresolved:
            desc = ", ".join(f"[{float(l):.17g}, {float(h):.17g}]" for l, h in unresolved[:4])
            raise UnresolvedCluster(f"{len(unresolved)} cell(s) unresolved at the precision ceiling: {desc}",
                                    unresolved)
        found.sort(key=lambda z: z.lo)
        return _merge_adjacent(found)

    def polish(self, lo: Fraction, hi: Fraction, s_lo: int, tol: Fraction, prec: int) -> CertifiedZero:
        """Shrink a sign-change cell with one monotone zero down to width ``tol``."""
        used_newton = False
        while hi - lo > tol:
            m = (lo + hi) / 2
            X = _box(lo, hi, prec)
            Fm = self.f(PrecisionInterval(m, prec=prec))
            D = self.df(X)
            if Fm.sign() is None and Fm.width > 0:
                # midpoint value not resolved: more bits before continuing
                nxt = next((b for b in self.policy.ladder() if b > prec), None)
                if nxt is None:
                    break
                prec = nxt
                continue
            s_m = Fm.sign()
            if s_m == 0:
                lo = hi = m
                break
            contracted = False
            if not D.contains_zero():
                N = PrecisionInterval(m, prec=prec) - Fm / D
                try:
                    N = N.intersect(X)
                    nlo, nhi = N.endpoints_fraction()
                    if nhi - nlo < (hi - lo) / 2:
                        lo, hi = nlo, nhi
                        contracted = used_newton = True
                except ValueError:
                    pass
            if not contracted:
                if s_m == s_lo:
                    lo = m
                else:
                    hi = m
        width = self.f(_box(lo, hi, prec)).width
        if lo == hi:
            method = "sign-change"
        else:
            a, _ = self.point_sign(lo, prec)
            b, _ = self.point_sign(hi, prec)
            method = "sign-change" if (a is not None and b is not None and a * b < 0) else "newton"
            if method == "newton" and not used_newton:
                # bisection only keeps sign changes, so this means lost resolution
                method = "newton" if not self.df(_box(lo, hi, prec)).contains_zero() else "unverified"
        return CertifiedZero(lo, hi, method, float(width), prec)


def _tighten(a: PrecisionInterval, b: PrecisionInterval) -> PrecisionInterval:
    """Intersection of two enclosures of the same quantity."""
    if not b.is_finite():
        return a
    try:
        return a.intersect(b)
    except ValueError:
        # disjoint enclosures cannot both be valid unless rounding is broken
        raise ArithmeticError("inconsistent enclosures") from None


def _merge_adjacent(zeros: List[CertifiedZero]) -> List[CertifiedZero]:
    """A zero sitting on a shared cell boundary can be reported twice."""
    out: List[CertifiedZero] = []
    for z in zeros:
        if out and out[-1].overlaps(z):
            prev = out[-1]
            out[-1] = CertifiedZero(min(prev.lo, z.lo), max(prev.hi, z.hi), prev.method,
                                    max(prev.residual_width, z.residual_width), max(prev.prec, z.prec))
        else:
            out.append(z)
    return out


def isolate_zeros(f: Evaluator, df: Evaluator, segments, tol, *, d2f: Optional[Evaluator] = None,
                  policy=DEFAULT_POLICY, cells: int = 1024) -> List[CertifiedZero]:
    return ZeroFinder.from_functions(f, df, d2f, policy=policy, cells=cells).isolate(segments, tol)
