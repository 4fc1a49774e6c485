"""Nested exponentials E_n, the symmetric Poincare maps and the functions phi_n.

With A = B and u_0 = v_0 = x the n-th iterate of the one-period map is
(x E_{2n-1}(x), x E_{2n}(x)), where

    E_0 = 1,   E_1 = exp((1 - x) A),
    E_n = exp((x (E_1 + E_3 + ... + E_{n-1}) - n/2) A)          n even,
    E_n = exp(((n + 1)/2 - x (E_0 + E_2 + ... + E_{n-1})) A)    n odd,

and phi_n(x) = x (E_0 + ... + E_{n-1}) - n vanishes exactly at the
symmetric nT-periodic states.  All evaluation is done on PrecisionInterval
enclosures.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .interval import (
    DEFAULT_POLICY,
    PrecisionExhausted,
    PrecisionInterval,
    PrecisionPolicy,
    enclose,
)
from .zeros import CertifiedZero, UnresolvedCluster, ZeroFinder


def _exact(value) -> Fraction:
    """Exact rational for ints, Fractions, floats and decimal strings."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, float)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"need an exact scalar, got {type(value).__name__}")


@dataclass
class PoincareState:
    u: PrecisionInterval
    v: PrecisionInterval

    def is_coexistence(self) -> bool:
        return self.u.sign() == 1 and self.v.sign() == 1

    def overlaps(self, other: "PoincareState") -> bool:
        return self.u.overlaps(other.u) and self.v.overlaps(other.v)

    def __iter__(self):
        yield self.u
        yield self.v


class EvalContext:
    """E_0 .. E_N and their derivatives at one (A, x), filled lazily.

    Each E_n needs the parity-matched partial sum of all lower terms, so the
    context keeps the running sums as well.  ``order`` selects how many
    x-derivatives are carried (0, 1 or 2); ``wrt_A`` adds d/dA.  A context
    belongs to a single caller; build a fresh one per task.
    """

    def __init__(self, A: PrecisionInterval, x: PrecisionInterval, derivatives=False, wrt_A: bool = False):
        self.A = A
        self.x = x
        self.prec = max(A.prec, x.prec)
        self.order = int(derivatives)
        self.derivatives = self.order >= 1
        self.wrt_A = wrt_A
        one = PrecisionInterval(1, prec=self.prec)
        zero = PrecisionInterval(0, prec=self.prec)
        self.E: List[PrecisionInterval] = [one]
        self.dE: List[PrecisionInterval] = [zero]
        self.d2E: List[PrecisionInterval] = [zero]
        self.dAE: List[PrecisionInterval] = [zero]
        # running parity sums: _sum[k][p] = sum over j < len(E), j % 2 == p, of the k-th series
        self._sum = {key: [zero, zero] for key in ("E", "dE", "d2E", "dAE")}
        self._sum["E"][0] = one

    def _extend(self):
        n = len(self.E)
        A, x = self.A, self.x
        par = (n + 1) % 2
        sigma = 1 if n % 2 == 0 else -1
        S = self._sum["E"][par]
        if sigma > 0:
            g = x * S - Fraction(n, 2)
        else:
            g = Fraction(n + 1, 2) - x * S
        En = (g * A).exp()
        new = {"E": En}
        if self.order >= 1:
            dS = self._sum["dE"][par]
            g1 = S + x * dS
            g1 = g1 if sigma > 0 else -g1
            dEn = A * En * g1
            new["dE"] = dEn
            if self.order >= 2:
                d2S = self._sum["d2E"][par]
                g2 = dS * 2 + x * d2S
                g2 = g2 if sigma > 0 else -g2
                new["d2E"] = A * (dEn * g1 + En * g2)
        if self.wrt_A:
            gA = x * self._sum["dAE"][par]
            gA = gA if sigma > 0 else -gA
            new["dAE"] = En * (g + A * gA)
        self.E.append(En)
        for key, series in (("dE", self.dE), ("d2E", self.d2E), ("dAE", self.dAE)):
            if key in new:
                series.append(new[key])
        for key, val in new.items():
            self._sum[key][n % 2] = self._sum[key][n % 2] + val

    def upto(self, n: int) -> List[PrecisionInterval]:
        while len(self.E) <= n:
            self._extend()
        return self.E[: n + 1]

    def E_n(self, n: int) -> PrecisionInterval:
        return self.upto(n)[n]

    def dE_n(self, n: int) -> PrecisionInterval:
        if not self.derivatives:
            raise ValueError("context built without derivatives")
        self.upto(n)
        return self.dE[n]

    def _total(self, series, n):
        total = series[0]
        for e in series[1:n]:
            total = total + e
        return total

    def phi(self, n: int) -> PrecisionInterval:
        self.upto(n - 1)
        return self.x * self._total(self.E, n) - n

    def dphi(self, n: int) -> PrecisionInterval:
        if self.order < 1:
            raise ValueError("context built without derivatives")
        self.upto(n - 1)
        return self._total(self.E, n) + self.x * self._total(self.dE, n)

    def d2phi(self, n: int) -> PrecisionInterval:
        if self.order < 2:
            raise ValueError("context built without second derivatives")
        self.upto(n - 1)
        return self._total(self.dE, n) * 2 + self.x * self._total(self.d2E, n)

    def dphi_dA(self, n: int) -> PrecisionInterval:
        if not self.wrt_A:
            raise ValueError("context built without A-derivatives")
        self.upto(n - 1)
        return self.x * self._total(self.dAE, n)

    def state(self, h: int) -> PoincareState:
        """(u_h, v_h) = (x E_{2h-1}, x E_{2h}); h = 0 gives (x, x)."""
        if h == 0:
            return PoincareState(self.x, self.x)
        E = self.upto(2 * h)
        return PoincareState(self.x * E[2 * h - 1], self.x * E[2 * h])


def _pair(A, x, prec):
    return enclose(A, prec), enclose(x, prec)


def _escalate(compute, target, policy: PrecisionPolicy, relative: bool):
    """Run ``compute(bits)`` up the precision ladder until the width meets ``target``."""
    if target is None:
        return compute(policy.start_bits)
    target = Fraction(target)
    last = None
    for bits in policy.ladder():
        iv = compute(bits)
        last = iv
        if iv.is_finite():
            lo_q, hi_q = iv.endpoints_fraction()
            w = hi_q - lo_q
            if relative:
                scale = min(abs(lo_q), abs(hi_q)) if lo_q * hi_q > 0 else None
                if scale is not None and w <= target * scale:
                    return iv
            elif w <= target:
                return iv
    raise PrecisionExhausted(
        f"enclosure width {last.width if last is not None else '?'} above target {float(target):g} "
        f"at {policy.ceiling_bits} bits", width=last.width if last is not None else None,
        bits=policy.ceiling_bits)


def _prec_of(A, x, default):
    precs = [v.prec for v in (A, x) if isinstance(v, PrecisionInterval)]
    return max(precs) if precs else default


def eval_E(n: int, A, x, *, target=None, relative=False, policy: PrecisionPolicy = DEFAULT_POLICY):
    """Enclosure of E_n(A, x)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return _escalate(lambda bits: EvalContext(*_pair(A, x, bits)).E_n(n), target, policy, relative)


def poincare_map(n: int, A, x, *, target=None, policy: PrecisionPolicy = DEFAULT_POLICY) -> PoincareState:
    """(u_n, v_n) from u_0 = v_0 = x with A = B."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if target is None:
        return EvalContext(*_pair(A, x, policy.start_bits)).state(n)
    u = _escalate(lambda bits: EvalContext(*_pair(A, x, bits)).state(n).u, target, policy, True)
    v = _escalate(lambda bits: EvalContext(*_pair(A, x, bits)).state(n).v, target, policy, True)
    return PoincareState(u, v)


def orbit(n: int, A, x, prec: int = DEFAULT_POLICY.start_bits) -> List[PoincareState]:
    """States (u_h, v_h) for h = 0 .. n from u_0 = v_0 = x."""
    ctx = EvalContext(*_pair(A, x, prec))
    return [ctx.state(h) for h in range(n + 1)]


def oracle_monodromy(u0, v0, A, B, prec: Optional[int] = None) -> PoincareState:
    """One period of the general (A, B) model, straight from the closed-form flow."""
    prec = prec or max([v.prec for v in (u0, v0, A, B) if isinstance(v, PrecisionInterval)]
                       or [DEFAULT_POLICY.start_bits])
    u0, v0, A, B = (enclose(v, prec) for v in (u0, v0, A, B))
    u1 = u0 * ((1 - v0) * A).exp()
    v1 = v0 * ((u1 - 1) * B).exp()
    return PoincareState(u1, v1)


def iterate_oracle(n: int, u0, v0, A, B, prec: Optional[int] = None) -> PoincareState:
    state = PoincareState(*(enclose(v, prec or DEFAULT_POLICY.start_bits) for v in (u0, v0)))
    for _ in range(n):
        state = oracle_monodromy(state.u, state.v, A, B, prec)
    return state


def eval_phi(n: int, A, x, *, target=None, relative=False, policy: PrecisionPolicy = DEFAULT_POLICY):
    """Enclosure of phi_n(A, x)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return _escalate(lambda bits: EvalContext(*_pair(A, x, bits)).phi(n), target, policy, relative)


def eval_dphi_dx(n: int, A, x, *, target=None, relative=False, policy: PrecisionPolicy = DEFAULT_POLICY):
    """Enclosure of d phi_n / dx; at x = 1 this is the chain polynomial p_n(A)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return _escalate(lambda bits: EvalContext(*_pair(A, x, bits), derivatives=True).dphi(n),
                     target, policy, relative)


def phi_jet(n: int, A):
    """``jet(X, order)`` evaluator of phi_n(A, .) for the zero finder."""
    A = _exact(A)

    def jet(X: PrecisionInterval, order: int):
        ctx = EvalContext(enclose(A, X.prec), X, derivatives=order)
        out = [ctx.phi(n)]
        if order >= 1:
            out.append(ctx.dphi(n))
        if order >= 2:
            out.append(ctx.d2phi(n))
        return out

    return jet


def phi_and_derivative(n: int, A: PrecisionInterval, x: PrecisionInterval):
    ctx = EvalContext(A, x, derivatives=True)
    return ctx.phi(n), ctx.dphi(n)


# fixed points ------------------------------------------------------------

@dataclass(frozen=True)
class FixedPoint:
    n: int
    A: Fraction
    lo: Fraction
    hi: Fraction
    residual_width: float
    trivial: bool = False
    method: str = "sign-change"
    prec: int = DEFAULT_POLICY.start_bits

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __float__(self):
        return float(self.mid)

    def contains(self, value) -> bool:
        return self.lo <= value <= self.hi

    def interval(self, prec: Optional[int] = None) -> PrecisionInterval:
        return PrecisionInterval(self.lo, self.hi, prec=prec or self.prec)


@dataclass
class FixedPointSet:
    """All zeros of phi_n(A, .) in (0, n).

    ``trivial_isolated`` is True when a neighbourhood of x = 1 was certified
    free of other zeros; when False the reported trivial cell may hide zeros
    closer to 1 than its half-width.
    """

    n: int
    A: Fraction
    points: List[FixedPoint]
    trivial_isolated: bool
    trivial_radius: Fraction

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)

    def nontrivial(self) -> List[FixedPoint]:
        return [p for p in self.points if not p.trivial]

    def to_csv(self, digits: int = 25, header: bool = True) -> str:
        return fixed_points_csv([self], digits, header)


# at tangential A the trivial zero is degenerate; values of phi_n closer
# than this to x = 1 are too small to separate from it at working precision
TRIVIAL_FLOOR = Fraction(1, 1 << 32)


def _trivial_radius(n, A, prec, floor: Fraction) -> Tuple[Fraction, bool]:
    """Largest tried delta with 0 outside phi_n'([1 - delta, 1 + delta])."""
    delta = Fraction(1, 4)
    Ai = enclose(A, prec)
    while delta >= floor:
        X = PrecisionInterval(1 - delta, 1 + delta, prec=prec)
        if not EvalContext(Ai, X, derivatives=True).dphi(n).contains_zero():
            return delta, True
        delta /= 2
    return floor, False


def fixed_points(n: int, A, tol=Fraction(1, 10**20), *, policy: PrecisionPolicy = DEFAULT_POLICY,
                 cells: int = 1024) -> FixedPointSet:
    """All zeros of phi_n(A, .) on (0, n), each in a certified interval of width <= tol.

    The trivial zero x = 1 is reported directly.  Its neighbourhood is
    excluded from the search once phi_n' is certified nonzero there; at
    tangential A (roots of p_n) a fixed radius of 2^-32 is excluded instead
    and ``trivial_isolated`` is False.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    A = _exact(A)
    if A <= 0:
        raise ValueError("A must be positive")
    tol = Fraction(tol)
    prec = policy.start_bits
    radius, isolated = _trivial_radius(n, A, prec, TRIVIAL_FLOOR)

    finder = ZeroFinder(phi_jet(n, A), max_order=2, policy=policy, cells=cells)
    segments = [(Fraction(0), 1 - radius)]
    if n > 1:
        segments.append((1 + radius, Fraction(n)))
    zeros = finder.isolate(segments, tol)
    points = [FixedPoint(n, A, z.lo, z.hi, z.residual_width, False, z.method, z.prec) for z in zeros]
    points.append(FixedPoint(n, A, Fraction(1), Fraction(1), 0.0, True, "exact", prec))
    points.sort(key=lambda p: p.lo)
    return FixedPointSet(n, A, points, isolated, radius)


def fixed_points_csv(sets: Sequence[FixedPointSet], digits: int = 25, header: bool = True) -> str:
    from .roots import decimal_string

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow(["n", "A", "x_lo", "x_hi", "residual_width"])
    for s in sets:
        for p in s.points:
            w.writerow([p.n, _fraction_str(p.A), decimal_string(p.lo, digits, True),
                        decimal_string(p.hi, digits, False), f"{p.residual_width:.3e}"])
    return buf.getvalue()


def _fraction_str(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def period_sums(n: int, A, x, prec: int = DEFAULT_POLICY.start_bits) -> Tuple[PrecisionInterval, PrecisionInterval]:
    """(u_0 + ... + u_{n-1}, v_0 + ... + v_{n-1}) along the orbit of (x, x)."""
    states = orbit(n, A, x, prec)[:n]
    su, sv = states[0].u, states[0].v
    for s in states[1:]:
        su, sv = su + s.u, sv + s.v
    return su, sv


# continuous-time flow ------------------------------------------------------

@dataclass(frozen=True)
class ForcingProfile:
    """Half-period forcing: alpha lives on [0, T/2], beta on [T/2, T].

    ``shape`` is ``"sine"`` (alpha = (pi A / T) sin(2 pi t / T) and its
    mirror for beta) or ``"constant"`` (alpha = 2A/T, beta = 2B/T).
    """

    T: Fraction
    A: Fraction
    B: Fraction
    shape: str = "sine"

    def __post_init__(self):
        if self.shape not in ("sine", "constant"):
            raise ValueError(f"unknown profile shape {self.shape!r}")
        if _exact(self.T) <= 0:
            raise ValueError("period must be positive")

    def alpha(self, t: float) -> float:
        T, A = float(self.T), float(self.A)
        t = t % T
        if t > T / 2:
            return 0.0
        return math.pi * A / T * math.sin(2 * math.pi * t / T) if self.shape == "sine" else 2 * A / T

    def beta(self, t: float) -> float:
        T, B = float(self.T), float(self.B)
        t = t % T
        if t < T / 2:
            return 0.0
        return -math.pi * B / T * math.sin(2 * math.pi * t / T) if self.shape == "sine" else 2 * B / T

    def cumulative(self, t, prec: int = DEFAULT_POLICY.start_bits):
        """Enclosures of (int_0^t alpha, int_0^t beta) for t in [0, T]."""
        T, A, B = _exact(self.T), _exact(self.A), _exact(self.B)
        t = _exact(t)
        if not 0 <= t <= T:
            raise ValueError("t must lie in [0, T]")
        half = T / 2
        if self.shape == "constant":
            Ia = enclose(min(t, half) * 2 * A / T, prec)
            Ib = enclose(max(t - half, 0) * 2 * B / T, prec)
            return Ia, Ib
        pi = PrecisionInterval.pi(prec)
        if t <= half:
            c = (pi * (2 * t / T)).cos()
            return (1 - c) * (A / 2), enclose(0, prec)
        c = (pi * (2 * t / T)).cos()
        return enclose(A, prec), (1 + c) * (B / 2)


def trajectory(profile: ForcingProfile, u0, v0, t, prec: int = DEFAULT_POLICY.start_bits) -> PoincareState:
    """Exact state of the flow at time t in [0, T] from (u0, v0)."""
    Ia, Ib = profile.cumulative(t, prec)
    u0, v0 = enclose(u0, prec), enclose(v0, prec)
    u = u0 * ((1 - v0) * Ia).exp()
    uT = u0 * ((1 - v0) * _exact(profile.A)).exp()
    v = v0 * ((uT - 1) * Ib).exp()
    return PoincareState(u, v)
