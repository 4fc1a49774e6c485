"""2T-periodic coexistence states for general A, B.

A 2T-periodic state satisfies u_0 + u_1 = 2 and v_0 + v_1 = 2, which reduces
everything to one equation in x = v_0 on [0, 2]:

    phi(B, x) = x (exp(B tanh((1 - x) A / 2)) + 1) - 2,

with u_0 = 2 / (exp((1 - x) A) + 1).  Besides the trivial zero x = 1 there
are exactly two zeros when AB > 4 and none otherwise.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .interval import DEFAULT_POLICY, PrecisionInterval, PrecisionPolicy, enclose, monotone_image
from .poincare import _exact
from .zeros import CertifiedZero, UnresolvedCluster, ZeroFinder


def _tanh_arg(A, X):
    return (1 - X) * (A / 2)


def _h(A, B, X):
    """exp(B tanh((1 - x) A / 2)), decreasing in x, enclosed endpoint-wise."""
    def point(P):
        return (_tanh_arg(A, P).tanh() * B).exp()
    return monotone_image(point, X, increasing=False)


def phi2_jet(A, B):
    A, B = _exact(A), _exact(B)

    def jet(X: PrecisionInterval, order: int):
        Ai, Bi = enclose(A, X.prec), enclose(B, X.prec)
        h = _h(Ai, Bi, X)
        out = [X * (h + 1) - 2]
        if order >= 1:
            t = _tanh_arg(Ai, X).tanh()
            sech2 = 1 - t.square()
            c = Ai * Bi / 2
            # h' = -c h sech^2
            dh = -(c * h * sech2)
            out.append(h + 1 + X * dh)
            if order >= 2:
                # (sech^2)' = A t sech^2,  h'' = -c (h' sech^2 + h A t sech^2)
                d2h = -(c * (dh * sech2 + h * Ai * t * sech2))
                out.append(dh * 2 + X * d2h)
        return out

    return jet


def eval_phi2(A, B, x, prec: int = DEFAULT_POLICY.start_bits) -> PrecisionInterval:
    """Enclosure of phi(B, x); x may be an exact scalar or a PrecisionInterval."""
    X = x if isinstance(x, PrecisionInterval) else enclose(_exact(x), prec)
    return phi2_jet(A, B)(X, 0)[0]


def eval_dphi2(A, B, x, prec: int = DEFAULT_POLICY.start_bits) -> PrecisionInterval:
    X = x if isinstance(x, PrecisionInterval) else enclose(_exact(x), prec)
    return phi2_jet(A, B)(X, 1)[1]


@dataclass(frozen=True)
class TwoPeriodicState:
    """One nontrivial 2T-periodic state; ``v0`` is the certified zero of phi."""

    A: Fraction
    B: Fraction
    v0: CertifiedZero
    slope: PrecisionInterval = field(compare=False)

    def _v(self, prec=None):
        return self.v0.interval(prec)

    @property
    def u0(self) -> PrecisionInterval:
        v = self._v()
        return 2 / (((1 - v) * self.A).exp() + 1)

    @property
    def u1(self) -> PrecisionInterval:
        v = self._v()
        return self.u0 * ((1 - v) * self.A).exp()

    @property
    def v1(self) -> PrecisionInterval:
        v = self._v()
        return v * ((self.u1 - 1) * self.B).exp()

    def symmetry_holds(self) -> bool:
        """u_0 + u_1 and v_0 + v_1 both enclose 2."""
        v = self._v()
        return (self.u0 + self.u1).contains(2) and (v + self.v1).contains(2)


@dataclass
class TwoPeriodicResult:
    A: Fraction
    B: Fraction
    states: List[TwoPeriodicState]
    trivial_isolated: bool
    delta: Fraction

    @property
    def zeros(self) -> List[CertifiedZero]:
        return [s.v0 for s in self.states]

    def __len__(self):
        return len(self.states)


DELTA_FLOOR = Fraction(1, 1 << 32)


def _delta(jet, prec) -> Tuple[Fraction, bool]:
    delta = Fraction(1, 2)
    while delta >= DELTA_FLOOR:
        X = PrecisionInterval(1 - delta, 1 + delta, prec=prec)
        if not jet(X, 1)[1].contains_zero():
            return delta, True
        delta /= 2
    return DELTA_FLOOR, False


def solve_2T(A, B, tol=Fraction(1, 10**20), *, policy: PrecisionPolicy = DEFAULT_POLICY,
             cells: int = 64) -> TwoPeriodicResult:
    """Nontrivial zeros of phi(B, .) on [0, 2], each certified with phi' > 0.

    The interval around x = 1 excluded from the search has phi' certified
    nonzero, so it holds only the trivial zero.
    """
    A, B = _exact(A), _exact(B)
    if A <= 0 or B <= 0:
        raise ValueError("A and B must be positive")
    jet = phi2_jet(A, B)
    delta, isolated = _delta(jet, policy.start_bits)
    finder = ZeroFinder(jet, max_order=2, policy=policy, cells=cells)
    zeros = finder.isolate([(Fraction(0), 1 - delta), (1 + delta, Fraction(2))], tol)
    states = []
    for z in zeros:
        slope = jet(z.interval(), 1)[1]
        states.append(TwoPeriodicState(A, B, z, slope))
    return TwoPeriodicResult(A, B, states, isolated, delta)


def curvature_diagnostic(A, B, tol=Fraction(1, 10**20), *, policy: PrecisionPolicy = DEFAULT_POLICY,
                         cells: int = 256) -> List[Tuple[CertifiedZero, Optional[int]]]:
    """Critical points of phi(B, .) in (0, 2) with the certified sign of phi'' there.

    The expected picture is phi'' < 0 at critical points in (0, 1) and
    phi'' > 0 in (1, 2).  A sign of None means the enclosure of phi'' met 0.
    Diagnostic only; the solver does not rely on it.
    """
    base = phi2_jet(A, B)

    def dphi_jet(X, order):
        return base(X, order + 1)[1:]

    finder = ZeroFinder(dphi_jet, max_order=1, policy=policy, cells=cells)
    out = []
    for z in finder.isolate([(Fraction(0), Fraction(2))], _exact(tol)):
        out.append((z, base(z.interval(), 2)[2].sign()))
    return out


@dataclass(frozen=True)
class PitchforkData:
    A: Fraction
    B: Fraction
    B_crit: Fraction
    dphi_at_1: Fraction
    d2phi_at_1: Fraction
    d3phi_at_1: Fraction


def pitchfork_data(A, B=None) -> PitchforkData:
    """Derivatives of phi(B, .) at the trivial zero; B defaults to 4/A.

    With c = AB/2 the expansion of phi(B, 1 + e) gives, exactly,
        phi'(1) = 2 - c,  phi''(1) = c^2 - 2c,  phi'''(1) = 3c^2 - c^3 + A^3 B / 4.
    """
    A = _exact(A)
    if A <= 0:
        raise ValueError("A must be positive")
    B_crit = Fraction(4) / A
    B = B_crit if B is None else _exact(B)
    c = A * B / 2
    return PitchforkData(A, B, B_crit, 2 - c, c * c - 2 * c, 3 * c * c - c ** 3 + A ** 3 * B / 4)


@dataclass
class CurvePoint:
    B: Fraction
    lower: Optional[CertifiedZero]
    upper: Optional[CertifiedZero]


@dataclass
class TwoPeriodicCurve:
    A: Fraction
    points: List[CurvePoint]
    failures: List[Tuple[Fraction, str]]

    def lower_branch(self):
        return [(p.B, p.lower) for p in self.points if p.lower is not None]

    def upper_branch(self):
        return [(p.B, p.upper) for p in self.points if p.upper is not None]

    def is_monotone(self) -> bool:
        """Lower zeros strictly decrease and upper zeros strictly increase in B."""
        lo = [z for _, z in self.lower_branch()]
        up = [z for _, z in self.upper_branch()]
        return (all(b.hi < a.lo for a, b in zip(lo, lo[1:]))
                and all(a.hi < b.lo for a, b in zip(up, up[1:])))

    def to_csv(self, digits: int = 20) -> str:
        from .roots import decimal_string

        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["B", "z1_lo", "z1_hi", "z2_lo", "z2_hi"])
        for p in self.points:
            row = [decimal_string(p.B, digits, True) if p.B.denominator != 1 else str(p.B)]
            for z in (p.lower, p.upper):
                row += ([decimal_string(z.lo, digits, True), decimal_string(z.hi, digits, False)]
                        if z is not None else ["", ""])
            w.writerow(row)
        return buf.getvalue()


def trace_2T_curve(A, B_max, steps: int = 50, tol=Fraction(1, 10**12), *,
                   policy: PrecisionPolicy = DEFAULT_POLICY, spacing: str = "linear") -> TwoPeriodicCurve:
    """Both nontrivial zeros on a B-grid from just above 4/A up to B_max.

    ``spacing="geometric"`` clusters grid points near the bifurcation.
    """
    A, B_max = _exact(A), _exact(B_max)
    Bc = Fraction(4) / A
    if B_max <= Bc:
        raise ValueError("B_max must exceed 4/A")
    if steps < 1:
        raise ValueError("need at least one step")
    if spacing == "geometric":
        ratio = float(B_max / Bc) ** (1.0 / steps)
        grid = [Bc * Fraction(ratio ** k).limit_denominator(1 << 40) for k in range(1, steps + 1)]
        grid[-1] = B_max
    else:
        grid = [Bc + (B_max - Bc) * k / steps for k in range(1, steps + 1)]
    points, failures = [], []
    for B in grid:
        try:
            res = solve_2T(A, B, tol, policy=policy)
        except (UnresolvedCluster, ArithmeticError) as exc:
            failures.append((B, str(exc)))
            continue
        lower = next((z for z in res.zeros if z.hi < 1), None)
        upper = next((z for z in res.zeros if z.lo > 1), None)
        if len(res.zeros) != 2:
            failures.append((B, f"expected two zeros, found {len(res.zeros)}"))
        points.append(CurvePoint(B, lower, upper))
    return TwoPeriodicCurve(A, points, failures)
