"""Global branches of nT-periodic states bifurcating from the trivial line x = 1.

Each positive root r of p_n seeds two half-branches of the zero set of
phi_n(A, x), one with x > 1 and one with x < 1.  Branches are traced by
pseudo-arclength continuation; every accepted sample is then certified
by a sign change of phi_n along x (at fixed A) or along A (at fixed x).
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import mpmath

from .interval import DEFAULT_POLICY, PrecisionInterval, enclose
from .poincare import EvalContext, _exact
from .polychain import ChainContext
from .roots import CertifiedRoot, RootTable, decimal_string, refine, shared_root

STEP_MIN = 2.0 ** -20
STEP_MAX = 2.0 ** -3
EASY_ITERATIONS = 3
EASY_STREAK = 4
MAX_ITERATIONS = 10
CERT_WIDTH = Fraction(1, 1 << 80)


class NoConvergence(ArithmeticError):
    """The s-ladder of a local expansion does not show the expected order."""


class CorrectorStall(ArithmeticError):
    def __init__(self, message, branch=None):
        super().__init__(message)
        self.branch = branch


class InsufficientAtlasDepth(LookupError):
    pass


# point evaluation -------------------------------------------------------

def _mpf_interval(value: mpmath.mpf, prec: int) -> PrecisionInterval:
    return PrecisionInterval(value, prec=prec)


def point_jet(n: int, A, x, prec: int):
    """Midpoints of (phi_n, d phi_n/dx, d phi_n/dA) at a point."""
    Ai = _mpf_interval(A, prec) if isinstance(A, mpmath.mpf) else enclose(A, prec)
    Xi = _mpf_interval(x, prec) if isinstance(x, mpmath.mpf) else enclose(x, prec)
    ctx = EvalContext(Ai, Xi, derivatives=1, wrt_A=True)
    return ctx.phi(n).mid, ctx.dphi(n).mid, ctx.dphi_dA(n).mid


def phi_sign(n: int, A: Fraction, x: Fraction, prec: int) -> Optional[int]:
    return EvalContext(enclose(A, prec), enclose(x, prec)).phi(n).sign()


def _fraction(v: mpmath.mpf) -> Fraction:
    return Fraction(*mpmath.libmp.to_rational(v._mpf_))


# local expansion --------------------------------------------------------

@dataclass(frozen=True)
class LocalExpansion:
    """A(s) = r + A1 s + A2 s^2 + O(s^3) along x = 1 + s."""

    n: int
    r: float
    A1: float
    A1_err: float
    A2: float
    A2_err: float
    order: float

    def A1_interval(self) -> Tuple[float, float]:
        return self.A1 - self.A1_err, self.A1 + self.A1_err

    def A2_interval(self) -> Tuple[float, float]:
        return self.A2 - self.A2_err, self.A2 + self.A2_err

    def A1_encloses_zero(self) -> bool:
        return abs(self.A1) <= self.A1_err

    def initial_direction(self, side: int) -> int:
        """Sign of A - r just off the seed on the given side."""
        if not self.A1_encloses_zero():
            return int(math.copysign(1, self.A1 * side))
        return int(math.copysign(1, self.A2))


def root_value(root: CertifiedRoot) -> float:
    return float(refine(root, Fraction(1, 1 << 60)).mid)


def _root_mpf(root: CertifiedRoot, prec: int) -> mpmath.mpf:
    fine = refine(root, Fraction(1, 1 << (prec + 8))) if not root.is_exact else root
    with mpmath.workprec(prec):
        return mpmath.mpf(fine.mid.numerator) / fine.mid.denominator


def solve_A(n: int, x, A0, prec: int, tol=None, max_iter: int = 60) -> mpmath.mpf:
    """Newton in A for phi_n(A, x) = 0 starting from A0."""
    with mpmath.workprec(prec):
        x = mpmath.mpf(x)
        A = mpmath.mpf(A0)
        tol = tol or mpmath.mpf(2) ** (-prec + 24)
        for _ in range(max_iter):
            f, _, fA = point_jet(n, A, x, prec)
            if fA == 0:
                break
            step = f / fA
            A -= step
            if abs(step) <= tol * (1 + abs(A)):
                return A
        raise NoConvergence(f"Newton in A did not converge at x = {mpmath.nstr(x, 8)}")


def _richardson(values: Sequence[mpmath.mpf], ratio: int = 4) -> List[List[mpmath.mpf]]:
    table = [list(values)]
    k = 1
    while len(table[-1]) > 1:
        prev = table[-1]
        f = mpmath.mpf(ratio) ** k
        table.append([(f * prev[i + 1] - prev[i]) / (f - 1) for i in range(len(prev) - 1)])
        k += 1
    return table


def local_expansion(n: int, root: CertifiedRoot, *, s0=Fraction(1, 1 << 6), levels: int = 7,
                    prec: int = 320) -> LocalExpansion:
    """A1, A2 from a halving ladder of s with Richardson extrapolation in s^2.

    D1(s) = (A(s) - A(-s)) / 2s and D2(s) = (A(s) + A(-s) - 2r) / 2s^2 are even
    in s, so each halving of s cuts their error by four.
    """
    with mpmath.workprec(prec):
        r = _root_mpf(root, prec)
        ladder = [mpmath.mpf(s0.numerator) / s0.denominator / (2 ** k) for k in range(levels)]
        D1, D2 = [], []
        guess_p = guess_m = r
        for s in ladder:
            Ap = solve_A(n, 1 + s, guess_p, prec)
            Am = solve_A(n, 1 - s, guess_m, prec)
            D1.append((Ap - Am) / (2 * s))
            D2.append((Ap + Am - 2 * r) / (2 * s * s))
            guess_p, guess_m = Ap, Am
        orders = []
        for seq in (D1, D2):
            d = [abs(seq[i] - seq[i + 1]) for i in range(len(seq) - 1)]
            for a, b in zip(d, d[1:]):
                if b > mpmath.mpf(2) ** (-prec // 2) and a > 0:
                    orders.append(float(mpmath.log(a / b, 2)))
        order = sorted(orders)[len(orders) // 2] if orders else 2.0
        if orders and not (1.5 <= order <= 2.5):
            raise NoConvergence(f"observed convergence order {order:.3g}, expected 2 in s")
        est = []
        for seq in (D1, D2):
            tab = _richardson(seq)
            best = tab[-1][0]
            prev = tab[-2][-1]
            noise = mpmath.mpf(2) ** (-prec + 40) / ladder[-1] ** 2
            err = 4 * abs(best - prev) + noise
            est.append((best, err))
        (a1, e1), (a2, e2) = est
        return LocalExpansion(n, float(r), float(a1), float(e1), float(a2), float(e2), order)


# branches ---------------------------------------------------------------

@dataclass(frozen=True)
class BranchSample:
    """Certified box [A_lo, A_hi] x [x_lo, x_hi] crossed by the zero set."""

    A_lo: Fraction
    A_hi: Fraction
    x_lo: Fraction
    x_hi: Fraction
    residual: float
    certified_by: str

    @property
    def A(self) -> float:
        return float((self.A_lo + self.A_hi) / 2)

    @property
    def x(self) -> float:
        return float((self.x_lo + self.x_hi) / 2)

    def overlaps(self, other: "BranchSample") -> bool:
        return (self.A_lo <= other.A_hi and other.A_lo <= self.A_hi
                and self.x_lo <= other.x_hi and other.x_lo <= self.x_hi)


@dataclass
class Branch:
    n: int
    root: CertifiedRoot
    side: int
    samples: List[BranchSample] = field(default_factory=list)
    folds: List[int] = field(default_factory=list)
    status: str = "open"
    message: str = ""
    A_max: float = 0.0
    steps_rejected: int = 0

    @property
    def r(self) -> float:
        return root_value(self.root)

    @property
    def label(self) -> str:
        return f"n={self.n} r={self.r:.10f} side={'+' if self.side > 0 else '-'}"

    @property
    def A_min(self) -> float:
        return min((float(s.A_lo) for s in self.samples), default=math.inf)

    @property
    def reached(self) -> bool:
        return self.status == "reached"

    def uncertified(self) -> List[int]:
        return [i for i, s in enumerate(self.samples) if s.certified_by == "none"]

    def side_violations(self) -> List[int]:
        bad = []
        for i, s in enumerate(self.samples[1:], start=1):
            if self.side > 0 and not (1 < s.x_lo and s.x_hi < self.n):
                bad.append(i)
            if self.side < 0 and not (0 < s.x_lo and s.x_hi < 1):
                bad.append(i)
        return bad

    def touches_trivial(self, seed_radius: float = 0.0) -> List[int]:
        """Samples other than the seed whose x-range reaches 1 away from the seed."""
        r = self.r
        return [i for i, s in enumerate(self.samples[1:], start=1)
                if s.x_lo <= 1 <= s.x_hi and abs(s.A - r) > seed_radius]

    def to_csv(self, digits: int = 24) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "A_lo", "A_hi", "x_lo", "x_hi", "residual", "certified_by", "fold"])
        folds = set(self.folds)
        for i, s in enumerate(self.samples):
            w.writerow([i, decimal_string(s.A_lo, digits, True), decimal_string(s.A_hi, digits, False),
                        decimal_string(s.x_lo, digits, True), decimal_string(s.x_hi, digits, False),
                        f"{s.residual:.3e}", s.certified_by, int(i in folds)])
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "n": self.n,
            "root": [decimal_string(self.root.lo, 30, True), decimal_string(self.root.hi, 30, False)],
            "side": "+" if self.side > 0 else "-",
            "samples": len(self.samples),
            "A_min": self.A_min,
            "folds": [{"index": i, "A": self.samples[i].A, "x": self.samples[i].x} for i in self.folds],
            "status": self.status,
            "message": self.message,
            "uncertified": len(self.uncertified()),
        }


def certify_sample(n: int, A: mpmath.mpf, x: mpmath.mpf, prec: int, width: Fraction = CERT_WIDTH) -> BranchSample:
    """Box of half-width ``width`` around (A, x) holding a zero of phi_n."""
    Aq, xq = _fraction(A), _fraction(x)
    for w in (width, width * (1 << 20), width * (1 << 40)):
        lo, hi = phi_sign(n, Aq, xq - w, prec), phi_sign(n, Aq, xq + w, prec)
        if lo is not None and hi is not None and lo * hi < 0:
            return _sample(n, Aq, Aq, xq - w, xq + w, "x", prec)
        lo, hi = phi_sign(n, Aq - w, xq, prec), phi_sign(n, Aq + w, xq, prec)
        if lo is not None and hi is not None and lo * hi < 0:
            return _sample(n, Aq - w, Aq + w, xq, xq, "A", prec)
    return _sample(n, Aq, Aq, xq, xq, "none", prec)


def _sample(n, A_lo, A_hi, x_lo, x_hi, how, prec):
    box = EvalContext(PrecisionInterval(A_lo, A_hi, prec=prec), PrecisionInterval(x_lo, x_hi, prec=prec)).phi(n)
    res = float(box.width) if box.is_finite() else math.inf
    return BranchSample(A_lo, A_hi, x_lo, x_hi, res, how)


def _norm(a, b):
    return mpmath.sqrt(a * a + b * b)


def _first_point(n, r, side, prec, s_start):
    s = mpmath.mpf(s_start) * side
    for _ in range(12):
        try:
            A = solve_A(n, 1 + s, r, prec)
            if abs(A - r) < 4 * abs(s) ** 0.5 + 4 * abs(s):
                return A, 1 + s
        except NoConvergence:
            pass
        s /= 2
    raise CorrectorStall(f"no nontrivial zero found next to the seed (n={n}, r={mpmath.nstr(r, 10)})")


def trace_branch(n: int, root: CertifiedRoot, side: int, A_max: float = 3.0, *,
                 step_max: float = STEP_MAX, step_min: float = STEP_MIN, prec: int = 128,
                 max_steps: int = 100000, strict: bool = False) -> Branch:
    """Follow the half-branch seeded at (r, 1) on ``side`` (+1: x > 1, -1: x < 1) up to A_max.

    Step control: the arclength step halves when the corrector fails and
    doubles after four consecutive easy corrections, within
    [step_min, step_max].  A step that falls below step_min ends the trace
    with status "stall"; ``strict=True`` raises CorrectorStall instead.
    """
    if side not in (1, -1):
        raise ValueError("side must be +1 or -1")
    branch = Branch(n, root, side, A_max=float(A_max))
    seed = root if root.is_exact else refine(root, CERT_WIDTH)
    branch.samples.append(BranchSample(seed.lo, seed.hi, Fraction(1), Fraction(1), 0.0, "trivial"))
    with mpmath.workprec(prec):
        r = _root_mpf(root, prec)
        tol = mpmath.mpf(2) ** (-prec + 28)
        try:
            A, x = _first_point(n, r, side, prec, 2.0 ** -7)
        except CorrectorStall as exc:
            branch.status, branch.message = "stall", str(exc)
            if strict:
                raise CorrectorStall(str(exc), branch) from None
            return branch
        tA, tx = A - r, x - 1
        nrm = _norm(tA, tx)
        tA, tx = tA / nrm, tx / nrm
        h = min(float(nrm), step_max)
        branch.samples.append(certify_sample(n, A, x, prec))
        last_dA = A - r
        easy = 0
        steps = 0
        while A <= A_max:
            steps += 1
            if steps > max_steps:
                branch.status, branch.message = "stall", f"step budget {max_steps} exhausted"
                break
            pA, px = A + h * tA, x + h * tx
            ok, cA, cx, iters = _correct(n, pA, px, tA, tx, prec, tol)
            if ok:
                dA, dx = cA - A, cx - x
                dist = _norm(dA, dx)
                inside = (cx > 1 and cx < n) if side > 0 else (cx > 0 and cx < 1)
                ok = inside and dist < 2 * h and dist > 0
            if ok:
                _, fx, fA = point_jet(n, cA, cx, prec)
                nA, nx = -fx, fA
                nrm = _norm(nA, nx)
                if nrm == 0:
                    ok = False
                else:
                    nA, nx = nA / nrm, nx / nrm
                    if nA * tA + nx * tx < 0:
                        nA, nx = -nA, -nx
                    # refuse sharp turns: usually a jump onto a crossing curve
                    ok = nA * tA + nx * tx > 0.5 and (dA * tA + dx * tx) > 0
            if not ok:
                branch.steps_rejected += 1
                h /= 2
                easy = 0
                if h < step_min:
                    branch.status = "stall"
                    branch.message = (f"corrector stall at A={mpmath.nstr(A, 12)}, x={mpmath.nstr(x, 12)}")
                    if strict:
                        raise CorrectorStall(branch.message, branch)
                    break
                continue
            if dA * last_dA < 0:
                branch.folds.append(len(branch.samples) - 1)
            last_dA = dA
            A, x, tA, tx = cA, cx, nA, nx
            branch.samples.append(certify_sample(n, A, x, prec))
            easy = easy + 1 if iters <= EASY_ITERATIONS else 0
            if easy >= EASY_STREAK:
                h = min(2 * h, step_max)
                easy = 0
        else:
            branch.status = "reached"
    return branch


def _correct(n, pA, px, tA, tx, prec, tol):
    """Newton on {phi_n = 0, t . (z - z_pred) = 0}."""
    A, x = pA, px
    for it in range(1, MAX_ITERATIONS + 1):
        try:
            f, fx, fA = point_jet(n, A, x, prec)
        except (ValueError, ZeroDivisionError):
            return False, A, x, it
        if not (mpmath.isfinite(f) and mpmath.isfinite(fx) and mpmath.isfinite(fA)):
            return False, A, x, it
        g = tA * (A - pA) + tx * (x - px)
        det = fA * tx - fx * tA
        if det == 0:
            return False, A, x, it
        dA = (f * tx - fx * g) / det
        dx = (fA * g - f * tA) / det
        A, x = A - dA, x - dx
        if x <= 0:
            return False, A, x, it
        if abs(dA) + abs(dx) <= tol * (1 + abs(A) + abs(x)):
            return True, A, x, it
    return False, A, x, MAX_ITERATIONS


# atlas -------------------------------------------------------------------

@dataclass
class Component:
    owner: int
    root: CertifiedRoot
    branches: List[Branch]

    @property
    def A_min(self) -> float:
        return min(b.A_min for b in self.branches)

    def both_sides_at(self, A: float) -> bool:
        return (len(self.branches) == 2 and all(b.A_min <= A for b in self.branches)
                and all(b.reached or max(s.A for s in b.samples) >= A for b in self.branches))


@dataclass
class CensusRow:
    order: int
    components: int
    owners: Dict[int, int]


@dataclass
class BifurcationAtlas:
    n_max: int
    A_max: float
    components: List[Component]
    table: RootTable
    ownership: Dict[int, List[int]]
    failures: List[str] = field(default_factory=list)

    def branches(self) -> List[Branch]:
        return [b for c in self.components for b in c.branches]

    def census(self) -> List[CensusRow]:
        rows = [CensusRow(1, 1, {1: 1})]
        for n in range(2, self.n_max + 1):
            owners: Dict[int, int] = {}
            for m in self.ownership[n]:
                owners[m] = owners.get(m, 0) + 1
            rows.append(CensusRow(n, len(self.ownership[n]), owners))
        return rows

    def census_counts(self) -> List[int]:
        return [row.components for row in self.census()]

    def disjointness_violations(self) -> List[Tuple[str, str]]:
        """Pairs of branches from different seeds sharing a certified box."""
        bad = []
        allb = self.branches()
        for i, a in enumerate(allb):
            for b in allb[i + 1:]:
                if a.root is b.root or (a.n == b.n and a.root.lo == b.root.lo):
                    continue
                if _share_box(a, b):
                    bad.append((a.label, b.label))
        return bad

    def to_json(self) -> str:
        payload = {
            "n_max": self.n_max,
            "A_max": self.A_max,
            "census": [{"order": r.order, "components": r.components,
                        "owners": {str(k): v for k, v in sorted(r.owners.items())}} for r in self.census()],
            "components": [
                {"owner": c.owner,
                 "root": [decimal_string(c.root.lo, 30, True), decimal_string(c.root.hi, 30, False)],
                 "A_min": c.A_min,
                 "appears_in_orders": [n for n in range(c.owner, self.n_max + 1, c.owner)],
                 "branches": [b.summary() for b in c.branches]}
                for c in self.components],
            "failures": self.failures,
        }
        return json.dumps(payload, indent=2, sort_keys=False)


def _share_box(a: Branch, b: Branch) -> bool:
    sa = sorted(a.samples[1:], key=lambda s: s.A_lo)
    sb = sorted(b.samples[1:], key=lambda s: s.A_lo)
    j = 0
    for s in sa:
        while j < len(sb) and sb[j].A_hi < s.A_lo:
            j += 1
        k = j
        while k < len(sb) and sb[k].A_lo <= s.A_hi:
            if s.overlaps(sb[k]):
                return True
            k += 1
    return False


def owner_of(root: CertifiedRoot, n: int, chain: ChainContext) -> int:
    """Smallest divisor m of n (m >= 2) whose polynomial shares this root."""
    for m in range(2, n + 1):
        if n % m == 0 and (m == n or shared_root(chain[m], root)):
            return m
    return n


def _trace_task(args):
    n, root, side, A_max, opts = args
    return trace_branch(n, root, side, A_max, **opts)


def build_atlas(n_max: int, A_max: float = 3.0, *, workers: int = 1, chain: Optional[ChainContext] = None,
                table: Optional[RootTable] = None, **trace_opts) -> BifurcationAtlas:
    """Trace both halves of every component first appearing at an order n <= n_max."""
    if n_max < 2:
        raise ValueError("n_max must be at least 2")
    chain = chain or ChainContext(n_max)
    table = table or RootTable.build(n_max, chain)
    ownership: Dict[int, List[int]] = {}
    seeds = []
    for n in range(2, n_max + 1):
        ownership[n] = []
        for root in table[n]:
            m = owner_of(root, n, chain)
            ownership[n].append(m)
            if m == n:
                seeds.append((n, root))
    tasks = [(n, root, side, A_max, trace_opts) for n, root in seeds for side in (1, -1)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            traced = list(pool.map(_trace_task, tasks))
    else:
        traced = [_trace_task(t) for t in tasks]
    components = []
    failures = []
    for (n, root), pair in zip(seeds, zip(traced[0::2], traced[1::2])):
        components.append(Component(n, root, list(pair)))
        for b in pair:
            if b.status != "reached":
                failures.append(f"{b.label}: {b.status} {b.message}".strip())
    return BifurcationAtlas(n_max, float(A_max), components, table, ownership, failures)


@dataclass(frozen=True)
class MinOrder:
    value: int
    n_max: int

    def __int__(self):
        return self.value

    def __eq__(self, other):
        if isinstance(other, MinOrder):
            return (self.value, self.n_max) == (other.value, other.n_max)
        return self.value == other

    def __str__(self):
        return f"{self.value} (up to order {self.n_max})"


def min_order(A: float, atlas: BifurcationAtlas) -> MinOrder:
    """Smallest order m >= 2 with a component owned by m whose two halves both exist at A."""
    A = float(A)
    if A > atlas.A_max:
        raise ValueError(f"A = {A} lies beyond the traced range (A_max = {atlas.A_max})")
    for m in range(2, atlas.n_max + 1):
        if any(c.owner == m and c.both_sides_at(A) for c in atlas.components):
            return MinOrder(m, atlas.n_max)
    raise InsufficientAtlasDepth(f"no order up to {atlas.n_max} has two subharmonics at A = {A}")
