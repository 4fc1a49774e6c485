"""Self-contained property suite behind ``subharmonics check``."""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List

from .poincare import eval_dphi_dx, fixed_points, iterate_oracle, orbit, poincare_map
from .polychain import ChainContext, build_chain_via_eprime, check_structure
from .roots import RootTable, check_interlacing, separate_rows
from .twoperiodic import solve_2T


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail} ({self.seconds:.2f}s)"


def _run(name: str, fn: Callable[[], tuple]) -> CheckResult:
    t0 = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as exc:  # a crash is a failed check, not a crashed suite
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    return CheckResult(name, bool(ok), detail, time.perf_counter() - t0)


def run_checks(n_max: int = 30, seed: int = 0, quick: bool = False) -> List[CheckResult]:
    rng = random.Random(seed)
    chain = ChainContext(n_max)
    results: List[CheckResult] = []

    def dual():
        other = build_chain_via_eprime(n_max)
        bad = [n for n in range(1, n_max + 1) if chain[n] != other[n - 1]]
        return not bad, f"recurrence and E' routes agree for n <= {n_max}" if not bad else f"differ at {bad}"

    def structure():
        rep = check_structure(chain.upto(n_max))
        return rep.ok, f"{len(rep.violations)} violations"

    def roots():
        table = RootTable.build(n_max, chain)
        # p_n(0) = n, so lo = 0 still means a strictly positive root
        bad = [n for n in table if len(table[n]) != n // 2 or any(r.hi > 2 or r.lo < 0 for r in table[n])]
        inter = [n for n in range(3, n_max + 1) if not check_interlacing(separate_rows(table, n), n).passed]
        return not bad and not inter, f"counts/localization bad at {bad}, interlacing bad at {inter}"

    def linearization():
        fails = 0
        trials = 10 if quick else 50
        for _ in range(trials):
            A = Fraction(rng.randint(1, 4000), 1000)
            for n in range(1, min(n_max, 20) + 1):
                fails += not eval_dphi_dx(n, A, 1).contains(chain[n](A))
        return fails == 0, f"{fails} failures over {trials} values of A"

    def oracle():
        fails = 0
        trials = 20 if quick else 100
        for _ in range(trials):
            n = rng.randint(1, 12)
            A = Fraction(rng.randint(1, 400), 100)
            x = Fraction(rng.randint(1, 200), 100)
            mine = poincare_map(n, A, x)
            ref = iterate_oracle(n, x, x, A, A)
            fails += not mine.overlaps(ref)
        return fails == 0, f"{fails} disagreements over {trials} samples"

    def symmetry():
        fails = 0
        count = 0
        for n in range(2, 7):
            for p in fixed_points(n, 3, Fraction(1, 10**25)).nontrivial():
                states = orbit(n, 3, p.interval())
                count += 1
                fails += not all(states[h].u.overlaps(states[n - h].v) for h in range(1, n))
        return fails == 0, f"{fails} of {count} fixed points break u_h = v_(n-h)"

    def multiplicity():
        fails = 0
        trials = 20 if quick else 200
        for _ in range(trials):
            A = Fraction(rng.randint(10, 1000), 100)
            up = Fraction(rng.randint(1001, 4000), 1000)
            down = Fraction(rng.randint(100, 1000), 1000)
            fails += len(solve_2T(A, 4 * up / A)) != 2
            fails += len(solve_2T(A, 4 * down / A)) != 0
        return fails == 0, f"{fails} wrong zero counts over {2 * trials} parameter pairs"

    for name, fn in [
        ("dual construction", dual),
        ("structure", structure),
        ("root counts and interlacing", roots),
        ("linearization", linearization),
        ("oracle equivalence", oracle),
        ("orbit symmetry", symmetry),
        ("2T multiplicity", multiplicity),
    ]:
        results.append(_run(name, fn))
    return results
