"""Exact integer polynomials in the forcing amplitude ``A`` and the chain p_n.

The chain p_1, p_2, ... is the linearisation d(phi_n)/dx at the trivial
state x = 1.  It is built here two ways: by the three-term recurrence and
by summing the derivative terms E'_j(1), each exactly over the integers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple


class PolynomialError(ValueError):
    pass


class NonzeroRemainder(ArithmeticError):
    """Division left a remainder; ``quotient`` and ``remainder`` are attached."""

    def __init__(self, quotient, remainder):
        super().__init__(f"nonzero remainder {remainder}")
        self.quotient = quotient
        self.remainder = remainder


def _strip(coeffs):
    coeffs = list(coeffs)
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


@dataclass(frozen=True)
class IntPolynomial:
    """Dense polynomial with integer coefficients, lowest power first."""

    coeffs: Tuple[int, ...] = ()

    def __post_init__(self):
        stripped = _strip(self.coeffs)
        if any(not isinstance(c, int) for c in stripped):
            raise TypeError("coefficients must be integers")
        object.__setattr__(self, "coeffs", stripped)

    @classmethod
    def constant(cls, c: int) -> "IntPolynomial":
        return cls((c,))

    @classmethod
    def linear(cls, c0: int, c1: int) -> "IntPolynomial":
        return cls((c0, c1))

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def leading(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def is_zero(self) -> bool:
        return not self.coeffs

    def __getitem__(self, k: int) -> int:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else 0

    def __add__(self, other: "IntPolynomial") -> "IntPolynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        return IntPolynomial(tuple(self[k] + other[k] for k in range(n)))

    def __sub__(self, other: "IntPolynomial") -> "IntPolynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        return IntPolynomial(tuple(self[k] - other[k] for k in range(n)))

    def __neg__(self) -> "IntPolynomial":
        return IntPolynomial(tuple(-c for c in self.coeffs))

    def scale(self, c: int) -> "IntPolynomial":
        return IntPolynomial(tuple(c * a for a in self.coeffs))

    def mul_linear(self, c0: int, c1: int) -> "IntPolynomial":
        """Multiply by ``c0 + c1*A``."""
        out = [0] * (len(self.coeffs) + 1)
        for k, a in enumerate(self.coeffs):
            out[k] += c0 * a
            out[k + 1] += c1 * a
        return IntPolynomial(tuple(out))

    def __mul__(self, other: "IntPolynomial") -> "IntPolynomial":
        if self.is_zero() or other.is_zero():
            return IntPolynomial()
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return IntPolynomial(tuple(out))

    def __call__(self, a):
        """Horner evaluation; exact for int and Fraction arguments."""
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * a + c
        return acc

    def derivative(self) -> "IntPolynomial":
        return IntPolynomial(tuple(k * c for k, c in enumerate(self.coeffs) if k))

    def is_even(self) -> bool:
        return all(c == 0 for c in self.coeffs[1::2])

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        terms = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            if k == 0:
                body = str(mag)
            else:
                body = ("" if mag == 1 else str(mag)) + ("A" if k == 1 else f"A^{k}")
            terms.append((sign, body))
        first_sign, first = terms[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in terms[1:]:
            out += f" {sign} {body}"
        return out


def exact_divide(dividend: IntPolynomial, divisor: IntPolynomial) -> IntPolynomial:
    """Exact quotient over Z; raise :class:`NonzeroRemainder` otherwise.

    Long division runs over Q so a remainder is reported even when the
    divisor is not monic.
    """
    if divisor.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    rem = [Fraction(c) for c in dividend.coeffs]
    d = divisor.degree
    lead = divisor.leading
    if len(rem) - 1 < d:
        if dividend.is_zero():
            return IntPolynomial()
        raise NonzeroRemainder(IntPolynomial(), dividend)
    quot = [Fraction(0)] * (len(rem) - d)
    for k in range(len(rem) - 1, d - 1, -1):
        q = rem[k] / lead
        quot[k - d] = q
        if q:
            for j, b in enumerate(divisor.coeffs):
                rem[k - d + j] -= q * b
    remainder = _strip(rem[:d])
    integral = all(q.denominator == 1 for q in quot)
    if remainder or not integral:
        q_int = IntPolynomial(tuple(int(q) for q in quot)) if integral else None
        r = IntPolynomial(tuple(int(c) for c in remainder)) if all(
            Fraction(c).denominator == 1 for c in remainder
        ) else remainder
        raise NonzeroRemainder(q_int, r)
    return IntPolynomial(tuple(int(q) for q in quot))


def divides(divisor: IntPolynomial, dividend: IntPolynomial) -> bool:
    try:
        exact_divide(dividend, divisor)
    except NonzeroRemainder:
        return False
    return True


P1 = IntPolynomial.constant(1)
P2 = IntPolynomial.linear(2, -1)
TWO_MINUS_A = P2


def build_chain_recurrence(n_max: int) -> List[IntPolynomial]:
    """p_1 .. p_{n_max} from p_n = (2 - (-1)^n A) p_{n-1} - p_{n-2}."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    chain = [P1, P2][:n_max]
    for n in range(3, n_max + 1):
        sign = -1 if n % 2 == 0 else 1
        chain.append(chain[-1].mul_linear(2, sign) - chain[-2])
    return chain


def eprime_terms(n_max: int) -> List[IntPolynomial]:
    """E'_0(1) .. E'_{n_max}(1) as integer polynomials in A.

    Uses E_j(1) = 1, so each summand ``E_j(1) + E'_j(1)`` is ``1 + E'_j(1)``.
    """
    terms = [IntPolynomial(), IntPolynomial.linear(0, -1)][: n_max + 1]
    odd_acc = IntPolynomial()   # sum over odd j < n of (1 + E'_j)
    even_acc = IntPolynomial()  # sum over even j < n of (1 + E'_j)
    one = IntPolynomial.constant(1)
    for j, t in enumerate(terms):
        if j % 2:
            odd_acc = odd_acc + one + t
        else:
            even_acc = even_acc + one + t
    for n in range(2, n_max + 1):
        if n % 2 == 0:
            term = odd_acc.mul_linear(0, 1)
            even_acc = even_acc + one + term
        else:
            term = even_acc.mul_linear(0, -1)
            odd_acc = odd_acc + one + term
        terms.append(term)
    return terms


def build_chain_via_eprime(n_max: int) -> List[IntPolynomial]:
    """p_n = n + E'_1(1) + ... + E'_{n-1}(1), for n = 1 .. n_max."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    ep = eprime_terms(n_max)
    chain = []
    acc = IntPolynomial()
    for n in range(1, n_max + 1):
        if n >= 2:
            acc = acc + ep[n - 1]
        chain.append(acc + IntPolynomial.constant(n))
    return chain


def expected_leading(n: int) -> int:
    return 1 if n % 4 in (0, 1) else -1


@dataclass
class StructureEntry:
    n: int
    constant_term: int
    degree: int
    leading: int
    even_part_is_even: bool
    divisible_by_p2: Optional[bool]
    violations: List[str] = field(default_factory=list)


@dataclass
class StructureReport:
    entries: List[StructureEntry]
    divisibility: Dict[Tuple[int, int], bool]

    @property
    def violations(self) -> List[str]:
        out = [v for e in self.entries for v in e.violations]
        out += [f"p_{m} does not divide p_{n} (divisor chain)" for (m, n), ok in self.divisibility.items() if not ok]
        return out

    @property
    def ok(self) -> bool:
        return not self.violations

    def lines(self) -> List[str]:
        rows = ["n\tp_n(0)\tdeg\tlead\teven\tp2|p_n\tstatus"]
        for e in self.entries:
            div = "-" if e.divisible_by_p2 is None else ("yes" if e.divisible_by_p2 else "no")
            status = "ok" if not e.violations else "; ".join(e.violations)
            rows.append(f"{e.n}\t{e.constant_term}\t{e.degree}\t{e.leading:+d}\t{'yes' if e.even_part_is_even else 'no'}\t{div}\t{status}")
        bad = [k for k, ok in self.divisibility.items() if not ok]
        rows.append(f"divisor pairs checked: {len(self.divisibility)}, failures: {len(bad)}")
        return rows


def check_structure(chain: Sequence[IntPolynomial]) -> StructureReport:
    """Constant term, degree, leading sign, parity and divisibility of each p_n.

    ``chain[i]`` must be p_{i+1}.  Divisibility p_m | p_{km} is checked for
    every pair inside the chain.
    """
    entries = []
    for idx, p in enumerate(chain):
        n = idx + 1
        viol = []
        if p[0] != n:
            viol.append(f"n={n}: constant term {p[0]} != n")
        if p.degree != n - 1:
            viol.append(f"n={n}: degree {p.degree} != n-1")
        if p.leading != expected_leading(n):
            viol.append(f"n={n}: leading coefficient {p.leading} != {expected_leading(n)}")
        div2 = None
        if n % 2 == 0:
            try:
                even_part = exact_divide(p, TWO_MINUS_A)
                div2 = True
            except NonzeroRemainder:
                even_part = p
                div2 = False
                viol.append(f"n={n}: (2 - A) does not divide p_n")
        else:
            even_part = p
        is_even = even_part.is_even()
        if n >= 2 and not is_even:
            what = "p_n/(2-A)" if n % 2 == 0 else "p_n"
            viol.append(f"n={n}: {what} is not even")
        entries.append(StructureEntry(n, p[0], p.degree, p.leading, is_even, div2, viol))
    divisibility = {}
    for m in range(2, len(chain) + 1):
        for n in range(2 * m, len(chain) + 1, m):
            divisibility[(m, n)] = divides(chain[m - 1], chain[n - 1])
    return StructureReport(entries, divisibility)


def prime_divisibility(chain: Sequence[IntPolynomial]) -> Dict[int, bool]:
    """For prime n: are all non-leading coefficients of p_n multiples of n?

    Informational only; nothing downstream relies on it.
    """
    out = {}
    for idx, p in enumerate(chain):
        n = idx + 1
        if n > 1 and all(n % d for d in range(2, int(n ** 0.5) + 1)):
            out[n] = all(c % n == 0 for c in p.coeffs[:-1])
    return out


class ChainContext:
    """Memoised chain shared by the root finder and the continuation code."""

    def __init__(self, n_max: int = 0):
        self._chain: List[IntPolynomial] = []
        if n_max:
            self.extend(n_max)

    def extend(self, n_max: int) -> None:
        if n_max > len(self._chain):
            self._chain = build_chain_recurrence(n_max)

    def __getitem__(self, n: int) -> IntPolynomial:
        if n < 1:
            raise IndexError("chain index starts at 1")
        self.extend(n)
        return self._chain[n - 1]

    def __len__(self) -> int:
        return len(self._chain)

    def upto(self, n_max: int) -> List[IntPolynomial]:
        self.extend(n_max)
        return list(self._chain[:n_max])


def chain_to_json(chain: Sequence[IntPolynomial]) -> str:
    rows = [{"n": i + 1, "coeffs": [str(c) for c in p.coeffs]} for i, p in enumerate(chain)]
    return json.dumps(rows, indent=1)


def chain_from_json(text: str) -> List[IntPolynomial]:
    rows = sorted(json.loads(text), key=lambda r: r["n"])
    return [IntPolynomial(tuple(int(c) for c in r["coeffs"])) for r in rows]
