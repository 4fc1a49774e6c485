"""Outward-rounded interval scalars with an explicit working precision.

Thin layer over the interval kernels of ``mpmath.libmp.libmpi``.  Every
operation rounds its lower endpoint toward -inf and its upper endpoint
toward +inf at the precision carried by the left operand, so the result
always encloses the exact value.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from decimal import Context, Decimal
from fractions import Fraction
from numbers import Rational
from typing import Iterator, Union

import mpmath
from mpmath.libmp import (
    finf,
    fninf,
    fnan,
    from_float,
    from_int,
    from_rational,
    from_str,
    fzero,
    mpf_abs,
    mpf_cmp,
    mpf_exp,
    mpf_lt,
    mpf_sub,
    round_ceiling,
    round_floor,
    to_rational,
    to_str,
)
from mpmath.libmp import libmpi

DEFAULT_START_BITS = 128
DEFAULT_CEILING_BITS = 16384
CEILING_ENV = "SUBHARMONICS_PRECISION_CEILING"

# exp() arguments beyond this magnitude are clamped to a one-sided enclosure;
# their exact values would need more memory than any machine has.
EXP_CLAMP = 1 << 24
_CLAMP_POS = from_int(EXP_CLAMP)
_CLAMP_NEG = from_int(-EXP_CLAMP)


class PrecisionExhausted(ArithmeticError):
    """Raised when an enclosure stays too wide at the precision ceiling."""

    def __init__(self, message, width=None, bits=None):
        super().__init__(message)
        self.width = width
        self.bits = bits


Scalar = Union[int, Fraction, float, str, "PrecisionInterval"]


def _mk(raw) -> mpmath.mpf:
    """mpf from a raw tuple without rounding to the global context."""
    return mpmath.mp.make_mpf(raw)


def _endpoints(value, prec):
    if isinstance(value, PrecisionInterval):
        return value._v
    if isinstance(value, bool):
        value = int(value)
    if isinstance(value, int):
        return (from_int(value, prec, round_floor), from_int(value, prec, round_ceiling))
    if isinstance(value, Rational):
        p, q = value.numerator, value.denominator
        return (from_rational(p, q, prec, round_floor), from_rational(p, q, prec, round_ceiling))
    if isinstance(value, float):
        return (from_float(value, prec, round_floor), from_float(value, prec, round_ceiling))
    if isinstance(value, str):
        return (from_str(value, prec, round_floor), from_str(value, prec, round_ceiling))
    if isinstance(value, mpmath.mpf):
        return (value._mpf_, value._mpf_)
    raise TypeError(f"cannot enclose {type(value).__name__}")


def _exp(v, prec):
    lo, hi = v
    if mpf_lt(hi, _CLAMP_NEG):
        return (fzero, mpf_exp(_CLAMP_NEG, prec, round_ceiling))
    if mpf_lt(_CLAMP_POS, lo):
        return (mpf_exp(_CLAMP_POS, prec, round_floor), finf)
    new_lo = fzero if mpf_lt(lo, _CLAMP_NEG) else mpf_exp(lo, prec, round_floor)
    new_hi = finf if mpf_lt(_CLAMP_POS, hi) else mpf_exp(hi, prec, round_ceiling)
    return (new_lo, new_hi)


def _sanitize(v):
    lo, hi = v
    if lo == fnan or hi == fnan:
        return (fninf, finf)
    return v


class PrecisionInterval:
    """Closed interval ``[lo, hi]`` of arbitrary-precision binary floats.

    >>> x = PrecisionInterval(Fraction(1, 3), prec=64)
    >>> x.contains(Fraction(1, 3))
    True
    """

    __slots__ = ("_v", "prec")

    def __init__(self, lo, hi=None, prec: int = DEFAULT_START_BITS):
        self.prec = prec
        if isinstance(lo, tuple) and hi is None:
            self._v = lo
            return
        a = _endpoints(lo, prec)
        if hi is None:
            self._v = a
        else:
            b = _endpoints(hi, prec)
            if mpf_lt(b[1], a[0]):
                raise ValueError("interval with hi < lo")
            self._v = (a[0], b[1])

    @classmethod
    def _raw(cls, v, prec):
        obj = cls.__new__(cls)
        obj._v = _sanitize(v)
        obj.prec = prec
        return obj

    def _coerce(self, other):
        if isinstance(other, PrecisionInterval):
            return other._v
        return _endpoints(other, self.prec)

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        return self._raw(libmpi.mpi_add(self._v, self._coerce(other), self.prec), self.prec)

    __radd__ = __add__

    def __sub__(self, other):
        return self._raw(libmpi.mpi_sub(self._v, self._coerce(other), self.prec), self.prec)

    def __rsub__(self, other):
        return self._raw(libmpi.mpi_sub(self._coerce(other), self._v, self.prec), self.prec)

    def __mul__(self, other):
        return self._raw(libmpi.mpi_mul(self._v, self._coerce(other), self.prec), self.prec)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._raw(libmpi.mpi_div(self._v, self._coerce(other), self.prec), self.prec)

    def __rtruediv__(self, other):
        return self._raw(libmpi.mpi_div(self._coerce(other), self._v, self.prec), self.prec)

    def __neg__(self):
        return self._raw(libmpi.mpi_neg(self._v), self.prec)

    def __pos__(self):
        return self

    def square(self):
        return self._raw(libmpi.mpi_square(self._v, self.prec), self.prec)

    def exp(self):
        return self._raw(_exp(self._v, self.prec), self.prec)

    def cos(self):
        return self._raw(libmpi.mpi_cos(self._v, self.prec), self.prec)

    def sqrt(self):
        return self._raw(libmpi.mpi_sqrt(self._v, self.prec), self.prec)

    def tanh(self):
        """Monotone enclosure, evaluated at the endpoints as 1 - 2/(e^{2y} + 1)."""
        return monotone_image(_point_tanh, self)

    @classmethod
    def pi(cls, prec: int = DEFAULT_START_BITS) -> "PrecisionInterval":
        return cls._raw(libmpi.mpi_pi(prec), prec)

    def at(self, prec: int) -> "PrecisionInterval":
        """Same endpoints, different working precision for later operations."""
        return self._raw(self._v, prec)

    # inspection -----------------------------------------------------------
    @property
    def lo(self) -> mpmath.mpf:
        return _mk(self._v[0])

    @property
    def hi(self) -> mpmath.mpf:
        return _mk(self._v[1])

    @property
    def width(self) -> mpmath.mpf:
        lo, hi = self._v
        return _mk(mpf_sub(hi, lo, 53, round_ceiling))

    @property
    def mid(self) -> mpmath.mpf:
        return _mk(libmpi.mpi_mid(self._v, self.prec))

    def mid_fraction(self) -> Fraction:
        mid = libmpi.mpi_mid(self._v, self.prec)
        if mid in (finf, fninf, fnan):
            raise ValueError("unbounded interval has no rational midpoint")
        return Fraction(*to_rational(mid))

    def is_finite(self) -> bool:
        lo, hi = self._v
        return lo not in (finf, fninf, fnan) and hi not in (finf, fninf, fnan)

    def contains(self, value) -> bool:
        a, b = _endpoints(value, max(self.prec, 64)) if not isinstance(value, PrecisionInterval) else value._v
        lo, hi = self._v
        return mpf_cmp(lo, a) <= 0 and mpf_cmp(b, hi) <= 0

    def contains_zero(self) -> bool:
        lo, hi = self._v
        return mpf_cmp(lo, fzero) <= 0 <= mpf_cmp(hi, fzero)

    def overlaps(self, other) -> bool:
        a, b = self._coerce(other)
        lo, hi = self._v
        return mpf_cmp(lo, b) <= 0 and mpf_cmp(a, hi) <= 0

    def intersect(self, other) -> "PrecisionInterval":
        a, b = self._coerce(other)
        lo, hi = self._v
        new_lo = lo if mpf_cmp(lo, a) >= 0 else a
        new_hi = hi if mpf_cmp(hi, b) <= 0 else b
        if mpf_lt(new_hi, new_lo):
            raise ValueError("empty intersection")
        return self._raw((new_lo, new_hi), self.prec)

    def hull(self, other) -> "PrecisionInterval":
        a, b = self._coerce(other)
        lo, hi = self._v
        return self._raw((lo if mpf_cmp(lo, a) <= 0 else a, hi if mpf_cmp(hi, b) >= 0 else b), self.prec)

    def sign(self):
        """+1 or -1 when the sign is certain, 0 for the exact point 0, else None."""
        lo, hi = self._v
        if mpf_cmp(lo, fzero) > 0:
            return 1
        if mpf_cmp(hi, fzero) < 0:
            return -1
        if lo == fzero and hi == fzero:
            return 0
        return None

    def magnitude_bounds(self):
        """Lower and upper bounds on |value| as mpf."""
        lo, hi = self._v
        if self.contains_zero():
            return _mk(fzero), max(_mk(mpf_abs(lo)), _mk(mpf_abs(hi)))
        a, b = _mk(mpf_abs(lo)), _mk(mpf_abs(hi))
        return min(a, b), max(a, b)

    def endpoints_fraction(self):
        """Exact rational endpoints; raises ValueError when unbounded."""
        if not self.is_finite():
            raise ValueError("unbounded interval")
        lo, hi = self._v
        return Fraction(*to_rational(lo)), Fraction(*to_rational(hi))

    def __iter__(self) -> Iterator[mpmath.mpf]:
        yield self.lo
        yield self.hi

    def to_strings(self, digits: int = 20):
        """Decimal endpoint strings rounded outward to ``digits`` significant digits."""
        lo, hi = self._v
        return _outward_str(lo, digits, down=True), _outward_str(hi, digits, down=False)

    def __repr__(self):
        lo, hi = self.to_strings(17)
        return f"PrecisionInterval([{lo}, {hi}], prec={self.prec})"


def _outward_str(v, digits, down):
    if v in (finf, fninf, fnan, fzero):
        return to_str(v, digits)
    check_prec = max(v[3], 4 * digits) + 32
    mant, _, exp10 = to_str(v, digits, min_fixed=1, max_fixed=0).partition("e")
    exp10 = int(exp10 or 0)
    ctx = Context(prec=digits + 8)
    m = Decimal(mant)
    ulp = Decimal(1).scaleb(-digits + 1)
    for _ in range(4):
        s = f"{m}e{exp10}" if exp10 else str(m)
        if down and mpf_cmp(from_str(s, check_prec, round_ceiling), v) <= 0:
            return s
        if not down and mpf_cmp(from_str(s, check_prec, round_floor), v) >= 0:
            return s
        m = ctx.subtract(m, ulp) if down else ctx.add(m, ulp)
    raise ArithmeticError("outward decimal rounding did not settle")


@dataclass(frozen=True)
class PrecisionPolicy:
    """Start precision, doubling on failure up to a ceiling."""

    start_bits: int = DEFAULT_START_BITS
    ceiling_bits: int = DEFAULT_CEILING_BITS

    def __post_init__(self):
        if self.start_bits < 16 or self.ceiling_bits < self.start_bits:
            raise ValueError("need 16 <= start_bits <= ceiling_bits")

    @classmethod
    def from_env(cls, start_bits: int = DEFAULT_START_BITS, ceiling_bits: int = DEFAULT_CEILING_BITS):
        env = os.environ.get(CEILING_ENV)
        if env:
            ceiling_bits = int(env)
        return cls(start_bits, max(ceiling_bits, start_bits))

    def ladder(self) -> Iterator[int]:
        bits = self.start_bits
        while bits < self.ceiling_bits:
            yield bits
            bits *= 2
        yield self.ceiling_bits


DEFAULT_POLICY = PrecisionPolicy()


def enclose(value, prec: int = DEFAULT_START_BITS) -> PrecisionInterval:
    """Enclosure of an exact scalar (int, Fraction, float, decimal string)."""
    if isinstance(value, PrecisionInterval):
        return value if value.prec == prec else value.at(prec)
    return PrecisionInterval(value, prec=prec)


def monotone_image(fn, x: PrecisionInterval, increasing: bool = True) -> PrecisionInterval:
    """Enclose ``fn(X)`` for a monotone ``fn`` by evaluating at the endpoints.

    ``fn`` must map a degenerate PrecisionInterval to an enclosure.
    """
    lo_pt = PrecisionInterval._raw((x._v[0], x._v[0]), x.prec)
    hi_pt = PrecisionInterval._raw((x._v[1], x._v[1]), x.prec)
    a, b = fn(lo_pt), fn(hi_pt)
    if not increasing:
        a, b = b, a
    return PrecisionInterval._raw((a._v[0], b._v[1]), x.prec)


def _point_tanh(y: PrecisionInterval) -> PrecisionInterval:
    e = (y * 2).exp()
    t = 1 - 2 / (e + 1)
    # clamp the rounding spill-over into the true range [-1, 1]
    return t.intersect(PrecisionInterval(-1, 1, prec=y.prec))


__all__ = [
    "PrecisionInterval",
    "PrecisionPolicy",
    "PrecisionExhausted",
    "DEFAULT_POLICY",
    "enclose",
    "monotone_image",
    "Scalar",
]
