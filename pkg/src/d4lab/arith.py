"""Exact integer primitives and certified high-precision reals.

Integers are plain Python ``int`` (arbitrary precision).  Reals are closed
intervals with exact binary endpoints computed by :mod:`mpmath`'s interval
context, so every comparison made on them is either certified or reported
as undecidable at the current precision.
"""

from __future__ import annotations

import math
import os
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable

from mpmath import iv, libmp, mp, mpf

DEFAULT_PRECISION = 256
MAX_PRECISION = 16384
PRECISION_ENV = "D4LAB_PRECISION"

# quadratic residues used to reject non-squares before calling isqrt
_SQUARE_FILTERS = {
    m: frozenset((k * k) % m for k in range(m)) for m in (64, 63, 65, 11)
}


class PrecisionExhausted(ArithmeticError):
    """A quantity could not be certified at the working precision."""


def default_precision() -> int:
    """Working precision in bits, overridable through ``D4LAB_PRECISION``."""
    raw = os.environ.get(PRECISION_ENV)
    if not raw:
        return DEFAULT_PRECISION
    bits = int(raw)
    if bits < 64:
        raise ValueError(f"{PRECISION_ENV} must be at least 64, got {bits}")
    return bits


def isqrt(n: int) -> int:
    if n < 0:
        raise ValueError(f"isqrt of negative number {n}")
    return math.isqrt(n)


def is_perfect_square(n: int) -> tuple[bool, int]:
    """Return ``(True, root)`` when ``n == root**2``, else ``(False, 0)``."""
    if n < 0:
        return False, 0
    for m, residues in _SQUARE_FILTERS.items():
        if n % m not in residues:
            return False, 0
    root = math.isqrt(n)
    if root * root == n:
        return True, root
    return False, 0


@contextmanager
def iv_workprec(bits: int):
    """Temporarily set the precision of mpmath's interval context."""
    saved = iv.prec
    iv.prec = bits
    try:
        yield iv
    finally:
        iv.prec = saved


def _ivmpf_bounds(x) -> tuple[Fraction, Fraction]:
    lo, hi = x._mpi_
    return Fraction(*map(int, libmp.to_rational(lo))), Fraction(*map(int, libmp.to_rational(hi)))


@dataclass(frozen=True)
class HighPrecReal:
    """A real number known to lie in ``[lo, hi]``; endpoints are exact rationals."""

    lo: Fraction
    hi: Fraction
    precision: int

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("empty interval")
        if self.precision < 64:
            raise ValueError("precision must be at least 64 bits")

    @classmethod
    def evaluate(cls, expr: Callable, precision: int | None = None) -> "HighPrecReal":
        """Evaluate ``expr(ctx)`` in mpmath's interval context.

        ``expr`` receives the interval context and must only use its functions
        (``ctx.sqrt``, ``ctx.log``, ...), so the enclosure is rigorous.
        """
        prec = precision or default_precision()
        with iv_workprec(prec):
            value = expr(iv)
            if not isinstance(value, type(iv.mpf(1))):
                value = iv.mpf(value)
            lo, hi = _ivmpf_bounds(value)
        return cls(lo, hi, prec)

    @classmethod
    def exact(cls, value, precision: int | None = None) -> "HighPrecReal":
        q = Fraction(value)
        return cls(q, q, precision or default_precision())

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def relative_error(self) -> float:
        m = abs(self.mid)
        if m == 0:
            return float(self.width)
        return float(self.width / m)

    def contains(self, value) -> bool:
        return self.lo <= Fraction(value) <= self.hi

    def certainly_positive(self) -> bool:
        return self.lo > 0

    def certainly_negative(self) -> bool:
        return self.hi < 0

    def sign(self) -> int:
        """Certified sign; raises when the interval straddles zero."""
        if self.lo > 0:
            return 1
        if self.hi < 0:
            return -1
        if self.lo == self.hi == 0:
            return 0
        raise PrecisionExhausted("sign not certified at %d bits" % self.precision)

    def floor(self) -> int:
        f = math.floor(self.lo)
        if math.floor(self.hi) != f:
            raise PrecisionExhausted("floor not certified at %d bits" % self.precision)
        return f

    def to_mpf(self) -> mpf:
        with mp.workprec(self.precision):
            return mpf(self.mid.numerator) / self.mid.denominator

    def __float__(self) -> float:
        return float(self.mid)

    def __repr__(self) -> str:
        return f"HighPrecReal(~{float(self.mid):.17g}, ±{float(self.width) / 2:.3g}, {self.precision}b)"


def continued_fraction(x: HighPrecReal, depth: int) -> list[int]:
    """First ``depth`` partial quotients of the real enclosed by ``x``.

    Raises :class:`PrecisionExhausted` when a quotient cannot be certified.
    A rational ``x`` known exactly may terminate early.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if x.lo <= 0:
        raise ValueError("continued_fraction expects x > 0")
    lo, hi = x.lo, x.hi
    quotients: list[int] = []
    while len(quotients) < depth:
        a = math.floor(lo)
        if math.floor(hi) != a:
            raise PrecisionExhausted(
                f"quotient {len(quotients)} undecided at {x.precision} bits"
            )
        quotients.append(a)
        flo, fhi = lo - a, hi - a
        if flo == 0:
            if fhi == 0:
                break  # exact rational, expansion finished
            raise PrecisionExhausted(
                f"quotient {len(quotients)} undecided at {x.precision} bits"
            )
        lo, hi = 1 / fhi, 1 / flo
    return quotients


def certified_continued_fraction(
    expr: Callable, depth: int, precision: int | None = None
) -> tuple[list[int], int]:
    """Continued fraction of ``expr`` with automatic precision escalation.

    Returns the quotients and the precision (bits) at which they were certified.
    """
    prec = precision or default_precision()
    while prec <= MAX_PRECISION:
        try:
            return continued_fraction(HighPrecReal.evaluate(expr, prec), depth), prec
        except PrecisionExhausted:
            prec *= 2
    raise PrecisionExhausted(f"continued fraction needs more than {MAX_PRECISION} bits")


def convergents(cf: Iterable[int]) -> list[Fraction]:
    quotients = list(cf)
    if not quotients:
        raise ValueError("empty quotient list")
    p_prev, p = 1, quotients[0]
    q_prev, q = 0, 1
    out = [Fraction(p, q)]
    for a in quotients[1:]:
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        out.append(Fraction(p, q))
    return out


def convergent_pairs(cf: Iterable[int]) -> list[tuple[int, int]]:
    """Unreduced ``(p_k, q_k)`` from the recurrence (always coprime anyway)."""
    return [(f.numerator, f.denominator) for f in convergents(cf)]


def nearest_int_distance(x: HighPrecReal) -> HighPrecReal:
    """Enclosure of ``||x||``, the distance to the nearest integer."""
    lo, hi = x.lo, x.hi
    n = math.floor(lo)
    f_lo, f_hi = lo - n, hi - n
    if f_hi <= Fraction(1, 2):
        return HighPrecReal(f_lo, f_hi, x.precision)
    if f_lo >= Fraction(1, 2) and f_hi <= 1:
        return HighPrecReal(1 - f_hi, 1 - f_lo, x.precision)
    # interval spans a half-integer or an integer; fall back to a safe hull
    if f_hi <= 1:
        return HighPrecReal(min(f_lo, 1 - f_hi), Fraction(1, 2), x.precision)
    return HighPrecReal(Fraction(0), Fraction(1, 2), x.precision)


def scale(x: HighPrecReal, k: int) -> HighPrecReal:
    """Exact product of an enclosure by an integer."""
    a, b = x.lo * k, x.hi * k
    return HighPrecReal(min(a, b), max(a, b), x.precision)
