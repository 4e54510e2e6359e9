"""D(4)-tuples: validated pairs/triples/quadruples and the regular constructions."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import combinations

from .arith import is_perfect_square


class NotATuple(ValueError):
    """Raised when the given integers do not form a D(4)-tuple."""


def _root(u: int, v: int) -> int:
    ok, root = is_perfect_square(u * v + 4)
    if not ok:
        raise NotATuple(f"{u}*{v}+4 is not a perfect square")
    return root


@dataclass(frozen=True, order=True)
class D4Pair:
    a: int
    b: int
    r: int

    def __post_init__(self):
        if not 0 < self.a < self.b:
            raise NotATuple(f"need 0 < a < b, got ({self.a}, {self.b})")
        if self.a * self.b + 4 != self.r * self.r or self.r < 0:
            raise NotATuple(f"r={self.r} is not sqrt({self.a}*{self.b}+4)")

    def elements(self) -> tuple[int, int]:
        return (self.a, self.b)


@dataclass(frozen=True, order=True)
class D4Triple:
    pair: D4Pair
    c: int
    s: int
    t: int

    def __post_init__(self):
        a, b = self.pair.a, self.pair.b
        if not self.c > b:
            raise NotATuple(f"need c > b, got c={self.c}, b={b}")
        if a * self.c + 4 != self.s**2 or b * self.c + 4 != self.t**2 or self.s < 0 or self.t < 0:
            raise NotATuple(f"({a}, {b}, {self.c}) is not a D(4)-triple")

    @property
    def a(self) -> int:
        return self.pair.a

    @property
    def b(self) -> int:
        return self.pair.b

    @property
    def r(self) -> int:
        return self.pair.r

    def elements(self) -> tuple[int, int, int]:
        return (self.a, self.b, self.c)

    @property
    def half_gap(self) -> int:
        """``(cr - st)/2``, the value appearing in the classification of initial terms."""
        diff = self.c * self.r - self.s * self.t
        assert diff % 2 == 0, "cr - st must be even"
        return diff // 2


@dataclass(frozen=True, order=True)
class D4Quadruple:
    triple: D4Triple
    d: int
    x: int
    y: int
    z: int

    def __post_init__(self):
        a, b, c = self.triple.elements()
        if self.d < 1 or self.d in (a, b, c):
            raise NotATuple(f"d={self.d} must be positive and distinct from {a, b, c}")
        if (a * self.d + 4, b * self.d + 4, c * self.d + 4) != (self.x**2, self.y**2, self.z**2):
            raise NotATuple(f"{self.d} does not extend ({a}, {b}, {c})")

    def elements(self) -> tuple[int, int, int, int]:
        return tuple(sorted(self.triple.elements() + (self.d,)))


class Regularity(str, enum.Enum):
    REGULAR_PLUS = "regular_plus"
    REGULAR_MINUS = "regular_minus"
    IRREGULAR = "irregular"


def make_pair(a: int, b: int) -> D4Pair:
    a, b = sorted((a, b))
    return D4Pair(a, b, _root(a, b))


def make_triple(a: int, b: int, c: int) -> D4Triple:
    a, b, c = sorted((a, b, c))
    pair = make_pair(a, b)
    if c == b:
        raise NotATuple("elements must be distinct")
    return D4Triple(pair, c, _root(a, c), _root(b, c))


def make_quadruple(a: int, b: int, c: int, d: int) -> D4Quadruple:
    a, b, c, d = sorted((a, b, c, d))
    triple = make_triple(a, b, c)
    return D4Quadruple(triple, d, _root(a, d), _root(b, d), _root(c, d))


def verify_tuple(elems) -> bool:
    """True iff ``elems`` are distinct positive integers forming a D(4)-tuple."""
    items = list(elems)
    if any(e <= 0 for e in items) or len(set(items)) != len(items):
        return False
    return all(is_perfect_square(u * v + 4)[0] for u, v in combinations(items, 2))


def regular_triple_c(pair: D4Pair) -> int:
    return pair.a + pair.b + 2 * pair.r


def _d_pm(a: int, b: int, c: int, sign: int) -> int:
    r, s, t = _root(a, b), _root(a, c), _root(b, c)
    num = a * b * c + sign * r * s * t
    assert num % 2 == 0
    return a + b + c + num // 2


def d_plus(triple: D4Triple) -> int:
    return _d_pm(*triple.elements(), 1)


def d_minus(triple: D4Triple) -> int:
    return _d_pm(*triple.elements(), -1)


def c_family(pair: D4Pair, nu: int, tau: int) -> int:
    """``c_nu^tau`` through ``c_{k+1} = (ab+2) c_k - c_{k-1} + 2(a+b)``."""
    if nu < 0:
        raise ValueError("nu must be >= 0")
    if tau not in (1, -1):
        raise ValueError("tau must be +1 or -1")
    a, b, r = pair.a, pair.b, pair.r
    prev, cur = 0, a + b + 2 * tau * r
    if nu == 0:
        return prev
    for _ in range(nu - 1):
        prev, cur = cur, (a * b + 2) * cur - prev + 2 * (a + b)
    return cur


def c_family_closed_form(pair: D4Pair, nu: int, tau: int, ctx):
    """Closed-form ``c_nu^tau`` evaluated in an mpmath context ``ctx``."""
    a, b, r = ctx.mpf(pair.a), ctx.mpf(pair.b), ctx.mpf(pair.r)
    sa, sb, sab = ctx.sqrt(a), ctx.sqrt(b), ctx.sqrt(a * b)
    first = ((sb + tau * sa) / 2) ** 2 * ((r + sab) / 2) ** (2 * nu)
    second = ((sb - tau * sa) / 2) ** 2 * ((r - sab) / 2) ** (2 * nu)
    return 4 / (a * b) * (first + second - (a + b) / 2)


def family_predicates(pair: D4Pair, c: int) -> dict[str, bool]:
    """Range tests used by the counting results for ``c`` built on ``pair``.

    The ``c >= c_5^-`` and ``c >= c_4^- with a >= 35`` conditions are reported
    separately; callers combine them as needed.
    """
    a = pair.a
    return {
        "is_c1": c in (c_family(pair, 1, 1), c_family(pair, 1, -1)),
        "c2plus_to_c4plus": c_family(pair, 2, 1) <= c <= c_family(pair, 4, 1),
        "is_c2minus": c == c_family(pair, 2, -1),
        "ge_c5minus": c >= c_family(pair, 5, -1),
        "ge_c4minus_a_ge_35": c >= c_family(pair, 4, -1) and a >= 35,
    }


@dataclass(frozen=True)
class DescentStep:
    s_prime: int
    t_prime: int
    c_prime: int
    relation: str  # "gt_b", "eq_b", "zero", "between", "negative"


def pair_descent_step(triple: D4Triple) -> DescentStep:
    a, b, r, s, t = triple.a, triple.b, triple.r, triple.s, triple.t
    u, v = r * s - a * t, r * t - b * s
    assert u % 2 == 0 and v % 2 == 0, "descent parity violated"
    sp, tp = u // 2, v // 2
    num = sp * sp - 4
    assert num % a == 0, "descent c' not integral"
    cp = num // a
    if cp > b:
        rel = "gt_b"
    elif cp == b:
        rel = "eq_b"
    elif cp == 0:
        rel = "zero"
    elif cp > 0:
        rel = "between"
    else:
        rel = "negative"
    return DescentStep(sp, tp, cp, rel)


def classify_quadruple(q: D4Quadruple) -> Regularity:
    """Regular if some element equals ``d_+`` or a nonzero ``d_-`` of the other three."""
    elems = q.elements()
    # the sub-triple without the largest element is tried first
    for drop in (3, 2, 1, 0):
        rest = [e for i, e in enumerate(elems) if i != drop]
        sub = make_triple(*rest)
        x = elems[drop]
        if x == d_plus(sub):
            return Regularity.REGULAR_PLUS
        dm = d_minus(sub)
        if dm != 0 and x == dm:
            return Regularity.REGULAR_MINUS
    return Regularity.IRREGULAR


def parse_tuple_literal(items) -> list[int]:
    """Decimal-string (or int) list -> ints; raises ValueError on junk."""
    out = []
    for it in items:
        if isinstance(it, bool):
            raise ValueError(f"not an integer: {it!r}")
        if isinstance(it, int):
            out.append(it)
            continue
        text = str(it).strip()
        if not text.lstrip("-").isdigit():
            raise ValueError(f"not an integer: {it!r}")
        out.append(int(text))
    return out


def tuple_to_json(elems) -> list[str]:
    return [str(int(e)) for e in elems]
