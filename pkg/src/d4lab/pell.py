"""Generalized Pell equations attached to a D(4)-triple.

For a triple ``{a, b, c}`` an extension ``d`` gives ``z = sqrt(cd + 4)`` with

    c x^2 - a z^2 = 4 (c - a),      c y^2 - b z^2 = 4 (c - b),

and every ``z`` is a term ``v_m`` of some class of the first equation and a
term ``w_n`` of some class of the second one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .arith import is_perfect_square, isqrt
from .tuples import D4Triple, d_plus


@dataclass(frozen=True, order=True)
class PellClassA:
    """Initial data ``(z0, x0)`` of a solution class of ``c x^2 - a z^2 = 4(c-a)``."""

    z0: int
    x0: int
    in_range: bool = field(default=True, compare=False)


@dataclass(frozen=True, order=True)
class PellClassB:
    """Initial data ``(z1, y1)`` of a solution class of ``c y^2 - b z^2 = 4(c-b)``."""

    z1: int
    y1: int
    in_range: bool = field(default=True, compare=False)


@dataclass(frozen=True)
class ClassCase:
    """Which clauses of the initial-term classification a class pair matches.

    Tags: ``ee_z2`` / ``ee_half`` (both indices even, ``z0 = z1``), ``oe`` (odd
    ``m``, even ``n``), ``eo`` (even ``m``, odd ``n``) and ``oo``.
    """

    tags: tuple[str, ...]
    coincidence: bool = False
    note: str = ""

    @property
    def case_tag(self) -> str:
        return self.tags[0] if self.tags else "unclassified"

    def allows(self, m: int, n: int) -> bool:
        parity = ("e" if m % 2 == 0 else "o") + ("e" if n % 2 == 0 else "o")
        return any(t.startswith(parity) for t in self.tags)


@dataclass(frozen=True, order=True)
class IntersectionSolution:
    z: int
    m: int
    n: int
    d: int
    class_a: PellClassA
    class_b: PellClassB


@dataclass
class IntersectionResult:
    """Intersections split into genuine extensions (``d > c``) and the rest."""

    solutions: list[IntersectionSolution]
    small: list[IntersectionSolution]
    non_integral: list[tuple[int, int, int]]

    def d_values(self) -> list[int]:
        return sorted({s.d for s in self.solutions})


def _range_a(triple: D4Triple, z0: int) -> bool:
    a, c = triple.a, triple.c
    # |z0| < sqrt(c*sqrt(c)/sqrt(a))  <=>  z0^4 * a < c^3
    return z0**4 * a < c**3


def enumerate_classes_A(triple: D4Triple) -> list[PellClassA]:
    a, c, s = triple.a, triple.c, triple.s
    out = []
    x0 = 1
    while x0 * x0 < s + 2:
        num = c * x0 * x0 - 4 * (c - a)
        if num >= 0 and num % a == 0:
            ok, z = is_perfect_square(num // a)
            if ok and z > 0:
                for z0 in (-z, z):
                    out.append(PellClassA(z0, x0, _range_a(triple, z0)))
        x0 += 1
    return sorted(out, key=lambda k: (k.x0, k.z0))


def enumerate_classes_B(triple: D4Triple) -> list[PellClassB]:
    b, c, t = triple.b, triple.c, triple.t
    out = []
    y1 = 1
    while y1 * y1 < t + 2:
        num = c * y1 * y1 - 4 * (c - b)
        if num >= 0 and num % b == 0:
            ok, z = is_perfect_square(num // b)
            if ok and z > 0:
                in_range = z**4 * b < c**3
                for z1 in (-z, z):
                    out.append(PellClassB(z1, y1, in_range))
        y1 += 1
    return sorted(out, key=lambda k: (k.y1, k.z1))


def classify_case(class_a: PellClassA, class_b: PellClassB, triple: D4Triple) -> ClassCase:
    z0, z1 = class_a.z0, class_b.z1
    t, s, half = triple.t, triple.s, abs(triple.half_gap)
    tags = []
    if z0 == z1 and abs(z0) == 2:
        tags.append("ee_z2")
    if z0 == z1 and abs(z0) == half:
        tags.append("ee_half")
    if abs(z0) == t and abs(z1) == half and z0 * z1 < 0:
        tags.append("oe")
    if abs(z1) == s and abs(z0) == half and z0 * z1 < 0:
        tags.append("eo")
    if abs(z0) == t and abs(z1) == s and z0 * z1 > 0:
        tags.append("oo")
    coincidence = half in (2, t, s)
    note = "oe cannot occur when d > d_plus" if "oe" in tags else ""
    return ClassCase(tuple(tags), coincidence, note)


def gen_v(triple: D4Triple, class_a: PellClassA, count: int) -> list[int]:
    return _gen(triple.s, triple.c, class_a.z0, class_a.x0, count)


def gen_w(triple: D4Triple, class_b: PellClassB, count: int) -> list[int]:
    return _gen(triple.t, triple.c, class_b.z1, class_b.y1, count)


def _gen(step: int, c: int, z: int, x: int, count: int) -> list[int]:
    if count < 1:
        raise ValueError("count must be >= 1")
    first = step * z + c * x
    assert first % 2 == 0, "initial data has wrong parity"
    seq = [z, first // 2]
    while len(seq) < count:
        seq.append(step * seq[-1] - seq[-2])
    return seq[:count]


def _terms_upto(step: int, c: int, z: int, x: int, z_max: int) -> list[int]:
    seq = _gen(step, c, z, x, 2)
    while seq[-1] <= z_max:
        seq.append(step * seq[-1] - seq[-2])
        assert seq[-1] > seq[-2], "recurrence tail is not increasing"
    return seq


def _merge_equal(v: list[int], w: list[int], lo: int, hi: int):
    """Yield ``(m, n)`` with ``v[m] == w[n]`` and ``lo < v[m] <= hi``.

    Both sequences are nondecreasing from index 1 on; index 0 is checked apart.
    """
    i = j = 0
    while i < len(v) and j < len(w):
        if v[i] < w[j]:
            i += 1
        elif v[i] > w[j]:
            j += 1
        else:
            if lo < v[i] <= hi:
                yield i, j
            i += 1
            j += 1


def intersect_classes(
    triple: D4Triple, class_a: PellClassA, class_b: PellClassB, z_max: int
) -> list[tuple[int, int, int]]:
    """All ``(m, n, z)`` with ``v_m = w_n = z`` and ``2 < z <= z_max``."""
    v = _terms_upto(triple.s, triple.c, class_a.z0, class_a.x0, z_max)
    w = _terms_upto(triple.t, triple.c, class_b.z1, class_b.y1, z_max)
    # v_0 may exceed v_1 only when z0 is large and positive; keep index 0 apart
    hits = set()
    for m, n in _merge_equal(v[1:], w[1:], 2, z_max):
        hits.add((m + 1, n + 1))
    for m, val in ((0, v[0]),):
        for n, wv in enumerate(w):
            if wv == val and 2 < val <= z_max:
                hits.add((m, n))
    for n, val in ((0, w[0]),):
        for m, vv in enumerate(v):
            if vv == val and 2 < val <= z_max:
                hits.add((m, n))
    return sorted((m, n, v[m]) for m, n in hits)


def find_intersections(triple: D4Triple, z_max: int) -> IntersectionResult:
    c = triple.c
    solutions, small, non_integral = [], [], []
    classes_a = enumerate_classes_A(triple)
    classes_b = enumerate_classes_B(triple)
    for ka in classes_a:
        for kb in classes_b:
            for m, n, z in intersect_classes(triple, ka, kb, z_max):
                q, rem = divmod(z * z - 4, c)
                if rem:
                    non_integral.append((m, n, z))
                    continue
                sol = IntersectionSolution(z, m, n, q, ka, kb)
                if q <= c or q in (0, triple.a, triple.b):
                    small.append(sol)
                else:
                    solutions.append(sol)
    solutions.sort()
    small.sort()
    return IntersectionResult(solutions, small, non_integral)


def index_relation_holds(m: int, n: int) -> bool:
    return n - 1 <= m <= 2 * n + 1


def index_upper_bound(eps, n: int):
    """Upper bound on ``m`` when ``c > b**eps`` (``1 <= eps < 12``)."""
    from mpmath import mpf

    eps = mpf(eps)
    if not (1 <= eps < 12) or n < 1:
        raise ValueError("need 1 <= eps < 12 and n >= 1")
    k = (eps + 1) / (mpf("0.999") * eps)
    return k * n + mpf("1.5") - mpf("0.4") * k


def growth_sandwich(triple: D4Triple, step_root: int, x_init: int, term: int, index: int) -> bool:
    """Check ``(c/(2x))(root-1)^(k-1) < term < c x root^(k-1)`` for ``k >= 1``."""
    c = triple.c
    lower = Fraction(c, 2 * x_init) * (step_root - 1) ** (index - 1)
    upper = c * x_init * step_root ** (index - 1)
    return lower < term < upper


@dataclass(frozen=True)
class CongruenceRecord:
    kind: str  # "even" or "odd"
    modulus: int
    lhs: tuple[int, ...]
    rhs: tuple[int, ...]
    satisfied: bool


def congruence_residues(
    triple: D4Triple, class_a: PellClassA, class_b: PellClassB, m: int, n: int
) -> CongruenceRecord:
    """Residues mod ``c`` of the index congruences for ``v_m = w_n``.

    ``m`` and ``n`` are sequence indices.  For even indices the relation is
    ``a z0 M^2 - b z1 N^2 = t y1 N - s x0 M`` with ``M = m/2``, ``N = n/2``.
    For odd indices, with ``M = (m-1)/2`` and ``N = (n-1)/2``, the two
    relations ``+-2t(aM(M+1) - bN(N+1)) = 2rs(N-M)`` and
    ``+-2s(aM(M+1) - bN(N+1)) = 2rt(N-M)`` are checked, sign taken from ``z0``.
    Mixed parities carry no congruence and are reported as vacuous.
    """
    a, b, c = triple.elements()
    r, s, t = triple.r, triple.s, triple.t
    z0, x0, z1, y1 = class_a.z0, class_a.x0, class_b.z1, class_b.y1
    if m % 2 == 0 and n % 2 == 0:
        M, N = m // 2, n // 2
        lhs = (a * z0 * M * M - b * z1 * N * N) % c
        rhs = (t * y1 * N - s * x0 * M) % c
        return CongruenceRecord("even", c, (lhs,), (rhs,), lhs == rhs)
    if m % 2 == 1 and n % 2 == 1:
        M, N = (m - 1) // 2, (n - 1) // 2
        sign = 1 if z0 > 0 else -1
        core = a * M * (M + 1) - b * N * (N + 1)
        l1, r1 = (sign * 2 * t * core) % c, (2 * r * s * (N - M)) % c
        l2, r2 = (sign * 2 * s * core) % c, (2 * r * t * (N - M)) % c
        return CongruenceRecord("odd", c, (l1, l2), (r1, r2), l1 == r1 and l2 == r2)
    return CongruenceRecord("mixed", c, (), (), True)


def congruence_filter(triple: D4Triple, class_a: PellClassA, class_b: PellClassB, m: int, n: int) -> bool:
    """False when the index pair ``(m, n)`` is ruled out modulo ``c``."""
    return congruence_residues(triple, class_a, class_b, m, n).satisfied


class NotShiftable(ValueError):
    pass


def shift_class(cls, triple: D4Triple, direction: int):
    """Move the initial data of a class one step along its orbit.

    Returns ``(new_class, offset)`` with ``old[k] == new[k + offset]``.
    ``direction=-1`` steps back (offset +1), ``direction=+1`` steps forward
    (offset -1, valid for ``k >= 1``).
    """
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    half = abs(triple.half_gap)
    c = triple.c
    if isinstance(cls, PellClassA):
        allowed = {triple.t, half}
        z, x, root, coef = cls.z0, cls.x0, triple.s, triple.a
    elif isinstance(cls, PellClassB):
        allowed = {triple.s, half}
        z, x, root, coef = cls.z1, cls.y1, triple.t, triple.b
    else:
        raise TypeError("expected PellClassA or PellClassB")
    if abs(z) not in allowed:
        raise NotShiftable(f"|z|={abs(z)} not in {sorted(allowed)}")
    nz2 = root * z + direction * c * x
    nx2 = root * x + direction * coef * z
    assert nz2 % 2 == 0 and nx2 % 2 == 0
    nz, nx = nz2 // 2, nx2 // 2
    if nx <= 0:
        raise NotShiftable("shift leaves the positive-x branch")
    offset = -direction
    if isinstance(cls, PellClassA):
        return PellClassA(nz, nx, _range_a(triple, nz)), offset
    return PellClassB(nz, nx, nz**4 * triple.b < c**3), offset


def d_of(z: int, c: int) -> int:
    q, rem = divmod(z * z - 4, c)
    if rem:
        raise ValueError("z^2 - 4 not divisible by c")
    return q


def regular_extension_z(triple: D4Triple) -> int:
    return isqrt(triple.c * d_plus(triple) + 4)
