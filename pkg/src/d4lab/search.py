"""Exhaustive desk-scale searches, brute-force oracles and finite case checks.

Work is split into deterministic chunks; parallel runs merge chunk results in
chunk order, so the output does not depend on the number of workers.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt

from .arith import is_perfect_square
from .pell import (
    enumerate_classes_A,
    enumerate_classes_B,
    find_intersections,
    gen_v,
    gen_w,
    growth_sandwich,
    index_relation_holds,
)
from .tuples import (
    D4Pair,
    D4Triple,
    Regularity,
    c_family,
    classify_quadruple,
    d_plus,
    make_pair,
    make_quadruple,
    make_triple,
    regular_triple_c,
    verify_tuple,
)


@dataclass(frozen=True)
class SearchRange:
    a_range: tuple[int, int] = (1, 10**9)
    b_range: tuple[int, int] = (2, 10**9)
    c_max: int = 1000
    d_max: int = 10**6
    chunk: int = 256

    def __post_init__(self):
        if self.a_range[0] > self.a_range[1] or self.b_range[0] > self.b_range[1]:
            raise ValueError("empty range")
        if self.c_max < 3 or self.d_max < 1 or self.chunk < 1:
            raise ValueError("c_max >= 3, d_max >= 1 and chunk >= 1 required")


@dataclass
class CaseCheckReport:
    case_id: str
    pairs_scanned: int
    survivors: list
    elapsed: float
    extras: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "case_id": self.case_id,
            "pairs_scanned": str(self.pairs_scanned),
            "survivors": [[str(v) for v in s] for s in self.survivors],
            "elapsed": round(self.elapsed, 3),
            "pass": not self.survivors,
            "extras": self.extras,
        }


def _map(fn, items, workers: int = 1):
    items = list(items)
    if workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(it) for it in items]


def _chunks(seq, size: int):
    seq = list(seq)
    return [seq[i:i + size] for i in range(0, len(seq), size)]


def _roots_of_4(mod: int) -> list[int]:
    """Residues ``x`` mod ``mod`` with ``x^2 = 4``."""
    return [x for x in range(mod) if (x * x - 4) % mod == 0]


# ---------------------------------------------------------------- oracles

def brute_force_extensions(triple: D4Triple, d_max: int) -> list[int]:
    """All ``d <= d_max`` outside the triple making every product plus 4 a square.

    Runs over ``x`` with ``ad + 4 = x^2`` directly, without any Pell machinery.
    """
    if d_max < 1:
        raise ValueError("d_max must be >= 1")
    a, b, c = triple.elements()
    out = []
    x_max = isqrt(a * d_max + 4)
    for r0 in _roots_of_4(a):
        x = r0 if r0 >= 3 else r0 + a
        while x <= x_max:
            d = (x * x - 4) // a
            if d >= 1 and d not in (a, b, c):
                if is_perfect_square(b * d + 4)[0] and is_perfect_square(c * d + 4)[0]:
                    out.append(d)
            x += a
    return sorted(set(out))


def pell_extensions(triple: D4Triple, d_max: int) -> list[int]:
    """Same set as :func:`brute_force_extensions`, computed through class intersections."""
    a, b, c = triple.elements()
    res = find_intersections(triple, isqrt(c * d_max + 4))
    ds = {s.d for s in res.solutions + res.small}
    return sorted(d for d in ds if 1 <= d <= d_max and d not in (a, b, c))


# ---------------------------------------------------------------- enumeration

def _partner_map(n_max: int) -> dict[int, list[int]]:
    """``{c: [x < c with xc + 4 square]}`` for ``c <= n_max``.

    Uses ``xc = s^2 - 4 = (s - 2)(s + 2)`` and a smallest-prime-factor sieve.
    """
    top = n_max + 3
    spf = list(range(top + 1))
    for p in range(2, isqrt(top) + 1):
        if spf[p] == p:
            for q in range(p * p, top + 1, p):
                if spf[q] == q:
                    spf[q] = p

    def factor(n, acc):
        while n > 1:
            p = spf[n]
            while n % p == 0:
                acc[p] = acc.get(p, 0) + 1
                n //= p

    partners: dict[int, list[int]] = {}
    s_max = isqrt(n_max * (n_max - 1) + 4)
    for s in range(3, s_max + 1):
        n = s * s - 4
        fac: dict[int, int] = {}
        factor(s - 2, fac)
        factor(s + 2, fac)
        divs = [1]
        for p, e in fac.items():
            divs = [d * p**k for d in divs for k in range(e + 1)]
        lo = -(-n // n_max)
        for x in divs:
            if x >= lo and x * x < n:
                partners.setdefault(n // x, []).append(x)
    for v in partners.values():
        v.sort()
    return partners


def enumerate_pairs(b_max: int) -> list[D4Pair]:
    if b_max < 2:
        raise ValueError("b_max must be >= 2")
    pm = _partner_map(b_max)
    return sorted(make_pair(x, b) for b, xs in pm.items() for x in xs)


def _triples_for(args) -> list[tuple[int, int, int]]:
    cs, pm = args
    out = []
    for c in cs:
        xs = pm.get(c, [])
        for i, a in enumerate(xs):
            for b in xs[i + 1:]:
                if is_perfect_square(a * b + 4)[0]:
                    out.append((a, b, c))
    return out


def enumerate_triples(c_max: int, workers: int = 1, chunk: int = 2048) -> list[D4Triple]:
    if c_max < 3:
        raise ValueError("c_max must be >= 3")
    pm = _partner_map(c_max)
    cs = sorted(pm)
    parts = _map(_triples_for, [(ch, {c: pm[c] for c in ch}) for ch in _chunks(cs, chunk)], workers)
    return sorted(make_triple(*t) for part in parts for t in part)


# ---------------------------------------------------------------- counting and sweeps

@dataclass
class CountN:
    triple: tuple[int, int, int]
    N_regular: int
    N_irregular_found: int
    certified: bool
    extensions: list[int]

    def to_json(self) -> dict:
        return {
            "triple": [str(v) for v in self.triple],
            "N_regular": self.N_regular,
            "N_irregular_found": self.N_irregular_found,
            "certified": self.certified,
            "extensions_above_d_plus": [str(d) for d in self.extensions],
        }


def count_N(triple: D4Triple, z_max: int, campaign: bool = False) -> CountN:
    """Extensions ``d > d_+`` found with ``z <= z_max``, split by regularity.

    With ``campaign=True`` a reduction campaign is run and the count is
    certified when its index bounds fall inside the searched range.
    """
    dp = d_plus(triple)
    found = [s.d for s in find_intersections(triple, z_max).solutions if s.d > dp]
    found = sorted(set(found))
    elems = triple.elements()
    irregular = [d for d in found if classify_quadruple(make_quadruple(*elems, d)) is Regularity.IRREGULAR]
    certified = False
    if campaign:
        from .reduction import bd_campaign

        result = bd_campaign(triple)
        certified = result.certified and all(
            gen_v(triple, o.class_a, o.scan_bound + 1)[-1] <= z_max for o in result.classes
        )
    return CountN(elems, len(found) - len(irregular), len(irregular), certified, found)


def _oracle_chunk(args):
    triples, d_max = args
    bad = []
    for elems in triples:
        t = make_triple(*elems)
        if brute_force_extensions(t, d_max) != pell_extensions(t, d_max):
            bad.append(elems)
    return len(triples), bad


def oracle_sweep(c_max: int, d_max: int, workers: int = 1, chunk: int = 64) -> CaseCheckReport:
    """Compare the brute-force and Pell-based extension sets on all triples up to ``c_max``."""
    start = time.perf_counter()
    triples = [t.elements() for t in enumerate_triples(c_max)]
    parts = _map(_oracle_chunk, [(ch, d_max) for ch in _chunks(triples, chunk)], workers)
    bad = [b for _, bs in parts for b in bs]
    return CaseCheckReport("oracle_equivalence", sum(n for n, _ in parts), bad, time.perf_counter() - start,
                           {"c_max": str(c_max), "d_max": str(d_max)})


def _regularity_chunk(args):
    triples, d_max = args
    found, irregular = [], []
    for elems in triples:
        t = make_triple(*elems)
        for d in pell_extensions(t, d_max):
            if d <= t.c:
                continue  # the same quadruple is met again from its top triple
            quad = make_quadruple(*elems, d)
            found.append(quad.elements())
            if classify_quadruple(quad) is Regularity.IRREGULAR:
                irregular.append(quad.elements())
    return found, irregular


def regularity_sweep(c_max: int, d_max: int, workers: int = 1, chunk: int = 64) -> CaseCheckReport:
    """Every quadruple ``{a,b,c,d}`` with ``c <= c_max < d <= d_max`` must be regular."""
    start = time.perf_counter()
    triples = [t.elements() for t in enumerate_triples(c_max)]
    parts = _map(_regularity_chunk, [(ch, d_max) for ch in _chunks(triples, chunk)], workers)
    quads = sorted({q for f, _ in parts for q in f})
    irregular = sorted({q for _, i in parts for q in i})
    return CaseCheckReport("regularity", len(triples), irregular, time.perf_counter() - start,
                           {"quadruples_found": len(quads), "c_max": str(c_max), "d_max": str(d_max)})


# ---------------------------------------------------------------- finite case checks

def _pairs_with_a(a: int, b_lo: int, b_hi: int):
    """``b`` in ``[b_lo, b_hi]`` with ``ab + 4`` a square, ascending."""
    out = []
    r_hi = isqrt(a * b_hi + 4)
    for r0 in _roots_of_4(a):
        r = r0
        while r <= r_hi:
            b = (r * r - 4) // a
            if b_lo <= b <= b_hi and b > a:
                out.append(b)
            r += a
    return sorted(set(out))


def _int_roots(A: int, B: int, D: int) -> list[int]:
    disc = B * B - 4 * A * D
    ok, root = is_perfect_square(disc)
    if not ok:
        return []
    return sorted({q for num in (-B + root, -B - root) for q, rem in [divmod(num, 2 * A)] if rem == 0})


def mn9_k0_bounds(a: int) -> tuple[int, int]:
    return 10**5, int(Fraction(169169, 1000) * a**5)


def case_check_prop_mn9_k0(a_range=(4, 12)) -> CaseCheckReport:
    """Integral roots of ``r^2 c^2 - (13b - 29a) r^2 c + 4((6b - 15a)^2 - r^2) = 0``.

    Survivors are roots giving a D(4)-triple ``{a, b, c}``; none are expected.
    """
    start = time.perf_counter()
    scanned, survivors, integral = 0, [], []
    for a in range(a_range[0], a_range[1] + 1):
        b_lo, b_hi = mn9_k0_bounds(a)
        for b in _pairs_with_a(a, b_lo, b_hi):
            scanned += 1
            r2 = a * b + 4
            A, B, D = r2, -(13 * b - 29 * a) * r2, 4 * ((6 * b - 15 * a) ** 2 - r2)
            for c in _int_roots(A, B, D):
                integral.append((a, b, c))
                if c > 0 and verify_tuple((a, b, c)):
                    survivors.append((a, b, c))
    return CaseCheckReport("prop_mn9_k0", scanned, survivors, time.perf_counter() - start,
                           {"integral_roots": [[str(v) for v in t] for t in integral],
                            "a_range": list(a_range)})


def v11_w7_knonzero_max_root(a: int, b: int) -> Fraction:
    """Largest real root bound ``|B|/A`` over ``k in {-2..8} \\ {0}`` for the pair."""
    r2 = a * b + 4
    worst = Fraction(0)
    for k in range(-2, 9):
        if k == 0:
            continue
        A = (4 * r2 - k) ** 2 - 4 * r2 * a * b
        B = -(32 * (4 * r2 - k) * (6 * b - 15 * a) - 16 * r2 * (a + b))
        worst = max(worst, Fraction(abs(B), A))
    return worst


def case_check_v11_w7_knonzero(a_max: int = 40, b_span: int = 10**4) -> CaseCheckReport:
    """Roots of the ``k != 0`` quadratics stay below 134 for pairs with ``b > 10^5``, ``b > 2154a``."""
    start = time.perf_counter()
    scanned, bad, worst = 0, [], Fraction(0)
    for a in range(1, a_max + 1):
        lo = max(10**5 + 1, 2154 * a + 1)
        for b in _pairs_with_a(a, lo, lo + b_span):
            scanned += 1
            m = v11_w7_knonzero_max_root(a, b)
            worst = max(worst, m)
            if m >= 134:
                bad.append((a, b))
    return CaseCheckReport("v11_w7_k_nonzero", scanned, bad, time.perf_counter() - start,
                           {"max_root_bound": float(worst)})


def c_gap_holds(t: D4Triple) -> bool:
    a, b, c = t.elements()
    return c == regular_triple_c(t.pair) or c > max(a * b + a + b, 4 * b)


def sandwich_in_scope(t: D4Triple, z: int) -> bool:
    """Setting in which the growth sandwich is used: ``z >= 0`` or ``c >= 4b``.

    Negative initial terms of regular triples with ``c < 4b`` start below the
    lower bound, so the inequality is not claimed there.
    """
    return z >= 0 or t.c >= 4 * t.b


def _claims_chunk(args):
    triples, d_max, sandwich_terms = args
    index_bad, sandwich_bad, sandwich_out, irregular, gap_bad, checked = [], [], [], [], [], 0
    for elems in triples:
        t = make_triple(*elems)
        if not c_gap_holds(t):
            gap_bad.append(elems)
        if d_max:
            res = find_intersections(t, isqrt(t.c * d_max + 4))
            for s in res.solutions + res.small:
                checked += 1
                if not index_relation_holds(s.m, s.n):
                    index_bad.append(elems + (s.m, s.n))
            for s in res.solutions:
                q = make_quadruple(*elems, s.d)
                if classify_quadruple(q) is Regularity.IRREGULAR:
                    irregular.append(q.elements())
        if sandwich_terms:
            seqs = [("v", k.z0, k.x0, t.s, gen_v(t, k, sandwich_terms + 1)) for k in enumerate_classes_A(t) if k.in_range]
            seqs += [("w", k.z1, k.y1, t.t, gen_w(t, k, sandwich_terms + 1)) for k in enumerate_classes_B(t) if k.in_range]
            for name, z, x, root, seq in seqs:
                for k, term in enumerate(seq[1:], start=1):
                    if not growth_sandwich(t, root, x, term, k):
                        tag = elems + (name, z, k)
                        (sandwich_bad if sandwich_in_scope(t, z) else sandwich_out).append(tag)
    return len(triples), checked, gap_bad, index_bad, sandwich_bad, irregular, sandwich_out


def verify_theorem_claims(rng: SearchRange, intersect_c_max: int | None = None,
                          sandwich_terms: int = 7, workers: int = 1) -> dict:
    """Structural claims over every triple with ``c <= rng.c_max``.

    Intersections (index relation, regularity) are computed for triples with
    ``c <= intersect_c_max`` and ``d <= rng.d_max``.
    """
    start = time.perf_counter()
    triples = [t.elements() for t in enumerate_triples(rng.c_max, workers)
               if rng.a_range[0] <= t.a <= rng.a_range[1] and rng.b_range[0] <= t.b <= rng.b_range[1]]
    ic = rng.c_max if intersect_c_max is None else intersect_c_max
    jobs = [([e for e in ch if e[2] <= ic], rng.d_max, sandwich_terms) for ch in _chunks(triples, rng.chunk)]
    jobs += [([e for e in ch if e[2] > ic], 0, sandwich_terms) for ch in _chunks(triples, rng.chunk)]
    jobs = [j for j in jobs if j[0]]
    parts = _map(_claims_chunk, jobs, workers)
    report = {
        "triples": sum(p[0] for p in parts),
        "intersections_checked": sum(p[1] for p in parts),
        "c_gap_violations": sorted(x for p in parts for x in p[2]),
        "index_relation_violations": sorted(x for p in parts for x in p[3]),
        "growth_sandwich_violations": sorted((x for p in parts for x in p[4]), key=str),
        "irregular_quadruples": sorted(x for p in parts for x in p[5]),
    }
    out_of_scope = [x for p in parts for x in p[6]]
    report["pass"] = not any(report[k] for k in report if k.endswith(("violations", "quadruples")))
    report["sandwich_out_of_scope_failures"] = len(out_of_scope)
    report["elapsed"] = round(time.perf_counter() - start, 3)
    return report


def pair_extensions(pair: D4Pair, c_max: int) -> list[int]:
    """All ``c`` in ``(b, c_max]`` with ``{a, b, c}`` a D(4)-triple."""
    a, b = pair.a, pair.b
    out = []
    s_hi = isqrt(a * c_max + 4)
    for s0 in _roots_of_4(a):
        s = s0
        while s <= s_hi:
            c = (s * s - 4) // a
            if b < c <= c_max and is_perfect_square(b * c + 4)[0]:
                out.append(c)
            s += a
    return sorted(set(out))


def family_values(pair: D4Pair, c_max: int) -> dict[int, tuple[int, int]]:
    """``{c_nu^tau: (nu, tau)}`` for all family members up to ``c_max``."""
    out = {}
    for tau in (1, -1):
        nu = 1
        while True:
            c = c_family(pair, nu, tau)
            if c > c_max:
                break
            if c > 0:
                out.setdefault(c, (nu, tau))
            nu += 1
    return out


def pair_family_check(pair: D4Pair, c_max: int) -> dict:
    """Extensions of ``pair`` up to ``c_max`` that are not of the form ``c_nu^+-``."""
    in_scope = 100 * pair.b < 685 * pair.a
    fam = family_values(pair, c_max)
    exts = pair_extensions(pair, c_max)
    outside = [c for c in exts if c not in fam]
    return {
        "pair": [str(pair.a), str(pair.b)],
        "c_max": str(c_max),
        "in_lemma_scope": in_scope,
        "extensions": [str(c) for c in exts],
        "non_family": [str(c) for c in outside],
        "pass": (not outside) if in_scope else True,
    }
