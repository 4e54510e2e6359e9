"""Baker-Davenport reduction for ``Lambda = m log xi - n log eta + log mu``.

For a solution ``v_m = w_n`` of a class pair one has ``|Lambda| < kappa0 xi^(-2m)``
once ``m >= m_valid``; dividing by ``log eta`` gives

    |m kappa - n + mu_hat| < A B^(-m),   kappa = log xi / log eta, B = xi^2.

A convergent ``p/q`` of ``kappa`` with ``q > 6M`` and
``eps = ||q mu_hat|| - M ||q kappa|| > 0`` rules out every
``log(Aq/eps)/log B < m <= M``.

When ``mu xi^i = eta^j`` holds exactly, ``mu_hat = j - i kappa`` and no
``eps`` can be positive. Then the form is ``|(m+i) kappa - (n+j)|`` and
Legendre's criterion bounds it below by ``1/((a_max+2)(m+i))``, with
``a_max`` the largest partial quotient up to denominator ``M+|i|``.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from mpmath import iv, mp

from .arith import (
    MAX_PRECISION,
    HighPrecReal,
    PrecisionExhausted,
    continued_fraction,
    default_precision,
    iv_workprec,
    nearest_int_distance,
    scale,
)
from .bounds import matveev_m_bound
from .pell import (
    PellClassA,
    PellClassB,
    enumerate_classes_A,
    enumerate_classes_B,
    gen_v,
    intersect_classes,
)
from .tuples import D4Triple, Regularity, classify_quadruple, make_quadruple, make_triple

STATUSES = ("reduced", "fixpoint", "failed_epsilon", "precision_retry")
MAX_CONVERGENT_ATTEMPTS = 10
RELATION_EXPONENT = 20
SCAN_LIMIT = 1000  # largest per-class index bound the campaign will scan


@dataclass(frozen=True)
class ReductionProblem:
    kappa: HighPrecReal
    mu_hat: HighPrecReal
    A: HighPrecReal
    B: HighPrecReal
    M: int
    label: str = ""
    # rebuilds the same problem at another precision (bits); None for fixed data
    rebuild: Callable | None = field(default=None, compare=False, repr=False)
    m_valid: int = 0
    # proven (i, j) with mu_hat = j - i kappa, or None
    relation: tuple[int, int] | None = None

    @property
    def precision(self) -> int:
        return self.kappa.precision

    def with_M(self, M: int) -> "ReductionProblem":
        return ReductionProblem(self.kappa, self.mu_hat, self.A, self.B, M, self.label, self.rebuild,
                                self.m_valid, self.relation)

    def at_precision(self, bits: int) -> "ReductionProblem":
        if self.rebuild is None:
            raise PrecisionExhausted(f"{self.label or 'problem'} cannot be rebuilt at {bits} bits")
        return self.rebuild(bits).with_M(self.M)


@dataclass(frozen=True)
class ReductionResult:
    new_M: int
    q_used: int
    epsilon: HighPrecReal | None
    status: str
    precision: int = 0

    def to_json(self) -> dict:
        return {
            "new_M": str(self.new_M),
            "q_used": str(self.q_used),
            "epsilon": None if self.epsilon is None else format(float(self.epsilon.lo), ".6e"),
            "status": self.status,
            "precision": self.precision,
        }


def _xi_eta(ctx, triple: D4Triple):
    a, b, c = (ctx.mpf(v) for v in triple.elements())
    return (triple.s + ctx.sqrt(a * c)) / 2, (triple.t + ctx.sqrt(b * c)) / 2


def _assert_independent(triple: D4Triple, prec: int):
    """No relation ``xi^i = eta^j`` with ``0 < max(|i|, |j|) <= 20``."""
    lx = HighPrecReal.evaluate(lambda ctx: ctx.log(_xi_eta(ctx, triple)[0]), prec)
    le = HighPrecReal.evaluate(lambda ctx: ctx.log(_xi_eta(ctx, triple)[1]), prec)
    for i in range(RELATION_EXPONENT + 1):
        for j in range(-RELATION_EXPONENT, RELATION_EXPONENT + 1):
            if i == 0 and j <= 0:
                continue
            lo = i * lx.lo - j * le.hi
            hi = i * lx.hi - j * le.lo
            if lo <= 0 <= hi:
                raise ValueError(f"possible multiplicative relation xi^{i} = eta^{j}")


def _mq_mul(x: dict, y: dict, radicands: tuple[int, ...]) -> dict:
    """Product in ``Q[sqrt r_1, ..., sqrt r_k]``; keys are exponent bitmasks."""
    out: dict = {}
    for kx, vx in x.items():
        for ky, vy in y.items():
            coef = vx * vy
            for bit, r in enumerate(radicands):
                if kx >> bit & 1 and ky >> bit & 1:
                    coef *= r
            key = kx ^ ky
            out[key] = out.get(key, 0) + coef
    return {k: v for k, v in out.items() if v}


def _mq_pow(x: dict, e: int, radicands) -> dict:
    out = {0: Fraction(1)}
    for _ in range(e):
        out = _mq_mul(out, x, radicands)
    return out


def _squarefree(n: int) -> tuple[int, int]:
    """``(k, f)`` with ``n = k f^2`` and ``k`` squarefree."""
    k, f, m, p = 1, 1, n, 2
    while p * p * p <= m:
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        f *= p ** (e // 2)
        k *= p ** (e % 2)
        p += 1
    # the cofactor has at most two prime factors
    r = math.isqrt(m)
    if r * r == m:
        return k, f * r
    return k * m, f


def _mq_normal(x: dict, radicands) -> dict:
    """Coefficients on ``sqrt k`` for distinct squarefree ``k`` (a basis over Q)."""
    cores = [_squarefree(r) for r in radicands]
    out: dict = {}
    for key, coef in x.items():
        k = 1
        for bit, (core, f) in enumerate(cores):
            if key >> bit & 1:
                coef *= f
                g = math.gcd(k, core)
                k = (k // g) * (core // g)
                coef *= g
        out[k] = out.get(k, 0) + coef
    return {k: v for k, v in out.items() if v}


def relation_holds(triple: D4Triple, class_a: PellClassA, class_b: PellClassB, i: int, j: int) -> bool:
    """Exact test of ``mu xi^i = eta^j`` in ``Q(sqrt a, sqrt b, sqrt c)``."""
    a, b, c = triple.elements()
    rad = (a, b, c)
    A_, B_, C_ = 1, 2, 4  # bitmasks for sqrt a, sqrt b, sqrt c
    h = Fraction(1, 2)
    xi = {0: triple.s * h, A_ | C_: h}
    eta = {0: triple.t * h, B_ | C_: h}
    num = _mq_mul({B_: Fraction(1)}, {C_: Fraction(class_a.x0), A_: Fraction(class_a.z0)}, rad)
    den = _mq_mul({A_: Fraction(1)}, {C_: Fraction(class_b.y1), B_: Fraction(class_b.z1)}, rad)
    # mu xi^i = eta^j  <=>  num xi^max(i,0) eta^max(-j,0) = den eta^max(j,0) xi^max(-i,0)
    lhs = _mq_mul(num, _mq_mul(_mq_pow(xi, max(i, 0), rad), _mq_pow(eta, max(-j, 0), rad), rad), rad)
    rhs = _mq_mul(den, _mq_mul(_mq_pow(eta, max(j, 0), rad), _mq_pow(xi, max(-i, 0), rad), rad), rad)
    return _mq_normal(lhs, rad) == _mq_normal(rhs, rad)


def find_relation(triple, class_a, class_b, kappa: HighPrecReal, mu_hat: HighPrecReal):
    """``(i, j)`` with ``mu_hat = j - i kappa``, proven exactly, or None."""
    for i in range(-RELATION_EXPONENT, RELATION_EXPONENT + 1):
        lo = mu_hat.lo + i * kappa.lo if i >= 0 else mu_hat.lo + i * kappa.hi
        hi = mu_hat.hi + i * kappa.hi if i >= 0 else mu_hat.hi + i * kappa.lo
        j = math.floor(lo)
        for cand in (j, j + 1):
            if lo <= cand <= hi and relation_holds(triple, class_a, class_b, i, cand):
                return i, cand
    return None


def linear_form_u(triple: D4Triple, class_a: PellClassA, m: int, prec: int) -> HighPrecReal:
    """``4(c-a) / ((x0 sqrt c + z0 sqrt a)^2 xi^(2m))``; ``|Lambda| < 2u`` once ``u <= 1/8``."""
    a, c = triple.a, triple.c

    def expr(ctx):
        xi, _ = _xi_eta(ctx, triple)
        head = class_a.x0 * ctx.sqrt(ctx.mpf(c)) + class_a.z0 * ctx.sqrt(ctx.mpf(a))
        return 4 * ctx.mpf(c - a) / (head**2 * xi ** (2 * m))

    return HighPrecReal.evaluate(expr, prec)


def valid_from(triple: D4Triple, class_a: PellClassA, prec: int) -> int:
    m = 0
    while linear_form_u(triple, class_a, m, prec).hi > Fraction(1, 8):
        m += 1
    return m


def build_problem(triple: D4Triple, class_a: PellClassA, class_b: PellClassB, M: int,
                  precision: int | None = None) -> ReductionProblem:
    prec = precision or default_precision()
    a, b, c = triple.elements()
    _assert_independent(triple, prec)

    def parts(ctx):
        xi, eta = _xi_eta(ctx, triple)
        sa, sb, sc = ctx.sqrt(ctx.mpf(a)), ctx.sqrt(ctx.mpf(b)), ctx.sqrt(ctx.mpf(c))
        mu = sb * (class_a.x0 * sc + class_a.z0 * sa) / (sa * (class_b.y1 * sc + class_b.z1 * sb))
        kappa0 = 8 * ctx.mpf(c - a) / (class_a.z0 * sa + class_a.x0 * sc) ** 2
        return xi, eta, mu, kappa0

    kappa = HighPrecReal.evaluate(lambda ctx: ctx.log(parts(ctx)[0]) / ctx.log(parts(ctx)[1]), prec)
    mu_hat = HighPrecReal.evaluate(lambda ctx: ctx.log(parts(ctx)[2]) / ctx.log(parts(ctx)[1]), prec)
    A = HighPrecReal.evaluate(lambda ctx: parts(ctx)[3] / ctx.log(parts(ctx)[1]), prec)
    B = HighPrecReal.evaluate(lambda ctx: parts(ctx)[0] ** 2, prec)
    label = f"{triple.elements()} A{(class_a.z0, class_a.x0)} B{(class_b.z1, class_b.y1)}"

    def rebuild(bits):
        return build_problem(triple, class_a, class_b, M, bits)

    return ReductionProblem(kappa, mu_hat, A, B, M, label, rebuild, valid_from(triple, class_a, prec),
                            find_relation(triple, class_a, class_b, kappa, mu_hat))


def synthetic_problem(kappa_expr: Callable, mu_hat_expr: Callable, A, B, M: int,
                      precision: int | None = None) -> ReductionProblem:
    """Problem from expressions in an mpmath context (used for testing the engine)."""
    prec = precision or default_precision()
    A, B = Fraction(A), Fraction(B)

    def rebuild(bits):
        return ReductionProblem(
            HighPrecReal.evaluate(kappa_expr, bits), HighPrecReal.evaluate(mu_hat_expr, bits),
            HighPrecReal.exact(A, bits), HighPrecReal.exact(B, bits), M, "synthetic", rebuild,
        )

    return rebuild(prec)


def _convergent_denominators(x: HighPrecReal, threshold: int, extra: int) -> list[int]:
    """Denominators ``q_k`` of ``x`` from the first one above ``threshold`` on (``extra`` of them).

    Stops early at an exact rational; raises when the first qualifying
    convergent cannot be certified.
    """
    lo, hi = x.lo, x.hi
    q_prev, q = 0, 1
    out: list[int] = []
    k = 0
    while len(out) < extra:
        a_k = math.floor(lo)
        if math.floor(hi) != a_k:
            if out:
                return out
            raise PrecisionExhausted(f"convergent above {threshold} not certified at {x.precision} bits")
        if k > 0:
            q_prev, q = q, a_k * q + q_prev
        k += 1
        if q > threshold:
            out.append(q)
        flo, fhi = lo - a_k, hi - a_k
        if flo == fhi == 0:
            return out
        if flo <= 0:
            if out:
                return out
            raise PrecisionExhausted(f"convergent above {threshold} not certified at {x.precision} bits")
        lo, hi = 1 / fhi, 1 / flo
    return out


def _log_ratio_ceiling(num: Fraction, base: Fraction, prec: int) -> int:
    """Certified upper bound on ``floor(log(num)/log(base))`` (``base > 1``)."""
    if num <= 1:
        return 0
    with iv_workprec(prec):
        val = iv.log(iv.mpf(num.numerator) / num.denominator) / iv.log(iv.mpf(base.numerator) / base.denominator)
        upper = int(mp.floor(mp.mpf(val.b)))
    return max(0, upper)


def _partial_quotients_upto(x: HighPrecReal, bound: int) -> list[int]:
    """Quotients ``a_0..a_{K+1}`` where ``q_K <= bound < q_{K+1}``."""
    depth = 8
    while True:
        cf = continued_fraction(x, depth)
        q_prev, q = 0, 1
        for k, a_k in enumerate(cf):
            if k > 0:
                q_prev, q = q, a_k * q + q_prev
            if q > bound:
                return cf[:k + 1]
        if len(cf) < depth:
            return cf  # exact rational
        depth *= 2


def _reduce_related(p: ReductionProblem) -> ReductionResult:
    i, _ = p.relation
    M = p.M
    top = M + abs(i)
    a_max = max(_partial_quotients_upto(p.kappa, top)[1:], default=0)
    new_M = _log_ratio_ceiling(p.A.hi * (a_max + 2) * top, p.B.lo, p.precision)
    # m + i = 0 is the one index Legendre does not see
    new_M = max(new_M, -i)
    status = "reduced" if new_M < M else "fixpoint"
    return ReductionResult(min(new_M, M), 0, None, status, p.precision)


def _reduce_once(p: ReductionProblem) -> ReductionResult:
    M = p.M
    if p.relation is not None:
        return _reduce_related(p)
    for q in _convergent_denominators(p.kappa, 6 * M, MAX_CONVERGENT_ATTEMPTS):
        dk = nearest_int_distance(scale(p.kappa, q))
        dm = nearest_int_distance(scale(p.mu_hat, q))
        eps = HighPrecReal(dm.lo - M * dk.hi, dm.hi - M * dk.lo, p.precision)
        if eps.hi <= 0:
            continue
        if eps.lo <= 0:
            raise PrecisionExhausted(f"sign of epsilon undecided at {p.precision} bits")
        new_M = _log_ratio_ceiling(p.A.hi * q / eps.lo, p.B.lo, p.precision)
        status = "reduced" if new_M < M else "fixpoint"
        return ReductionResult(min(new_M, M), q, eps, status, p.precision)
    return ReductionResult(M, 0, None, "failed_epsilon", p.precision)


def bd_reduce(p: ReductionProblem, escalate: bool = True) -> ReductionResult:
    """One reduction step, doubling precision on uncertified comparisons."""
    if p.M < 1:
        raise ValueError("M must be >= 1")
    while True:
        try:
            return _reduce_once(p)
        except PrecisionExhausted:
            if not escalate or p.rebuild is None:
                return ReductionResult(p.M, 0, None, "precision_retry", p.precision)
            if p.precision * 2 > MAX_PRECISION:
                raise
            p = p.at_precision(p.precision * 2)


# ---------------------------------------------------------------- campaign

@dataclass
class ClassOutcome:
    class_a: PellClassA
    class_b: PellClassB
    M0: int
    final_M: int
    m_valid: int
    status: str  # why the iteration stopped: "fixpoint" or "failed_epsilon"
    rounds: list[ReductionResult]

    @property
    def scan_bound(self) -> int:
        return max(self.final_M, self.m_valid)

    @property
    def bounded(self) -> bool:
        """The proven bound is small enough to close by scanning.

        A ``failed_epsilon`` stop after earlier reductions still leaves a
        valid bound; only a failure straight from ``M0`` leaves nothing usable.
        """
        return self.scan_bound <= SCAN_LIMIT

    def key(self) -> list[int]:
        return [self.class_a.z0, self.class_a.x0, self.class_b.z1, self.class_b.y1]


@dataclass
class CampaignResult:
    triple: tuple[int, int, int]
    M0: int
    classes: list[ClassOutcome]
    extensions: list[int]
    irregular: list[int]
    certified: bool

    @property
    def unbounded_classes(self) -> list[list[int]]:
        return [o.key() for o in self.classes if not o.bounded]

    @property
    def final_bound(self) -> int:
        return max((o.scan_bound for o in self.classes), default=0)

    def conclusions(self) -> dict:
        """Everything the campaign asserts, independent of how it was computed."""
        return {
            "triple": [str(v) for v in self.triple],
            "final_bounds": {json.dumps(o.key()): o.final_M for o in self.classes},
            "extensions": [str(d) for d in self.extensions],
            "irregular": [str(d) for d in self.irregular],
            "certified": self.certified,
            "unbounded_classes": self.unbounded_classes,
        }

    def to_json(self) -> dict:
        out = self.conclusions()
        out["M0"] = str(self.M0)
        out["final_bound"] = str(self.final_bound)
        out["classes"] = [
            {"class": o.key(), "M0": str(o.M0), "final_M": str(o.final_M), "m_valid": o.m_valid,
             "status": o.status, "rounds": [r.to_json() for r in o.rounds]}
            for o in self.classes
        ]
        return out


def _run_class(args) -> ClassOutcome:
    elems, ka, kb, M_start, M0, prec, max_rounds = args
    triple = make_triple(*elems)
    p = build_problem(triple, ka, kb, M_start, prec)
    rounds, M, status = [], M_start, "fixpoint"
    for _ in range(max_rounds):
        res = bd_reduce(p.with_M(M))
        rounds.append(res)
        if res.status != "reduced":
            status = res.status
            break
        M = res.new_M
        if M < 1:
            break
    return ClassOutcome(ka, kb, M0, M, p.m_valid, status, rounds)


def _read_checkpoint(path) -> dict:
    done = {}
    if path and os.path.exists(path):
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if line:
                    rec = json.loads(line)
                    done[(tuple(rec["triple"]), tuple(rec["class"]))] = rec
    return done


def _scan(triple: D4Triple, outcomes: list[ClassOutcome]) -> list[int]:
    """All extensions ``d > c`` with index ``m`` up to each class' scan bound."""
    found = set()
    for o in outcomes:
        if not o.bounded:
            continue
        top = gen_v(triple, o.class_a, o.scan_bound + 2)[-1]
        for m, _, z in intersect_classes(triple, o.class_a, o.class_b, max(top, 3)):
            if m > o.scan_bound:
                continue
            d, rem = divmod(z * z - 4, triple.c)
            if rem == 0 and d > triple.c:
                found.add(d)
    return sorted(found)


def bd_campaign(triple: D4Triple, M0: int | None = None, checkpoint: str | None = None,
                precision: int | None = None, workers: int = 1, max_rounds: int = 50) -> CampaignResult:
    """Reduce every class pair until no further progress, then scan all indices below the bounds.

    ``certified`` is true when every class ends with a bound of at most
    ``SCAN_LIMIT``, so the scan is exhaustive relative to the starting bound
    ``M0``. Classes that stay above it are listed in ``unbounded_classes``.
    """
    prec = precision or default_precision()
    M0 = M0 if M0 is not None else matveev_m_bound(triple)
    elems = triple.elements()
    saved = _read_checkpoint(checkpoint)
    jobs, resumed = [], {}
    for ka in enumerate_classes_A(triple):
        for kb in enumerate_classes_B(triple):
            key = (tuple(str(v) for v in elems), (ka.z0, ka.x0, kb.z1, kb.y1))
            rec = saved.get(key)
            if rec is not None and rec["status"] in ("fixpoint", "failed_epsilon"):
                resumed[(ka, kb)] = rec
                continue
            start = int(rec["M"]) if rec is not None else M0
            jobs.append((elems, ka, kb, start, M0, prec, max_rounds))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            computed = list(pool.map(_run_class, jobs))
    else:
        computed = [_run_class(j) for j in jobs]
    outcomes = computed[:]
    for (ka, kb), rec in resumed.items():
        outcomes.append(ClassOutcome(ka, kb, M0, int(rec["M"]), valid_from(triple, ka, prec), rec["status"], []))
    outcomes.sort(key=lambda o: (o.class_a, o.class_b))
    if checkpoint:
        with open(checkpoint, "a") as fh:
            for o in computed:
                fh.write(json.dumps({"triple": [str(v) for v in elems], "class": o.key(),
                                     "M": str(o.final_M), "status": o.status}) + "\n")
    extensions = _scan(triple, outcomes)
    irregular = [d for d in extensions
                 if classify_quadruple(make_quadruple(*elems, d)) is Regularity.IRREGULAR]
    certified = all(o.bounded for o in outcomes)
    return CampaignResult(elems, M0, outcomes, extensions, irregular, certified)
