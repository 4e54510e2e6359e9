"""Explicit bounds: Rickert-type index bounds, Matveev and Laurent constants,
gap principles, and the catalog of threshold computations.

Formula helpers take an mpmath context first (``mp`` for point values, ``iv``
for certified enclosures) so the same expression serves both purposes.
All logarithms are natural.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from mpmath import iv, mp, mpf

from .arith import PrecisionExhausted, default_precision, iv_workprec
from .tuples import D4Triple


@dataclass
class BoundReport:
    kind: str
    inputs: dict
    precondition_ok: bool
    bound: mpf | None
    notes: str = ""
    extras: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "inputs": {k: str(v) for k, v in self.inputs.items()},
            "precondition_ok": self.precondition_ok,
            "bound": None if self.bound is None else mp.nstr(self.bound, 15),
            "notes": self.notes,
            "extras": {k: mp.nstr(v, 15) if isinstance(v, mpf) else v for k, v in self.extras.items()},
        }


def _plog(ctx, x):
    """``log x`` for ``x > 1``; outside that range the bound formulas are meaningless."""
    if (x > 1) is not True:
        raise ValueError("log argument not certified > 1")
    return ctx.log(x)


def _aprime(a, b):
    return max(4 * a, 4 * (b - a))


# ---------------------------------------------------------------- Rickert

def rickert_rhs(ctx, a, b, c):
    ap = ctx.mpf(_aprime(a, b))
    a, b, c = ctx.mpf(a), ctx.mpf(b), ctx.mpf(c)
    num = 2 * _plog(ctx, ctx.mpf("32.02") * a * ap * b**4 * c**2) * _plog(ctx, ctx.mpf("0.026") * a * b / (b - a) ** 2 * c**2)
    den = _plog(ctx, ctx.mpf("0.00325") * a / ap / b / (b - a) ** 2 * c) * _plog(ctx, b * c)
    return num / den


def rickert2_rhs(ctx, a, b, c):
    ap = ctx.mpf(_aprime(a, b))
    a, b, c = ctx.mpf(a), ctx.mpf(b), ctx.mpf(c)
    num = 8 * _plog(ctx, ctx.mpf("8.40335e13") * ctx.sqrt(a * ap) * b**2 * c) * _plog(ctx, 
        ctx.mpf("0.20533") * ctx.sqrt(a * b) / (b - a) * c
    )
    den = _plog(ctx, b * c) * _plog(ctx, ctx.mpf("0.016858") * a / ap / b / (b - a) ** 2 * c)
    return num / den


def rickert_bound(a: int, b: int, c: int) -> BoundReport:
    """Upper bound on ``n`` for ``c > 308.07 a' b (b-a)^2 / a``."""
    if not 0 < a < b < c:
        raise ValueError("need 0 < a < b < c")
    ap = _aprime(a, b)
    ok = c * a * 100 > 30807 * ap * b * (b - a) ** 2
    bound = None
    if ok:
        with mp.workprec(default_precision()):
            bound = rickert_rhs(mp, a, b, c)
    return BoundReport("rickert", {"a": a, "b": b, "c": c, "a_prime": ap}, ok, bound)


def rickert2_bound(a: int, b: int, c: int) -> BoundReport:
    """Sharper variant valid for ``b > 10^5`` and ``c > 59.488 a' b (b-a)^2 / a``."""
    if not 0 < a < b < c:
        raise ValueError("need 0 < a < b < c")
    ap = _aprime(a, b)
    ok = b > 10**5 and c * a * 1000 > 59488 * ap * b * (b - a) ** 2
    bound = None
    if c * a * 1000 > 59488 * ap * b * (b - a) ** 2:
        with mp.workprec(default_precision()):
            bound = rickert2_rhs(mp, a, b, c)
    notes = "" if b > 10**5 else "b <= 10^5: formula evaluated outside its hypotheses"
    return BoundReport("rickert2", {"a": a, "b": b, "c": c, "a_prime": ap}, ok, bound, notes)


# ---------------------------------------------------------------- Matveev

MATVEEV_PROP_CONSTANT = mpf("2.7717e12")


def matveev_C(D: int, ctx=mp):
    if D < 1:
        raise ValueError("D must be >= 1")
    e = ctx.e
    D = ctx.mpf(D)
    return 11796480 * e**4 * D**2 * ctx.log(ctx.mpf(3) ** ctx.mpf("5.5") * e ** ctx.mpf("20.2") * D**2 * ctx.log(e * D))


def matveev_lhs(m, ctx=mp):
    return ctx.mpf(m) / ctx.log(ctx.mpf("38.92") * (m + 1))


def max_index_for_rhs(rhs) -> int:
    """Largest integer ``m >= 1`` with ``m / log(38.92 (m+1)) < rhs``."""
    rhs = mpf(rhs)
    if matveev_lhs(1) >= rhs:
        return 0
    lo, hi = 1, 2
    while matveev_lhs(hi) < rhs:
        lo, hi = hi, hi * 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if matveev_lhs(mid) < rhs:
            lo = mid
        else:
            hi = mid
    return lo


def log_xi_eta(triple: D4Triple, ctx=mp):
    a, b, c = (ctx.mpf(v) for v in triple.elements())
    xi = (triple.s + ctx.sqrt(a * c)) / 2
    eta = (triple.t + ctx.sqrt(b * c)) / 2
    return ctx.log(xi), ctx.log(eta)


def matveev_m_bound(triple: D4Triple) -> int:
    """Index bound from ``m / log(38.92(m+1)) < 2.7717e12 log(eta) log(c)``."""
    with mp.workprec(default_precision()):
        _, log_eta = log_xi_eta(triple)
        rhs = MATVEEV_PROP_CONSTANT * log_eta * mp.log(triple.c)
        return max_index_for_rhs(rhs)


# ---------------------------------------------------------------- gap principles

@dataclass(frozen=True)
class KappaDelta:
    kappa: mpf
    delta: int
    case: str


KAPPA_CASES = ("fundamental_range", "z0_abs_2", "z0_t", "z0_minus_t")


def kappa_delta(case: str, triple: D4Triple) -> KappaDelta:
    a, b, c = triple.elements()
    if case == "fundamental_range":
        return KappaDelta(mpf("2.7") * mp.sqrt(a * c), 0, case)
    if case == "z0_abs_2":
        return KappaDelta(mpf(6), 0, case)
    if case == "z0_t":
        return KappaDelta(mpf(1) / (2 * a * b), 0, case)
    if case == "z0_minus_t":
        if not (b > 10**5 and c > a * b + a + b):
            raise ValueError("z0 = -t clause needs b > 10^5 and c > ab + a + b")
        return KappaDelta(mpf("2.0001") * b / c, 1, case)
    raise ValueError(f"unknown kappa case {case!r}")


def okazaki_ratio(m0: int, delta: int, kappa, ac: int, Delta: int):
    """Lower bound on ``(m2 - m1) / log(eta)``: ``kappa^-1 (ac)^(m0-delta) Delta``."""
    if m0 < 1 or Delta < 1:
        raise ValueError("need m0 >= 1 and Delta >= 1")
    return mpf(ac) ** (m0 - delta) * Delta / mpf(kappa)


def okazaki_gap(m0: int, delta: int, kappa, triple: D4Triple, Delta: int):
    """Lower bound on ``m2 - m1`` from three solutions in one class."""
    _, log_eta = log_xi_eta(triple)
    return okazaki_ratio(m0, delta, kappa, triple.a * triple.c, Delta) * log_eta


def pade_lambda(a: int, b: int, c: int, z: int) -> BoundReport:
    """Exponent of the simultaneous-approximation lower bound for ``N = abz^2``."""
    if not 0 < a < b < c:
        raise ValueError("need 0 < a < b < c")
    a1, a2 = 4 * a * (c - b), 4 * b * (c - a)
    N = a * b * z * z
    ok = N >= 10**5 * a2
    u, v, w = c - b, c - a, b - a
    a1p = max(a1, a2 - a1)
    inputs = {"a": a, "b": b, "c": c, "z": z, "N": N, "a1": a1, "a2": a2}
    if not ok:
        return BoundReport("pade_lambda", inputs, False, None, "N < 10^5 a2")
    with mp.workprec(default_precision()):
        num = mp.log(mpf(256) * a1p * a2 * u * N / a1)
        den = mp.log(mpf("0.02636") * mpf(N) ** 2 / (mpf(a1) * a2 * (a2 - a1) * u * v * w))
        lam = 1 + num / den
        coef = 1 / (mpf("512.01") * a1p * a2 * u * N / a1)
    return BoundReport("pade_lambda", inputs, True, lam, extras={"coefficient": coef})


def gap_n2_bound(n1: int, variant: str = "general"):
    """Upper bound on ``n2`` given the smaller solution index ``n1``."""
    n1m = mpf(n1)
    if variant == "general":
        if n1 < 8:
            raise ValueError("general variant needs n1 >= 8")
        den = mpf("0.4795") * n1m - mpf("3.82175")
        if den <= 0:
            raise ValueError("denominator not positive")
        return (n1m + mpf("1.1")) * (mpf("3.5205") * n1m + mpf("4.75675")) / den - mpf("1.1")
    if variant == "ts_class":
        if n1 < 9:
            raise ValueError("ts_class variant needs n1 >= 9")
        den = mpf("0.4853") * n1m - mpf("3.85292")
        if den <= 0:
            raise ValueError("denominator not positive")
        return (n1m + 1) * (mpf("2.5147") * n1m + mpf("5.11467")) / den - 1
    raise ValueError(f"unknown variant {variant!r}")


def gap_ratio_f(n1):
    """``f(n1)``: bound on ``(n2 - n1)/n1`` in the (t, s)-class counting step."""
    n1 = mpf(n1)
    return (mpf("2.0294") * n1 + mpf("8.96759")) / (mpf("0.4853") * n1 - mpf("3.85292")) * (1 + 1 / n1)


# ---------------------------------------------------------------- Laurent

@dataclass(frozen=True)
class LaurentParams:
    rho: mpf
    mu: mpf
    sigma: mpf
    lam: mpf
    h: mpf
    H: mpf
    omega: mpf
    theta: mpf
    C0: mpf


def laurent_params(x, rho="8.2", mu="0.48") -> LaurentParams:
    """Parameters for the two-logarithm bound, with ``x`` the current value of ``j/log(eta)``."""
    rho, mu = mpf(rho), mpf(mu)
    if not (rho > 1 and mpf(1) / 3 <= mu <= 1):
        raise ValueError("need rho > 1 and 1/3 <= mu <= 1")
    sigma = (1 + 2 * mu - mu**2) / 2
    lam = sigma * mp.log(rho)
    h = 4 * mp.log(2 * mpf(x) + 1) + 4 * mp.log(lam / (rho + 3)) + mpf("7.06") + mp.log(rho)
    H = h / lam
    root = mp.sqrt(1 + 1 / (4 * H**2))
    omega = 2 * (1 + root)
    theta = root + 1 / (2 * H)
    L5 = mp.log(mpf(10) ** 5)
    C0 = (
        omega / 6
        + mp.sqrt(
            omega**2 / 9
            + 16 * lam * omega ** mpf("1.25") * theta ** mpf("0.25") / (3 * (rho + 3) * mp.sqrt(H) * L5)
            + 16 * lam * omega / (3 * (rho + 3) * H * L5)
        )
        / 2
    ) ** 2
    return LaurentParams(rho, mu, sigma, lam, h, H, omega, theta, C0)


def laurent_rhs(x, rho="8.2", mu="0.48"):
    """Right-hand side bounding ``2 m1 / log(eta)``."""
    p = laurent_params(x, rho, mu)
    L5 = mp.log(mpf(10) ** 5)
    main = p.C0 * p.mu / (p.lam**3 * p.sigma) * (p.rho + 3) ** 2 * p.h**2
    tail = (
        2 * mp.sqrt(p.omega * p.theta) * p.h
        + 2 * mp.log(mp.sqrt(p.C0 * p.omega * p.theta) * p.lam**-3 * (p.rho + 3) ** 2)
        + 4 * mp.log(p.h)
    ) / L5**2
    return main + tail + 1


# how 2 m1 / log(eta) is bounded below by a multiple of x = j / log(eta)
LAURENT_SCENARIOS = {
    # j <= 5912 m1, so 2 m1/log eta >= 2x/5912
    "n_case_i": {"slope": mpf(2) / 5912, "offset": mpf(0), "stated_value": mpf("5.71e8")},
    # m1/log eta > x/f(n1) - 1 with f(n1) <= 4.1818
    "ts_class": {"slope": 2 / mpf("4.1818"), "offset": mpf(2), "stated_value": mpf(152184)},
}


def laurent_apply(seed=10**6, triple: D4Triple | None = None, scenario: str = "n_case_i",
                  rho="8.2", mu="0.48", slope=None, offset=None) -> BoundReport:
    """Largest ``x = j/log(eta)`` compatible with the Laurent lower bound.

    The bound solves ``slope * x - offset < laurent_rhs(x)``; ``h`` depends on
    ``x`` so the solution is a fixed point of ``x -> (rhs(x) + offset)/slope``,
    iterated from ``seed``.
    """
    sc = LAURENT_SCENARIOS[scenario]
    slope = mpf(slope) if slope is not None else sc["slope"]
    offset = mpf(offset) if offset is not None else sc["offset"]
    inputs = {"scenario": scenario, "rho": rho, "mu": mu, "seed": seed}
    with mp.workprec(default_precision()):
        p0 = laurent_params(seed, rho, mu)
        notes = []
        pre_ok = True
        if triple is not None:
            lx, le = log_xi_eta(triple)
            pre_ok = p0.lam**2 <= (p0.rho + 3) ** 2 * lx * le
        else:
            pre_ok = p0.lam**2 <= ((p0.rho + 3) * mp.log(mpf(10) ** 5)) ** 2
        x = mpf(seed)
        converged = False
        for it in range(64):
            nxt = (laurent_rhs(x, rho, mu) + offset) / slope
            if abs(nxt - x) <= mpf(10) ** -30 * abs(nxt):
                x = nxt
                converged = True
                break
            x = nxt
        if not converged:
            raise ArithmeticError("Laurent fixed point did not converge in 64 iterations")
        # past the fixed point the inequality must fail
        above = x * (1 + mpf(10) ** -9)
        monotone = slope * above - offset >= laurent_rhs(above, rho, mu)
        if not monotone:
            notes.append("fixed point is not an upper crossing")
    return BoundReport(
        "laurent", inputs, bool(pre_ok), x, "; ".join(notes),
        extras={"iterations": it + 1, "stated_value": sc["stated_value"], "h": laurent_params(x, rho, mu).h},
    )


# ---------------------------------------------------------------- alpha lemma

def alpha_constraints(alpha, a0, b0, c0, rho, L):
    alpha, rho, L = mpf(alpha), mpf(rho), mpf(L)
    lam = mp.sqrt(a0 + 4) / mp.sqrt(rho * a0 + 4)
    first = alpha**2 + (1 + mpf(2) / (b0 * c0)) * alpha <= 1
    second = (
        4 * (1 - 1 / L**2) * alpha**2
        + alpha * (b0 * (lam + rho ** mpf(-0.5)) + mpf(2) / c0 * (lam + mp.sqrt(rho)))
        <= b0
    )
    return first, second


def alpha_gap(a0: int, b0: int, c0: int, rho, L) -> mpf:
    """Largest ``alpha`` (bisection) satisfying both quadratic constraints."""
    if min(a0, b0, c0) < 1 or mpf(rho) <= 1 or mpf(L) <= 1:
        raise ValueError("need a0, b0, c0 >= 1, rho > 1, L > 1")
    with mp.workprec(default_precision()):
        lo, hi = mpf(0), mpf(1)
        for _ in range(200):
            mid = (lo + hi) / 2
            if all(alpha_constraints(mid, a0, b0, c0, rho, L)):
                lo = mid
            else:
                hi = mid
        return lo


# ---------------------------------------------------------------- threshold catalog

@dataclass(frozen=True)
class CatalogCase:
    case_id: str
    description: str
    stated_value: int
    # (ctx, x) -> (lhs, rhs); the inequality lhs < rhs is what the proof contradicts
    inequality: Callable
    variable: str = "b"
    start: int = 3
    mode: str = "exact"  # "exact": within +-1 of stated_value; "upper": computed <= stated_value
    alt_stated_values: tuple = ()
    # optional (ctx, b, c) -> rhs and (ctx, b) -> c for the decreasing-in-c check
    rhs_bc: Callable | None = None
    c_sub: Callable | None = None


def _r1(k1, k2, k3):
    """Rickert-type rhs ``2 log(k1 b^6 c^2) log(k2 b^e c^2)/(log(bc) log(k3 b^f c))``."""
    def rhs(ctx, b, c):
        return (
            2 * _plog(ctx, k1[0] * b**6 * c**2) * _plog(ctx, k2[0] * b ** k2[1] * c**2)
            / (_plog(ctx, b * c) * _plog(ctx, k3[0] * b ** k3[1] * c))
        )
    return rhs


def _rhs_ee_b221a(ctx, b, c):
    return _r1((ctx.mpf("57.955"),), (ctx.mpf("0.0393"), 0), (ctx.mpf("0.0008125"), -4))(ctx, b, c)


def _rhs_2a(ctx, b, c):
    return _r1((ctx.mpf("35.0627"),), (ctx.mpf("0.052"), 0), (ctx.mpf("0.0022397"), -3))(ctx, b, c)


def _rhs_lt2a(ctx, b, c):
    return _r1((ctx.mpf("128.08"),), (ctx.mpf("0.0000081"), 2), (ctx.mpf("0.00325"), -3))(ctx, b, c)


def _rhs_oo_ge2a(ctx, b, c):
    return _r1((ctx.mpf("64.04"),), (ctx.mpf("0.052"), 0), (ctx.mpf("0.0008125"), -4))(ctx, b, c)


def _rhs_thm15_ii(ctx, b, c):
    return _r1((ctx.mpf("58.71"),), (ctx.mpf("0.052"), 0), (ctx.mpf("0.000087903"), -3))(ctx, b, c)


def _rhs_thm15_iii(a0):
    def rhs(ctx, b, c):
        return (
            8 * _plog(ctx, ctx.mpf("8.40335e13") * b**3 * c) * _plog(ctx, ctx.mpf("0.002579") * c**2)
            / (_plog(ctx, b * c) * _plog(ctx, ctx.mpf("0.0042145") * a0 * b**-4 * c))
        )
    return rhs


def _rhs_rickert2_a1(ctx, b, c):
    return rickert2_rhs(ctx, 1, b, c)


def _case(case_id, description, stated_value, lhs, rhs_bc, c_sub, **kw):
    def inequality(ctx, b):
        b = ctx.mpf(b)
        c = c_sub(ctx, b)
        return lhs(ctx, b, c), rhs_bc(ctx, b, c)
    return CatalogCase(case_id, description, stated_value, inequality, rhs_bc=rhs_bc, c_sub=c_sub, **kw)


def _pow(ctx, x, p, q):
    return x ** (ctx.mpf(p) / q)


_C_2_3B5 = lambda ctx, b: ctx.mpf("2.3") * b**5
_C_1_1B75 = lambda ctx, b: ctx.mpf("1.1") * b ** ctx.mpf("7.5")
_N_EE = lambda ctx, b, c: ctx.mpf("0.45273") * _pow(ctx, b, -9, 28) * _pow(ctx, c, 5, 28)
_N_OO = lambda ctx, b, c: ctx.mpf("0.30921") * _pow(ctx, b, -3, 4) * _pow(ctx, c, 1, 4)
_N_C_B4 = lambda ctx, b, c: ctx.mpf("0.5348") * _pow(ctx, b, -3, 4) * _pow(ctx, c, 1, 4)


def _nprime_minus_t(ctx, c):
    c = ctx.mpf(c)
    m2 = ctx.mpf("1.999") * c**8 * ctx.log(ctx.sqrt(c))
    return matveev_lhs(m2, ctx), ctx.mpf("2.81e12") * ctx.log(c) * ctx.log(c / 2)


def _okazaki_m0(ctx, c):
    c = ctx.mpf(c)
    m2 = c**5
    return matveev_lhs(m2, ctx), ctx.mpf("2.7717e12") * ctx.log(c) ** 2


CATALOG: dict[str, CatalogCase] = {
    c.case_id: c
    for c in [
        _case("prop_d+_ee_b221a", "m, n even, b >= 2.21a, c = 2.3 b^5", 19289,
              _N_EE, _rhs_ee_b221a, _C_2_3B5),
        _case("prop_d+_2a_cases_f1", "m, n even, 2a < b < 2.21a, F = 0.50799 b^(9/16), c = 1.1 b^7.5", 722,
              lambda ctx, b, c: ctx.mpf("0.50799") * _pow(ctx, b, 9, 16), _rhs_2a, _C_1_1B75),
        _case("prop_d+_2a_cases_f2", "m, n even, 2a < b < 2.21a, F = 0.17888 b^(23/56), c = 1.1 b^7.5", 81874,
              lambda ctx, b, c: ctx.mpf("0.17888") * _pow(ctx, b, 23, 56), _rhs_2a, _C_1_1B75),
        _case("prop_d+_lt2a_f1", "m, n even, b < 2a, F = 0.35921 b^(9/16), c = 1.1 b^7.5", 1396,
              lambda ctx, b, c: ctx.mpf("0.35921") * _pow(ctx, b, 9, 16), _rhs_lt2a, _C_1_1B75),
        _case("prop_d+_lt2a_f2", "m, n even, b < 2a, F = 0.17888 b^(23/56), c = 1.1 b^7.5", 98413,
              lambda ctx, b, c: ctx.mpf("0.17888") * _pow(ctx, b, 23, 56), _rhs_lt2a, _C_1_1B75),
        _case("prop_d+_oo_bge2a", "m, n odd, b >= 2a, c = 2.3 b^5", 97144,
              _N_OO, _rhs_oo_ge2a, _C_2_3B5),
        _case("prop_d+_oo_blt2a", "m, n odd, b < 2a, c = 1.1 b^7.5", 48,
              _N_OO, _rhs_lt2a, _C_1_1B75),
        _case("thm15_i", "b < 2a, c = 890 b^4", 99887,
              _N_C_B4, _rhs_lt2a, lambda ctx, b: 890 * b**4),
        _case("thm15_ii", "2a <= b <= 12a, c = 1613 b^4", 99949,
              _N_C_B4, _rhs_thm15_ii, lambda ctx, b: 1613 * b**4),
        _case("thm15_iii", "b > 12a, c = 52761 b^4 (second Rickert variant, simplified)", 99998,
              _N_C_B4, _rhs_thm15_iii(1), lambda ctx, b: 52761 * b**4),
        _case("thm15_iii_aux", "b > 12a, a >= 2, c = 39247 b^4, denominator scaled by a0 = 42", 73454,
              _N_C_B4, _rhs_thm15_iii(42), lambda ctx, b: 39247 * b**4),
        _case("thm15_iii_a1", "b > 12a, a = 1, c = 39247 b^4 (second Rickert variant, exact)", 99994,
              _N_C_B4, _rhs_rickert2_a1, lambda ctx, b: 39247 * b**4, start=13,
              alt_stated_values=(999994,)),
        CatalogCase("nprime_minus_t", "three solutions in the (-t,-s) class: m2 > 1.999 c^8 log sqrt(c)",
                    56, _nprime_minus_t, variable="c", start=3),
        CatalogCase("okazaki_m0", "m0 > 2 in one class: m2 > c^5 against the Matveev index bound",
                    10**5, _okazaki_m0, variable="c", start=3, mode="upper"),
    ]
}


@dataclass
class ThresholdResult:
    case_id: str
    variable: str
    computed_value: int  # first value at which the inequality fails ("x < computed")
    last_holding: int
    stated_value: int
    passed: bool
    single_crossing: bool
    rhs_decreasing: bool | None
    alt_readings: dict
    precision: int
    notes: str = ""

    def to_json(self) -> dict:
        return {
            "case_id": self.case_id,
            "variable": self.variable,
            "paper_value": str(self.stated_value),
            "computed_value": str(self.computed_value),
            "last_holding": str(self.last_holding),
            "pass": self.passed,
            "single_crossing": self.single_crossing,
            "rhs_decreasing_in_c": self.rhs_decreasing,
            "alt_readings": {str(k): v for k, v in self.alt_readings.items()},
            "precision": self.precision,
            "notes": self.notes,
        }


def _holds(case: CatalogCase, x: int, prec: int):
    """Certified truth of ``lhs < rhs`` at ``x``; None when undefined there."""
    while prec <= 4096:
        with iv_workprec(prec):
            try:
                lhs, rhs = case.inequality(iv, x)
            except (ValueError, ZeroDivisionError):
                return None
            diff = rhs - lhs
            if (diff > 0) is True:
                return True
            if (diff <= 0) is True:
                return False
        prec *= 2
    raise PrecisionExhausted(f"{case.case_id}: sign undecided at {x}")


def _rhs_decreasing(case: CatalogCase, x: int, prec: int) -> bool:
    with mp.workprec(prec):
        b = mpf(x)
        c0 = case.c_sub(mp, b)
        vals = [case.rhs_bc(mp, b, c0 * mpf(2) ** k) for k in range(0, 40, 2)]
    return all(u > v for u, v in zip(vals, vals[1:]))


def threshold_solve(case_id: str, precision: int | None = None) -> ThresholdResult:
    """Boundary of the region where the case inequality still holds.

    The value reported is the smallest integer above the holding region, which
    matches statements of the form ``b < X``.
    """
    if case_id not in CATALOG:
        raise KeyError(f"unknown case {case_id!r}")
    case = CATALOG[case_id]
    prec = precision or default_precision()
    grid, x = [], case.start
    while x < 10**13:
        grid.append(x)
        x = max(x + 1, int(x * 1.25))
    flags = [_holds(case, g, prec) for g in grid]
    defined = [(g, f) for g, f in zip(grid, flags) if f is not None]
    pattern = [f for _, f in defined]
    if True not in pattern or pattern[-1]:
        raise ArithmeticError(f"{case_id}: no crossing found on the search grid")
    last_true = max(i for i, f in enumerate(pattern) if f)
    # holds on an initial segment of the defined region, then fails for good
    single = pattern == sorted(pattern, reverse=True)
    lo, hi = defined[last_true][0], defined[last_true + 1][0]
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _holds(case, mid, prec):
            lo = mid
        else:
            hi = mid
    dec = _rhs_decreasing(case, hi, prec) if case.rhs_bc is not None else None
    if case.mode == "upper":
        passed = hi <= case.stated_value
    else:
        passed = abs(hi - case.stated_value) <= 1 or abs(lo - case.stated_value) <= 1
    alt = {v: abs(hi - v) <= 1 for v in case.alt_stated_values}
    notes = ""
    if alt:
        supported = [str(case.stated_value)] if passed else []
        supported += [str(v) for v, ok in alt.items() if ok]
        notes = "computation supports reading(s): " + (", ".join(supported) or "none")
    return ThresholdResult(case.case_id, case.variable, hi, lo, case.stated_value, passed,
                           single, dec, alt, prec, notes)


def run_catalog(precision: int | None = None) -> list[ThresholdResult]:
    return [threshold_solve(cid, precision) for cid in CATALOG]
