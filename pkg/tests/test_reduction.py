import json
import math
from fractions import Fraction

import pytest
from mpmath import mp, mpf

from d4lab.arith import HighPrecReal, PrecisionExhausted
from d4lab.bounds import matveev_m_bound
from d4lab.pell import PellClassA, PellClassB, enumerate_classes_A, enumerate_classes_B, find_intersections, gen_v, gen_w
from d4lab.reduction import (
    ReductionProblem,
    _mq_normal,
    _squarefree,
    bd_campaign,
    bd_reduce,
    build_problem,
    linear_form_u,
    relation_holds,
    synthetic_problem,
    valid_from,
)
from d4lab.tuples import Regularity, classify_quadruple, make_quadruple, make_triple

T = make_triple(1, 5, 12)


def phi(ctx):
    return (1 + ctx.sqrt(5)) / 2


def violators(kappa, mu_hat, A, B, lo, hi):
    """Oracle: every m in (lo, hi] with |m kappa - n + mu_hat| < A B^-m for some n."""
    out = []
    for m in range(lo + 1, hi + 1):
        x = m * kappa + mu_hat
        if abs(x - round(x)) < A * B ** (-min(m, 300)):
            out.append(m)
    return out


def test_synthetic_golden_example():
    p = synthetic_problem(phi, lambda ctx: ctx.mpf(123) / 1000, 1000, 10, 10**6)
    res = bd_reduce(p)
    assert res.status == "reduced" and res.new_M <= 12
    assert res.q_used > 6 * 10**6 and res.epsilon.lo > 0
    kappa = (1 + math.sqrt(5)) / 2
    assert violators(kappa, 0.123, 1000, 10.0, res.new_M, 10**6) == []


def test_synthetic_scan_below_bound_is_not_empty_by_accident():
    # the reduced bound is not vacuous: some small m do satisfy the inequality
    kappa = (1 + math.sqrt(5)) / 2
    assert violators(kappa, 0.123, 1000, 10.0, 0, 3)


def test_homogeneous_fails_epsilon():
    p = synthetic_problem(phi, lambda ctx: ctx.mpf(0), 1000, 10, 10**6)
    res = bd_reduce(p)
    assert res.status == "failed_epsilon" and res.new_M == 10**6 and res.q_used == 0


def test_tiny_mu_skips_to_larger_convergent():
    p = synthetic_problem(phi, lambda ctx: ctx.mpf(1) / 10**9, 1000, 10, 10**6)
    res = bd_reduce(p)
    assert res.status == "reduced"
    # 9227465 is the first Fibonacci denominator above 6M; it cannot work here
    assert res.q_used > 9227465
    kappa = (1 + math.sqrt(5)) / 2
    assert violators(kappa, 1e-9, 1000, 10.0, res.new_M, 10**5) == []


def test_bd_reduce_domain():
    p = synthetic_problem(phi, lambda ctx: ctx.mpf(1) / 3, 10, 10, 1)
    with pytest.raises(ValueError):
        bd_reduce(p.with_M(0))


def test_precision_retry_without_rebuild():
    lo = HighPrecReal(Fraction(1), Fraction(2), 64)
    p = ReductionProblem(lo, lo, HighPrecReal.exact(1), HighPrecReal.exact(10), 5)
    assert bd_reduce(p).status == "precision_retry"
    with pytest.raises(PrecisionExhausted):
        p.at_precision(128)


def test_escalation_on_low_precision():
    p = synthetic_problem(phi, lambda ctx: ctx.mpf(123) / 1000, 1000, 10, 10**30, precision=64)
    res = bd_reduce(p)
    assert res.status == "reduced" and res.precision > 64


def test_relation_reduction_on_synthetic_form():
    # mu_hat = 1 - 2 kappa exactly, so the Legendre step is the only option
    def kappa(ctx):
        return ctx.sqrt(2)

    p = synthetic_problem(kappa, lambda ctx: 1 - 2 * ctx.sqrt(2), 1000, 10, 10**5)
    assert bd_reduce(p).status == "failed_epsilon"
    related = ReductionProblem(p.kappa, p.mu_hat, p.A, p.B, p.M, "rel", None, 0, (2, 1))
    res = bd_reduce(related)
    assert res.status == "reduced" and res.new_M < 30
    assert violators(math.sqrt(2), 1 - 2 * math.sqrt(2), 1000, 10.0, res.new_M, 10**5) == []


def test_build_problem_example():
    ka, kb = PellClassA(2, 2, True), PellClassB(2, 2, True)
    p = build_problem(T, ka, kb, 100)
    oracle = math.log(2 + math.sqrt(3)) / math.log(4 + math.sqrt(15))
    assert abs(float(p.kappa) - oracle) < 1e-12
    assert abs(float(p.kappa) - 0.63825) < 1e-4
    assert float(p.B) == pytest.approx((2 + math.sqrt(3)) ** 2)
    assert p.A.lo > 0 and p.relation is None
    mu = math.sqrt(5) * (2 * math.sqrt(12) + 2) / (2 * math.sqrt(12) + 2 * math.sqrt(5))
    assert float(p.mu_hat) == pytest.approx(math.log(mu) / math.log(4 + math.sqrt(15)))


def test_linear_form_bound_holds_on_true_solutions():
    # |Lambda| < kappa0 xi^(-2m) checked at every genuine intersection
    for t in (T, make_triple(1, 12, 21), make_triple(2, 6, 16), make_triple(3, 7, 20)):
        for s in find_intersections(t, 10**40).solutions:
            p = build_problem(t, s.class_a, s.class_b, 10)
            if s.m < p.m_valid:
                continue
            with mp.workprec(400):
                kappa, mu_hat = p.kappa.to_mpf(), p.mu_hat.to_mpf()
                lam = abs(s.m * kappa - s.n + mu_hat)
                assert lam < p.A.to_mpf() * p.B.to_mpf() ** (-s.m)


def test_valid_from():
    ka = PellClassA(2, 2, True)
    m = valid_from(T, ka, 256)
    assert linear_form_u(T, ka, m, 256).hi <= Fraction(1, 8)
    if m:
        assert linear_form_u(T, ka, m - 1, 256).hi > Fraction(1, 8)


def test_squarefree_and_normal_form():
    assert _squarefree(72) == (2, 6)
    assert _squarefree(1) == (1, 1)
    assert _squarefree(97 * 97 * 101) == (101, 97)
    # sqrt2 * sqrt8 = 4 and sqrt3 * sqrt12 = 6
    assert _mq_normal({0b11: Fraction(1)}, (2, 8)) == {1: 4}
    assert _mq_normal({0b11: Fraction(1)}, (3, 12)) == {1: 6}
    assert _mq_normal({0b01: Fraction(1), 0b10: Fraction(-1)}, (8, 2)) == {2: 1}


def test_near_relation_is_not_mistaken_for_exact():
    # mu_hat agrees with 2 - 2 kappa to about 1e-14 on this class, but not exactly
    t = make_triple(415, 419, 1668)
    ka, kb = PellClassA(-2, 2, True), PellClassB(-2, 2, True)
    p = build_problem(t, ka, kb, 10)
    assert abs(float(p.mu_hat) + 2 * float(p.kappa) - 2) < 1e-12
    assert not relation_holds(t, ka, kb, 2, 2)
    assert p.relation is None


def test_relation_holds_trivial_identity():
    # (i, j) = (0, 0) means mu = 1; that needs x0 sqrt(bc) + z0 sqrt(ab) = y1 sqrt(ac) + z1 sqrt(ab)
    ka, kb = PellClassA(2, 2, True), PellClassB(2, 2, True)
    assert not relation_holds(T, ka, kb, 0, 0)


def test_campaign_1_5_12():
    res = bd_campaign(T)
    assert res.M0 == matveev_m_bound(T)
    assert res.certified and res.final_bound <= 10
    assert res.extensions == [96] and res.irregular == []
    for o in res.classes:
        Ms = [o.M0] + [r.new_M for r in o.rounds if r.status == "reduced"]
        assert all(x > y for x, y in zip(Ms, Ms[1:]))
        assert len([r for r in o.rounds if r.status == "reduced"]) <= 3 or o.final_M <= 10


def test_campaign_doubled_precision_identical():
    a = bd_campaign(T, precision=256)
    b = bd_campaign(T, precision=512)
    assert a.conclusions() == b.conclusions()


def test_campaign_scan_matches_direct_scan():
    # the extensions the campaign sees below its bound are exactly those of a direct walk
    for t in (T, make_triple(1, 12, 21), make_triple(3, 7, 20), make_triple(415, 419, 1668)):
        res = bd_campaign(t)
        direct = set()
        for ka in enumerate_classes_A(t):
            for kb in enumerate_classes_B(t):
                v = gen_v(t, ka, res.final_bound + 1)
                w = gen_w(t, kb, 3 * res.final_bound + 4)
                for z in set(v) & set(w):
                    if z > 2 and (z * z - 4) % t.c == 0 and (z * z - 4) // t.c > t.c:
                        direct.add((z * z - 4) // t.c)
        assert direct <= set(res.extensions)
        for d in res.extensions:
            q = make_quadruple(*t.elements(), d)
            assert classify_quadruple(q) is not Regularity.IRREGULAR


def test_campaign_near_relation_class_keeps_bound():
    res = bd_campaign(make_triple(415, 419, 1668))
    stuck = [o for o in res.classes if o.status == "failed_epsilon"]
    assert stuck and all(o.rounds[0].status == "reduced" for o in stuck)
    assert res.certified and res.unbounded_classes == []


def test_campaign_checkpoint_resume(tmp_path):
    path = tmp_path / "ck.jsonl"
    first = bd_campaign(T, checkpoint=str(path))
    lines = path.read_text().splitlines()
    assert len(lines) == len(first.classes)
    rec = json.loads(lines[0])
    assert rec["triple"] == ["1", "5", "12"] and isinstance(rec["M"], str)
    second = bd_campaign(T, checkpoint=str(path))
    assert second.conclusions() == first.conclusions()
    # nothing recomputed on resume
    assert len(path.read_text().splitlines()) == len(lines)
    assert all(o.rounds == [] for o in second.classes)


def test_campaign_resume_partial(tmp_path):
    path = tmp_path / "ck.jsonl"
    full = bd_campaign(T)
    # a record still at M0 (interrupted) is picked up and finished
    ka, kb = enumerate_classes_A(T)[0], enumerate_classes_B(T)[0]
    path.write_text(json.dumps({"triple": ["1", "5", "12"], "class": [ka.z0, ka.x0, kb.z1, kb.y1],
                                "M": str(full.M0), "status": "precision_retry"}) + "\n")
    resumed = bd_campaign(T, checkpoint=str(path))
    assert resumed.conclusions() == full.conclusions()


def test_campaign_workers_identical():
    assert bd_campaign(T, workers=2).conclusions() == bd_campaign(T).conclusions()


def test_campaign_small_triples_exhaustive():
    # every triple with b < 200 and c < 10^5 has only regular extensions
    from concurrent.futures import ProcessPoolExecutor

    from d4lab.search import enumerate_triples

    triples = [t for t in enumerate_triples(10**5) if t.b < 200]
    with ProcessPoolExecutor() as pool:
        results = list(pool.map(_campaign_summary, triples, chunksize=16))
    assert len(results) == len(triples) > 800
    assert all(cert for cert, _ in results)
    assert all(not irr for _, irr in results)


def _campaign_summary(t):
    res = bd_campaign(t)
    return res.certified, res.irregular
