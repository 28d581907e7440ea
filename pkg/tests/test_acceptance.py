"""Acceptance criteria 1-9.

Each test carries ``@pytest.mark.criterion(n)``; the hook in conftest.py prints
one PASS/FAIL line per criterion at the end of the run.
"""

from __future__ import annotations

import math
import random
import time
from fractions import Fraction as F

import pytest

import oracles
from steinchen import (
    FLOAT,
    CondExp,
    Evaluator,
    NatSet,
    SteinConfig,
    apply_T,
    build_product_model,
    check_averaging,
    check_band_domination,
    check_functional_calculus,
    check_g_measure,
    check_independence_shift,
    delta,
    example1,
    example2,
    example3,
    family_conditionally_independent,
    lsn_bounds,
    make_partition,
    make_space,
    parse_model,
    poisson_measure,
    set_battery,
    stein_g_table,
    stein_hg_singleton,
    stein_identity_residual,
    truncated_lsn,
    tv_distance,
    verify_lsn,
)
from steinchen.report import sweep, unconditional_summary

TOL = 1e-9
N_MODELS = 200
N_CASES = 100


def criterion(n):
    return pytest.mark.criterion(n)


def block_values(model, f):
    return [f.values[blk[0]] for blk in model.sigma.blocks]


def seeded_product_models(seed, count=N_MODELS, max_n=6, max_blocks=4):
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        nb, n = rng.randint(1, max_blocks), rng.randint(1, max_n)
        probs = oracles.random_probs(rng, n, nb)
        out.append((probs, build_product_model(oracles.random_block_masses(rng, nb), probs)[2]))
    return out


def float_points(values):
    space = make_space(list(range(len(values))), [F(1, len(values))] * len(values))
    return space.element(values, FLOAT)


def log_uniform(rng, lo, hi):
    return math.exp(rng.uniform(math.log(lo), math.log(hi)))


def random_natset(rng, top=25):
    A = NatSet.finite(k for k in range(top + 1) if rng.random() < 0.3)
    return ~A if rng.random() < 0.5 else A


def random_partitioned_space(rng, n_max=8):
    n = rng.randint(1, n_max)
    w = [rng.randint(1, 9) for _ in range(n)]
    space = make_space(list(range(n)), [F(x, sum(w)) for x in w])
    nb = rng.randint(1, n)
    assign = list(range(nb)) + [rng.randrange(nb) for _ in range(n - nb)]
    rng.shuffle(assign)
    blocks = [[i for i in range(n) if assign[i] == b] for b in range(nb)]
    return space, CondExp(make_partition(space, blocks))


def rel_close(a, b, rel):
    return a == b or abs(a - b) <= rel * max(abs(a), abs(b))


# -- 1. example1 ---------------------------------------------------------------

@criterion(1)
def test_example_one_exact():
    start = time.perf_counter()
    m = example1()
    T, fam = m.T, m.family
    p, q = fam.qs
    assert block_values(m, apply_T(T, p)) == [F(1, 4), F(1, 4)]
    assert block_values(m, apply_T(T, q)) == [F(0), F(1)]
    assert block_values(m, fam.H) == [F(1, 4), F(5, 4)]
    sup_h, _ = lsn_bounds(fam)
    assert block_values(m, sup_h) == [F(1, 4), F(1)]
    assert family_conditionally_independent(T, fam.qs).max_residual == 0
    elapsed = time.perf_counter() - start
    print(f"example 1 reproduced in {elapsed:.3f}s")
    assert elapsed < 1.0


# -- 2. example2 ---------------------------------------------------------------

@criterion(2)
def test_example_two_exact():
    start = time.perf_counter()
    m = example2()
    T, fam = m.T, m.family
    indep = family_conditionally_independent(T, fam.qs)
    assert indep.is_independent and indep.max_residual == 0
    unc = unconditional_summary(m)
    pair = unc["pairs"][0]
    assert (pair["P(Bi and Bj)"], pair["P(Bi)P(Bj)"]) == ("3/8", "1/4")
    assert pair["independent"] is False
    assert block_values(m, fam.H) == [F(1, 4), F(7, 4)]
    sup_h, _ = lsn_bounds(fam)
    assert block_values(m, sup_h) == [F(1, 4), F(1)]
    elapsed = time.perf_counter() - start
    print(f"example 2 reproduced in {elapsed:.3f}s")
    assert elapsed < 1.0


# -- 3. example3 truncations ------------------------------------------------------

def expected_s(n):
    r = n % 4
    if r == 3:
        return 0
    if r == 0:
        return 1
    return (n + 3) // 4


@criterion(3)
def test_example_three_truncated():
    start = time.perf_counter()
    for K in range(2, 9):
        m = example3(K)
        T, fam, space = m.T, m.family, m.space
        f = space.function(lambda n: F(n * n + 1, n + 2))
        Tf = apply_T(T, f)
        for k in range(1, K + 1):
            want = (3 * f.at(2 * k) + 2 ** (k + 1) * f.at(2 * k - 1)) / (3 + 2 ** (k + 1))
            assert Tf.at(2 * k - 1) == want and Tf.at(2 * k) == want
        names = m.notes["event_names"]
        for name, q, h in zip(names, fam.qs, fam.hs):
            j = int(name[1:])
            if j % 2 == 0:
                k = j // 2
                on = {4 * k - 1, 4 * k}
                for n in space.labels:
                    assert h.at(n) == (F(3, 3 + 2 ** (2 * k + 1)) if n in on else 0)
            else:
                assert h == q
        if K >= 2:
            assert fam.hs[names.index("B2")].at(4) == F(3, 11)
        sup_h, _ = lsn_bounds(fam)
        for n in space.labels:
            k = (n + 1) // 4
            assert sup_h.at(n) == (F(3, 3 + 2 ** (2 * k + 1)) if n % 4 in (0, 3) else 1)
            assert fam.w.at(n) == expected_s(n)
        kappa = int(max(fam.w.values))
        for A in set_battery(kappa, seed=K).values():
            rep = verify_lsn(fam, A, TOL)
            assert rep.bound_satisfied and rep.refined_satisfied, (K, A)
    elapsed = time.perf_counter() - start
    print(f"example 3, K=2..8, in {elapsed:.3f}s")
    assert elapsed < 5.0


# -- 4. finite-sum bound on seeded product models ----------------------------------

@criterion(4)
def test_finite_sum_bound_property_suite():
    start = time.perf_counter()
    models = seeded_product_models(2024)
    assert len(models) >= 200
    blocks = 0
    for probs, fam in models:
        assert fam.n <= 6 and len(fam.T.sigma.blocks) <= 4
        sup_h, refined = lsn_bounds(fam)
        tv = tv_distance(fam)
        for blk in fam.T.sigma.blocks:
            i = blk[0]
            assert tv.values[i] <= float(sup_h.values[i]) + TOL
            assert tv.values[i] <= refined.values[i] + TOL
            blocks += 1
    elapsed = time.perf_counter() - start
    print(f"{len(models)} models, {blocks} blocks in {elapsed:.2f}s")
    assert elapsed < 60.0


@criterion(4)
def test_tv_matches_exhaustive_oracle():
    # the bound is only as good as the TV it is compared with
    for probs, fam in seeded_product_models(77, count=40):
        tv = tv_distance(fam)
        for b, blk in enumerate(fam.T.sigma.blocks):
            ps = [row[b] for row in probs]
            want = float(oracles.tv_exhaustive(oracles.poisson_binomial(ps), sum(ps)))
            assert tv.values[blk[0]] == pytest.approx(want, abs=1e-13)


# -- 5. Stein identity ---------------------------------------------------------------

@criterion(5)
def test_stein_identity_over_battery():
    worst, count = 0.0, 0
    for seed, (_, fam) in enumerate(seeded_product_models(2024)):
        for A in set_battery(fam.n, seed=seed).values():
            worst = max(worst, stein_identity_residual(fam, A))
            count += 1
    print(f"{count} (model, A) pairs, worst residual {worst:.3g}")
    assert worst <= TOL


# -- 6. evaluator cross-validation -------------------------------------------------

@criterion(6)
def test_recurrence_against_singleton_additive():
    rng = random.Random(6)
    rec = SteinConfig(evaluator=Evaluator.RECURRENCE)
    single = SteinConfig(evaluator=Evaluator.SINGLETON_ADDITIVE)
    for _ in range(N_CASES):
        H = float_points([log_uniform(rng, 1e-3, 10) for _ in range(8)] + [1e-3, 10.0])
        A = random_natset(rng)
        ta, tb = stein_g_table(range(0, 21), H, A, rec), stein_g_table(range(0, 21), H, A, single)
        for j in range(0, 21):
            for x, y in zip(ta[j].values, tb[j].values):
                assert rel_close(x, y, 1e-9), (j, A, x, y)


@criterion(6)
def test_closed_form_on_its_domain():
    rng = random.Random(66)
    rec = SteinConfig(evaluator=Evaluator.RECURRENCE)
    closed = SteinConfig(evaluator=Evaluator.CLOSED_FORM)
    for _ in range(N_CASES):
        H = float_points([rng.uniform(0.5, 10) for _ in range(8)] + [0.5, 10.0])
        A = random_natset(rng)
        ta, tb = stein_g_table(range(0, 13), H, A, rec), stein_g_table(range(0, 13), H, A, closed)
        for j in range(0, 13):
            for x, y in zip(ta[j].values, tb[j].values):
                assert rel_close(x, y, 1e-6), (j, A, x, y)


# -- 7. identities and inequalities ------------------------------------------------------------------

@criterion(7)
def test_g_is_a_signed_measure_in_A():
    rng = random.Random(42)
    for _ in range(N_CASES):
        H = float_points([log_uniform(rng, 1e-3, 10) for _ in range(5)])
        j = rng.randint(1, 20)
        pool = list(range(15))
        rng.shuffle(pool)
        cut = sorted(rng.sample(range(1, 15), 2))
        parts = [NatSet.finite(pool[:cut[0]]), NatSet.finite(pool[cut[0]:cut[1]]), NatSet.finite(pool[cut[1]:])]
        assert check_g_measure(j, H, parts) <= TOL
        A = random_natset(rng)
        assert check_g_measure(j, H, [A, ~A]) <= TOL


@criterion(7)
def test_singleton_below_diagonal_nonpositive_decreasing():
    rng = random.Random(43)
    for _ in range(N_CASES):
        H = float_points([log_uniform(rng, 1e-3, 10) for _ in range(5)])
        i = rng.randint(1, 15)
        vals = [stein_hg_singleton(j, i, H).values for j in range(1, i + 1)]
        for col in zip(*vals):
            assert all(v <= 0 for v in col)
            assert all(b <= a + TOL for a, b in zip(col, col[1:]))


@criterion(7)
def test_singleton_above_diagonal_nonnegative_decreasing():
    rng = random.Random(44)
    for _ in range(N_CASES):
        H = float_points([log_uniform(rng, 1e-3, 10) for _ in range(5)])
        i = rng.randint(0, 15)
        vals = [stein_hg_singleton(j, i, H).values for j in range(i + 1, i + 16)]
        for col in zip(*vals):
            assert all(v >= 0 for v in col)
            assert all(b <= a + TOL for a, b in zip(col, col[1:]))
        j = i + 1
        lhs = stein_hg_singleton(j, j - 1, H).values
        rhs = [1.0 - v for v in poisson_measure(NatSet.upto(j - 1), H).values]
        assert max(abs(a - b) for a, b in zip(lhs, rhs)) <= TOL


@criterion(7)
def test_delta_bound():
    rng = random.Random(45)
    for _ in range(N_CASES):
        hs = [log_uniform(rng, 1e-3, 10) for _ in range(5)] + [0.0]
        H = float_points(hs)
        A = random_natset(rng)
        j = rng.randint(1, 20)
        d = delta(j, H, A).values
        for v, h in zip(d, hs):
            assert abs(v) <= 1 - math.exp(-h) + TOL


@criterion(7)
def test_band_domination():
    rng = random.Random(46)
    for _ in range(N_CASES):
        space, T = random_partitioned_space(rng)
        f = space.element([F(rng.randint(0, 4), rng.randint(1, 4)) if rng.random() < 0.6 else 0
                           for _ in range(len(space))])
        assert check_band_domination(T, f)


@criterion(7)
def test_averaging_property():
    rng = random.Random(47)
    for _ in range(N_CASES):
        space, T = random_partitioned_space(rng)
        c = [F(rng.randint(-5, 5), rng.randint(1, 5)) for _ in T.sigma.blocks]
        f_vals = [F(0)] * len(space)
        for b, blk in enumerate(T.sigma.blocks):
            for i in blk:
                f_vals[i] = c[b]
        f = space.element(f_vals)
        g = space.element([F(rng.randint(-9, 9), rng.randint(1, 7)) for _ in range(len(space))])
        assert check_averaging(T, f, g) == 0


@criterion(7)
def test_functional_calculus_identities():
    rng = random.Random(48)
    for seed, (_, fam) in enumerate(seeded_product_models(48, count=N_CASES, max_n=5, max_blocks=3)):
        q = fam.space.element([rng.randint(0, 1) for _ in range(len(fam.space))])
        A = rng.choice(list(set_battery(fam.n, seed=seed).values()))
        assert check_functional_calculus(fam, q, rng.randint(0, 3), A) <= TOL


@criterion(7)
def test_independence_shift_relations():
    rng = random.Random(49)
    for seed, (_, fam) in enumerate(seeded_product_models(49, count=N_CASES, max_n=5, max_blocks=3)):
        A = rng.choice(list(set_battery(fam.n, seed=seed).values()))
        i, k = rng.randrange(fam.n), rng.randint(0, 3)
        assert check_independence_shift(fam, i, k, A) <= TOL


# -- 8. trivial partition ------------------------------------------------------------

@criterion(8)
def test_trivial_partition_gives_max_p():
    rng = random.Random(8)
    lambdas = [F(1), F(1, 2), F(1, 4), F(1, 8), F(1, 16)]
    for _ in range(N_CASES):
        n = rng.randint(1, 6)
        ps = [F(rng.randint(0, 10), 10) for _ in range(n)]
        pmax = max(ps)
        for lam in lambdas:
            if lam * pmax > 1:
                continue
            scaled = [lam * p for p in ps]
            _, _, fam = build_product_model([F(1)], [[p] for p in scaled])
            sup_h, refined = lsn_bounds(fam)
            assert set(sup_h.values) == {max(scaled)}
            tv = tv_distance(fam)
            assert all(t <= float(max(scaled)) + TOL for t in tv.values)
            assert all(t <= r + TOL for t, r in zip(tv.values, refined.values))


@criterion(8)
def test_trivial_partition_sweep_on_a_model():
    m = parse_model("""{"omega": [1, 2, 3, 4], "weights": ["1/4", "1/4", "1/4", "1/4"],
                        "partition": [[1, 2, 3, 4]], "events": [[1, 2], [1, 3], [4]]}""")
    assert family_conditionally_independent(m.T, m.family.qs).is_independent is False
    ind = parse_model("""{"omega": [1, 2, 3, 4], "weights": ["1/4", "1/4", "1/4", "1/4"],
                          "partition": [[1, 2, 3, 4]], "events": [[1, 2], [1, 3]]}""")
    assert block_values(ind, lsn_bounds(ind.family)[0]) == [F(1, 2)]
    assert unconditional_summary(ind)["classical_bound"] == "1/2"
    rows, warnings = sweep(ind, [1, F(1, 2), F(1, 4), F(1, 8)])
    assert warnings == [] and len(rows) == 4
    for r in rows:
        assert r.sup_h == r.lam * F(1, 2)
        assert r.tv <= float(r.sup_h) + TOL and r.tv <= r.refined + TOL
    unc = unconditional_summary(example1())
    assert unc["classical_bound"] == "1/2" and unc["E[s]"] == "3/4"


# -- 9. convergence along example3 truncations ------------------------------------

@criterion(9)
def test_truncations_converge_and_keep_the_bound():
    previous = None
    for K in range(2, 9):
        m = example3(K)
        qs = m.family.qs
        kappa = int(max(m.family.w.values))
        battery = set_battery(kappa, seed=0)
        probs = {}
        for name, A in battery.items():
            rep = truncated_lsn(m.T, lambda j: qs[j] if j < len(qs) else None, A, len(qs) + 3, tol=1e-6)
            assert rep.converged and rep.monotone_after, (K, name, rep.differences)
            assert rep.bound_holds, (K, name)
            probs[A] = rep.final.prob
        if previous is not None:
            # blocks already present at K-1 see exactly the same events
            prev_K, prev_probs = previous
            common = range(2 * prev_K)
            shared = [A for A in prev_probs if A in probs]
            assert shared
            for A in shared:
                assert [prev_probs[A].values[i] for i in common] == [probs[A].values[i] for i in common], (K, A)
        previous = (K, probs)
