"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run directly with ``python tests/test_acceptance.py`` for the summary alone.
"""

import random
import sys
import time
from collections import Counter
from fractions import Fraction as F
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))

from markov_groupoids import measures as M
from markov_groupoids import operators as O
from markov_groupoids.amenability import (
    OperatorProvider,
    build_schedule,
    construct_liouville,
    stage_bound,
    verify_certificate,
)
from markov_groupoids.boundary import decay_values, fibrewise_report, liouville_echo
from markov_groupoids.fixtures import mixed_two_fibres, z2_deterministic, z4_provider
from markov_groupoids.group_walks import (
    FreeGroup2,
    IntegerGroup,
    ball,
    convolution_power_sweep,
    folner_measure_direct,
    folner_measure_test,
    lazy_walk_z,
    simple_random_walk,
)
from markov_groupoids.groupoid import (
    ActionSpec,
    build_group_groupoid,
    cyclic_group_table,
    direct_product_table,
    symmetric_group_table,
    verify_axioms,
)
from markov_groupoids.rwre import (
    action_operator,
    environment_of,
    fibre_operator_equivalence,
    sample_endpoints,
)

from generators import random_action, random_groupoid, random_probability, random_system, random_theta


def announce(capsys, number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)


# ---------------------------------------------------------------------------
# 1. axiom suite


def criterion_1():
    rng = random.Random(1001)
    start = time.perf_counter()
    failures = []
    max_objects = max_fibre = 0
    for i in range(100):
        G = random_groupoid(rng, max_objects=6, max_fibre=8)
        max_objects = max(max_objects, G.n_objects)
        max_fibre = max(max_fibre, max(len(G.fibre(x)) for x in G.objects))
        if not verify_axioms(G).ok:
            failures.append((i, "axioms"))
        if M.left_invariance_violations(M.counting_haar(G)):
            failures.append((i, "haar"))
        if O.equivariance_violations(O.EquivariantOperator(random_system(rng, G))):
            failures.append((i, "equivariance"))
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 10 and max_objects <= 6 and max_fibre <= 8
    return ok, f"100 groupoids, {len(failures)} failures, {elapsed:.2f}s"


def test_criterion_1_axiom_suite(capsys):
    ok, detail = criterion_1()
    announce(capsys, 1, ok, detail)
    assert ok, detail


# ---------------------------------------------------------------------------
# 2. inequality suite


def criterion_2(trials: int = 1000, max_power: int = 4):
    rng = random.Random(2002)
    bad = Counter()
    for _ in range(trials):
        G = random_groupoid(rng, max_objects=4, max_fibre=6)
        P = O.EquivariantOperator(random_system(rng, G))
        Q = O.EquivariantOperator(random_system(rng, G))
        m = random_probability(rng, G.morphisms)
        if O.mean_discrepancy(m, P @ Q) > O.mean_discrepancy(m, P):
            bad["(i)"] += 1
        mQ = O.apply_measure(m, Q)
        mbarQ = O.apply_measure(O.target_pushforward(G, m), Q)
        if O.mean_discrepancy(m, Q @ P) > O.mean_discrepancy(mQ, P) + O.mean_discrepancy(mbarQ, P):
            bad["(ii)"] += 1
        deltas = [O.mean_discrepancy(m, Pk) for Pk in O.powers(P, max_power)]
        if any(b > a for a, b in zip(deltas, deltas[1:])):
            bad["monotone"] += 1
    return not bad, f"{trials} triples, violations {dict(bad) or 0}"


def test_criterion_2_inequality_suite(capsys):
    ok, detail = criterion_2()
    announce(capsys, 2, ok, detail)
    assert ok, detail


# ---------------------------------------------------------------------------
# 3. products with a fixed operator along a decaying provider


def criterion_3(horizon: int = 40):
    rng = random.Random(3003)
    G = random_groupoid(rng, max_objects=4, max_fibre=6)
    U = M.uniform_system(G)
    noise = random_system(rng, G)

    def factory(n):
        w = F(1, 2 ** n)
        return O.EquivariantOperator(M.mix_systems([(1 - w, U), (w, noise)]))

    provider = OperatorProvider(factory, horizon)
    Q = O.EquivariantOperator(random_system(rng, G))
    m_hat = M.reference_measure(G)
    mQ = O.apply_measure(m_hat, Q)
    mbarQ = O.apply_measure(O.target_pushforward(G, m_hat), Q)
    violations, first_small = 0, None
    for n in range(1, horizon + 1):
        Pn = provider.at(n)
        lhs = O.mean_discrepancy(m_hat, Q @ Pn)
        rhs = O.mean_discrepancy(mQ, Pn) + O.mean_discrepancy(mbarQ, Pn)
        violations += lhs > rhs
        if first_small is None and rhs < 1e-6:
            first_small = n
    ok = violations == 0 and first_small is not None
    return ok, f"violations {violations}, right side < 1e-6 from n = {first_small} (horizon {horizon})"


def test_criterion_3_fixed_factor_echo(capsys):
    ok, detail = criterion_3()
    announce(capsys, 3, ok, detail)
    assert ok, detail


# ---------------------------------------------------------------------------
# 4. construction on the Z/4 fixture


def criterion_4():
    start = time.perf_counter()
    provider = z4_provider()
    G = provider.at(1).groupoid
    m_hat = M.reference_measure(G)
    schedule = build_schedule(3)
    P, cert = construct_liouville(provider, m_hat, schedule)
    check = verify_certificate(P, m_hat, schedule, cert)
    elapsed = time.perf_counter() - start
    eps_ok = schedule.epsilon[1:] == (F(1, 4), F(1, 8))
    bounds_ok = all(b.measured <= stage_bound(schedule, b.stage) for b in cert.checked_bounds)
    ok = check.ok and eps_ok and bounds_ok and elapsed < 60 and len(cert.checked_bounds) == 2
    rows = ", ".join(f"stage {b.stage}: {b.measured} <= {b.bound}" for b in cert.checked_bounds)
    return ok, f"indices {cert.indices}; {rows}; verified={check.ok}; {elapsed:.2f}s"


def test_criterion_4_z4_construction(capsys):
    ok, detail = criterion_4()
    announce(capsys, 4, ok, detail)
    assert ok, detail


# ---------------------------------------------------------------------------
# 5. 0-2 law fixtures


def criterion_5():
    P = z2_deterministic()
    rows = O.fibre_matrix(P, 0).matrix
    tail = decay_values(rows, 50, "tail")
    lazy = decay_values(rows, 1, "lazy")
    rng = random.Random(5005)
    uniform_ok = True
    for _ in range(20):
        G = random_groupoid(rng)
        rep = fibrewise_report(O.uniform_operator(G), N=1, mode="tail")
        uniform_ok &= all(p.values[0] == 0 for p in rep.per_object.values())
    ok = tail == [2] * 50 and lazy == [0] and uniform_ok
    return ok, f"tail d_n = 2 for n <= 50: {tail == [2] * 50}; lazy d_1 = {lazy[0]}; uniform d_1 = 0: {uniform_ok}"


def test_criterion_5_zero_two_fixtures(capsys):
    ok, detail = criterion_5()
    announce(capsys, 5, ok, detail)
    assert ok, detail


# ---------------------------------------------------------------------------
# 6. group sweeps


def criterion_6():
    start = time.perf_counter()
    z = convolution_power_sweep(lazy_walk_z(), 64, 1, IntegerGroup())
    F2 = FreeGroup2()
    f2 = convolution_power_sweep(simple_random_walk(F2), 8, "a", F2)
    elapsed = time.perf_counter() - start
    ok = (
        z[0] == 1 and z[1] == F(3, 4)
        and all(b <= a for a, b in zip(z, z[1:]))
        and z[63] <= F(1, 4)
        and all(v >= 1 for v in f2)
        and elapsed < 30
    )
    return ok, f"Z: {z[0]}, {z[1]}, ..., n=64: {float(z[63]):.4f}; F2 min over n<=8: {min(f2)}; {elapsed:.2f}s"


def test_criterion_6_group_sweeps(capsys):
    ok, detail = criterion_6()
    announce(capsys, 6, ok, detail)
    assert ok, detail


# ---------------------------------------------------------------------------
# 7. Folner measure test


def criterion_7():
    Z, F2 = IntegerGroup(), FreeGroup2()
    a, b = folner_measure_test({1: 1}, range(10), Z), folner_measure_direct({1: 1}, range(10), Z)
    B2 = ball(F2, 2)
    c, d = folner_measure_test({"a": 1}, B2, F2), folner_measure_direct({"a": 1}, B2, F2)
    exact = all(isinstance(v, F) for v in (a, b, c, d))
    ok = exact and a == b == F(1, 5) and c == d == F(18, 17)
    return ok, f"Z: {a} / {b}; F2 ball(2): {c} / {d}"


def test_criterion_7_folner(capsys):
    ok, detail = criterion_7()
    announce(capsys, 7, ok, detail)
    assert ok, detail


# ---------------------------------------------------------------------------
# 8. action groupoid vs environment, and Monte Carlo against matrix powers


def _exact_endpoint_law(action, theta, x, steps):
    """Row of the unit in the n-th power of the fibre matrix, keyed by group element."""
    P = action_operator(action, theta)
    G = P.groupoid
    fm = O.fibre_matrix(P, x)
    A = np.array(fm.matrix, dtype=object)
    row = np.zeros(len(fm), dtype=object)
    row[0] = F(1)  # the unit is first in its fibre
    for _ in range(steps):
        row = row.dot(A)
    return {G.label(g)[0]: p for g, p in zip(fm.morphisms, row) if p}


def criterion_8(samples: int = 100_000, steps: int = 6):
    rng = random.Random(8008)
    mismatches = 0
    for _ in range(100):
        action = random_action(rng)
        theta = random_theta(rng, action)
        P = action_operator(action, theta)
        for x in P.groupoid.objects:
            if fibre_operator_equivalence(P.groupoid, theta, x) != O.fibre_matrix(P, x):
                mismatches += 1
    groups = [
        cyclic_group_table(5),
        symmetric_group_table(3),
        direct_product_table(symmetric_group_table(3), cyclic_group_table(2)),
        direct_product_table(cyclic_group_table(4), cyclic_group_table(4)),
    ]
    worst = 0.0
    for i, table in enumerate(groups):
        n = len(table)
        assert n <= 16
        # left-regular action, so the fibre over 0 is the whole group
        action = ActionSpec(table, [[table[g][h] for h in range(n)] for g in range(n)])
        theta = random_theta(rng, action)
        env = environment_of(theta, 0, action)
        counts = sample_endpoints(env, env.oracle.identity, steps, samples, seed=100 + i)
        exact = _exact_endpoint_law(action, theta, 0, steps)
        tv = sum(abs(counts.get(k, 0) / samples - float(exact.get(k, 0))) for k in set(counts) | set(exact))
        worst = max(worst, tv)
    ok = mismatches == 0 and worst <= 0.05
    return ok, f"fibre-matrix mismatches {mismatches} over 100 actions; worst histogram TV {worst:.4f} ({samples} samples)"


def test_criterion_8_environment_equivalence(capsys):
    ok, detail = criterion_8()
    announce(capsys, 8, ok, detail)
    assert ok, detail


# ---------------------------------------------------------------------------
# 9. decay of Delta(m, P Q_n) on fibrewise-trivial fixtures


def _echo_fixtures():
    provider = z4_provider()
    G4 = provider.at(1).groupoid
    P4, _ = construct_liouville(provider, M.reference_measure(G4), build_schedule(3))
    yield "z4-constructed", P4
    yield "z2-deterministic", z2_deterministic()
    yield "mixed-two-fibres", mixed_two_fibres()
    G5 = build_group_groupoid(cyclic_group_table(5))
    yield "z5-step", O.EquivariantOperator(M.FibredSystem(G5, [{1: F(1, 2), 2: F(1, 2)}]))
    rng = random.Random(9009)
    for i in range(8):
        G = random_groupoid(rng)
        yield f"random-{i}", O.EquivariantOperator(random_system(rng, G, full_support=i % 2 == 0))


def criterion_9(horizon: int = 200):
    checked, failures = [], []
    for name, P in _echo_fixtures():
        Pf = O.EquivariantOperator(P.system.as_float(), check=False)
        if fibrewise_report(Pf, N=horizon, mode="lazy").aggregate != 1.0:
            continue
        m_hat = M.to_float(M.reference_measure(Pf.groupoid))
        values = liouville_echo(Pf, m_hat, horizon, "lazy")
        hit = next((n for n, v in enumerate(values, 1) if v < 1e-6), None)
        checked.append((name, hit))
        if hit is None:
            failures.append(name)
    ok = len(checked) >= 4 and not failures
    summary = ", ".join(f"{n}@{h}" for n, h in checked)
    return ok, f"{len(checked)} fixtures with aggregate 1.0, first n below 1e-6: {summary}"


def test_criterion_9_liouville_echo(capsys):
    ok, detail = criterion_9()
    announce(capsys, 9, ok, detail)
    assert ok, detail


if __name__ == "__main__":
    results = []
    for k, fn in enumerate((criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
                            criterion_6, criterion_7, criterion_8, criterion_9), start=1):
        ok, detail = fn()
        announce(None, k, ok, detail)
        results.append(ok)
    sys.exit(0 if all(results) else 1)
