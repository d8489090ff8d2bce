"""Random finite groupoids, actions and measures for property tests.

Every finite groupoid is a disjoint union of transitive ones, and a transitive
groupoid on k objects with isotropy H is isomorphic to (pair groupoid on k
points) x H; finite actions are disjoint unions of coset actions G/H.  The
generators below cover both families, with shuffled morphism ids.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from markov_groupoids import measures as M
from markov_groupoids.groupoid import (
    ActionSpec,
    FiniteGroupoid,
    build_table_groupoid,
    cyclic_group_table,
    direct_product_table,
    disjoint_union,
    group_inverses,
    symmetric_group_table,
    validate_group_table,
)

GROUP_TABLES = {
    "Z1": cyclic_group_table(1),
    "Z2": cyclic_group_table(2),
    "Z3": cyclic_group_table(3),
    "Z4": cyclic_group_table(4),
    "Z2xZ2": direct_product_table(cyclic_group_table(2), cyclic_group_table(2)),
    "S3": symmetric_group_table(3),
    "Z5": cyclic_group_table(5),
    "Z6": cyclic_group_table(6),
}


def transitive_groupoid(k: int, table, rng: random.Random | None = None) -> FiniteGroupoid:
    """(pair groupoid on k points) x H as an explicit table, ids optionally shuffled."""
    e = validate_group_table(table)
    inv = group_inverses(table, e)
    h = len(table)
    labels = [(y, a, x) for y in range(k) for a in range(h) for x in range(k)]
    perm = list(range(len(labels)))
    if rng is not None:
        rng.shuffle(perm)
    ids = {lab: perm[i] for i, lab in enumerate(labels)}
    n = len(labels)
    source, target, inverse = [0] * n, [0] * n, [0] * n
    comp = [[None] * n for _ in range(n)]
    for (y, a, x), i in ids.items():
        source[i], target[i] = x, y
        inverse[i] = ids[(x, inv[a], y)]
    for (z, a, y), i in ids.items():
        for b in range(h):
            for x in range(k):
                comp[i][ids[(y, b, x)]] = ids[(z, table[a][b], x)]
    unit = [ids[(x, e, x)] for x in range(k)]
    return build_table_groupoid(source, target, comp, unit, inverse)


def random_groupoid(rng: random.Random, max_objects: int = 6, max_fibre: int = 8) -> FiniteGroupoid:
    parts = []
    budget = rng.randint(1, max_objects)
    while budget > 0:
        k = rng.randint(1, budget)
        options = [t for t in GROUP_TABLES.values() if k * len(t) <= max_fibre]
        parts.append(transitive_groupoid(k, rng.choice(options), rng))
        budget -= k
    return parts[0] if len(parts) == 1 else disjoint_union(*parts)


def subgroups(table) -> list[frozenset]:
    n = len(table)
    e = validate_group_table(table)
    out = []
    for r in range(1, n + 1):
        for sub in itertools.combinations(range(n), r):
            s = set(sub)
            if e in s and all(table[a][b] in s for a in s for b in s):
                out.append(frozenset(s))
    return out


def random_action(rng: random.Random, max_points: int = 8, group: str | None = None) -> ActionSpec:
    """Disjoint union of coset actions ``G/H`` with random subgroups ``H``."""
    name = group or rng.choice(["Z1", "Z2", "Z3", "Z4", "Z2xZ2", "S3"])
    table = GROUP_TABLES[name]
    n = len(table)
    subs = subgroups(table)
    points: list[frozenset] = []
    blocks = []
    while True:
        H = rng.choice(subs)
        cosets = sorted({frozenset(table[g][h] for h in H) for g in range(n)}, key=sorted)
        if blocks and len(points) + len(cosets) > max_points:
            break
        blocks.append(cosets)
        points.extend((len(blocks) - 1, c) for c in cosets)
        if rng.random() < 0.4 or len(points) >= max_points:
            break
    index = {p: i for i, p in enumerate(points)}
    action = []
    for g in range(n):
        row = []
        for b, c in points:
            image = frozenset(table[g][a] for a in c)
            row.append(index[(b, image)])
        action.append(row)
    return ActionSpec(table, action)


def random_probability(rng: random.Random, keys, exact: bool = True, full_support: bool = False) -> dict:
    keys = list(keys)
    lo = 1 if full_support else 0
    while True:
        w = [rng.randint(lo, 5) for _ in keys]
        if sum(w):
            break
    total = sum(w)
    if exact:
        return M.prune({k: Fraction(v, total) for k, v in zip(keys, w)})
    return M.prune({k: v / total for k, v in zip(keys, w)})


def random_system(rng: random.Random, G: FiniteGroupoid, exact: bool = True,
                  full_support: bool = False) -> M.FibredSystem:
    return M.FibredSystem(
        G, [random_probability(rng, G.fibre(x), exact, full_support) for x in G.objects]
    )


def random_theta(rng: random.Random, action: ActionSpec, exact: bool = True) -> list[dict]:
    return [random_probability(rng, range(action.order), exact) for _ in range(action.n_points)]
