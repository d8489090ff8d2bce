"""Finite groupoids with dense integer ids.

Objects are ``0..n_objects-1`` and morphisms ``0..n_morphisms-1``.  A morphism
``g`` goes from ``source[g]`` to ``target[g]``; the product ``compose(g, h)``
is defined when ``source[g] == target[h]`` (``h`` is applied first), and then
has the source of ``h`` and the target of ``g``.

Three constructors cover the standard examples: groups (one object), pair
groupoids of equivalence relations, and action groupoids of finite group
actions.  Arbitrary finite groupoids can be given by explicit tables.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Hashable, Optional, Sequence

from .errors import (
    InvalidActionError,
    InvalidGroupTableError,
    InvalidPartitionError,
    NonComposableError,
    GroupoidError,
)

RawProduct = Callable[[int, int], Optional[int]]


class FiniteGroupoid:
    """Immutable finite groupoid.

    ``product`` is the raw composition rule: it returns the id of ``g h`` or
    ``None`` where the rule has no entry.  :meth:`compose` adds the
    composability check.
    """

    def __init__(
        self,
        n_objects: int,
        source: Sequence[int],
        target: Sequence[int],
        unit: Sequence[int],
        inverse: Sequence[int],
        product: RawProduct,
        labels: Sequence[Hashable] | None = None,
        kind: str = "table",
        spec: object = None,
    ):
        self.n_objects = int(n_objects)
        self.source = tuple(source)
        self.target = tuple(target)
        self.unit = tuple(unit)
        self.inverse = tuple(inverse)
        self.n_morphisms = len(self.source)
        self._product = product
        self.kind = kind
        self.spec = spec
        self.labels = tuple(labels) if labels is not None else tuple(range(self.n_morphisms))
        self._label_index = {lab: i for i, lab in enumerate(self.labels)}

        buckets: list[list[int]] = [[] for _ in range(self.n_objects)]
        for g, y in enumerate(self.target):
            if 0 <= y < self.n_objects:
                buckets[y].append(g)
        fibres = []
        for x, bucket in enumerate(buckets):
            e = self.unit[x] if x < len(self.unit) else None
            rest = [g for g in bucket if g != e]
            fibres.append(tuple(([e] if e in bucket else []) + rest))
        self.fibres: tuple[tuple[int, ...], ...] = tuple(fibres)
        self._fibre_pos = {}
        for fibre in self.fibres:
            for i, g in enumerate(fibre):
                self._fibre_pos[g] = i

    def __repr__(self) -> str:
        return (
            f"FiniteGroupoid(kind={self.kind!r}, objects={self.n_objects}, "
            f"morphisms={self.n_morphisms})"
        )

    @property
    def morphisms(self) -> range:
        return range(self.n_morphisms)

    @property
    def objects(self) -> range:
        return range(self.n_objects)

    def is_composable(self, g: int, h: int) -> bool:
        return self.source[g] == self.target[h]

    def raw_product(self, g: int, h: int) -> Optional[int]:
        return self._product(g, h)

    def compose(self, g: int, h: int) -> int:
        if self.source[g] != self.target[h]:
            raise NonComposableError(g, h, self.source[g], self.target[h])
        r = self._product(g, h)
        if r is None:
            raise GroupoidError(f"composition table has no entry for composable pair ({g}, {h})")
        return r

    def fibre(self, x: int) -> tuple[int, ...]:
        """Morphisms with target ``x``, unit first."""
        return self.fibres[x]

    def fibre_position(self, g: int) -> int:
        return self._fibre_pos[g]

    def is_unit(self, g: int) -> bool:
        return self.unit[self.target[g]] == g

    def label(self, g: int) -> Hashable:
        return self.labels[g]

    def morphism(self, label: Hashable) -> int:
        try:
            return self._label_index[label]
        except KeyError:
            raise GroupoidError(f"no morphism labelled {label!r}") from None

    def to_table(self) -> dict:
        """Explicit description in the ``table`` file format."""
        n = self.n_morphisms
        comp = [[-1] * n for _ in range(n)]
        for g in range(n):
            for h in self.fibres[self.source[g]]:
                r = self._product(g, h)
                comp[g][h] = -1 if r is None else r
        return {
            "kind": "table",
            "source": list(self.source),
            "target": list(self.target),
            "compose": comp,
            "unit": list(self.unit),
            "inverse": list(self.inverse),
        }


# ---------------------------------------------------------------------------
# groups


def validate_group_table(table: Sequence[Sequence[int]]) -> int:
    """Check that ``table`` is a group multiplication table; return the identity."""
    n = len(table)
    if n == 0:
        raise InvalidGroupTableError("empty group table")
    for a, row in enumerate(table):
        if len(row) != n:
            raise InvalidGroupTableError(f"row {a} has length {len(row)}, expected {n}")
        for b, c in enumerate(row):
            if not (isinstance(c, int) and 0 <= c < n):
                raise InvalidGroupTableError(f"entry ({a}, {b}) = {c!r} is not an element")
    identity = None
    for e in range(n):
        if all(table[e][a] == a and table[a][e] == a for a in range(n)):
            identity = e
            break
    if identity is None:
        raise InvalidGroupTableError("table has no two-sided identity")
    for a in range(n):
        if not any(table[a][b] == identity and table[b][a] == identity for b in range(n)):
            raise InvalidGroupTableError(f"element {a} has no inverse")
    for a, b, c in itertools.product(range(n), repeat=3):
        if table[table[a][b]][c] != table[a][table[b][c]]:
            raise InvalidGroupTableError(f"not associative at ({a}, {b}, {c})")
    return identity


def group_inverses(table: Sequence[Sequence[int]], identity: int) -> list[int]:
    n = len(table)
    return [next(b for b in range(n) if table[a][b] == identity) for a in range(n)]


def cyclic_group_table(n: int) -> list[list[int]]:
    return [[(a + b) % n for b in range(n)] for a in range(n)]


def symmetric_group_table(n: int) -> list[list[int]]:
    """Multiplication table of S_n; ``(p q)(i) = p(q(i))``, identity is element 0."""
    perms = list(itertools.permutations(range(n)))
    index = {p: i for i, p in enumerate(perms)}
    return [[index[tuple(p[q[i]] for i in range(n))] for q in perms] for p in perms]


def direct_product_table(left: Sequence[Sequence[int]], right: Sequence[Sequence[int]]) -> list[list[int]]:
    m = len(right)
    size = len(left) * m
    return [
        [left[a // m][b // m] * m + right[a % m][b % m] for b in range(size)]
        for a in range(size)
    ]


def build_group_groupoid(table: Sequence[Sequence[int]]) -> FiniteGroupoid:
    table = [list(row) for row in table]
    identity = validate_group_table(table)
    inverse = group_inverses(table, identity)
    n = len(table)
    return FiniteGroupoid(
        1,
        source=[0] * n,
        target=[0] * n,
        unit=[identity],
        inverse=inverse,
        product=lambda g, h: table[g][h],
        kind="group",
        spec=table,
    )


# ---------------------------------------------------------------------------
# pair groupoids


@dataclass(frozen=True)
class PartitionSpec:
    blocks: tuple[tuple[int, ...], ...]

    def __init__(self, blocks):
        object.__setattr__(self, "blocks", tuple(tuple(int(x) for x in b) for b in blocks))

    @property
    def n_objects(self) -> int:
        return sum(len(b) for b in self.blocks)

    def validate(self) -> None:
        seen: set[int] = set()
        for i, block in enumerate(self.blocks):
            if not block:
                raise InvalidPartitionError(f"block {i} is empty")
            for x in block:
                if x in seen:
                    raise InvalidPartitionError(f"object {x} appears in more than one block")
                seen.add(x)
        n = len(seen)
        if seen != set(range(n)):
            missing = sorted(set(range(max(seen) + 1)) - seen) if seen else []
            raise InvalidPartitionError(f"blocks do not cover 0..{n - 1}; missing {missing}")


def build_pair_groupoid(spec: PartitionSpec | Sequence[Sequence[int]]) -> FiniteGroupoid:
    if not isinstance(spec, PartitionSpec):
        spec = PartitionSpec(spec)
    spec.validate()
    n = spec.n_objects
    block_of = {}
    for block in spec.blocks:
        for x in block:
            block_of[x] = sorted(block)
    labels = [(y, x) for y in range(n) for x in block_of[y]]
    index = {lab: i for i, lab in enumerate(labels)}

    def product(g: int, h: int) -> Optional[int]:
        z, y = labels[g]
        y2, x = labels[h]
        if y != y2:
            return None
        return index[(z, x)]

    return FiniteGroupoid(
        n,
        source=[x for _, x in labels],
        target=[y for y, _ in labels],
        unit=[index[(x, x)] for x in range(n)],
        inverse=[index[(x, y)] for y, x in labels],
        product=product,
        labels=labels,
        kind="pair",
        spec=spec,
    )


# ---------------------------------------------------------------------------
# action groupoids


@dataclass(frozen=True)
class ActionSpec:
    """Left action of a finite group: ``action[g][x]`` is ``g . x``."""

    group: tuple[tuple[int, ...], ...]
    action: tuple[tuple[int, ...], ...]
    identity: int = field(init=False)
    inverses: tuple[int, ...] = field(init=False)

    def __init__(self, group, action):
        object.__setattr__(self, "group", tuple(tuple(r) for r in group))
        object.__setattr__(self, "action", tuple(tuple(r) for r in action))
        e = validate_group_table(self.group)
        object.__setattr__(self, "identity", e)
        object.__setattr__(self, "inverses", tuple(group_inverses(self.group, e)))

    @property
    def order(self) -> int:
        return len(self.group)

    @property
    def n_points(self) -> int:
        return len(self.action[0]) if self.action else 0

    def act(self, g: int, x: int) -> int:
        return self.action[g][x]

    def validate(self) -> None:
        G = self.group
        n = len(G)
        if len(self.action) != n:
            raise InvalidActionError(f"action has {len(self.action)} rows, group has {n} elements")
        npts = self.n_points
        for g, row in enumerate(self.action):
            if len(row) != npts or any(not (0 <= y < npts) for y in row):
                raise InvalidActionError(f"row {g} of the action map is malformed")
        for x in range(npts):
            if self.action[self.identity][x] != x:
                raise InvalidActionError(
                    f"identity {self.identity} moves point {x} to {self.action[self.identity][x]}"
                )
        for g, h in itertools.product(range(n), repeat=2):
            for x in range(npts):
                if self.action[G[g][h]][x] != self.action[g][self.action[h][x]]:
                    raise InvalidActionError(
                        f"not a left action: ({g}*{h}).{x} != {g}.({h}.{x})"
                    )


def build_action_groupoid(spec: ActionSpec) -> FiniteGroupoid:
    """Action groupoid G x X with morphism ``(g, x)`` from ``g^-1 x`` to ``x``.

    Morphism ids are ``x * |G| + g`` so each target fibre is a contiguous
    block; composition is evaluated from the group table on demand.
    """
    spec.validate()
    G = spec.group
    order = spec.order
    npts = spec.n_points
    inv = spec.inverses
    act = spec.action

    def product(a: int, b: int) -> Optional[int]:
        x, g = divmod(a, order)
        x2, h = divmod(b, order)
        if x2 != act[inv[g]][x]:
            return None
        return x * order + G[g][h]

    ids = range(order * npts)
    return FiniteGroupoid(
        npts,
        source=[act[inv[i % order]][i // order] for i in ids],
        target=[i // order for i in ids],
        unit=[x * order + spec.identity for x in range(npts)],
        inverse=[act[inv[i % order]][i // order] * order + inv[i % order] for i in ids],
        product=product,
        labels=[(i % order, i // order) for i in ids],
        kind="action",
        spec=spec,
    )


# ---------------------------------------------------------------------------
# explicit tables


def build_table_groupoid(
    source: Sequence[int],
    target: Sequence[int],
    compose: Sequence[Sequence[Optional[int]]],
    unit: Sequence[int],
    inverse: Sequence[int],
) -> FiniteGroupoid:
    """Groupoid from explicit tables; entries of ``compose`` may be ``None`` or -1.

    Only shapes are checked here; use :func:`verify_axioms` for the axioms.
    """
    n = len(source)
    if len(target) != n or len(inverse) != n:
        raise GroupoidError("source, target and inverse must have one entry per morphism")
    if len(compose) != n or any(len(row) != n for row in compose):
        raise GroupoidError(f"compose table must be {n} x {n}")
    n_objects = len(unit)
    for name, arr, bound in (("source", source, n_objects), ("target", target, n_objects),
                             ("unit", unit, n), ("inverse", inverse, n)):
        for i, v in enumerate(arr):
            if not (isinstance(v, int) and 0 <= v < bound):
                raise GroupoidError(f"{name}[{i}] = {v!r} out of range")
    table = [[None if (c is None or c < 0) else int(c) for c in row] for row in compose]
    for g, row in enumerate(table):
        for h, c in enumerate(row):
            if c is not None and c >= n:
                raise GroupoidError(f"compose[{g}][{h}] = {c} out of range")
    return FiniteGroupoid(
        n_objects, source, target, unit, inverse,
        product=lambda g, h: table[g][h],
        kind="table",
        spec=table,
    )


def disjoint_union(*parts: FiniteGroupoid) -> FiniteGroupoid:
    """Disjoint union, materialized as a table groupoid."""
    source, target, unit, inverse = [], [], [], []
    offsets = []
    mo = oo = 0
    for G in parts:
        offsets.append((mo, oo))
        source += [s + oo for s in G.source]
        target += [t + oo for t in G.target]
        unit += [u + mo for u in G.unit]
        inverse += [i + mo for i in G.inverse]
        mo += G.n_morphisms
        oo += G.n_objects
    n = mo
    comp: list[list[Optional[int]]] = [[None] * n for _ in range(n)]
    for G, (m0, _) in zip(parts, offsets):
        for g in G.morphisms:
            for h in G.fibre(G.source[g]):
                r = G.raw_product(g, h)
                comp[g + m0][h + m0] = None if r is None else r + m0
    return build_table_groupoid(source, target, comp, unit, inverse)


# ---------------------------------------------------------------------------
# axiom checking


@dataclass(frozen=True)
class Violation:
    axiom: str
    where: tuple
    detail: str = ""

    def __str__(self) -> str:
        return f"{self.axiom} at {self.where}" + (f": {self.detail}" if self.detail else "")


@dataclass
class AxiomReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __len__(self) -> int:
        return len(self.violations)

    def __iter__(self):
        return iter(self.violations)

    def add(self, axiom: str, where: tuple, detail: str = "") -> None:
        self.violations.append(Violation(axiom, where, detail))

    def names(self) -> set[str]:
        return {v.axiom for v in self.violations}


def verify_axioms(G: FiniteGroupoid) -> AxiomReport:
    """Exhaustively check the groupoid axioms; violations are returned, not raised."""
    rep = AxiomReport()
    n, nobj = G.n_morphisms, G.n_objects
    src, tgt, inv, unit = G.source, G.target, G.inverse, G.unit

    if len(unit) != nobj:
        rep.add("unit-count", (len(unit),), f"expected {nobj}")
        return rep

    for x in range(nobj):
        e = unit[x]
        if src[e] != x or tgt[e] != x:
            rep.add("unit-endpoints", (x, e))
        if e not in G.fibres[x] or G.fibres[x][0] != e:
            rep.add("unit-in-fibre", (x, e))
    covered = sorted(g for f in G.fibres for g in f)
    if covered != list(range(n)):
        rep.add("fibre-partition", (), "fibres do not partition the morphisms")

    products: dict[tuple[int, int], Optional[int]] = {}
    for g in range(n):
        for h in range(n):
            r = G.raw_product(g, h)
            composable = src[g] == tgt[h]
            if composable and r is None:
                rep.add("composition-defined", (g, h), "composable pair has no product")
            elif not composable and r is not None:
                rep.add("composition-defined", (g, h), "non-composable pair has a product")
            if composable and r is not None:
                products[(g, h)] = r
                if tgt[r] != tgt[g]:
                    rep.add("composition-target", (g, h), f"t({r})={tgt[r]} != t({g})={tgt[g]}")
                if src[r] != src[h]:
                    rep.add("composition-source", (g, h), f"s({r})={src[r]} != s({h})={src[h]}")

    for g in range(n):
        if products.get((g, unit[src[g]])) != g:
            rep.add("right-unit", (g,))
        if products.get((unit[tgt[g]], g)) != g:
            rep.add("left-unit", (g,))
        gi = inv[g]
        if src[gi] != tgt[g] or tgt[gi] != src[g]:
            rep.add("inverse-endpoints", (g, gi))
        if products.get((g, gi)) != unit[tgt[g]]:
            rep.add("right-inverse", (g, gi))
        if products.get((gi, g)) != unit[src[g]]:
            rep.add("left-inverse", (g, gi))

    for (g, h), gh in products.items():
        for k in G.fibres[src[h]]:
            hk = products.get((h, k))
            if hk is None:
                continue
            left = products.get((gh, k))
            right = products.get((g, hk))
            if left != right:
                rep.add("associativity", (g, h, k), f"{left} != {right}")

    for g in range(n):
        image = [products.get((g, h)) for h in G.fibres[src[g]]]
        if sorted(x for x in image if x is not None) != sorted(G.fibres[tgt[g]]) or None in image:
            rep.add("left-translation-bijection", (g,))
    return rep
