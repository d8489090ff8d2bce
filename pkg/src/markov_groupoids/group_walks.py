"""Random walks on countable groups with finitely supported measures.

The one-object case of the groupoid machinery: a probability measure
``theta`` on a group ``G`` determines the walk ``g -> g h`` with ``h ~ theta``,
and the mean discrepancy against a reference measure ``m`` is
``sum_g m(g) ||g theta - theta||``.

Groups are given by small oracle objects: the integers, cyclic groups, the
free group on ``a, b`` (reduced words, ``A = a^-1`` and ``B = b^-1``) and
arbitrary finite multiplication tables.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Hashable, Iterable, Mapping, Sequence

from . import measures as M
from .errors import GroupoidError, SupportCapError
from .groupoid import FiniteGroupoid, build_group_groupoid, group_inverses, validate_group_table


class IntegerGroup:
    name = "z"
    identity = 0
    generators = (1, -1)

    def multiply(self, g: int, h: int) -> int:
        return g + h

    def invert(self, g: int) -> int:
        return -g

    def canonicalize(self, g) -> int:
        return int(g)

    def __repr__(self) -> str:
        return "IntegerGroup()"


class CyclicGroup:
    identity = 0

    def __init__(self, n: int):
        if n < 1:
            raise GroupoidError("cyclic group order must be positive")
        self.n = n
        self.name = f"zn:{n}"
        self.generators = (1 % n, (-1) % n)

    def multiply(self, g: int, h: int) -> int:
        return (g + h) % self.n

    def invert(self, g: int) -> int:
        return (-g) % self.n

    def canonicalize(self, g) -> int:
        return int(g) % self.n

    def table(self) -> list[list[int]]:
        return [[(a + b) % self.n for b in range(self.n)] for a in range(self.n)]

    def __repr__(self) -> str:
        return f"CyclicGroup({self.n})"


_F2_INV = {"a": "A", "A": "a", "b": "B", "B": "b"}


class FreeGroup2:
    """Free group on ``a, b``; elements are freely reduced strings over ``aAbB``."""

    name = "f2"
    identity = ""
    generators = ("a", "A", "b", "B")

    def multiply(self, g: str, h: str) -> str:
        i = 0
        n = min(len(g), len(h))
        while i < n and _F2_INV[g[len(g) - 1 - i]] == h[i]:
            i += 1
        return g[: len(g) - i] + h[i:]

    def invert(self, g: str) -> str:
        return "".join(_F2_INV[c] for c in reversed(g))

    def canonicalize(self, g) -> str:
        word = "" if g in (None, "e") else str(g)
        out: list[str] = []
        for c in word:
            if c not in _F2_INV:
                raise GroupoidError(f"invalid letter {c!r} in free group word {word!r}")
            if out and out[-1] == _F2_INV[c]:
                out.pop()
            else:
                out.append(c)
        return "".join(out)

    def __repr__(self) -> str:
        return "FreeGroup2()"


class TableGroup:
    """Finite group given by a multiplication table on ``0..n-1``."""

    def __init__(self, table: Sequence[Sequence[int]]):
        self.table = [list(r) for r in table]
        self.identity = validate_group_table(self.table)
        self._inv = group_inverses(self.table, self.identity)
        self.name = "table"
        self.generators = tuple(range(len(self.table)))

    @property
    def order(self) -> int:
        return len(self.table)

    def multiply(self, g: int, h: int) -> int:
        return self.table[g][h]

    def invert(self, g: int) -> int:
        return self._inv[g]

    def canonicalize(self, g) -> int:
        g = int(g)
        if not 0 <= g < len(self.table):
            raise GroupoidError(f"{g} is not an element of the group")
        return g

    def elements(self) -> range:
        return range(len(self.table))


def group_from_spec(spec: str):
    """``z``, ``zn:<n>`` or ``f2``."""
    spec = spec.strip().lower()
    if spec == "z":
        return IntegerGroup()
    if spec == "f2":
        return FreeGroup2()
    if spec.startswith("zn:"):
        try:
            return CyclicGroup(int(spec[3:]))
        except ValueError:
            pass
    raise GroupoidError(f"unknown group {spec!r}; expected z, zn:<n> or f2")


# ---------------------------------------------------------------------------
# measures on groups


def canonical_measure(mu: Mapping, oracle) -> dict:
    out: dict = {}
    for g, v in mu.items():
        c = oracle.canonicalize(g)
        out[c] = out.get(c, 0) + v
    return M.prune(out)


def group_translate(g: Hashable, mu: Mapping, oracle) -> dict:
    """Left translate: ``(g mu)(g h) = mu(h)``."""
    return {oracle.multiply(g, h): v for h, v in mu.items()}


def group_convolve(mu: Mapping, nu: Mapping, oracle) -> dict:
    """``(mu * nu)(g) = sum_h mu(h) nu(h^-1 g)``."""
    out: dict = {}
    for h, a in mu.items():
        for k, b in nu.items():
            g = oracle.multiply(h, k)
            out[g] = out.get(g, 0) + a * b
    return M.prune(out)


def group_discrepancy(m_hat: Mapping, theta: Mapping, oracle):
    """``sum_g m_hat(g) ||g theta - theta||``."""
    return sum(
        (w * M.total_variation(group_translate(g, theta, oracle), theta)
         for g, w in m_hat.items() if w != 0),
        0,
    )


def folner_measure_test(m_hat: Mapping, A: Iterable, oracle):
    """Mean discrepancy of the uniform measure on ``A`` via symmetric differences.

    For uniform measures ``||g chi_A - chi_A|| = |gA (+) A| / |A|``.
    """
    A = {oracle.canonicalize(a) for a in A}
    if not A:
        raise GroupoidError("Folner test needs a nonempty set")
    total = Fraction(0)
    for g, w in m_hat.items():
        gA = {oracle.multiply(g, a) for a in A}
        total += w * Fraction(len(gA ^ A), len(A))
    return total


def folner_measure_direct(m_hat: Mapping, A: Iterable, oracle):
    """Same quantity by pointwise subtraction of translated uniform measures."""
    A = {oracle.canonicalize(a) for a in A}
    if not A:
        raise GroupoidError("Folner test needs a nonempty set")
    return group_discrepancy(m_hat, M.uniform(A), oracle)


def ball(oracle, radius: int) -> set:
    """Word-metric ball around the identity for the oracle's standard generators."""
    current = {oracle.identity}
    seen = set(current)
    for _ in range(radius):
        current = {oracle.multiply(g, s) for g in current for s in oracle.generators} - seen
        seen |= current
    return seen


def convolution_power_sweep(mu: Mapping, N: int, probe: Hashable, oracle,
                            support_cap: int | None = None) -> list:
    """``||probe mu^{*n} - mu^{*n}||`` for ``n = 1..N``.

    Raises :class:`SupportCapError` (carrying the values computed so far)
    at the first ``n`` whose convolution power exceeds ``support_cap``.
    """
    mu = canonical_measure(mu, oracle)
    probe = oracle.canonicalize(probe)
    values = []
    power = mu
    for n in range(1, N + 1):
        if n > 1:
            power = group_convolve(power, mu, oracle)
        if support_cap is not None and len(power) > support_cap:
            raise SupportCapError(n, len(power), support_cap, values)
        values.append(M.total_variation(group_translate(probe, power, oracle), power))
    return values


def simple_random_walk(oracle) -> dict:
    gens = oracle.generators
    return {g: Fraction(1, len(gens)) for g in gens}


def lazy_walk_z() -> dict:
    return {0: Fraction(1, 2), -1: Fraction(1, 4), 1: Fraction(1, 4)}


def group_system(table: Sequence[Sequence[int]], theta: Mapping) -> tuple[FiniteGroupoid, M.FibredSystem]:
    """Embed a measure on a finite group as a system on its one-object groupoid."""
    G = build_group_groupoid(table)
    return G, M.FibredSystem(G, [dict(theta)])
