"""Equivariant transition operators on a finite groupoid.

An operator is stored as its fibred system ``theta``; the transition measure
from ``g`` is ``pi^g = g . theta^{s(g)}``, supported on the fibre over
``t(g)``.  Products of operators correspond to convolution of systems.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from . import measures as M
from .errors import GroupoidMismatchError
from .groupoid import FiniteGroupoid


class EquivariantOperator:
    __slots__ = ("system", "_transitions")

    def __init__(self, system: M.FibredSystem, tol: float = M.DEFAULT_TOL, check: bool = True):
        if check:
            system.require_probability(tol)
        self.system = system
        self._transitions: dict[int, dict] = {}

    @property
    def groupoid(self) -> FiniteGroupoid:
        return self.system.groupoid

    def __eq__(self, other) -> bool:
        if not isinstance(other, EquivariantOperator):
            return NotImplemented
        return self.system == other.system

    def __hash__(self) -> int:
        return hash(self.system)

    def __repr__(self) -> str:
        return f"EquivariantOperator({self.system!r})"

    def __matmul__(self, other: "EquivariantOperator") -> "EquivariantOperator":
        return compose_operators(self, other)

    def transition(self, g: int) -> dict:
        pi = self._transitions.get(g)
        if pi is None:
            G = self.groupoid
            pi = M.translate(G, g, self.system[G.source[g]])
            self._transitions[g] = pi
        return pi

    def unit_restriction(self) -> M.FibredSystem:
        """Recover ``theta`` from the transitions at the units."""
        G = self.groupoid
        return M.FibredSystem(G, [self.transition(G.unit[x]) for x in G.objects])


def operator_from_system(theta: M.FibredSystem, tol: float = M.DEFAULT_TOL) -> EquivariantOperator:
    return EquivariantOperator(theta, tol)


def identity_operator(G: FiniteGroupoid) -> EquivariantOperator:
    return EquivariantOperator(M.identity_system(G))


def uniform_operator(G: FiniteGroupoid) -> EquivariantOperator:
    return EquivariantOperator(M.uniform_system(G))


def equivariance_violations(P: EquivariantOperator) -> list[tuple[int, int]]:
    """Composable pairs ``(g, h)`` with ``pi^{gh} != g . pi^h``."""
    G = P.groupoid
    bad = []
    for g in G.morphisms:
        for h in G.fibre(G.source[g]):
            if P.transition(G.compose(g, h)) != M.translate(G, g, P.transition(h)):
                bad.append((g, h))
    return bad


def apply_measure(alpha: Mapping, P: EquivariantOperator) -> dict:
    """``alpha P = sum_g alpha(g) pi^g``."""
    acc: dict = {}
    for g, a in alpha.items():
        for h, p in P.transition(g).items():
            acc[h] = acc.get(h, 0) + a * p
    return M.prune(acc)


def apply_function(P: EquivariantOperator, f: Mapping | Callable[[int], object]) -> dict:
    """``(Pf)(g) = <f, pi^g>`` for every morphism ``g``."""
    get = f.__getitem__ if isinstance(f, Mapping) else f
    return {
        g: sum((p * get(h) for h, p in P.transition(g).items()), 0)
        for g in P.groupoid.morphisms
    }


def pairing(f: Mapping, alpha: Mapping):
    return sum((v * f.get(g, 0) for g, v in alpha.items()), 0)


def compose_operators(P: EquivariantOperator, Q: EquivariantOperator) -> EquivariantOperator:
    """The product ``PQ`` (apply ``P`` first to measures)."""
    if P.groupoid is not Q.groupoid:
        raise GroupoidMismatchError("operators live on different groupoids")
    return EquivariantOperator(M.convolve(P.system, Q.system), check=False)


def power(P: EquivariantOperator, n: int) -> EquivariantOperator:
    """``P^n`` by repeated composition; ``n = 0`` gives the identity operator."""
    if n < 0:
        raise ValueError("negative power")
    if n == 0:
        return identity_operator(P.groupoid)
    R = P
    for _ in range(n - 1):
        R = compose_operators(R, P)
    return R


def powers(P: EquivariantOperator, n: int) -> list[EquivariantOperator]:
    """``[P, P^2, ..., P^n]``."""
    out = [P]
    while len(out) < n:
        out.append(compose_operators(out[-1], P))
    return out


def _weight(n: int, exact: bool):
    return Fraction(1, n) if exact else 1.0 / n


def combine_operators(terms: Sequence[tuple[object, EquivariantOperator]]) -> EquivariantOperator:
    """Convex combination of operators, done on their systems."""
    return EquivariantOperator(M.mix_systems((c, P.system) for c, P in terms), check=False)


def cesaro(P: EquivariantOperator, n: int) -> EquivariantOperator:
    """``(P + P^2 + ... + P^n) / n``."""
    if n < 1:
        raise ValueError("Cesaro average needs n >= 1")
    w = _weight(n, P.system.exact)
    return combine_operators([(w, Pk) for Pk in powers(P, n)])


def lazy_average(P: EquivariantOperator) -> EquivariantOperator:
    """``R = (P + P^2) / 2``."""
    w = _weight(2, P.system.exact)
    return combine_operators([(w, P), (w, compose_operators(P, P))])


def discrepancy_at(g: int, P: EquivariantOperator):
    """Total variation between the transitions from ``g`` and from the unit of its fibre."""
    G = P.groupoid
    return M.total_variation(P.transition(g), P.system[G.target[g]])


def discrepancy_profile(P: EquivariantOperator) -> list:
    return [discrepancy_at(g, P) for g in P.groupoid.morphisms]


def mean_discrepancy(m: Mapping, P: EquivariantOperator, tol: float = M.DEFAULT_TOL):
    """The ``m``-average of the discrepancy function; ``m`` must be a probability."""
    M.require_probability(m, "reference measure", tol)
    return _mean_discrepancy(m, P)


def _mean_discrepancy(m: Mapping, P: EquivariantOperator):
    return sum((w * discrepancy_at(g, P) for g, w in m.items() if w != 0), 0)


def target_pushforward(G: FiniteGroupoid, m: Mapping) -> dict:
    """Image of ``m`` under ``g -> e_{t(g)}``."""
    out: dict = {}
    for g, w in m.items():
        e = G.unit[G.target[g]]
        out[e] = out.get(e, 0) + w
    return M.prune(out)


def is_exactly_invariant(P: EquivariantOperator) -> bool:
    G = P.groupoid
    return all(
        M.translate(G, g, P.system[G.source[g]]) == P.system[G.target[g]]
        for g in G.morphisms
    )


@dataclass(frozen=True)
class FibreMatrix:
    """Row-stochastic matrix of the chain restricted to one target fibre.

    Rows and columns follow ``G.fibre(object)``; entry ``(i, j)`` is the
    transition probability from ``morphisms[i]`` to ``morphisms[j]``.
    """

    object: int
    morphisms: tuple[int, ...]
    matrix: tuple[tuple, ...]

    def __len__(self) -> int:
        return len(self.morphisms)

    def row(self, g: int) -> tuple:
        return self.matrix[self.morphisms.index(g)]

    def to_numpy(self):
        import numpy as np

        return np.array([[float(v) for v in row] for row in self.matrix])


def fibre_matrix(P: EquivariantOperator, x: int) -> FibreMatrix:
    G = P.groupoid
    fibre = G.fibre(x)
    rows = []
    for g in fibre:
        pi = P.transition(g)
        rows.append(tuple(pi.get(h, 0) for h in fibre))
    return FibreMatrix(x, fibre, tuple(rows))

