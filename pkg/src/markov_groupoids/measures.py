"""Sparse measures on the morphism set and target-fibred systems of measures.

A measure is a plain ``dict`` mapping ids to masses.  Masses are either exact
(``int``/``Fraction``) or ``float``; every function here is generic and keeps
exact inputs exact.  Probability checks are exact for exact inputs and use
``tol`` otherwise.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Number
from typing import Hashable, Iterable, Mapping, Sequence

from .errors import FibreSupportError, GroupoidMismatchError, NormalizationError
from .groupoid import FiniteGroupoid

DEFAULT_TOL = 1e-9

Measure = dict


def is_exact(values: Iterable[Number]) -> bool:
    return all(isinstance(v, (int, Fraction)) for v in values)


def prune(mu: Mapping) -> dict:
    """Drop zero masses."""
    return {k: v for k, v in mu.items() if v != 0}


def total_mass(mu: Mapping):
    return sum(mu.values(), 0)


def close_to(a, b, tol: float = DEFAULT_TOL) -> bool:
    if is_exact((a, b)):
        return a == b
    return abs(a - b) <= tol


def is_probability(mu: Mapping, tol: float = DEFAULT_TOL) -> bool:
    if any(v < 0 for v in mu.values()):
        return False
    return close_to(total_mass(mu), 1, tol)


def require_probability(mu: Mapping, what: str = "measure", tol: float = DEFAULT_TOL) -> None:
    if any(v < 0 for v in mu.values()):
        raise NormalizationError(f"normalization: {what} has negative mass")
    s = total_mass(mu)
    if not close_to(s, 1, tol):
        raise NormalizationError(f"normalization: {what} is not a probability measure (total mass {s})")


def normalize(mu: Mapping) -> dict:
    s = total_mass(mu)
    if s == 0:
        raise NormalizationError("cannot normalize the zero measure")
    if is_exact(mu.values()):
        s = Fraction(s)
    return {k: v / s for k, v in mu.items()}


def scale(c, mu: Mapping) -> dict:
    return {k: c * v for k, v in mu.items()}


def combine(terms: Iterable[tuple[Number, Mapping]]) -> dict:
    """Linear combination ``sum c_i mu_i``."""
    out: dict = {}
    for c, mu in terms:
        if c == 0:
            continue
        for k, v in mu.items():
            out[k] = out.get(k, 0) + c * v
    return prune(out)


def difference(mu: Mapping, nu: Mapping) -> dict:
    return combine(((1, mu), (-1, nu)))


def total_variation(mu: Mapping, nu: Mapping):
    """``sum_k |mu(k) - nu(k)|`` (the total variation norm of ``mu - nu``)."""
    total = 0
    for k in mu.keys() | nu.keys():
        total += abs(mu.get(k, 0) - nu.get(k, 0))
    return total


def norm(mu: Mapping):
    return sum((abs(v) for v in mu.values()), 0)


def dirac(k: Hashable) -> dict:
    return {k: 1}


def uniform(keys: Iterable[Hashable]) -> dict:
    keys = list(keys)
    if not keys:
        raise NormalizationError("uniform measure on an empty set")
    w = Fraction(1, len(keys))
    return {k: w for k in keys}


def to_float(mu: Mapping) -> dict:
    return {k: float(v) for k, v in mu.items()}


def to_fraction(mu: Mapping) -> dict:
    return {k: Fraction(v) for k, v in mu.items()}


# ---------------------------------------------------------------------------
# fibred systems


class FibredSystem:
    """One measure per object ``x``, supported in the target fibre of ``x``."""

    __slots__ = ("groupoid", "fibres", "_key")

    def __init__(self, groupoid: FiniteGroupoid, fibres: Sequence[Mapping]):
        if len(fibres) != groupoid.n_objects:
            raise GroupoidMismatchError(
                f"system has {len(fibres)} fibres, groupoid has {groupoid.n_objects} objects"
            )
        self.groupoid = groupoid
        self.fibres = tuple(prune(dict(m)) for m in fibres)
        for x, m in enumerate(self.fibres):
            for g in m:
                if not (0 <= g < groupoid.n_morphisms) or groupoid.target[g] != x:
                    raise FibreSupportError(g, x)
        self._key = None

    def __getitem__(self, x: int) -> dict:
        return self.fibres[x]

    def __len__(self) -> int:
        return len(self.fibres)

    def __iter__(self):
        return iter(self.fibres)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FibredSystem):
            return NotImplemented
        return self.groupoid is other.groupoid and self.fibres == other.fibres

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"FibredSystem({list(self.fibres)!r})"

    def key(self) -> tuple:
        if self._key is None:
            self._key = tuple(tuple(sorted(m.items())) for m in self.fibres)
        return self._key

    @property
    def exact(self) -> bool:
        return all(is_exact(m.values()) for m in self.fibres)

    def is_probability(self, tol: float = DEFAULT_TOL) -> bool:
        return all(is_probability(m, tol) for m in self.fibres)

    def require_probability(self, tol: float = DEFAULT_TOL) -> None:
        for x, m in enumerate(self.fibres):
            if not m:
                raise NormalizationError(f"normalization: fibre of object {x} carries no mass")
            require_probability(m, f"fibre measure of object {x}", tol)

    def map(self, f) -> "FibredSystem":
        return FibredSystem(self.groupoid, [f(m) for m in self.fibres])

    def as_float(self) -> "FibredSystem":
        return self.map(to_float)

    def as_fraction(self) -> "FibredSystem":
        return self.map(to_fraction)


def identity_system(G: FiniteGroupoid) -> FibredSystem:
    """``x -> delta_{e_x}``; the unit for convolution."""
    return FibredSystem(G, [{G.unit[x]: 1} for x in G.objects])


def uniform_system(G: FiniteGroupoid) -> FibredSystem:
    return FibredSystem(G, [uniform(G.fibre(x)) for x in G.objects])


def mix_systems(terms: Iterable[tuple[Number, FibredSystem]]) -> FibredSystem:
    terms = list(terms)
    G = terms[0][1].groupoid
    for _, s in terms:
        if s.groupoid is not G:
            raise GroupoidMismatchError("systems live on different groupoids")
    return FibredSystem(G, [combine((c, s[x]) for c, s in terms) for x in G.objects])


def counting_haar(G: FiniteGroupoid) -> FibredSystem:
    return FibredSystem(G, [{g: 1 for g in G.fibre(x)} for x in G.objects])


def translate(G: FiniteGroupoid, g: int, mu: Mapping) -> dict:
    """Push ``mu`` (on the fibre over ``s(g)``) forward by left multiplication by ``g``."""
    s = G.source[g]
    out = {}
    for h, v in mu.items():
        if G.target[h] != s:
            raise FibreSupportError(
                h, s,
                f"cannot translate by {g}: morphism {h} has target {G.target[h]}, "
                f"not the source {s} of {g}",
            )
        out[G.compose(g, h)] = v
    return out


def left_invariance_violations(system: FibredSystem) -> list[int]:
    """Morphisms ``g`` with ``g . lam^{s(g)} != lam^{t(g)}``."""
    G = system.groupoid
    return [
        g for g in G.morphisms
        if translate(G, g, system[G.source[g]]) != system[G.target[g]]
    ]


def lambda_star_kappa(lam: FibredSystem, kappa: Sequence) -> dict:
    """Integrate the fibre measures against the object measure ``kappa``."""
    G = lam.groupoid
    out = {}
    for x in G.objects:
        if kappa[x] == 0:
            continue
        for g, v in lam[x].items():
            out[g] = v * kappa[x]
    return prune(out)


def check_quasi_invariance(G: FiniteGroupoid, lam: FibredSystem, kappa: Sequence) -> bool:
    """True iff the null set of ``lam * kappa`` is stable under inversion."""
    mass = lambda_star_kappa(lam, kappa)
    null = {g for g in G.morphisms if mass.get(g, 0) == 0}
    return all(G.inverse[g] in null for g in null)


def reference_measure(G: FiniteGroupoid, kappa: Sequence | None = None,
                      lam: FibredSystem | None = None) -> dict:
    """Normalized ``lam * kappa``; defaults are counting Haar and ``kappa = 1``."""
    if lam is None:
        lam = counting_haar(G)
    if kappa is None:
        kappa = [1] * G.n_objects
    return normalize(lambda_star_kappa(lam, kappa))


def convolve(theta: FibredSystem, eta: FibredSystem) -> FibredSystem:
    """System of the operator product: ``sum_{g in G^x} theta^x(g) g.eta^{s(g)}``."""
    G = theta.groupoid
    if eta.groupoid is not G:
        raise GroupoidMismatchError("cannot convolve systems on different groupoids")
    fibres = []
    for x in G.objects:
        acc: dict = {}
        for g, a in theta[x].items():
            for h, b in eta[G.source[g]].items():
                k = G.compose(g, h)
                acc[k] = acc.get(k, 0) + a * b
        fibres.append(acc)
    return FibredSystem(G, fibres)
