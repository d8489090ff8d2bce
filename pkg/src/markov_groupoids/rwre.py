"""Random walks in random environment induced by a finite group action.

A map ``theta: X -> P(G)`` defines an equivariant chain on the action groupoid;
restricted to the fibre over ``x`` (identified with ``G`` by the labels) it is
the walk ``g -> g h`` with ``h ~ mu^g`` where ``mu^g = theta(g^-1 x)``.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Callable, Hashable, Mapping, Sequence

import numpy as np

from . import measures as M
from .boundary import DEFAULT_THRESHOLD, FibrewiseReport, fibrewise_report
from .errors import UndefinedIncrementError
from .group_walks import TableGroup, group_translate
from .groupoid import ActionSpec, FiniteGroupoid, build_action_groupoid
from .operators import EquivariantOperator, FibreMatrix


class Environment:
    """Increment distributions ``g -> mu^g`` on a group."""

    def __init__(self, increment_at: Mapping | Callable[[Hashable], Mapping], oracle):
        self._get = increment_at.get if isinstance(increment_at, Mapping) else increment_at
        self.oracle = oracle

    def increment(self, g: Hashable) -> dict:
        mu = self._get(g)
        if mu is None:
            raise UndefinedIncrementError(f"no increment distribution at {g!r}")
        return mu

    __call__ = increment

    def transition(self, g: Hashable) -> dict:
        """``pi^g = g mu^g``."""
        return group_translate(g, self.increment(g), self.oracle)

    def shifted(self, g: Hashable) -> "Environment":
        """The translated environment ``(g mu)^{g'} = mu^{g^-1 g'}``."""
        inv = self.oracle.invert(g)
        return Environment(lambda h: self.increment(self.oracle.multiply(inv, h)), self.oracle)


def environment_of(theta: Sequence[Mapping], x: int, action: ActionSpec) -> Environment:
    """``mu^g = theta(g^-1 . x)`` for every element of the finite group."""
    oracle = TableGroup(action.group)
    incs = {g: dict(theta[action.act(action.inverses[g], x)]) for g in range(action.order)}
    return Environment(incs, oracle)


def environment_field(theta: Sequence[Mapping], action: ActionSpec) -> dict[int, Environment]:
    return {x: environment_of(theta, x, action) for x in range(action.n_points)}


def action_system(G: FiniteGroupoid, theta: Sequence[Mapping]) -> M.FibredSystem:
    """Fibred system on the action groupoid with ``theta^x((h, x)) = theta(x)(h)``."""
    return M.FibredSystem(
        G, [{G.morphism((h, x)): v for h, v in theta[x].items()} for x in G.objects]
    )


def action_operator(action: ActionSpec, theta: Sequence[Mapping]) -> EquivariantOperator:
    G = build_action_groupoid(action)
    return EquivariantOperator(action_system(G, theta))


def fibre_operator_equivalence(G: FiniteGroupoid, theta: Sequence[Mapping], x: int) -> FibreMatrix:
    """Transition matrix of the walk in the environment of ``x``.

    Built from :func:`environment_of` only, in the row/column order of the
    fibre over ``x``, so it can be compared entry-wise with
    :func:`operators.fibre_matrix` of the action-groupoid operator.
    """
    action = G.spec
    env = environment_of(theta, x, action)
    fibre = G.fibre(x)
    labels = [G.label(g)[0] for g in fibre]
    pos = {g: i for i, g in enumerate(labels)}
    rows = []
    for g in labels:
        row = [0] * len(labels)
        for h, p in env.transition(g).items():
            row[pos[h]] += p
        rows.append(tuple(row))
    return FibreMatrix(x, fibre, tuple(rows))


# ---------------------------------------------------------------------------
# sampling


@dataclass(frozen=True)
class PathSample:
    states: tuple
    seed: int


def _sorted_support(mu: Mapping) -> tuple[list, np.ndarray]:
    items = sorted(((h, p) for h, p in mu.items() if p > 0), key=lambda kv: (str(type(kv[0])), kv[0]))
    probs = np.array([float(p) for _, p in items])
    return [h for h, _ in items], probs / probs.sum()


def sample_rwre_path(env: Environment, start: Hashable, steps: int, seed: int) -> PathSample:
    rng = np.random.default_rng(seed)
    g = start
    states = [g]
    for _ in range(steps):
        support, probs = _sorted_support(env.increment(g))
        h = support[rng.choice(len(support), p=probs)]
        g = env.oracle.multiply(g, h)
        states.append(g)
    return PathSample(tuple(states), seed)


def sample_endpoints(env: Environment, start: Hashable, steps: int, samples: int, seed: int) -> Counter:
    """Empirical distribution of the ``steps``-th state over ``samples`` paths.

    All paths advance together; at each step the walkers sitting at the same
    state draw their increments in one batch.  Deterministic given ``seed``.
    """
    rng = np.random.default_rng(seed)
    oracle = env.oracle
    states = np.zeros(samples, dtype=object)
    states[:] = [start] * samples
    for _ in range(steps):
        nxt = np.empty(samples, dtype=object)
        values = sorted(set(states.tolist()), key=lambda v: (str(type(v)), v))
        for s in values:
            idx = np.nonzero(states == s)[0]
            support, probs = _sorted_support(env.increment(s))
            picks = rng.choice(len(support), size=len(idx), p=probs)
            targets = [oracle.multiply(s, h) for h in support]
            nxt[idx] = [targets[j] for j in picks]
        states = nxt
    return Counter(states.tolist())


def exact_distribution(env: Environment, start: Hashable, steps: int) -> dict:
    """``delta_start P^steps`` by propagating the transition measures."""
    dist = {start: 1}
    for _ in range(steps):
        nxt: dict = {}
        for g, w in dist.items():
            for h, p in env.transition(g).items():
                nxt[h] = nxt.get(h, 0) + w * p
        dist = M.prune(nxt)
    return dist


def rwre_histogram(env: Environment, start: Hashable, steps: int, samples: int, seed: int):
    """Rows ``(element, empirical, exact, |diff|)`` and the total variation between them."""
    counts = sample_endpoints(env, start, steps, samples, seed)
    exact = exact_distribution(env, start, steps)
    keys = sorted(set(counts) | set(exact), key=lambda v: (str(type(v)), v))
    rows = []
    tv = 0.0
    for k in keys:
        emp = counts.get(k, 0) / samples
        ex = float(exact.get(k, 0))
        rows.append((k, emp, ex, abs(emp - ex)))
        tv += abs(emp - ex)
    return rows, tv


def rwre_tail_report(action: ActionSpec, theta: Sequence[Mapping], kappa: Sequence | None = None,
                     horizon: int = 100, mode: str = "tail",
                     threshold: float = DEFAULT_THRESHOLD) -> FibrewiseReport:
    """Fibrewise 0-2 report of the action-groupoid chain, one profile per point."""
    P = action_operator(action, theta)
    return fibrewise_report(P, kappa, horizon, mode, threshold)
