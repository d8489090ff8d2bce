"""Small named instances shared by the tests and the CLI."""

from __future__ import annotations

from fractions import Fraction

from . import measures as M
from .amenability import OperatorProvider
from .groupoid import ActionSpec, build_action_groupoid, build_group_groupoid, cyclic_group_table
from .operators import EquivariantOperator


def z4_provider(horizon: int = 10) -> OperatorProvider:
    """``P_n`` = walk on Z/4 with uniform steps in ``{0, ..., min(n, 3)}``."""
    G = build_group_groupoid(cyclic_group_table(4))
    return OperatorProvider(
        lambda n: EquivariantOperator(M.FibredSystem(G, [M.uniform(range(min(n, 3) + 1))])),
        horizon,
    )


def z2_deterministic() -> EquivariantOperator:
    """The walk on Z/2 that always steps by 1."""
    G = build_group_groupoid(cyclic_group_table(2))
    return EquivariantOperator(M.FibredSystem(G, [{1: 1}]))


def swap_action() -> ActionSpec:
    """Z/2 acting on two points by swapping them."""
    return ActionSpec(cyclic_group_table(2), [[0, 1], [1, 0]])


def mixed_two_fibres() -> EquivariantOperator:
    """Trivial Z/2 action on two points; uniform chain on one fibre, periodic on the other."""
    G = build_action_groupoid(ActionSpec(cyclic_group_table(2), [[0, 1], [0, 1]]))
    return EquivariantOperator(M.FibredSystem(G, [
        {G.morphism((0, 0)): Fraction(1, 2), G.morphism((1, 0)): Fraction(1, 2)},
        {G.morphism((1, 1)): 1},
    ]))


FIXTURES = {"z4": z4_provider}
