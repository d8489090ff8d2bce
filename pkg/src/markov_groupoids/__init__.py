"""Equivariant Markov chains on finite groupoids: discrepancy, convolution
powers, 0-2 law boundary tests and random walks in random environment."""

from .errors import GroupoidError
from .groupoid import (
    ActionSpec,
    FiniteGroupoid,
    PartitionSpec,
    build_action_groupoid,
    build_group_groupoid,
    build_pair_groupoid,
    build_table_groupoid,
    verify_axioms,
)
from .measures import FibredSystem, counting_haar, convolve, reference_measure, total_variation
from .operators import EquivariantOperator, discrepancy_at, mean_discrepancy

__version__ = "0.1.0"
