"""0-2 law decay statistics for the fibrewise chains of an equivariant operator.

For a fibre matrix ``A`` the statistic is ``d_n = max_{a,b} ||(delta_a - delta_b) B_n||``
where ``B_n`` is ``A^n`` (tail), the Cesaro average ``(A + ... + A^n)/n``, or
``R^n`` with ``R = (A + A^2)/2`` (lazy).  By convexity of the total variation
norm the maximum over point masses equals the supremum over all pairs of
probability measures on the fibre.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from . import measures as M
from .operators import (
    EquivariantOperator,
    _mean_discrepancy,
    compose_operators,
    fibre_matrix,
    lazy_average,
)

MODES = ("tail", "cesaro", "lazy")
DEFAULT_THRESHOLD = 1e-6

TRIVIAL = "trivial"
NONTRIVIAL = "non-trivial"
INCONCLUSIVE = "inconclusive"


@dataclass
class DecayProfile:
    object: int
    mode: str
    values: list
    threshold: float
    verdict: str

    @property
    def horizon(self) -> int:
        return len(self.values)


@dataclass
class FibrewiseReport:
    mode: str
    per_object: dict[int, DecayProfile]
    aggregate: float
    quasi_substationary: dict[int, bool] = field(default_factory=dict)

    def verdicts(self) -> dict[int, str]:
        return {x: p.verdict for x, p in self.per_object.items()}


def _exact(rows) -> bool:
    return all(M.is_exact(r) for r in rows)


def _matmul(A, B):
    if isinstance(A, np.ndarray):
        return A @ B
    n, m = len(A), len(B[0])
    inner = range(len(B))
    return [[sum((A[i][k] * B[k][j] for k in inner), 0) for j in range(m)] for i in range(n)]


def _as_matrix(rows):
    if _exact(rows):
        return [list(r) for r in rows]
    return np.array(rows, dtype=float)


def _max_pairwise_tv(B):
    if isinstance(B, np.ndarray):
        if len(B) < 2:
            return 0.0
        diffs = np.abs(B[:, None, :] - B[None, :, :]).sum(axis=2)
        return float(diffs.max())
    best = 0
    for a in range(len(B)):
        for b in range(a + 1, len(B)):
            d = sum((abs(x - y) for x, y in zip(B[a], B[b])), 0)
            if d > best:
                best = d
    return best


def _add(A, B):
    if isinstance(A, np.ndarray):
        return A + B
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(A, B)]


def _scale(c, A):
    if isinstance(A, np.ndarray):
        return c * A
    return [[c * x for x in r] for r in A]


def decay_values(rows: Sequence[Sequence], N: int, mode: str = "tail") -> list:
    """``d_1, ..., d_N`` for the row-stochastic matrix ``rows``."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    A = _as_matrix(rows)
    exact = not isinstance(A, np.ndarray)
    if mode == "lazy":
        half = Fraction(1, 2) if exact else 0.5
        A = _scale(half, _add(A, _matmul(A, A)))
    values = []
    Pn = A
    acc = A
    for n in range(1, N + 1):
        if n > 1:
            Pn = _matmul(Pn, A)
            if mode == "cesaro":
                acc = _add(acc, Pn)
        if mode == "cesaro":
            w = Fraction(1, n) if exact else 1.0 / n
            values.append(_max_pairwise_tv(_scale(w, acc)))
        else:
            values.append(_max_pairwise_tv(Pn))
    return values


def classify(values: Sequence, threshold: float = DEFAULT_THRESHOLD) -> str:
    """Three-valued verdict from a finite horizon.

    Trivial if the last value is within ``threshold`` of 0; non-trivial if the
    last quarter of the horizon is flat at a value within ``threshold`` of 2.
    """
    if not values:
        return INCONCLUSIVE
    if values[-1] <= threshold:
        return TRIVIAL
    window = values[len(values) - max(1, len(values) // 4):]
    if min(window) >= 2 - threshold and max(window) - min(window) <= threshold:
        return NONTRIVIAL
    return INCONCLUSIVE


def _profile(P: EquivariantOperator, x: int, N: int, mode: str, threshold: float) -> DecayProfile:
    rows = fibre_matrix(P, x).matrix
    values = decay_values(rows, N, mode)
    return DecayProfile(x, mode, values, threshold, classify(values, threshold))


def tail_triviality_profile(P: EquivariantOperator, x: int, N: int,
                            threshold: float = DEFAULT_THRESHOLD) -> DecayProfile:
    return _profile(P, x, N, "tail", threshold)


def exit_triviality_profile(P: EquivariantOperator, x: int, N: int, mode: str = "lazy",
                            threshold: float = DEFAULT_THRESHOLD) -> DecayProfile:
    if mode not in ("cesaro", "lazy"):
        raise ValueError("exit profiles use mode 'cesaro' or 'lazy'")
    return _profile(P, x, N, mode, threshold)


def quasi_substationary(P: EquivariantOperator, x: int) -> bool:
    """Counting measure on the fibre dominates its one-step image."""
    fibre = set(P.groupoid.fibre(x))
    return all(set(P.transition(g)) <= fibre for g in fibre)


def fibrewise_report(P: EquivariantOperator, kappa: Sequence | None = None, N: int = 100,
                     mode: str = "lazy", threshold: float = DEFAULT_THRESHOLD) -> FibrewiseReport:
    """Profiles on every object; ``aggregate`` is the kappa-share of trivial verdicts."""
    G = P.groupoid
    if kappa is None:
        kappa = [1] * G.n_objects
    per = {x: _profile(P, x, N, mode, threshold) for x in G.objects}
    total = sum(kappa)
    good = sum(kappa[x] for x in G.objects if per[x].verdict == TRIVIAL)
    aggregate = float(Fraction(good) / Fraction(total)) if total else 0.0
    qs = {x: quasi_substationary(P, x) for x in G.objects}
    return FibrewiseReport(mode, per, aggregate, qs)


def liouville_echo(P: EquivariantOperator, m_hat: Mapping, N: int, mode: str = "lazy") -> list:
    """``Delta(m_hat, P Q_n)`` for ``n = 1..N``.

    ``Q_n`` is ``R^n`` with ``R = (P + P^2)/2`` in lazy mode and the Cesaro
    average of ``P, ..., P^n`` in cesaro mode.
    """
    M.require_probability(m_hat, "reference measure")
    out = []
    if mode == "lazy":
        R = lazy_average(P)
        PQ = compose_operators(P, R)
        for n in range(1, N + 1):
            if n > 1:
                PQ = compose_operators(PQ, R)
            out.append(_mean_discrepancy(m_hat, PQ))
    elif mode == "cesaro":
        exact = P.system.exact
        Pk = P
        acc = None
        for n in range(1, N + 1):
            Pk = compose_operators(Pk, P)
            acc = Pk.system if acc is None else M.mix_systems([(1, acc), (1, Pk.system)])
            w = Fraction(1, n) if exact else 1.0 / n
            Q = EquivariantOperator(M.mix_systems([(w, acc)]), check=False)
            out.append(_mean_discrepancy(m_hat, Q))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return out
