"""Asymptotic invariance diagnostics and the convex-combination construction.

Given a sequence of equivariant operators ``P_n`` whose mean discrepancy
``Delta(m, P_n)`` tends to zero, :func:`construct_liouville` picks indices
``n_1 < n_2 < ...`` and returns ``P = sum_i t_i P_{n_i}`` (over a finite,
renormalized prefix) whose powers are again asymptotically invariant, with a
certificate that :func:`verify_certificate` re-checks independently.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from . import measures as M
from .errors import HorizonExhaustedError, ProductCapError
from .operators import (
    EquivariantOperator,
    _mean_discrepancy,
    combine_operators,
    compose_operators,
    identity_operator,
    mean_discrepancy,
)

log = logging.getLogger(__name__)

DEFAULT_PRODUCT_CAP = 100_000


class OperatorProvider:
    """Lazily evaluated, memoized sequence ``n -> P_n`` for ``1 <= n <= horizon``."""

    def __init__(self, factory: Callable[[int], EquivariantOperator], horizon: int):
        if horizon < 1:
            raise ValueError("horizon must be at least 1")
        self._factory = factory
        self.horizon = horizon
        self._cache: dict[int, EquivariantOperator] = {}

    @classmethod
    def from_list(cls, operators: Sequence[EquivariantOperator]) -> "OperatorProvider":
        ops = list(operators)
        return cls(lambda n: ops[n - 1], len(ops))

    @classmethod
    def constant(cls, P: EquivariantOperator, horizon: int) -> "OperatorProvider":
        return cls(lambda n: P, horizon)

    def at(self, n: int) -> EquivariantOperator:
        if not 1 <= n <= self.horizon:
            raise HorizonExhaustedError(f"index {n} outside provider horizon 1..{self.horizon}")
        P = self._cache.get(n)
        if P is None:
            P = self._cache[n] = self._factory(n)
            if self._cache and P.groupoid is not self._cache[min(self._cache)].groupoid:
                raise ValueError(f"operator {n} lives on a different groupoid")
        return P

    __getitem__ = at


def isai_trajectory(provider: OperatorProvider, m_hat: Mapping, N: int) -> list:
    """``[Delta(m_hat, P_1), ..., Delta(m_hat, P_N)]``."""
    if N > provider.horizon:
        raise HorizonExhaustedError(f"N={N} exceeds provider horizon {provider.horizon}")
    M.require_probability(m_hat, "reference measure")
    return [_mean_discrepancy(m_hat, provider.at(n)) for n in range(1, N + 1)]


# ---------------------------------------------------------------------------
# schedules


@dataclass(frozen=True)
class Schedule:
    """Stage data for the construction; index ``i - 1`` holds stage ``i``.

    Weights are ``t_i = (1 - b) b^(i-1)`` for ``b = t_base`` so the weight not
    materialized after ``L`` stages is exactly ``b^L``.
    """

    t: tuple
    epsilon: tuple
    k: tuple
    t_base: Fraction
    epsilon_base: Fraction

    @property
    def prefix_length(self) -> int:
        return len(self.t)

    @property
    def truncation_residual(self):
        return self.t_base ** self.prefix_length

    def weight_before(self, i: int):
        """``t_1 + ... + t_{i-1}``."""
        return sum(self.t[: i - 1], Fraction(0))

    def splitting_mass(self, i: int):
        """Total weight of length-``k_i`` multi-indices with maximum below ``i``."""
        return self.weight_before(i) ** self.k[i - 1]

    def renormalized_weights(self) -> list:
        total = sum(self.t, Fraction(0))
        return [w / total for w in self.t]

    def violations(self) -> list[str]:
        out = []
        for i in range(2, self.prefix_length + 1):
            if self.splitting_mass(i) > self.epsilon[i - 1]:
                out.append(f"stage {i}: (t_1+...+t_{i-1})^k_i exceeds epsilon_i")
            if not self.epsilon[i - 1] < self.epsilon[i - 2]:
                out.append(f"stage {i}: epsilon not strictly decreasing")
            if not self.k[i - 1] > self.k[i - 2]:
                out.append(f"stage {i}: k not strictly increasing")
        if any(w <= 0 for w in self.t):
            out.append("non-positive weight")
        return out


def _as_fraction(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(str(v))


def build_schedule(stages: int, epsilon_base=Fraction(1, 2), t_base=Fraction(1, 2)) -> Schedule:
    """Default schedule: ``t_i = eps_i = 2^-i`` and ``k_i`` minimal with
    ``(t_1 + ... + t_{i-1})^k_i <= eps_i`` (kept strictly increasing)."""
    if stages < 1:
        raise ValueError("need at least one stage")
    b = _as_fraction(t_base)
    q = _as_fraction(epsilon_base)
    if not (0 < b < 1 and 0 < q < 1):
        raise ValueError("t_base and epsilon_base must lie strictly between 0 and 1")
    t = tuple((1 - b) * b ** (i - 1) for i in range(1, stages + 1))
    eps = tuple(q ** i for i in range(1, stages + 1))
    ks = [1]
    for i in range(2, stages + 1):
        s = sum(t[: i - 1], Fraction(0))
        k, p = 1, s
        while p > eps[i - 1]:
            k += 1
            p *= s
        ks.append(max(k, ks[-1] + 1))
    return Schedule(t, eps, tuple(ks), b, q)


# ---------------------------------------------------------------------------
# construction


@dataclass(frozen=True)
class SelectionCheck:
    stage: int
    n: int
    products: int
    worst: object
    accepted: bool


@dataclass(frozen=True)
class StageBound:
    stage: int
    k: int
    epsilon: object
    measured: object
    bound: object

    @property
    def ok(self) -> bool:
        return self.measured <= self.bound


@dataclass
class LiouvilleCertificate:
    indices: list[int]
    weights: list
    renormalized: list
    checked_bounds: list[StageBound]
    selections: list[SelectionCheck] = field(default_factory=list)
    truncation_residual: object = Fraction(0)
    products_per_stage: dict[int, int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(b.ok for b in self.checked_bounds)

    def rows(self, schedule: Schedule) -> list[tuple]:
        """``(stage, n_i, k_i, epsilon_i, measured, bound)`` per verified stage."""
        return [
            (b.stage, self.indices[b.stage - 1], b.k, b.epsilon, b.measured, b.bound)
            for b in self.checked_bounds
        ]


def stage_bound(schedule: Schedule, i: int):
    """``3 eps_i + 2 * truncation residual``."""
    return 3 * schedule.epsilon[i - 1] + 2 * schedule.truncation_residual


def enumerate_products(
    factors: Sequence[EquivariantOperator],
    max_length: int,
    cap: int = DEFAULT_PRODUCT_CAP,
    stage: int = 0,
) -> list[EquivariantOperator]:
    """Distinct products of at most ``max_length`` factors, identity included.

    Breadth-first over word length; only products not seen before are
    extended, so coinciding words (e.g. commuting factors) are evaluated once.
    ``cap`` bounds the number of operator compositions performed.
    """
    G = factors[0].groupoid
    ident = identity_operator(G)
    seen = {ident.system.key(): ident}
    frontier = [ident]
    work = 0
    for _ in range(max_length):
        nxt = []
        for S in frontier:
            for R in factors:
                work += 1
                if work > cap:
                    size = sum(len(factors) ** l for l in range(max_length + 1))
                    raise ProductCapError(
                        f"stage {stage}: product enumeration exceeded cap {cap} "
                        f"({size} words of length <= {max_length} over {len(factors)} factors)",
                        stage, size,
                    )
                SR = compose_operators(S, R)
                key = SR.system.key()
                if key not in seen:
                    seen[key] = SR
                    nxt.append(SR)
        if not nxt:
            break
        frontier = nxt
    return list(seen.values())


def construct_liouville(
    provider: OperatorProvider,
    m_hat: Mapping,
    schedule: Schedule,
    product_cap: int = DEFAULT_PRODUCT_CAP,
    horizon: int | None = None,
) -> tuple[EquivariantOperator, LiouvilleCertificate]:
    """Select ``n_1 = 1`` and, for each later stage, the least ``n > n_{i-1}``
    with ``Delta(m_hat, Q P_n) <= eps_i`` for every product ``Q`` of at most
    ``k_i`` of the already selected operators; combine with renormalized
    weights and measure ``Delta(m_hat, P^{k_i})`` for the certificate."""
    M.require_probability(m_hat, "reference measure")
    horizon = provider.horizon if horizon is None else min(horizon, provider.horizon)
    L = schedule.prefix_length

    indices = [1]
    selected = [provider.at(1)]
    selections: list[SelectionCheck] = []
    product_counts = {1: 1}
    for i in range(2, L + 1):
        eps, k = schedule.epsilon[i - 1], schedule.k[i - 1]
        Qs = enumerate_products(selected, k, product_cap, stage=i)
        product_counts[i] = len(Qs)
        log.info("stage %d: %d distinct products of <= %d factors", i, len(Qs), k)
        n = indices[-1] + 1
        worst_seen = None
        while True:
            if n > horizon:
                raise HorizonExhaustedError(
                    f"stage {i}: no admissible n in {indices[-1] + 1}..{horizon} "
                    f"(epsilon_{i} = {eps}, worst product discrepancy at n={n - 1}: {worst_seen})",
                    stage=i, worst=worst_seen,
                )
            Pn = provider.at(n)
            worst, worst_q = None, None
            for qi, Q in enumerate(Qs):
                d = _mean_discrepancy(m_hat, compose_operators(Q, Pn))
                if worst is None or d > worst:
                    worst, worst_q = d, qi
            ok = worst <= eps
            selections.append(SelectionCheck(i, n, len(Qs), worst, ok))
            worst_seen = (worst, worst_q)
            if ok:
                break
            n += 1
        indices.append(n)
        selected.append(Pn)

    renorm = schedule.renormalized_weights()
    P = combine_operators(list(zip(renorm, selected)))

    bounds = []
    kmax = max(schedule.k)
    deltas = _power_discrepancies(P, m_hat, kmax)
    for i in range(2, L + 1):
        k = schedule.k[i - 1]
        bounds.append(StageBound(i, k, schedule.epsilon[i - 1], deltas[k - 1], stage_bound(schedule, i)))

    cert = LiouvilleCertificate(
        indices=indices,
        weights=list(schedule.t),
        renormalized=renorm,
        checked_bounds=bounds,
        selections=selections,
        truncation_residual=schedule.truncation_residual,
        products_per_stage=product_counts,
    )
    return P, cert


def _power_discrepancies(P: EquivariantOperator, m_hat: Mapping, kmax: int) -> list:
    out = []
    Pk = P
    for k in range(1, kmax + 1):
        if k > 1:
            Pk = compose_operators(Pk, P)
        out.append(_mean_discrepancy(m_hat, Pk))
    return out


@dataclass
class CertificateCheck:
    ok: bool
    problems: list[str]
    recomputed: list

    def __bool__(self) -> bool:
        return self.ok


def verify_certificate(
    P: EquivariantOperator,
    m_hat: Mapping,
    schedule: Schedule,
    certificate: LiouvilleCertificate,
    tol: float = M.DEFAULT_TOL,
) -> CertificateCheck:
    """Recompute ``Delta(m_hat, P^k)`` for ``k = 1..max k_i`` from ``P`` alone and
    compare with the certificate, the stage bounds and monotonicity in ``k``."""
    problems = []
    mean_discrepancy(m_hat, P)  # validates m_hat
    kmax = max(schedule.k)
    deltas = _power_discrepancies(P, m_hat, kmax)
    for k in range(1, kmax):
        if deltas[k] > deltas[k - 1] and not M.close_to(deltas[k], deltas[k - 1], tol):
            problems.append(f"Delta(m, P^k) increases from k={k} to k={k + 1}")
    if certificate.truncation_residual != schedule.truncation_residual:
        problems.append("truncation residual does not match the schedule")
    idx = certificate.indices
    if idx[:1] != [1] or any(b <= a for a, b in zip(idx, idx[1:])):
        problems.append(f"indices {idx} are not 1 = n_1 < n_2 < ...")
    if sum(certificate.renormalized, Fraction(0)) != 1:
        problems.append("renormalized weights do not sum to 1")
    stages = {b.stage: b for b in certificate.checked_bounds}
    for i in range(2, schedule.prefix_length + 1):
        b = stages.get(i)
        if b is None:
            problems.append(f"stage {i}: missing from certificate")
            continue
        k = schedule.k[i - 1]
        expected_bound = stage_bound(schedule, i)
        if b.k != k:
            problems.append(f"stage {i}: recorded k={b.k}, schedule has k={k}")
        if b.bound != expected_bound:
            problems.append(f"stage {i}: recorded bound {b.bound} differs from 3*eps+2*residual = {expected_bound}")
        actual = deltas[k - 1]
        if not M.close_to(actual, b.measured, tol):
            problems.append(f"stage {i}: recorded Delta {b.measured} but recomputed {actual}")
        if actual > expected_bound:
            problems.append(f"stage {i}: Delta(m, P^{k}) = {actual} exceeds bound {expected_bound}")
    return CertificateCheck(not problems, problems, deltas)


def selection_invariant_violations(
    provider: OperatorProvider,
    m_hat: Mapping,
    schedule: Schedule,
    certificate: LiouvilleCertificate,
    product_cap: int = DEFAULT_PRODUCT_CAP,
) -> list[tuple[int, object]]:
    """Re-check ``Delta(m_hat, Q R_i) <= eps_i`` for every stage after construction."""
    bad = []
    selected = [provider.at(n) for n in certificate.indices]
    for i in range(2, len(selected) + 1):
        eps = schedule.epsilon[i - 1]
        for Q in enumerate_products(selected[: i - 1], schedule.k[i - 1], product_cap, stage=i):
            d = _mean_discrepancy(m_hat, compose_operators(Q, selected[i - 1]))
            if d > eps:
                bad.append((i, d))
    return bad
