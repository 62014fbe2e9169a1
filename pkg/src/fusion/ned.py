# -*- coding: utf-8 -*-
""" Building h that is eventually different from every member of a certified family while agreeing with f
    wherever h* does. Blocks [g*(k), g*(k+1)) avoid the first k+1 members, and g* must dominate the
    sequence m_k of thresholds beyond which f itself avoids those members. """

import bisect
from dataclasses import dataclass
from typing import Callable, List, Sequence

from .errors import CertificateError, DominationError
from .utils import Report, get_logger

logger = get_logger(__name__)

Rule = Callable[[int], int]


@dataclass
class NedInput:
    """f, the family f_j with avoidance bounds B(j) (f(n) ≠ f_j(n) for n ≥ B(j)), h*, the block function g*
    and the spot-check horizon H for the bounds."""
    f: Rule
    family: Sequence[Rule]
    bounds: Sequence[int]
    h_star: Rule
    g_star: Rule
    horizon: int = 100

    def __post_init__(self):
        if len(self.family) != len(self.bounds):
            raise ValueError(f"{len(self.family)} family members but {len(self.bounds)} bounds")
        self._blocks = BlockIndex(self.g_star)

    def members_upto(self, k: int) -> range:
        return range(min(k + 1, len(self.family)))

    def spot_check_certificates(self, upto: int) -> None:
        """Evaluates f against f_j on [B(j), B(j)+H) for j ≤ upto.

        Raises:
            CertificateError: With witness (j, n) at the first equality
        """
        for j in self.members_upto(upto):
            for n in range(self.bounds[j], self.bounds[j] + self.horizon):
                if self.f(n) == self.family[j](n):
                    raise CertificateError(f"f and f_{j} agree at {n} beyond their bound {self.bounds[j]}", witness=(j, n))

    def block_of(self, n: int) -> int:
        return self._blocks.block_of(n)


class BlockIndex:
    """Lazy inverse of a strictly increasing g*: block_of(n) is the k with g*(k) ≤ n < g*(k+1), or −1 below g*(0)."""

    def __init__(self, g_star: Rule):
        self.g_star = g_star
        self.values: List[int] = []

    def _extend_past(self, n: int) -> None:
        while not self.values or self.values[-1] <= n:
            value = self.g_star(len(self.values))
            if self.values and value <= self.values[-1]:
                raise ValueError(f"g* is not strictly increasing at {len(self.values)}: {value} <= {self.values[-1]}")
            self.values.append(value)

    def block_of(self, n: int) -> int:
        self._extend_past(n)
        return bisect.bisect_right(self.values, n) - 1

    def blocks_below(self, horizon: int) -> int:
        """Number of blocks starting below the horizon (at least one)."""
        self._extend_past(horizon)
        return max(1, bisect.bisect_left(self.values, horizon))


def compute_m_seq(inp: NedInput, count: int) -> List[int]:
    """m_0..m_count: m_k is the least m not used before such that f(n) ∉ {f_0(n), ..., f_k(n)} for all n ≥ m.

    Beyond M_k = max{B(j) : j ≤ k} the bounds guarantee avoidance, so only [0, M_k) is scanned.

    Raises:
        CertificateError: If a bound is contradicted on its spot-check window
    """
    inp.spot_check_certificates(count)
    seq: List[int] = []
    used = set()
    for k in range(count + 1):
        members = inp.members_upto(k)
        top = max((inp.bounds[j] for j in members), default=0)
        collisions = [n for n in range(top) if any(inp.f(n) == inp.family[j](n) for j in members)]
        m = collisions[-1] + 1 if collisions else 0
        while m in used:
            m += 1
        used.add(m)
        seq.append(m)
    return seq


def build_h(inp: NedInput, horizon: int) -> Rule:
    """h(n) = h*(n) if h*(n) ∉ {f_0(n), ..., f_k(n)}, else min(ℕ ∖ {f_0(n), ..., f_k(n)}), for n in block k.

    Below g*(0) nothing is avoided and h = h*.

    Raises:
        DominationError: If g*(k) < m_k for a block k starting below the horizon
    """
    blocks = inp._blocks.blocks_below(horizon)
    m_seq = compute_m_seq(inp, blocks - 1)
    for k, m in enumerate(m_seq):
        if inp.g_star(k) < m:
            logger.error(f"g*({k}) = {inp.g_star(k)} < m_{k} = {m}")
            raise DominationError(f"g* does not dominate m: g*({k}) = {inp.g_star(k)} < {m}", witness=(k, inp.g_star(k), m))

    def h(n: int) -> int:
        k = inp.block_of(n)
        forbidden = {inp.family[j](n) for j in inp.members_upto(k)}
        value = inp.h_star(n)
        if value not in forbidden:
            return value
        least = 0
        while least in forbidden:
            least += 1
        return least

    return h


def agreement_set(a: Rule, b: Rule, horizon: int) -> List[int]:
    return [n for n in range(horizon) if a(n) == b(n)]


def verify_ned(h: Rule, inp: NedInput, horizon: int) -> Report:
    """agreement: h = f on N = {n < horizon : h*(n) = f(n)}; avoidance: h(n) ≠ f_j(n) for g*(j) ≤ n < horizon."""
    report = Report("ned", {"horizon": horizon, "family": len(inp.family)})
    values = [h(n) for n in range(horizon)]
    witness = next(({"n": n, "h": values[n], "f": inp.f(n)} for n in agreement_set(inp.h_star, inp.f, horizon)
                    if values[n] != inp.f(n)), None)
    report.add("agreement", witness is None, witness)

    witness = None
    for j, member in enumerate(inp.family):
        clash = next((n for n in range(inp.g_star(j), horizon) if values[n] == member(n)), None)
        if clash is not None:
            witness = {"j": j, "n": clash, "value": values[clash]}
            break
    report.add("avoidance", witness is None, witness)
    if not report.passed:
        logger.warning(f"ned verification failed: {[c.name for c in report.failures()]}")
    return report
