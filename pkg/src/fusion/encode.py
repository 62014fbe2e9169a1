# -*- coding: utf-8 -*-
""" The encoding g_{h,z}: even positions copy h, odd positions 2n+1 carry the pair code of (h↾(2n+1), z↾(2n+1)).
    A prefix of g determines prefixes of h and z, which is what coherence_check and decode_g read back. """

from typing import Callable, List, Optional, Sequence, Tuple

from .errors import CoherenceError
from .orders import FinWord, is_prefix, pair_code, pair_decode
from .utils import get_logger

logger = get_logger(__name__)

Rule = Callable[[int], int]
Relation = Callable[[FinWord, FinWord], bool]


def encode_g(h: Rule, z: Rule, n: int) -> int:
    if n % 2 == 0:
        return h(n // 2)
    return pair_code(tuple(h(i) for i in range(n)), tuple(z(i) for i in range(n)))


def encode_prefix(h: Rule, z: Rule, length: int) -> FinWord:
    return tuple(encode_g(h, z, n) for n in range(length))


class EncodedFunction:
    """g_{h,z} as a rule, with its prefixes cached."""

    def __init__(self, h: Rule, z: Rule):
        self.h = h
        self.z = z
        self._values: List[int] = []

    def __call__(self, n: int) -> int:
        return self.prefix(n + 1)[n]

    def prefix(self, length: int) -> FinWord:
        while len(self._values) < length:
            self._values.append(encode_g(self.h, self.z, len(self._values)))
        return tuple(self._values[:length])


def coherence_violation(prefix: Sequence[int]) -> Optional[dict]:
    """The first reason the prefix is not an initial segment of an encoding, or None.

    Odd entry 2n+1 must decode to a pair of length 2n+1, consecutive odd entries must decode to nested pairs,
    and the h-component of the last odd entry must agree with every even entry it covers.
    """
    prefix = tuple(prefix)
    odd_positions = range(1, len(prefix), 2)
    decoded = {}
    for p in odd_positions:
        c0, c1 = pair_decode(prefix[p])
        if len(c0) != p:
            return {"position": p, "reason": "length", "decoded": len(c0)}
        decoded[p] = (c0, c1)
        if p >= 3:
            q0, q1 = decoded[p - 2]
            if not (is_prefix(q0, c0) and is_prefix(q1, c1)):
                return {"position": p, "reason": "chain", "previous": p - 2}
    if decoded:
        last = max(decoded)
        c0 = decoded[last][0]
        for p in range(0, len(prefix), 2):
            k = p // 2
            if k < last and c0[k] != prefix[p]:
                return {"position": p, "reason": "even", "expected": c0[k]}
    return None


def coherence_check(prefix: Sequence[int]) -> bool:
    return coherence_violation(prefix) is None


def decode_g(prefix: Sequence[int]) -> Tuple[FinWord, FinWord]:
    """Reads (h↾(2m−1), z↾(2m−1)) off the last odd entry of a prefix of length 2m; (∅, ∅) for m = 0.

    Raises:
        ValueError: If the prefix has odd length
        CoherenceError: If the prefix is not an initial segment of any g_{h,z}
    """
    if len(prefix) % 2:
        raise ValueError(f"decode_g expects an even-length prefix, got length {len(prefix)}")
    violation = coherence_violation(prefix)
    if violation is not None:
        raise CoherenceError(f"Prefix is not an encoding: {violation}")
    if not prefix:
        return (), ()
    return pair_decode(prefix[-1])


def even_restriction(f: Rule) -> Rule:
    """f′(n) = f(2n)."""
    return lambda n: f(2 * n)


def transfer_agreement(h: Rule, z: Rule, f: Rule, horizon: int) -> List[int]:
    """Even positions 2n < horizon where g_{h,z} agrees with f, i.e. where h(n) = f′(n)."""
    return [2 * n for n in range((horizon + 1) // 2) if encode_g(h, z, 2 * n) == f(2 * n)]


def membership_check(prefix: Sequence[int], relation: Relation) -> bool:
    """Finite form of "f = g_{h,z} with R(h, z)": the prefix is coherent and the relation accepts the decoded pair.

    The relation receives the longest prefixes of h and z the input determines.
    """
    if not coherence_check(prefix):
        return False
    odd = len(prefix) - 1 if len(prefix) % 2 == 0 else len(prefix) - 2
    if odd < 1:
        return relation(tuple(prefix[::2]), ())
    h_part, z_part = pair_decode(prefix[odd])
    return relation(h_part, z_part)
