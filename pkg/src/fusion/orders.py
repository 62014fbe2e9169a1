# -*- coding: utf-8 -*-
""" Finite strings, their orderings and the integer codings every construction is indexed by.

    FinBits and FinWord are plain tuples of ints; all functions here are pure. """

import math
from enum import Enum
from itertools import product
from typing import Any, Callable, Iterator, Optional, Sequence, Tuple

from .errors import LengthMismatchError
from .utils import Report, get_logger

logger = get_logger(__name__)

FinBits = Tuple[int, ...]
FinWord = Tuple[int, ...]


class OrderVerdict(Enum):
    LESS = -1
    EQUAL = 0
    GREATER = 1

    @classmethod
    def of(cls, a: Any, b: Any) -> "OrderVerdict":
        if a < b:
            return cls.LESS
        if a > b:
            return cls.GREATER
        return cls.EQUAL


def is_prefix(s: Sequence[int], t: Sequence[int]) -> bool:
    """s ⊆ t as finite sequences."""
    return len(s) <= len(t) and tuple(t[:len(s)]) == tuple(s)


def comparable(s: Sequence[int], t: Sequence[int]) -> bool:
    return is_prefix(s, t) or is_prefix(t, s)


def lex_compare(a: Sequence[int], b: Sequence[int]) -> OrderVerdict:
    """Lexicographic order on bit strings. A proper prefix comes before its extensions."""
    return OrderVerdict.of(tuple(a), tuple(b))


def maxlex_compare(a: Sequence[Any], b: Sequence[Any],
                   compare: Optional[Callable[[Any, Any], OrderVerdict]] = None) -> OrderVerdict:
    """Maximolexicographic order: shorter sequences first, equal lengths compared at the first difference.

    Args:
        a (Sequence): First sequence
        b (Sequence): Second sequence
        compare (Callable, optional): Entry comparison. Defaults to the natural order of the entries.

    Returns:
        OrderVerdict: The verdict for a against b
    """
    if len(a) != len(b):
        return OrderVerdict.of(len(a), len(b))
    compare = compare or OrderVerdict.of
    for x, y in zip(a, b):
        verdict = compare(x, y)
        if verdict != OrderVerdict.EQUAL:
            return verdict
    return OrderVerdict.EQUAL


def strings_of_length(n: int) -> Iterator[FinBits]:
    """All bit strings of length n in lex order."""
    return product((0, 1), repeat=n)


def strings_upto(depth: int) -> Iterator[FinBits]:
    """All bit strings of length at most depth, in maxlex order (node_index order)."""
    for n in range(depth + 1):
        yield from strings_of_length(n)


def delta(n: int, k: int) -> int:
    """Diagonal enumeration of ℕ×ℕ: (n+k+1)(n+k)/2 + n."""
    return (n + k + 1) * (n + k) // 2 + n


def delta_inv(m: int) -> Tuple[int, int]:
    if m < 0:
        raise ValueError(f"delta_inv expects a natural number, got {m}")
    w = (math.isqrt(8 * m + 1) - 1) // 2
    n = m - w * (w + 1) // 2
    return n, w - n


def cantor_pair(a: int, b: int) -> int:
    """CantorPair(a, b) = (a+b)(a+b+1)/2 + a, the same closed form as delta."""
    return delta(a, b)


def cantor_unpair(m: int) -> Tuple[int, int]:
    return delta_inv(m)


def node_index(c: Sequence[int]) -> int:
    """Length-lexicographic index of a bit string: ∅ ↦ 0, ⟨0⟩ ↦ 1, ⟨1⟩ ↦ 2, ⟨0,0⟩ ↦ 3, ..."""
    value = 0
    for bit in c:
        value = 2 * value + bit
    return (1 << len(c)) - 1 + value


def node_unindex(m: int) -> FinBits:
    if m < 0:
        raise ValueError(f"node_unindex expects a natural number, got {m}")
    length = (m + 1).bit_length() - 1
    value = m + 1 - (1 << length)
    return tuple((value >> (length - 1 - i)) & 1 for i in range(length))


def seq_code(w: Sequence[int]) -> int:
    """code(∅) = 0, code(w⌢k) = CantorPair(code(w), k) + 1."""
    code = 0
    for k in w:
        code = cantor_pair(code, k) + 1
    return code


def seq_decode(m: int) -> FinWord:
    if m < 0:
        raise ValueError(f"seq_decode expects a natural number, got {m}")
    entries = []
    while m > 0:
        m, k = cantor_unpair(m - 1)
        entries.append(k)
    return tuple(reversed(entries))


def pair_code(s0: Sequence[int], s1: Sequence[int]) -> int:
    """Codes an equal-length pair of words as seq_code of the componentwise CantorPair zip.

    Raises:
        LengthMismatchError: If the components have different lengths
    """
    if len(s0) != len(s1):
        raise LengthMismatchError(f"pair_code needs equal lengths, got {len(s0)} and {len(s1)}")
    return seq_code(tuple(cantor_pair(a, b) for a, b in zip(s0, s1)))


def pair_decode(m: int) -> Tuple[FinWord, FinWord]:
    """Returns (c₀(m), c₁(m))."""
    zipped = [cantor_unpair(v) for v in seq_decode(m)]
    return tuple(a for a, _ in zipped), tuple(b for _, b in zipped)


def selftest(max_code: int = 10_000, max_length: int = 8, diagonal: int = 100) -> Report:
    """Brute-force round trips of every coding map on 0..max_code.

    Args:
        max_code (int, optional): Largest code value checked. Defaults to 10000.
        max_length (int, optional): Longest bit string for the node_index order check. Defaults to 8.
        diagonal (int, optional): Bound for the row property of delta. Defaults to 100.

    Returns:
        Report: One check per property, with the first counterexample as witness
    """
    report = Report("orders-selftest", {"max": max_code, "max_length": max_length, "diagonal": diagonal})

    witness = next((m for m in range(max_code + 1) if delta(*delta_inv(m)) != m), None)
    report.add("delta_roundtrip", witness is None, witness)

    side = math.isqrt(max_code)
    seen = {}
    witness = None
    for n, k in product(range(side + 1), repeat=2):
        m = delta(n, k)
        if m in seen or delta_inv(m) != (n, k):
            witness = [[n, k], list(seen.get(m, ()))]
            break
        seen[m] = (n, k)
    report.add("delta_injective", witness is None, witness)

    witness = next((m for m in range(diagonal + 1) if delta_inv(m)[0] > m), None)
    report.add("delta_rows", witness is None, witness)

    witness = next((m for m in range(max_code + 1) if node_index(node_unindex(m)) != m), None)
    report.add("node_index_roundtrip", witness is None, witness)

    witness = None
    for expected, c in enumerate(strings_upto(max_length)):
        if node_index(c) != expected:
            witness = list(c)
            break
    report.add("node_index_maxlex", witness is None, witness)

    witness = next((m for m in range(max_code + 1) if seq_code(seq_decode(m)) != m), None)
    report.add("seq_code_roundtrip", witness is None, witness)

    witness = None
    for m in range(max_code + 1):
        s0, s1 = pair_decode(m)
        if len(s0) != len(s1) or pair_code(s0, s1) != m:
            witness = m
            break
    report.add("pair_code_roundtrip", witness is None, witness)

    if not report.passed:
        logger.warning(f"orders self-test failed: {[c.name for c in report.failures()]}")
    return report
