# -*- coding: utf-8 -*-
""" Codes for continuous functions: monotone, proper maps from finite bit strings (or tuples of them) to finite
    words, each carrying an explicit properness modulus D with lh(s) ≥ D(n) ⟹ lh(apply(s)) ≥ n.

    Backends are finite-state transducers and finite tables; product codes combine single codes coordinatewise. """

import math
from abc import ABC, abstractmethod
from itertools import product
from typing import Callable, Dict, Hashable, List, Optional, Sequence, Tuple

import networkx as nx

from .errors import ModulusError
from .orders import FinBits, FinWord, is_prefix, strings_of_length, strings_upto
from .utils import Report, derive_seed, get_logger, hash_bits

logger = get_logger(__name__)

EXHAUSTIVE_LIMIT = 4096
SAMPLED_INPUTS = 256

Prefixes = Callable[[int], FinBits]


class Code(ABC):
    """A code f for a continuous function f*: 2^ω → ω^ω."""

    name = "code"

    @abstractmethod
    def apply(self, s: Sequence[int]) -> FinWord:
        ...

    @abstractmethod
    def modulus(self, n: int) -> int:
        ...

    def __call__(self, s: Sequence[int]) -> FinWord:
        return self.apply(s)

    def least_extension(self, s: Sequence[int], n: int, limit: int) -> Optional[FinBits]:
        """An extension w with lh(w) ≤ limit and lh(apply(s⌢w)) ≥ n, or None.

        Backends that can bound their output over all extensions return the lex-least w of least length; this
        default only walks the leftmost path 0^d.
        """
        s = tuple(s)
        for d in range(limit + 1):
            if len(self.apply(s + (0,) * d)) >= n:
                return (0,) * d
        return None


class TransducerCode(Code):
    """
    Code induced by a deterministic transducer: the output on s is the concatenation of the words emitted
    while reading s from the start state.

    The transition table must be total on (state, bit). Every cycle must emit, which is exactly properness;
    the modulus is the least input length whose minimal output reaches n.
    """

    def __init__(self, states: Sequence[Hashable], start: Hashable,
                 trans: Dict[Tuple[Hashable, int], Tuple[Hashable, Sequence[int]]], name: str = "transducer"):
        self.states = list(states)
        self.start = start
        self.trans = {(q, int(b)): (r, tuple(out)) for (q, b), (r, out) in trans.items()}
        self.name = name
        for q in self.states:
            for b in (0, 1):
                if (q, b) not in self.trans:
                    raise ValueError(f"Transducer {name} has no transition for state {q!r} on bit {b}")
        self._min_out: List[Dict[Hashable, int]] = [{q: 0 for q in self.states}]
        self._max_out: List[Dict[Hashable, int]] = [{q: 0 for q in self.states}]

    @classmethod
    def echo(cls) -> "TransducerCode":
        """Emits every input bit."""
        return cls([0], 0, {(0, 0): (0, (0,)), (0, 1): (0, (1,))}, name="echo")

    @classmethod
    def constant(cls, value: int = 0) -> "TransducerCode":
        """Emits `value` once per input bit."""
        return cls([0], 0, {(0, 0): (0, (value,)), (0, 1): (0, (value,))}, name=f"constant-{value}")

    def run(self, s: Sequence[int]) -> Tuple[Hashable, FinWord]:
        state = self.start
        out: List[int] = []
        for bit in s:
            state, emitted = self.trans[(state, bit)]
            out.extend(emitted)
        return state, tuple(out)

    def apply(self, s: Sequence[int]) -> FinWord:
        return self.run(s)[1]

    def reachable(self) -> set:
        return {self.start} | nx.descendants(self.graph(), self.start)

    def graph(self, silent_only: bool = False) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(self.states)
        for (q, b), (r, out) in self.trans.items():
            if not silent_only or not out:
                graph.add_edge(q, r, bit=b)
        return graph

    def silent_cycle(self) -> Optional[List[Hashable]]:
        """A reachable cycle of transitions that emit nothing, as a list of states, or None."""
        graph = self.graph(silent_only=True).subgraph(self.reachable())
        try:
            edges = nx.find_cycle(graph)
        except nx.NetworkXNoCycle:
            return None
        return [q for q, _ in edges]

    def _extend_min_out(self) -> None:
        previous = self._min_out[-1]
        self._min_out.append({q: min(len(self.trans[(q, b)][1]) + previous[self.trans[(q, b)][0]] for b in (0, 1))
                              for q in self.states})

    def modulus(self, n: int) -> int:
        """Least L such that every input of length L yields at least n symbols.

        Raises:
            ModulusError: If no such L exists (a reachable silent cycle)
        """
        limit = (n + 1) * (len(self.states) + 1)
        for length in range(limit + 1):
            while len(self._min_out) <= length:
                self._extend_min_out()
            if self._min_out[length][self.start] >= n:
                return length
        raise ModulusError(f"{self.name} has no modulus for {n}: a reachable cycle emits nothing")

    def max_out(self, length: int) -> Dict[Hashable, int]:
        """State -> the most symbols any input of the given length emits from that state."""
        while len(self._max_out) <= length:
            previous = self._max_out[-1]
            self._max_out.append({q: max(len(self.trans[(q, b)][1]) + previous[self.trans[(q, b)][0]] for b in (0, 1))
                                  for q in self.states})
        return self._max_out[length]

    def pad(self, state: Hashable, need: int, length: int) -> FinBits:
        """Lex-least input of exactly `length` bits emitting at least `need` symbols from state.

        Raises:
            ValueError: If no input of that length emits enough
        """
        if self.max_out(length)[state] < need:
            raise ValueError(f"{self.name} cannot emit {need} symbols from {state!r} in {length} bits")
        word = []
        for remaining in range(length, 0, -1):
            for bit in (0, 1):
                target, out = self.trans[(state, bit)]
                if len(out) + self.max_out(remaining - 1)[target] >= need:
                    break
            word.append(bit)
            state, need = target, need - len(out)
        return tuple(word)

    def least_extension(self, s: Sequence[int], n: int, limit: int) -> Optional[FinBits]:
        state, out = self.run(s)
        need = n - len(out)
        length = next((k for k in range(limit + 1) if self.max_out(k)[state] >= need), None)
        return None if length is None else self.pad(state, need, length)

    def to_json(self) -> dict:
        return {"type": "transducer", "states": self.states, "start": self.start, "arity": 1,
                "trans": [{"from": q, "bit": b, "to": r, "out": list(out)} for (q, b), (r, out) in self.trans.items()]}


class TableCode(Code):
    """
    Code given by a finite table on strings of length ≤ depth. A shorter string takes the value of its longest
    tabled prefix (∅ if none is tabled); a deeper one extends its depth-prefix value by one tail symbol per
    extra bit.
    """

    TAILS = ("repeat-last", "zeros")

    def __init__(self, table: Dict[FinBits, Sequence[int]], depth: int, tail: str = "repeat-last", name: str = "table"):
        if tail not in self.TAILS:
            raise ValueError(f"Unknown tail rule {tail}, expected one of {self.TAILS}")
        self.table = {tuple(s): tuple(w) for s, w in table.items()}
        self.depth = depth
        self.tail = tail
        self.name = name
        self._min_at_depth = min(len(self.apply(s)) for s in strings_of_length(depth))

    def _lookup(self, s: FinBits) -> FinWord:
        for n in range(len(s), -1, -1):
            value = self.table.get(s[:n])
            if value is not None:
                return value
        return ()

    def apply(self, s: Sequence[int]) -> FinWord:
        s = tuple(s)
        if len(s) <= self.depth:
            return self._lookup(s)
        base = self._lookup(s[:self.depth])
        symbol = base[-1] if base and self.tail == "repeat-last" else 0
        return base + (symbol,) * (len(s) - self.depth)

    def modulus(self, n: int) -> int:
        return self.depth + max(0, n - self._min_at_depth)

    def least_extension(self, s: Sequence[int], n: int, limit: int) -> Optional[FinBits]:
        # bits past the table depth only add tail symbols, whatever their values
        s = tuple(s)
        for length in range(limit + 1):
            head = max(0, min(length, self.depth - len(s)))
            for w in strings_of_length(head):
                w = w + (0,) * (length - head)
                if len(self.apply(s + w)) >= n:
                    return w
        return None

    def to_json(self) -> dict:
        return {"type": "table", "depth": self.depth, "tail": self.tail,
                "table": [[list(s), list(w)] for s, w in sorted(self.table.items(), key=lambda kv: (len(kv[0]), kv[0]))]}


class ProductCode(ABC):
    """A code on tuples s̄ of bit strings with lh(s̄) ≤ arity; the modulus refers to the least coordinate length."""

    arity = 0
    name = "product"

    @abstractmethod
    def apply(self, tup: Sequence[Sequence[int]]) -> FinWord:
        ...

    @abstractmethod
    def modulus(self, n: int) -> int:
        ...

    def __call__(self, tup: Sequence[Sequence[int]]) -> FinWord:
        return self.apply(tup)


class WrappedProductCode(ProductCode):
    """Arity one: a single code read on the only coordinate."""

    arity = 1

    def __init__(self, code: Code):
        self.code = code
        self.name = f"wrapped-{code.name}"

    def apply(self, tup: Sequence[Sequence[int]]) -> FinWord:
        return self.code.apply(tup[0] if tup else ())

    def modulus(self, n: int) -> int:
        return self.code.modulus(n)


class InterleavedProductCode(ProductCode):
    """
    Arity α: output position j is position j div α of coordinate j mod α. The output stops at the first position
    whose coordinate is missing or not yet long enough.
    """

    def __init__(self, codes: Sequence[Code]):
        if not codes:
            raise ValueError("InterleavedProductCode needs at least one coordinate code, use ConstantProductCode for arity 0")
        self.codes = list(codes)
        self.arity = len(self.codes)
        self.name = "interleaved-" + "-".join(code.name for code in self.codes)

    def apply(self, tup: Sequence[Sequence[int]]) -> FinWord:
        outs = [code.apply(s) for code, s in zip(self.codes, tup)]
        word: List[int] = []
        j = 0
        while True:
            k, pos = j % self.arity, j // self.arity
            if k >= len(outs) or pos >= len(outs[k]):
                return tuple(word)
            word.append(outs[k][pos])
            j += 1

    def modulus(self, n: int) -> int:
        per_coordinate = math.ceil(n / self.arity)
        return max(code.modulus(per_coordinate) for code in self.codes)


class ConstantProductCode(ProductCode):
    """Arity zero: the only input is the empty tuple and the output is a fixed word."""

    arity = 0

    def __init__(self, word: Sequence[int]):
        self.word = tuple(word)
        self.name = f"constant-word-{len(self.word)}"

    def apply(self, tup: Sequence[Sequence[int]]) -> FinWord:
        return self.word

    def modulus(self, n: int) -> int:
        if n > len(self.word):
            raise ModulusError(f"Constant word of length {len(self.word)} has no position {n - 1}")
        return 0


def as_product(code, arity: int = 1) -> ProductCode:
    """Promotes a single code to a product code of the given arity by interleaving copies of it."""
    if isinstance(code, ProductCode):
        return code
    if arity == 1:
        return WrappedProductCode(code)
    return InterleavedProductCode([code] * arity)


def eval_prefix(code: Code, s: Sequence[int]) -> FinWord:
    return code.apply(tuple(s))


def eval_star(code: Code, branch: Prefixes, n: int) -> FinWord:
    """The first values (at least n) of f*(x), read at depth D(n) of the branch.

    Raises:
        ModulusError: If the code emits fewer than n symbols there
    """
    depth = code.modulus(n)
    out = code.apply(branch(depth))
    if len(out) < n:
        raise ModulusError(f"{code.name} emitted {len(out)} < {n} symbols at its modulus depth {depth}")
    return out


def eval_product_prefix(code: ProductCode, tup: Sequence[Sequence[int]]) -> FinWord:
    if len(tup) > code.arity:
        raise ValueError(f"Tuple of length {len(tup)} exceeds the arity {code.arity} of {code.name}")
    return code.apply(tuple(tuple(s) for s in tup))


def square_prefix(branches: Sequence[Prefixes], n: int) -> Tuple[FinBits, ...]:
    return tuple(branch(n) for branch in branches)


def eval_product_star(code: ProductCode, branches: Sequence[Prefixes], n: int) -> FinWord:
    """f*(x̄) through square prefixes ⟨x̄(0)↾D(n), ..., x̄(α−1)↾D(n)⟩.

    Raises:
        ModulusError: If the code emits fewer than n symbols there
    """
    if len(branches) != code.arity:
        raise ValueError(f"{code.name} has arity {code.arity}, got {len(branches)} branches")
    depth = code.modulus(n)
    out = code.apply(square_prefix(branches, depth))
    if len(out) < n:
        raise ModulusError(f"{code.name} emitted {len(out)} < {n} symbols at its modulus depth {depth}")
    return out


def _inputs_of_length(length: int, tag: int, seed: int) -> List[FinBits]:
    """All strings of the given length when there are at most EXHAUSTIVE_LIMIT of them, else seeded samples."""
    if 2 ** length <= EXHAUSTIVE_LIMIT:
        return list(strings_of_length(length))
    samples = []
    for i in range(SAMPLED_INPUTS):
        bit = hash_bits(derive_seed(seed, tag, i))
        samples.append(tuple(bit(step) for step in range(length)))
    return samples


def validate_code(code: Code, depth: int, seed: int = 0) -> Report:
    """Monotonicity on immediate extensions, modulus soundness and, for transducers, cycle emission."""
    report = Report("validate-code", {"code": code.name, "depth": depth, "seed": seed})

    witness = None
    for s in strings_upto(depth - 1):
        for i in (0, 1):
            if not is_prefix(code.apply(s), code.apply(s + (i,))):
                witness = [list(s), list(s + (i,))]
                break
        if witness:
            break
    report.add("monotone", witness is None, witness)

    witness, detail = None, ""
    for n in range(depth + 1):
        try:
            length = code.modulus(n)
        except ModulusError as e:
            witness, detail = [n], str(e)
            break
        short = next((s for s in _inputs_of_length(length, n, seed) if len(code.apply(s)) < n), None)
        if short is not None:
            witness = [n, list(short)]
            break
    report.add("modulus", witness is None, witness, detail)

    if isinstance(code, TransducerCode):
        cycle = code.silent_cycle()
        report.add("cycle_emission", cycle is None, cycle)
    else:
        report.skip("cycle_emission", "not a transducer")

    if not report.passed:
        logger.warning(f"{code.name} fails {[c.name for c in report.failures()]}")
    return report


def _tuples_of_length(arity: int, length: int, tag: int, seed: int) -> List[Tuple[FinBits, ...]]:
    if 2 ** (arity * length) <= EXHAUSTIVE_LIMIT:
        return list(product(list(strings_of_length(length)), repeat=arity))
    samples = []
    for i in range(SAMPLED_INPUTS):
        samples.append(tuple(tuple(hash_bits(derive_seed(seed, tag, i, k))(step) for step in range(length))
                             for k in range(arity)))
    return samples


def validate_product_code(code: ProductCode, depth: int, seed: int = 0) -> Report:
    """Monotonicity under ⊑ on square tuples and their immediate extensions, and modulus soundness."""
    report = Report("validate-code", {"code": code.name, "arity": code.arity, "depth": depth, "seed": seed})
    witness = None
    for length in range(depth):
        for tup in _tuples_of_length(code.arity, length, length, seed):
            out = code.apply(tup)
            for cut in range(len(tup)):
                if not is_prefix(code.apply(tup[:cut]), code.apply(tup[:cut + 1])):
                    witness = [[list(s) for s in tup[:cut]], [list(s) for s in tup[:cut + 1]]]
            for k, i in product(range(code.arity), (0, 1)):
                longer = tup[:k] + (tup[k] + (i,),) + tup[k + 1:]
                if not is_prefix(out, code.apply(longer)):
                    witness = [[list(s) for s in tup], [list(s) for s in longer]]
            if witness:
                break
        if witness:
            break
    report.add("monotone", witness is None, witness)

    witness, detail = None, ""
    for n in range(depth + 1):
        try:
            length = code.modulus(n)
        except ModulusError as e:
            witness, detail = [n], str(e)
            break
        short = next((tup for tup in _tuples_of_length(code.arity, length, 1000 + n, seed)
                      if len(code.apply(tup)) < n), None)
        if short is not None:
            witness = [n, [list(s) for s in short]]
            break
    report.add("modulus", witness is None, witness, detail)

    if not report.passed:
        logger.warning(f"{code.name} fails {[c.name for c in report.failures()]}")
    return report
