# -*- coding: utf-8 -*-
""" Seeded random instances for tests and the CLI: transducer codes, skeleton trees, certified families,
    fusion instances, encoding pairs and ned instances. """

from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .codes import ConstantProductCode, InterleavedProductCode, ProductCode, TransducerCode, WrappedProductCode
from .ned import NedInput, compute_m_seq
from .orders import FinBits, node_index
from .product_catch import EDFamily, catch_product
from .trees import SkeletonTree
from .utils import derive_seed

Rule = Callable[[int], int]


def random_transducer(rng: np.random.Generator, n_states: int = 3, max_out: int = 2,
                      alphabet: int = 2, name: str = "random") -> TransducerCode:
    """Random transducer whose silent transitions only move to higher-numbered states, so no cycle is silent."""
    trans = {}
    for q in range(n_states):
        for b in (0, 1):
            target = int(rng.integers(n_states))
            low = 0 if target > q else 1
            length = int(rng.integers(low, max(low, max_out) + 1))
            out = tuple(int(v) for v in rng.integers(alphabet, size=length))
            trans[(q, b)] = (target, out)
    return TransducerCode(list(range(n_states)), 0, trans, name=name)


def random_skeleton_tree(seed: int, max_pad: int = 2) -> SkeletonTree:
    """t_∅ is a hashed pad and t_{c⌢i} = t_c⌢i⌢pad(c⌢i); pads have hashed length ≤ max_pad and hashed bits."""

    def pad(c: FinBits) -> FinBits:
        value = derive_seed(seed, node_index(c))
        length = value % (max_pad + 1)
        return tuple((value >> (8 + i)) & 1 for i in range(length))

    def rule(c: FinBits) -> FinBits:
        t = pad(())
        for k in range(len(c)):
            t = t + (c[k],) + pad(c[:k + 1])
        return t

    return SkeletonTree(rule, name=f"random-{seed}")


def _affine_bound(a: int, b: int, a2: int, b2: int) -> int:
    """Least bound beyond which a·n + b ≠ a2·n + b2 (the lines differ)."""
    if a == a2:
        return 0
    n, rem = divmod(b2 - b, a - a2)
    return n + 1 if rem == 0 and n >= 0 else 0


def random_family(rng: np.random.Generator, size: int, minimum: int = 2, alphabet: int = 2, dip: int = 0,
                  lead: Optional[Dict[int, int]] = None) -> EDFamily:
    """Distinct members with exact certificates. Each follows a line a·n + b (a ∈ {1, 2, 3}, b ≥ minimum) after an
    initial segment of random length below `dip` whose values lie below `alphabet`.

    `lead` fixes values of the first member on its segment, stretched to cover them.
    """
    lines: List[Tuple[int, int]] = []
    while len(lines) < size:
        line = (int(rng.integers(1, 4)), int(rng.integers(minimum, minimum + 10)))
        if line not in lines:
            lines.append(line)
    segments = [[int(v) for v in rng.integers(alphabet, size=int(rng.integers(dip)))] if dip else [] for _ in lines]
    if lead and segments:
        head = segments[0] + [0] * max(0, max(lead) + 1 - len(segments[0]))
        for n, value in lead.items():
            head[n] = value
        segments[0] = head
    members = [(lambda n, a=a, b=b, early=tuple(early): early[n] if n < len(early) else a * n + b)
               for (a, b), early in zip(lines, segments)]
    certificates = {(j, k): max(len(segments[j]), len(segments[k]), _affine_bound(*lines[j], *lines[k]))
                    for j in range(size) for k in range(j + 1, size)}
    names = [f"{a}n+{b}" + (f"/{len(early)}" if early else "") for (a, b), early in zip(lines, segments)]
    return EDFamily(members, certificates, names)


def random_product_code(rng: np.random.Generator, arity: int, n_states: int = 3, alphabet: int = 2) -> ProductCode:
    """Product code of random transducers with outputs below `alphabet` (a random constant word for arity 0)."""
    if arity == 0:
        return ConstantProductCode(tuple(int(v) for v in rng.integers(alphabet, size=64)))
    codes = [random_transducer(rng, n_states, alphabet=alphabet, name=f"random-{k}") for k in range(arity)]
    if arity == 1:
        return WrappedProductCode(codes[0])
    return InterleavedProductCode(codes)


def fusion_instance(seed: int, arity: int, family_size: int, alphabet: int = 3, dip: int = 8,
                    search_cap: int = 4096) -> Tuple[ProductCode, EDFamily]:
    """A random product code and a family whose early values fall inside the code's alphabet.

    The first member copies, on the positions stage 1 catches, what catch_product takes when nothing is avoided,
    so a run against the family always rejects a candidate.
    """
    rng = np.random.default_rng(seed)
    code = random_product_code(rng, arity, alphabet=alphabet)
    free = catch_product(arity, code, EDFamily(), search_cap, 1)
    return code, random_family(rng, family_size, alphabet=alphabet, dip=dip, lead=free.h0)


def _table_rule(values: np.ndarray, tail: Optional[Rule] = None) -> Rule:
    table = [int(v) for v in values]
    return lambda n: table[n] if n < len(table) else (tail(n) if tail else table[n % len(table)])


def encoding_pair(seed: int, length: int = 64, high: int = 5) -> Tuple[Rule, Rule]:
    rng = np.random.default_rng(seed)
    return _table_rule(rng.integers(high, size=length)), _table_rule(rng.integers(high, size=length))


def ned_instance(seed: int, horizon: int = 1000, family_size: int = 3, cert_horizon: int = 50,
                 high: int = 4) -> NedInput:
    """Random instance with honest bounds and a dominating g*.

    f and each f_j take small random values, so they collide often below B(j); from B(j) on f_j(n) = f(n) + 1 + j.
    h* copies f on a random set.
    """
    rng = np.random.default_rng(seed)
    span = horizon + cert_horizon + 64
    f_values = [int(v) for v in rng.integers(high, size=span)]
    f = _table_rule(np.array(f_values), tail=lambda n: n % high)
    bounds = sorted(int(v) for v in rng.integers(0, horizon // 4 + 1, size=family_size))
    family = []
    for j, bound in enumerate(bounds):
        early = rng.integers(high, size=bound)
        family.append(lambda n, j=j, bound=bound, early=early: int(early[n]) if n < bound else f(n) + 1 + j)

    agree = rng.random(span) < 0.5
    noise = rng.integers(high, size=span)
    h_values = [f_values[n] if agree[n] else int(noise[n]) for n in range(span)]

    # with this gap the blocks pass the horizon well within the computed thresholds
    gap = horizon // 16 + 1
    bounds_only = NedInput(f, family, bounds, lambda n: 0, lambda k: k, cert_horizon)
    m_seq = compute_m_seq(bounds_only, 32)
    g_values = []
    for m in m_seq:
        previous = g_values[-1] + gap if g_values else 0
        g_values.append(max(m, previous) + int(rng.integers(0, 3)))
        if g_values[-1] > horizon:
            break
    last = g_values[-1]
    g_star = lambda k: g_values[k] if k < len(g_values) else last + (k - len(g_values) + 1)
    h_star = _table_rule(np.array(h_values), tail=f)
    return NedInput(f, family, bounds, h_star, g_star, cert_horizon)
