# -*- coding: utf-8 -*-
""" This file contains the fusion construction over finite products of perfect trees: ProductCondition and its
    ≤ˢₙ refinement test, certified eventually different families, catch_product with its bookkeeping maps
    (#̄, d, h₀) and its verifier, and the finite-stage greedy recursion that stacks catch_product runs. """

from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Dict, Hashable, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

from joblib import Parallel, delayed
from tqdm import tqdm

from .codes import (InterleavedProductCode, ProductCode, TransducerCode, WrappedProductCode, eval_product_prefix,
                    eval_product_star)
from .errors import AcceptanceError, CertificateError, SearchCapExhausted
from .orders import FinBits, FinWord, is_prefix, strings_of_length
from .trees import SkeletonTree, full_tree, graft, is_subtree
from .utils import Report, derive_seed, get_logger, hash_bits

logger = get_logger(__name__)

Rule = Callable[[int], int]
TupleIndex = Tuple[FinBits, ...]
StageKey = Tuple[int, TupleIndex]


class ProductCondition:
    """A condition in the α-fold product of perfect-tree forcing: one SkeletonTree per coordinate."""

    def __init__(self, coords: Sequence[SkeletonTree]):
        self.coords = tuple(coords)

    @classmethod
    def full(cls, arity: int) -> "ProductCondition":
        return cls([full_tree() for _ in range(arity)])

    @property
    def arity(self) -> int:
        return len(self.coords)

    def __getitem__(self, k: int) -> SkeletonTree:
        return self.coords[k]

    def front_indices(self, n: int) -> List[TupleIndex]:
        """Skeleton indices of tuple_front(self, n), in the same order."""
        return list(product(list(strings_of_length(n)), repeat=min(n, self.arity)))

    def tuple_front(self, n: int) -> List[Tuple[FinBits, ...]]:
        return [tuple(self.coords[k].skeleton(c) for k, c in enumerate(index)) for index in self.front_indices(n)]

    def with_tuple(self, u) -> "ProductCondition":
        """Coordinatewise restriction to a partial tuple (a sequence or a coordinate -> node mapping).

        Raises:
            AcceptanceError: Naming the first coordinate whose tree does not contain its node
        """
        items = u.items() if isinstance(u, dict) else enumerate(u)
        coords = list(self.coords)
        for k, node in sorted(items):
            if k >= self.arity or not coords[k].contains(node):
                raise AcceptanceError(f"Coordinate {k} does not accept {list(node)}", coordinate=k)
            coords[k] = coords[k].restrict(node)
        return ProductCondition(coords)

    def refines_mod(self, other: "ProductCondition", coordinates: Iterable[int], n: int, depth: int) -> bool:
        return refines_mod(self, other, coordinates, n, depth)


def tuple_front(condition: ProductCondition, n: int) -> List[Tuple[FinBits, ...]]:
    return condition.tuple_front(n)


def with_tuple(condition: ProductCondition, u) -> ProductCondition:
    return condition.with_tuple(u)


def refines_mod(q: ProductCondition, p: ProductCondition, coordinates: Iterable[int], n: int, depth: int) -> bool:
    """q ≤ˢₙ p: q is coordinatewise a subtree of p (checked to depth) and keeps the n-th fronts of the coordinates in S."""
    if q.arity != p.arity:
        return False
    if not all(is_subtree(q[k], p[k], depth) for k in range(q.arity)):
        return False
    return all(q[s].nth_splitting_front(n) == p[s].nth_splitting_front(n) for s in coordinates)


@dataclass
class EDFamily:
    """
    Finite list of total functions with pairwise eventual-difference certificates: for a stored bound b of the
    pair (j, j′), members[j](n) ≠ members[j′](n) for every n ≥ b.
    """
    members: List[Rule] = field(default_factory=list)
    certificates: Dict[Tuple[int, int], int] = field(default_factory=dict)
    names: List[str] = field(default_factory=list)

    def __post_init__(self):
        self.certificates = {(min(j, k), max(j, k)): b for (j, k), b in self.certificates.items()}
        if len(self.names) < len(self.members):
            self.names = self.names + [f"f{j}" for j in range(len(self.names), len(self.members))]

    def __len__(self) -> int:
        return len(self.members)

    def __getitem__(self, j: int) -> Rule:
        return self.members[j]

    def bound(self, j: int, k: int) -> Optional[int]:
        return self.certificates.get((min(j, k), max(j, k)))

    def verify(self, horizon: int) -> Report:
        """Direct evaluation of every certificate on [b, b + horizon)."""
        report = Report("ed-family", {"size": len(self), "horizon": horizon})
        witness = None
        for j in range(len(self)):
            for k in range(j + 1, len(self)):
                b = self.bound(j, k)
                if b is None:
                    witness = {"pair": [j, k], "missing": True}
                    break
                clash = next((n for n in range(b, b + horizon) if self.members[j](n) == self.members[k](n)), None)
                if clash is not None:
                    witness = {"pair": [j, k], "n": clash}
                    break
            if witness:
                break
        report.add("certificates", witness is None, witness)
        return report

    def check(self, horizon: int) -> None:
        """Raises CertificateError when a certificate is contradicted on its spot-check window."""
        failed = self.verify(horizon).failures()
        if failed:
            raise CertificateError(f"Certificate contradicted: {failed[0].witness}", witness=failed[0].witness)

    def extended(self, front: Sequence[Rule], certificates: Dict[Tuple[int, int], int],
                 names: Optional[Sequence[str]] = None) -> "EDFamily":
        """New family front + self. Indices of self shift by len(front); certificates involving front are supplied."""
        shift = len(front)
        merged = {(j + shift, k + shift): b for (j, k), b in self.certificates.items()}
        merged.update(certificates)
        return EDFamily(list(front) + self.members, merged, list(names or [f"h{i}" for i in range(shift)]) + self.names)


@dataclass
class ProductCatchResult:
    """
    Outcome of catch_product.

    sharp, d and fronts are keyed by (stage, tuple index); h0 maps each #̄ value to its caught output.
    conditions[n] is the stage-n condition, conditions[-1] the returned one.
    """
    arity: int
    family: EDFamily
    h0: Dict[int, int]
    sharp: Dict[StageKey, int]
    d: Dict[StageKey, Tuple[FinBits, ...]]
    fronts: Dict[StageKey, Tuple[FinBits, ...]]
    conditions: List[ProductCondition]
    depths: Dict[StageKey, int] = field(default_factory=dict)

    @property
    def condition(self) -> ProductCondition:
        return self.conditions[-1]

    @property
    def stages(self) -> int:
        return len(self.conditions) - 1

    def h(self, n: int) -> int:
        """h₀(n) on its domain, else 1 + max{F₀[j](n) : j ≤ n} (0 when no member qualifies)."""
        if n in self.h0:
            return self.h0[n]
        values = [self.family[j](n) for j in range(min(n + 1, len(self.family)))]
        return 1 + max(values) if values else 0

    def keys(self) -> List[StageKey]:
        return sorted(self.sharp)

    def to_json(self) -> dict:
        traces = []
        for stage, index in self.keys():
            key = (stage, index)
            m = self.sharp[key]
            traces.append({"stage": stage, "index": [list(c) for c in index], "front": [list(t) for t in self.fronts[key]],
                           "d": [list(u) for u in self.d[key]], "sharp": m, "value": self.h0.get(m), "depth": self.depths.get(key)})
        return {"h0": [[m, v] for m, v in sorted(self.h0.items())], "frontTraces": traces}


class _Frontier:
    """(state, output length) pairs a transducer can be in after each number of extra bits read past a node."""

    def __init__(self, code: TransducerCode, node: FinBits):
        self.code = code
        self.state, self.fixed = code.run(node)
        self.layers: List[Set[Tuple[Hashable, int]]] = [{(self.state, len(self.fixed))}]

    def emitted(self, step: int) -> Iterator[Tuple[int, int]]:
        """(position, value) of every symbol some path emits while reading extra bit number step + 1."""
        while len(self.layers) <= step + 1:
            self.layers.append({(target, length + len(out)) for q, length in self.layers[-1]
                                for target, out in (self.code.trans[(q, b)] for b in (0, 1))})
        for q, length in self.layers[step]:
            for b in (0, 1):
                for j, value in enumerate(self.code.trans[(q, b)][1]):
                    yield length + j, value

    def reaches(self, need: int, depth: int) -> bool:
        return len(self.fixed) + self.code.max_out(depth)[self.state] >= need

    def padding(self, need: int, depth: int) -> FinBits:
        return self.code.pad(self.state, need - len(self.fixed), depth)

    def hitting(self, position: int, depth: int, accept: Callable[[int], bool]) -> FinBits:
        """Lex-least word of `depth` extra bits that emits `position` with an accepted value."""
        if position < len(self.fixed):
            return (0,) * depth

        def verdict(length: int, out: FinWord) -> Optional[bool]:
            if length <= position < length + len(out):
                return accept(out[position - length])
            return None

        # good[i]: pairs of layer i from which the remaining bits can still emit the position acceptably
        good: List[Set[Tuple[Hashable, int]]] = [set() for _ in range(depth + 1)]
        for i in range(depth - 1, -1, -1):
            for q, length in self.layers[i]:
                for b in (0, 1):
                    target, out = self.code.trans[(q, b)]
                    hit = verdict(length, out)
                    if hit or (hit is None and (target, length + len(out)) in good[i + 1]):
                        good[i].add((q, length))
                        break
        q, length = self.state, len(self.fixed)
        word: List[int] = []
        for i in range(depth):
            for b in (0, 1):
                target, out = self.code.trans[(q, b)]
                hit = verdict(length, out)
                if hit or (hit is None and (target, length + len(out)) in good[i + 1]):
                    break
            word.append(b)
            if hit:
                return tuple(word) + (0,) * (depth - i - 1)
            q, length = target, length + len(out)
        raise ValueError(f"{self.code.name} cannot emit position {position} acceptably within {depth} bits")


def _coordinate_transducers(f: ProductCode) -> Optional[List[TransducerCode]]:
    if isinstance(f, WrappedProductCode) and isinstance(f.code, TransducerCode):
        return [f.code]
    if isinstance(f, InterleavedProductCode) and all(isinstance(code, TransducerCode) for code in f.codes):
        return list(f.codes)
    return None


def _needed(m: int, k: int, arity: int) -> int:
    """Symbols coordinate k must emit for an interleaved word to reach position m."""
    return (m - k) // arity + 1 if k <= m else 0


def _exact_extension(frontiers: Sequence[_Frontier], accept: Callable[[int, int], bool],
                     search_cap: int) -> Optional[Tuple[int, int, Tuple[FinBits, ...]]]:
    """Least depth D ≤ search_cap, then least accepted position m, then the lex-least words of D extra bits, one per
    coordinate, under which the interleaved output has m with an accepted value. None past the cap.

    Coordinates are independent once m is fixed: the one owning m must emit it acceptably, every other one must
    only emit enough symbols for the word to reach m.
    """
    arity = len(frontiers)
    hits: Set[int] = set()

    def collect(pairs: Iterable[Tuple[int, int]], k: int) -> None:
        for position, value in pairs:
            m = position * arity + k
            if m not in hits and accept(m, value):
                hits.add(m)

    for k, frontier in enumerate(frontiers):
        collect(enumerate(frontier.fixed), k)
    for depth in range(search_cap + 1):
        if depth:
            for k, frontier in enumerate(frontiers):
                collect(frontier.emitted(depth - 1), k)
        for m in sorted(hits):
            if not all(frontier.reaches(_needed(m, k, arity), depth) for k, frontier in enumerate(frontiers)):
                continue
            owner = m % arity
            words = tuple(frontier.hitting(m // arity, depth, lambda value: accept(m, value)) if k == owner
                          else frontier.padding(_needed(m, k, arity), depth) for k, frontier in enumerate(frontiers))
            return depth, m, words
    return None


def _least_depth(position_at: Callable[[int], Optional[int]], search_cap: int) -> Tuple[int, int]:
    """Least D ≤ search_cap with position_at(D) not None, by galloping then bisection.

    position_at must be monotone in D.
    """
    m = position_at(0)
    if m is not None:
        return 0, m
    low, high = 0, 1
    while True:
        high = min(high, search_cap)
        m = position_at(high)
        if m is not None:
            break
        if high == search_cap:
            raise SearchCapExhausted(f"No admissible extension up to depth {search_cap}", depth=search_cap)
        low, high = high, high * 2
    # position_at(low) is None, position_at(high) is not
    while high - low > 1:
        mid = (low + high) // 2
        if position_at(mid) is not None:
            high = mid
        else:
            low = mid
    return high, position_at(high)


def _extend(base: ProductCondition, current: Sequence[FinBits], f: ProductCode,
            transducers: Optional[List[TransducerCode]], accept: Callable[[int, int], bool],
            search_cap: int) -> Tuple[int, int, Tuple[FinBits, ...]]:
    """(D, m, words): the extension of the cone indices `current` by one word of D bits per coordinate.

    Raises:
        SearchCapExhausted: If no depth up to search_cap has an accepted position
    """
    if transducers is not None and all(base[k].is_free_at(g) for k, g in enumerate(current)):
        frontiers = [_Frontier(code, base[k].skeleton(g)) for k, (code, g) in enumerate(zip(transducers, current))]
        found = _exact_extension(frontiers, accept, search_cap)
        if found is None:
            raise SearchCapExhausted(f"No admissible extension up to depth {search_cap}", depth=search_cap)
        return found

    def extension(depth: int) -> Tuple[FinBits, ...]:
        return tuple(base[k].skeleton(g + (0,) * depth) for k, g in enumerate(current))

    def position_at(depth: int) -> Optional[int]:
        word = eval_product_prefix(f, extension(depth))
        return next((m for m in range(len(word)) if accept(m, word[m])), None)

    depth, m = _least_depth(position_at, search_cap)
    return depth, m, tuple((0,) * depth for _ in current)


def catch_product(arity: int, f: ProductCode, family: EDFamily, search_cap: int, stages: int,
                  start: Optional[ProductCondition] = None, progress: bool = False) -> ProductCatchResult:
    """Runs `stages` stages of the fusion.

    Stage n walks the n-th tuple front of the stage-(n−1) condition in lex order. For each tuple it extends every
    coordinate's cone node by a word of the same length D, taking the least D at which f has a fresh position m
    whose value avoids F₀[j](m) for j ≤ m, then the least such m, then the lex-least tuple of words. It records
    #̄ = m, h₀(m) = f(ū)(m) and d = ū. The search covers every extension when f is built from transducers and each
    coordinate only appends above its cone node; otherwise it follows the leftmost skeleton path. Coordinates
    below min(n, α) are narrowed inside the cone of their front node; the others are narrowed at the root. At the
    end of the stage the cones are grafted at level n, which leaves every splitting level below n untouched.

    Args:
        arity (int): Number of coordinates α
        f (ProductCode): Code of arity α
        family (EDFamily): The family F₀ the caught h must avoid
        search_cap (int): Largest extension depth tried per tuple
        stages (int): Number of fusion stages
        start (ProductCondition, optional): Initial condition. Defaults to the full product.
        progress (bool, optional): Show a tqdm bar over stages. Defaults to False.

    Returns:
        ProductCatchResult: Bookkeeping tables and the stage conditions

    Raises:
        SearchCapExhausted: Carrying the tuple index, stage and depth reached
    """
    if f.arity != arity:
        raise ValueError(f"Code {f.name} has arity {f.arity}, expected {arity}")
    condition = start or ProductCondition.full(arity)
    if condition.arity != arity:
        raise ValueError(f"Start condition has arity {condition.arity}, expected {arity}")
    conditions = [condition]
    h0: Dict[int, int] = {}
    sharp: Dict[StageKey, int] = {}
    d: Dict[StageKey, Tuple[FinBits, ...]] = {}
    fronts: Dict[StageKey, Tuple[FinBits, ...]] = {}
    depths: Dict[StageKey, int] = {}
    used: set = set()
    transducers = _coordinate_transducers(f)
    forbidden: Dict[int, set] = {}

    def accept(m: int, value: int) -> bool:
        if m in used:
            return False
        if m not in forbidden:
            forbidden[m] = {family[j](m) for j in range(min(m + 1, len(family)))}
        return value not in forbidden[m]

    for n in tqdm(range(1, stages + 1), desc="fusion stages", disable=not progress):
        base = conditions[-1]
        active = min(n, arity)
        cones: List[Dict[FinBits, FinBits]] = [{} for _ in range(active)]
        roots: List[FinBits] = [() for _ in range(arity)]
        for index in base.front_indices(n):
            current = [cones[k].get(c, c) for k, c in enumerate(index)] + roots[active:]
            try:
                depth, m, words = _extend(base, current, f, transducers, accept, search_cap)
            except SearchCapExhausted as e:
                logger.error(f"Search cap {search_cap} exhausted at stage {n}, tuple {index}")
                raise SearchCapExhausted(str(e), tuple_=index, stage=n, depth=search_cap) from e
            u = tuple(base[k].skeleton(g + w) for k, (g, w) in enumerate(zip(current, words)))
            key = (n, index)
            used.add(m)
            h0[m] = eval_product_prefix(f, u)[m]
            sharp[key], d[key], depths[key] = m, u, depth
            fronts[key] = tuple(base[k].skeleton(c) for k, c in enumerate(index))
            for k, (g, w) in enumerate(zip(current, words)):
                if k < active:
                    cones[k][index[k]] = g + w
                else:
                    roots[k] = g + w
        coords = [graft(base[k], n, cones[k]) if k < active else graft(base[k], 0, {(): roots[k]})
                  for k in range(arity)]
        conditions.append(ProductCondition(coords))
        logger.info(f"Stage {n}: {len(base.front_indices(n))} tuples, h0 defined on {len(h0)} positions")

    return ProductCatchResult(arity, family, h0, sharp, d, fronts, conditions, depths)


def _branch_witness(result: ProductCatchResult, f: ProductCode, depth: int, seed: int, sample: int) -> Optional[dict]:
    final = result.condition
    branches = [final[k].branch(hash_bits(derive_seed(seed, sample, k))) for k in range(result.arity)]
    points = []
    for n in range(1, depth + 1):
        index = tuple(branches[k].index(n) for k in range(min(n, result.arity)))
        points.append(((n, index), result.sharp[(n, index)]))
    values = eval_product_star(f, branches, max(m for _, m in points) + 1)
    for (stage, index), m in points:
        if values[m] != result.h(m):
            return {"sample": sample, "stage": stage, "index": [list(c) for c in index], "sharp": m,
                    "h": result.h(m), "f": values[m]}
    return None


def verify_product_catch(result: ProductCatchResult, arity: int, f: ProductCode, family: EDFamily, depth: int,
                         samples: int, seed: int = 0, horizon: int = 1000, n_jobs: int = 1) -> Report:
    """Checks a catch_product result.

    catches: f(d(t̄))(#̄(t̄)) = h(#̄(t̄)) on every front tuple of stages ≤ depth.
    sharp_injective, d_injective: no reuse of positions or extension tuples.
    avoidance: h(n) ≠ F₀[j](n) for j ≤ n < horizon.
    front: each d(t̄) lies below the limit front tuple with the same skeleton index.
    fusion: stage n refines stage n−1 mod ≤^{(n−1)∩α}_{n−1}.
    branch_agreement: along `samples` seeded branch tuples of the limit, h agrees with f* at the #̄ value of every
    stage's front tuple.
    """
    depth = min(depth, result.stages)
    report = Report("catch-product", {"arity": arity, "code": f.name, "family": len(family), "depth": depth,
                                      "samples": samples, "seed": seed, "horizon": horizon})
    keys = [key for key in result.keys() if key[0] <= depth]

    witness = None
    for key in keys:
        m = result.sharp[key]
        out = eval_product_prefix(f, result.d[key])
        if m >= len(out) or out[m] != result.h(m):
            witness = {"stage": key[0], "index": [list(c) for c in key[1]], "sharp": m, "h": result.h(m),
                       "f": out[m] if m < len(out) else None}
            break
    report.add("catches", witness is None, witness)

    seen: Dict[int, StageKey] = {}
    witness = None
    for key in keys:
        m = result.sharp[key]
        if m in seen:
            witness = {"sharp": m, "tuples": [[seen[m][0], [list(c) for c in seen[m][1]]], [key[0], [list(c) for c in key[1]]]]}
            break
        seen[m] = key
    report.add("sharp_injective", witness is None, witness)

    if arity == 0:
        report.skip("d_injective", "arity 0 has a single empty tuple per stage")
    else:
        seen_d: Dict[Tuple[FinBits, ...], StageKey] = {}
        witness = None
        for key in keys:
            u = result.d[key]
            if u in seen_d:
                witness = {"d": [list(x) for x in u], "stages": [seen_d[u][0], key[0]]}
                break
            seen_d[u] = key
        report.add("d_injective", witness is None, witness)

    witness = None
    for n in range(horizon):
        value = result.h(n)
        j = next((j for j in range(min(n + 1, len(family))) if family[j](n) == value), None)
        if j is not None:
            witness = {"n": n, "j": j, "value": value}
            break
    report.add("avoidance", witness is None, witness)

    final = result.condition
    witness = None
    for stage, index in keys:
        u = result.d[(stage, index)]
        for k in range(arity):
            target = final[k].skeleton(index[k]) if k < len(index) else final[k].stem()
            if not is_prefix(u[k], target):
                witness = {"stage": stage, "index": [list(c) for c in index], "coordinate": k}
                break
        if witness:
            break
    report.add("front", witness is None, witness)

    witness = None
    for n in range(1, depth + 1):
        frozen = range(min(n - 1, arity))
        if not refines_mod(result.conditions[n], result.conditions[n - 1], frozen, n - 1, n):
            witness = {"stage": n}
            break
    report.add("fusion", witness is None, witness)

    if samples > 0 and depth > 0:
        witnesses = Parallel(n_jobs=n_jobs, prefer="threads")(
            delayed(_branch_witness)(result, f, depth, seed, sample) for sample in range(samples))
        witness = next((w for w in witnesses if w is not None), None)
        report.add("branch_agreement", witness is None, witness)
    else:
        report.skip("branch_agreement", "no samples requested")

    if not report.passed:
        logger.warning(f"Product catch verification failed: {[c.name for c in report.failures()]}")
    return report


def greedy_med_stage(codes: Sequence[ProductCode], seed_family: EDFamily, search_cap: int, stages: int,
                     progress: bool = False) -> List[ProductCatchResult]:
    """Stage ξ catches codes[ξ] while avoiding [h_0, ..., h_{ξ−1}] + seed_family, in that order.

    Raises:
        SearchCapExhausted: With greedy_stage set to the failing ξ
    """
    results: List[ProductCatchResult] = []
    for xi, code in enumerate(tqdm(codes, desc="greedy stages", disable=not progress)):
        family = seed_family.extended([r.h for r in results], _greedy_certificates(xi, len(seed_family)),
                                      [f"h{i}" for i in range(xi)])
        try:
            result = catch_product(code.arity, code, family, search_cap, stages)
        except SearchCapExhausted as e:
            e.greedy_stage = xi
            raise
        results.append(result)
        logger.info(f"Greedy stage {xi} done with {code.name}")
    return results


def _greedy_certificates(count: int, seed_size: int) -> Dict[Tuple[int, int], int]:
    """Bounds for [h_0..h_{count−1}] + seed: a pair involving some h is separated from the larger index on."""
    certificates = {}
    for i in range(count):
        for j in range(i + 1, count + seed_size):
            certificates[(i, j)] = j
    return certificates


def greedy_family(results: Sequence[ProductCatchResult], seed_family: EDFamily) -> EDFamily:
    """[h_0, ..., h_{k−1}] + seed_family with certificates; a pair involving some h_ξ gets bound max of the indices."""
    return seed_family.extended([r.h for r in results], _greedy_certificates(len(results), len(seed_family)),
                                [f"h{i}" for i in range(len(results))])
