# -*- coding: utf-8 -*-
""" This file contains the class SkeletonTree, a perfect subtree of the full binary tree given by the
    embedding c ↦ t_c of its splitting nodes, together with the operations the constructions need on it:
    membership, splitting fronts, restriction, grafting, pullback and branch maps. """

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

from .errors import AcceptanceError
from .orders import FinBits, OrderVerdict, comparable, is_prefix, lex_compare, node_index, strings_of_length, strings_upto
from .utils import Report, get_logger

logger = get_logger(__name__)

SkeletonRule = Callable[[FinBits], FinBits]


@dataclass
class TreeReport:
    depth: int
    violations: List[Tuple[str, object]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def names(self) -> List[str]:
        return [name for name, _ in self.violations]

    def to_report(self) -> Report:
        report = Report("validate-tree", {"depth": self.depth})
        failed = dict(self.violations)
        for name in ("monotone", "splitting_faithful", "lex_preserving", "injective", "fronts"):
            report.add(name, name not in failed, failed.get(name))
        return report


class SkeletonTree:
    """
    A perfect tree represented intensionally by its splitting skeleton c ↦ t_c.

    The rule must be deterministic. Values are memoized on first query; the memo never changes an answer,
    so concurrent readers always see the same skeleton.

    free_level, when known, is a level from which the skeleton only appends: t_{g⌢w} = t_g⌢w whenever
    lh(g) ≥ free_level. Above such a g the splitting nodes are exactly the extensions of t_g.
    """

    def __init__(self, rule: SkeletonRule, name: str = "tree", free_level: Optional[int] = None):
        self._rule = rule
        self._memo: Dict[FinBits, FinBits] = {}
        self.name = name
        self.free_level = free_level

    def is_free_at(self, g) -> bool:
        return self.free_level is not None and len(g) >= self.free_level

    def __repr__(self) -> str:
        return f"SkeletonTree({self.name})"

    def skeleton(self, c) -> FinBits:
        c = tuple(c)
        value = self._memo.get(c)
        if value is None:
            value = self._memo.setdefault(c, tuple(self._rule(c)))
        return value

    skel = skeleton

    def _descend(self, s: FinBits) -> Tuple[FinBits, bool]:
        """Walks the skeleton along s. Returns the last index c with t_c ⊆ s (or ∅) and whether s ∈ tree."""
        c: FinBits = ()
        t = self.skeleton(c)
        if not comparable(s, t):
            return c, False
        while len(t) < len(s):
            nxt = c + (s[len(t)],)
            t_next = self.skeleton(nxt)
            if not comparable(s, t_next):
                return c, False
            if len(t_next) > len(s):
                return c, True
            c, t = nxt, t_next
        return c, True

    def contains(self, s) -> bool:
        """True iff s ⊆ t_c for some c."""
        return self._descend(tuple(s))[1]

    def homeo_prefix(self, s) -> FinBits:
        """The longest c with t_c ⊆ s, the finite approximation of the branch homeomorphism.

        Nodes inside the stem (s ⊊ t_∅) map to ∅.

        Raises:
            AcceptanceError: If s is not a node of the tree
        """
        c, inside = self._descend(tuple(s))
        if not inside:
            raise AcceptanceError(f"{list(s)} is not a node of {self.name}")
        return c

    def nth_splitting_front(self, n: int) -> List[FinBits]:
        """The n-th splitting nodes, listed by skeleton index in lex order (which is their lex order)."""
        return [self.skeleton(c) for c in strings_of_length(n)]

    def succ_of_nth_front(self, n: int) -> List[FinBits]:
        return [self.skeleton(c) + (i,) for c in strings_of_length(n) for i in (0, 1)]

    def stem(self) -> FinBits:
        return self.skeleton(())

    def cone(self, g) -> "SkeletonTree":
        """The subtree above the splitting node with index g, re-indexed from ∅."""
        g = tuple(g)
        if not g:
            return self
        level = None if self.free_level is None else max(0, self.free_level - len(g))
        return SkeletonTree(lambda c: self.skeleton(g + c), name=f"{self.name}|{''.join(map(str, g))}", free_level=level)

    def restrict(self, t) -> "SkeletonTree":
        """p_t: the nodes comparable with t, with skeleton c ↦ t_{c*⌢c} for the least c* with t ⊆ t_{c*}.

        Raises:
            AcceptanceError: If t is not a node of the tree
        """
        t = tuple(t)
        c: FinBits = ()
        node = self.skeleton(c)
        while not is_prefix(t, node):
            if not is_prefix(node, t):
                raise AcceptanceError(f"Cannot restrict {self.name} to {list(t)}: not a node")
            c = c + (t[len(node)],)
            node = self.skeleton(c)
        return self.cone(c)

    def branch(self, bits: Callable[[int], int]) -> "Branch":
        """The branch e⁻¹(y) through the tree for the bit rule y."""
        return Branch(self, bits)

    def validate(self, depth: int) -> TreeReport:
        return validate(self, depth)

    def to_json(self, depth: int) -> dict:
        return {"depth": depth, "skeleton": [[list(c), list(self.skeleton(c))] for c in strings_upto(depth)]}


class Branch:
    """Prefix function n ↦ x↾n of the branch whose skeleton path follows a bit rule."""

    def __init__(self, tree: SkeletonTree, bits: Callable[[int], int]):
        self.tree = tree
        self.bits = bits
        self._path: FinBits = ()
        self._node: FinBits = tree.skeleton(())

    def index(self, k: int) -> FinBits:
        """The skeleton index y↾k followed by the branch."""
        return tuple(self.bits(i) for i in range(k))

    def __call__(self, n: int) -> FinBits:
        while len(self._node) < n:
            self._path = self._path + (self.bits(len(self._path)),)
            self._node = self.tree.skeleton(self._path)
        return self._node[:n]


def full_tree() -> SkeletonTree:
    return SkeletonTree(lambda c: c, name="full", free_level=0)


def table_tree(table: Dict[FinBits, FinBits], depth: int, name: str = "table") -> SkeletonTree:
    """Tree read from a finite skeleton table; indices deeper than the table continue with the full tree."""
    table = {tuple(c): tuple(t) for c, t in table.items()}

    def rule(c: FinBits) -> FinBits:
        if len(c) <= depth:
            return table[c]
        return table[c[:depth]] + c[depth:]

    return SkeletonTree(rule, name=name, free_level=depth)


def pullback(outer: SkeletonTree, inner: SkeletonTree) -> SkeletonTree:
    """The subtree of outer whose branches are the preimage of inner's branches: c ↦ outer.skel(inner.skel(c))."""
    level = None
    if outer.free_level is not None and inner.free_level is not None:
        level = max(outer.free_level, inner.free_level)
    return SkeletonTree(lambda c: outer.skeleton(inner.skeleton(c)), name=f"{outer.name}∘{inner.name}", free_level=level)


def graft(tree: SkeletonTree, level: int, roots: Dict[FinBits, FinBits]) -> SkeletonTree:
    """Replaces, for every index c of length `level` listed in roots, the cone at c by the cone at roots[c].

    Each roots[c] must extend c. Splitting levels below `level` are untouched.

    Args:
        tree (SkeletonTree): The tree being narrowed
        level (int): Skeleton level of the grafted cones
        roots (dict): Index c (length level) -> new cone index g ⊇ c

    Returns:
        SkeletonTree: The amalgamated tree
    """
    roots = {tuple(c): tuple(g) for c, g in roots.items()}
    for c, g in roots.items():
        if len(c) != level or not is_prefix(c, g):
            raise ValueError(f"Graft root {list(g)} does not extend {list(c)} at level {level}")

    def rule(c: FinBits) -> FinBits:
        if len(c) < level:
            return tree.skeleton(c)
        head = c[:level]
        return tree.skeleton(roots.get(head, head) + c[level:])

    free = None if tree.free_level is None else max(level, tree.free_level)
    return SkeletonTree(rule, name=f"{tree.name}+{level}", free_level=free)


def is_subtree(q: SkeletonTree, p: SkeletonTree, depth: int) -> bool:
    """q ⊆ p checked on every splitting node t_c of q with lh(c) ≤ depth."""
    return all(p.contains(q.skeleton(c)) for c in strings_upto(depth))


def _first_lex_witness(tree: SkeletonTree, b: FinBits, depth: int) -> Optional[Tuple[FinBits, FinBits]]:
    left = [b + (0,) + e for n in range(depth - len(b)) for e in strings_of_length(n)]
    right = [b + (1,) + e for n in range(depth - len(b)) for e in strings_of_length(n)]
    pairs = sorted(((c, d) for c in left for d in right),
                   key=lambda pair: (max(node_index(pair[0]), node_index(pair[1])), node_index(pair[0]), node_index(pair[1])))
    for c, d in pairs:
        if lex_compare(tree.skeleton(c), tree.skeleton(d)) != OrderVerdict.LESS:
            return c, d
    return None


def validate(tree: SkeletonTree, depth: int) -> TreeReport:
    """Checks the skeleton invariants on every index of length ≤ depth and records the first witness of each failure."""
    report = TreeReport(depth)
    found = set()

    def flag(name: str, witness) -> None:
        if name not in found:
            found.add(name)
            report.violations.append((name, witness))

    for c in strings_upto(depth - 1):
        t = tree.skeleton(c)
        for i in (0, 1):
            child = tree.skeleton(c + (i,))
            if not is_prefix(t, child):
                flag("monotone", [list(c), list(c + (i,))])
            if not is_prefix(t + (i,), child):
                flag("splitting_faithful", list(c + (i,)))

    # every incomparable pair meets at some b; the whole 0-side must lie lex-below the whole 1-side
    lo: Dict[FinBits, FinBits] = {}
    hi: Dict[FinBits, FinBits] = {}
    for n in range(depth, -1, -1):
        for c in strings_of_length(n):
            t = tree.skeleton(c)
            lo[c], hi[c] = t, t
            if n < depth:
                lo[c] = min(t, lo[c + (0,)], lo[c + (1,)])
                hi[c] = max(t, hi[c + (0,)], hi[c + (1,)])
    for b in strings_upto(depth - 1):
        if not hi[b + (0,)] < lo[b + (1,)]:
            witness = _first_lex_witness(tree, b, depth)
            if witness is not None:
                flag("lex_preserving", [list(witness[0]), list(witness[1])])
                break

    seen: Dict[FinBits, FinBits] = {}
    for c in strings_upto(depth):
        t = tree.skeleton(c)
        if t in seen:
            flag("injective", [list(seen[t]), list(c)])
            break
        seen[t] = c

    for n in range(depth + 1):
        front = sorted(zip(tree.nth_splitting_front(n), strings_of_length(n)))
        clash = next(((a, b) for a, b in zip(front, front[1:]) if comparable(a[0], b[0])), None)
        if clash is not None:
            flag("fronts", [list(clash[0][1]), list(clash[1][1])])
            break

    if report.violations:
        logger.warning(f"{tree.name} fails {report.names()} at depth {depth}")
    return report
