# -*- coding: utf-8 -*-
""" Single-tree catching: from a code f and a tree p, a subtree q ≤ p and a function h such that
    f(t_c)(#(c)) = h(#(c)) at every splitting node t_c of q. Along any branch of q, h therefore agrees
    with f*(x) at the index of every splitting node the branch passes. """

from typing import Dict, List, Optional

from joblib import Parallel, delayed

from .codes import Code, eval_star
from .errors import ModulusError
from .orders import FinBits, is_prefix, node_index, node_unindex, strings_upto
from .trees import SkeletonTree, is_subtree, pullback
from .utils import Report, derive_seed, get_logger, hash_bits

logger = get_logger(__name__)


class CatchResult:
    """
    Lazy output of catch_single. Index nodes r_c of p are computed on demand and memoized: r_∅ extends ∅ and
    r_{c⌢i} extends r_c⌢i, each chosen so that t = p.skel(r) is a shortest splitting node above the base with
    position node_index(c) in f(t), the lex-least among those. Then t_c = p.skel(r_c), q is the pullback of p
    through c ↦ r_c, and h(node_index(c)) = f(t_c)(node_index(c)).

    The exact choice needs p to only append above the base (SkeletonTree.free_level) and is as good as the
    code's least_extension. Elsewhere r = base⌢0^d with the least such d.

    Forged copies (see `forge`) override nodes or values and exist to exercise the verifier.
    """

    def __init__(self, p: SkeletonTree, f: Code, nodes: Optional[Dict[FinBits, FinBits]] = None,
                 values: Optional[Dict[int, int]] = None):
        self.p = p
        self.f = f
        self._index: Dict[FinBits, FinBits] = {}
        self._node_override = dict(nodes or {})
        self._value_override = dict(values or {})
        self.index_tree = SkeletonTree(self.index_node, name="catch-index")
        self.q = pullback(p, self.index_tree)
        self.q.name = f"catch({p.name},{f.name})"

    def index_node(self, c) -> FinBits:
        """r_c, the skeleton index in p of the node chosen for c."""
        c = tuple(c)
        known = self._index.get(c)
        if known is not None:
            return known
        missing = [c]
        while missing[-1] and missing[-1][:-1] not in self._index:
            missing.append(missing[-1][:-1])
        for e in reversed(missing):
            base = self._index[e[:-1]] + (e[-1],) if e else ()
            self._index.setdefault(e, self._search(base, node_index(e)))
        return self._index[c]

    def _search(self, base: FinBits, idx: int) -> FinBits:
        bound = self.f.modulus(idx + 1)
        if self.p.is_free_at(base):
            stem = self.p.skeleton(base)
            w = self.f.least_extension(stem, idx + 1, max(0, bound - len(stem)))
            if w is not None:
                return base + w
        else:
            for d in range(bound + 1):
                r = base + (0,) * d
                if len(self.f.apply(self.p.skeleton(r))) > idx:
                    return r
        raise ModulusError(f"{self.f.name} has no position {idx} above {list(self.p.skeleton(base))} within depth {bound}")

    def node(self, c) -> FinBits:
        """t_c."""
        c = tuple(c)
        if c in self._node_override:
            return self._node_override[c]
        return self.q.skeleton(c)

    def h(self, n: int) -> int:
        if n in self._value_override:
            return self._value_override[n]
        return self.f.apply(self.node(node_unindex(n)))[n]

    def trace(self, c) -> tuple:
        """(t_c, node_index(c), f(t_c)(node_index(c)))."""
        t, idx = self.node(c), node_index(c)
        return t, idx, self.f.apply(t)[idx]

    def trace_rows(self, depth: int) -> List[dict]:
        rows = []
        for c in strings_upto(depth):
            t, idx, value = self.trace(c)
            rows.append({"c": list(c), "t_c": list(t), "index": idx, "value": value})
        return rows

    def forge(self, nodes: Optional[Dict[FinBits, FinBits]] = None, values: Optional[Dict[int, int]] = None) -> "CatchResult":
        forged = CatchResult(self.p, self.f, {**self._node_override, **(nodes or {})}, {**self._value_override, **(values or {})})
        forged._index = self._index
        return forged


def catch_single(p: SkeletonTree, f: Code) -> CatchResult:
    logger.info(f"Catching {f.name} on {p.name}")
    return CatchResult(p, f)


def _is_splitting(p: SkeletonTree, t: FinBits) -> bool:
    if not p.contains(t):
        return False
    return p.skeleton(p.homeo_prefix(t)) == t


def verify_catch(result: CatchResult, p: SkeletonTree, f: Code, depth: int) -> Report:
    """Checks every c with lh(c) ≤ depth in maxlex order and reports the first violation of each property.

    Args:
        result (CatchResult): Output of catch_single, possibly forged
        p (SkeletonTree): The tree the construction started from
        f (Code): The caught code
        depth (int): Longest skeleton index checked

    Returns:
        Report: splitting, successor_divergence, domain, agreement and subtree checks
    """
    report = Report("catch-single", {"tree": p.name, "code": f.name, "depth": depth})
    first: Dict[str, list] = {}
    for c in strings_upto(depth):
        t = result.node(c)
        idx = node_index(c)
        if "splitting" not in first and not _is_splitting(p, t):
            first["splitting"] = list(c)
        if c and "successor_divergence" not in first and not is_prefix(result.node(c[:-1]) + (c[-1],), t):
            first["successor_divergence"] = list(c)
        out = f.apply(t)
        if idx >= len(out):
            first.setdefault("domain", list(c))
        elif "agreement" not in first and result.h(idx) != out[idx]:
            first["agreement"] = {"c": list(c), "index": idx, "h": result.h(idx), "f": out[idx]}
    for name in ("splitting", "successor_divergence", "domain", "agreement"):
        report.add(name, name not in first, first.get(name))
    report.add("subtree", is_subtree(result.q, p, depth), None)
    if not report.passed:
        logger.warning(f"Catch verification failed: {[c.name for c in report.failures()]}")
    return report


def _branch_points(result: CatchResult, f: Code, depth: int, seed: int, sample: int) -> Optional[dict]:
    bits = hash_bits(derive_seed(seed, sample))
    branch = result.q.branch(bits)
    indices = [node_index(branch.index(k)) for k in range(depth + 1)]
    values = eval_star(f, branch, max(indices) + 1)
    for k, idx in enumerate(indices):
        if values[idx] != result.h(idx):
            return {"sample": sample, "c": list(branch.index(k)), "index": idx, "h": result.h(idx), "f": values[idx]}
    return None


def branch_agreement(result: CatchResult, f: Code, depth: int, samples: int, seed: int = 0, n_jobs: int = 1) -> Report:
    """h(#(c)) = f*(x)(#(c)) for the skeleton indices c of length ≤ depth along sampled branches x of q.

    Branch x follows the skeleton bits step ↦ splitmix64(derive_seed(seed, sample) XOR step) mod 2.
    """
    report = Report("catch-single", {"depth": depth, "samples": samples, "seed": seed})
    witnesses = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(_branch_points)(result, f, depth, seed, sample) for sample in range(samples))
    witness = next((w for w in witnesses if w is not None), None)
    report.add("branch_agreement", witness is None, witness)
    return report
