# -*- coding: utf-8 -*-
""" Reading instance files: codes, trees, function specs, families, run manifests and ned instances.
    Every layout problem is reported as a SchemaError naming the offending field. """

import json
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

from .codes import (Code, ConstantProductCode, InterleavedProductCode, ProductCode, TableCode, TransducerCode,
                    WrappedProductCode, eval_star)
from .errors import SchemaError
from .ned import NedInput
from .product_catch import EDFamily
from .trees import SkeletonTree, full_tree, table_tree
from .utils import get_logger

logger = get_logger(__name__)

Rule = Callable[[int], int]


def read_json(path: str) -> Any:
    try:
        with open(path, "r") as file:
            return json.load(file)
    except FileNotFoundError as e:
        raise SchemaError(f"Instance file {path} not found") from e
    except json.JSONDecodeError as e:
        logger.error(f"{path}: {e}")
        raise SchemaError(f"{path} is not valid JSON: {e}") from e


def _require(obj: Any, key: str, where: str, kind: type = None) -> Any:
    if not isinstance(obj, dict):
        raise SchemaError(f"{where} must be an object, got {type(obj).__name__}")
    if key not in obj:
        raise SchemaError(f"{where} is missing field '{key}'")
    value = obj[key]
    if kind is not None and not isinstance(value, kind):
        raise SchemaError(f"{where}.{key} must be {kind.__name__}, got {type(value).__name__}")
    return value


def _bits(value: Any, where: str) -> Tuple[int, ...]:
    if not isinstance(value, list) or any(b not in (0, 1) or isinstance(b, bool) for b in value):
        raise SchemaError(f"{where} must be a list of bits")
    return tuple(value)


def _naturals(value: Any, where: str) -> Tuple[int, ...]:
    if not isinstance(value, list) or any(not isinstance(v, int) or isinstance(v, bool) or v < 0 for v in value):
        raise SchemaError(f"{where} must be a list of natural numbers")
    return tuple(value)


def _natural(value: Any, where: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value < 0:
        raise SchemaError(f"{where} must be a natural number, got {value!r}")
    return value


def parse_code(obj: Any, where: str = "code") -> Code:
    """A transducer {states, start, trans:[{from, bit, to, out}]} or a table {depth, table:[[s, w]], tail}.

    The shortcuts {"type": "echo"} and {"type": "constant", "value": v} name the two standard transducers.
    """
    if not isinstance(obj, dict):
        raise SchemaError(f"{where} must be an object")
    kind = obj.get("type") or ("transducer" if "trans" in obj else "table" if "table" in obj else None)
    if kind == "echo":
        return TransducerCode.echo()
    if kind == "constant":
        return TransducerCode.constant(_natural(obj.get("value", 0), f"{where}.value"))
    if kind == "transducer":
        states = _require(obj, "states", where, list)
        for i, q in enumerate(states):
            if isinstance(q, bool) or not isinstance(q, (str, int)):
                raise SchemaError(f"{where}.states[{i}] must be a string or an integer, got {q!r}")
        start = _require(obj, "start", where)
        if start not in states:
            raise SchemaError(f"{where}.start {start!r} is not a listed state")
        trans = {}
        for i, row in enumerate(_require(obj, "trans", where, list)):
            at = f"{where}.trans[{i}]"
            source, target = _require(row, "from", at), _require(row, "to", at)
            bit = _require(row, "bit", at)
            if source not in states or target not in states or bit not in (0, 1):
                raise SchemaError(f"{at} refers to an unknown state or a non-bit input")
            trans[(source, bit)] = (target, _naturals(_require(row, "out", at), f"{at}.out"))
        try:
            return TransducerCode(states, start, trans, name=obj.get("name", "transducer"))
        except ValueError as e:
            raise SchemaError(f"{where}: {e}") from e
    if kind == "table":
        depth = _natural(_require(obj, "depth", where), f"{where}.depth")
        rows = _require(obj, "table", where, list)
        table = {}
        for i, row in enumerate(rows):
            if not isinstance(row, list) or len(row) != 2:
                raise SchemaError(f"{where}.table[{i}] must be a pair [s, w]")
            table[_bits(row[0], f"{where}.table[{i}][0]")] = _naturals(row[1], f"{where}.table[{i}][1]")
        tail = obj.get("tail", "repeat-last")
        if tail not in TableCode.TAILS:
            raise SchemaError(f"{where}.tail must be one of {TableCode.TAILS}")
        return TableCode(table, depth, tail, name=obj.get("name", "table"))
    raise SchemaError(f"{where} is neither a transducer nor a table")


def parse_product_code(obj: Any, arity: Optional[int] = None, where: str = "code") -> ProductCode:
    """A code of the given arity. Arity 0 takes {"word": [...]}; arity > 1 interleaves copies of one code,
    or the list under "coordinates" when present."""
    if not isinstance(obj, dict):
        raise SchemaError(f"{where} must be an object")
    arity = obj.get("arity", 1) if arity is None else arity
    arity = _natural(arity, f"{where}.arity")
    if arity == 0:
        return ConstantProductCode(_naturals(_require(obj, "word", where), f"{where}.word"))
    if "coordinates" in obj:
        codes = [parse_code(c, f"{where}.coordinates[{i}]") for i, c in enumerate(_require(obj, "coordinates", where, list))]
        if len(codes) != arity:
            raise SchemaError(f"{where} lists {len(codes)} coordinate codes for arity {arity}")
    else:
        codes = [parse_code(obj, where)] * arity
    if arity == 1:
        return WrappedProductCode(codes[0])
    return InterleavedProductCode(codes)


def parse_tree(obj: Any, where: str = "tree") -> SkeletonTree:
    """{depth: n, skeleton: [[c, t_c], ...]} listing every c of length ≤ n; "full" or null is the full tree."""
    if obj is None or obj == "full":
        return full_tree()
    depth = _natural(_require(obj, "depth", where), f"{where}.depth")
    table = {}
    for i, row in enumerate(_require(obj, "skeleton", where, list)):
        if not isinstance(row, list) or len(row) != 2:
            raise SchemaError(f"{where}.skeleton[{i}] must be a pair [c, t_c]")
        table[_bits(row[0], f"{where}.skeleton[{i}][0]")] = _bits(row[1], f"{where}.skeleton[{i}][1]")
    missing = 2 ** (depth + 1) - 1 - len([c for c in table if len(c) <= depth])
    if missing:
        raise SchemaError(f"{where} lists {len(table)} skeleton entries, {missing} indices of length ≤ {depth} are missing")
    return table_tree(table, depth, name=obj.get("name", "table"))


def _branch_from_bits(bits: Sequence[int]) -> Callable[[int], Tuple[int, ...]]:
    period = tuple(bits)
    return lambda n: tuple(period[i % len(period)] for i in range(n))


def parse_function(obj: Any, where: str = "function") -> Rule:
    """A rule ℕ→ℕ. Kinds: affine {a, b}, constant {value}, polynomial {coeffs}, periodic {values},
    table {values, then}, code-branch {code, branch} (f* of the periodic branch, read through the modulus).

    Parameters may sit at top level or under "params".
    """
    if not isinstance(obj, dict):
        raise SchemaError(f"{where} must be an object")
    kind = _require(obj, "kind", where, str)
    params = obj.get("params", obj)
    if not isinstance(params, dict):
        raise SchemaError(f"{where}.params must be an object")
    if kind == "affine":
        a, b = _natural(params.get("a", 1), f"{where}.a"), _natural(params.get("b", 0), f"{where}.b")
        return lambda n: a * n + b
    if kind == "constant":
        value = _natural(_require(params, "value", where), f"{where}.value")
        return lambda n: value
    if kind == "polynomial":
        coeffs = _naturals(_require(params, "coeffs", where), f"{where}.coeffs")
        return lambda n: sum(c * n ** i for i, c in enumerate(coeffs))
    if kind == "periodic":
        values = _naturals(_require(params, "values", where), f"{where}.values")
        if not values:
            raise SchemaError(f"{where}.values must not be empty")
        return lambda n: values[n % len(values)]
    if kind == "table":
        values = _naturals(_require(params, "values", where), f"{where}.values")
        then = parse_function(params["then"], f"{where}.then") if "then" in params else (lambda n: 0)
        return lambda n: values[n] if n < len(values) else then(n)
    if kind == "code-branch":
        code = parse_code(_require(params, "code", where), f"{where}.code")
        bits = _bits(_require(params, "branch", where), f"{where}.branch")
        if not bits:
            raise SchemaError(f"{where}.branch must not be empty")
        branch = _branch_from_bits(bits)
        return lambda n: eval_star(code, branch, n + 1)[n]
    raise SchemaError(f"{where}.kind '{kind}' is not a known function kind")


def parse_family(rows: Any, where: str = "family", certificates: Any = None) -> EDFamily:
    """Members {kind, params, certBound}. Pair (j, j′) gets bound max(certBound_j, certBound_j′) unless an explicit
    [j, j′, b] triple is listed under certificates."""
    if not isinstance(rows, list):
        raise SchemaError(f"{where} must be a list")
    members, bounds, names = [], [], []
    for i, row in enumerate(rows):
        at = f"{where}[{i}]"
        members.append(parse_function(row.get("fn", row) if isinstance(row, dict) else row, at))
        bounds.append(_natural(row.get("certBound", 0), f"{at}.certBound"))
        names.append(row.get("name", f"f{i}"))
    certs = {(j, k): max(bounds[j], bounds[k]) for j in range(len(rows)) for k in range(j + 1, len(rows))}
    for i, triple in enumerate(certificates or []):
        if not isinstance(triple, list) or len(triple) != 3:
            raise SchemaError(f"certificates[{i}] must be [j, j', bound]")
        j, k, b = (_natural(v, f"certificates[{i}]") for v in triple)
        certs[(min(j, k), max(j, k))] = b
    return EDFamily(members, certs, names)


def parse_catch_manifest(obj: Any) -> Dict[str, Any]:
    """{arity, code | codes, family, certificates?, searchCap?, depth?, stages?, samples?, seed?, horizon?}."""
    if not isinstance(obj, dict):
        raise SchemaError("manifest must be an object")
    arity = _natural(_require(obj, "arity", "manifest"), "manifest.arity")
    parsed: Dict[str, Any] = {"arity": arity}
    if "codes" in obj:
        parsed["codes"] = [parse_product_code(c, arity, f"codes[{i}]") for i, c in enumerate(_require(obj, "codes", "manifest", list))]
    else:
        parsed["code"] = parse_product_code(_require(obj, "code", "manifest"), arity)
    parsed["family"] = parse_family(obj.get("family", []), certificates=obj.get("certificates"))
    for key, name in (("searchCap", "search_cap"), ("depth", "depth"), ("stages", "stages"), ("samples", "samples"),
                      ("seed", "seed"), ("horizon", "horizon")):
        if key in obj:
            parsed[name] = _natural(obj[key], f"manifest.{key}")
    return parsed


def parse_ned_instance(obj: Any) -> Tuple[NedInput, Optional[int]]:
    """{f, family:[{fn, B}], hStar, gStar, horizon?, certHorizon?} -> (NedInput, horizon)."""
    if not isinstance(obj, dict):
        raise SchemaError("instance must be an object")
    f = parse_function(_require(obj, "f", "instance"), "f")
    family, bounds = [], []
    for i, row in enumerate(_require(obj, "family", "instance", list)):
        family.append(parse_function(_require(row, "fn", f"family[{i}]"), f"family[{i}].fn"))
        bounds.append(_natural(_require(row, "B", f"family[{i}]"), f"family[{i}].B"))
    h_star = parse_function(_require(obj, "hStar", "instance"), "hStar")
    g_star = parse_function(_require(obj, "gStar", "instance"), "gStar")
    cert_horizon = _natural(obj.get("certHorizon", 100), "certHorizon")
    horizon = _natural(obj["horizon"], "horizon") if "horizon" in obj else None
    return NedInput(f, family, bounds, h_star, g_star, cert_horizon), horizon


def parse_prefix(obj: Any) -> Tuple[int, ...]:
    """A bare list or {"prefix": [...]}."""
    if isinstance(obj, dict):
        obj = _require(obj, "prefix", "input")
    return _naturals(obj, "prefix")


def dump_json(obj: Any, path: str) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as file:
        json.dump(obj, file, sort_keys=True, indent=2)
