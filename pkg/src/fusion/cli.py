# -*- coding: utf-8 -*-
""" Command-line driver. Every subcommand reads its instance files, runs a construction, writes a JSON report
    {command, params, checks, summary} (plus the construction's artifacts) and prints the checks as a table.

    Exit codes: 0 all checks pass, 1 a verification failed, 2 input or schema error, 3 search cap exhausted. """

import argparse
import os
import sys
from typing import Any, Dict, List, Optional, Tuple

from dotenv import load_dotenv

from .catch import branch_agreement, catch_single, verify_catch
from .codes import TransducerCode, validate_code, validate_product_code
from .encode import coherence_violation, decode_g, encode_prefix
from .errors import CertificateError, CoherenceError, DominationError, ModulusError, SchemaError, SearchCapExhausted
from .generators import random_skeleton_tree
from .instances import (dump_json, parse_catch_manifest, parse_code, parse_function, parse_ned_instance, parse_prefix,
                        parse_product_code, parse_tree, read_json)
from .ned import agreement_set, build_h, verify_ned
from .orders import selftest
from .product_catch import catch_product, greedy_family, greedy_med_stage, verify_product_catch
from .trees import full_tree
from .utils import Report, create_exp_dir, get_logger, load_config, to_jsonable

logger = get_logger(__name__)

EXIT_OK, EXIT_FAILED, EXIT_SCHEMA, EXIT_SEARCH_CAP = 0, 1, 2, 3


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fusion", description="Fusion catching constructions with finite verification.")
    p.add_argument("--config", help="YAML defaults (else FUSION_CONFIG, else the packaged defaults)")
    sub = p.add_subparsers(dest="cmd", required=True)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        parser = sub.add_parser(name, help=help_text)
        parser.add_argument("--output", help="Report path (default runs/<command>/<EXP_NAME>_NN/report.json)")
        parser.add_argument("--seed", type=int)
        return parser

    single = add("catch-single", "Catch a code on a tree and verify the catch.")
    single.add_argument("--code", required=True, help="Code JSON (transducer or table)")
    single.add_argument("--tree", help="Tree JSON prefix (default: full tree)")
    single.add_argument("--depth", type=int)
    single.add_argument("--samples", type=int)
    single.add_argument("--jobs", type=int)

    for name, help_text in (("catch-product", "Run the fusion over a finite product and verify it."),
                            ("greedy", "Stack fusion runs, each avoiding the previous functions.")):
        parser = add(name, help_text)
        parser.add_argument("--manifest", required=True, help="Run manifest JSON")
        parser.add_argument("--depth", type=int, help="Number of fusion stages")
        parser.add_argument("--search-cap", type=int, dest="search_cap")
        parser.add_argument("--samples", type=int)
        parser.add_argument("--horizon", type=int)
        parser.add_argument("--jobs", type=int)

    encode = add("encode", "Write a prefix of g_{h,z}.")
    encode.add_argument("--manifest", required=True, help="JSON {h, z, length} with function specs")
    encode.add_argument("--length", type=int)

    decode = add("decode", "Decode a prefix of some g_{h,z}.")
    decode.add_argument("--prefix", required=True, help="JSON list or {prefix: [...]}")

    ned = add("ned", "Build h avoiding a family while agreeing with f where h* does.")
    ned.add_argument("--instance", required=True)
    ned.add_argument("--horizon", type=int)

    tree = add("validate-tree", "Check the skeleton invariants of a tree.")
    tree.add_argument("--tree", help="Tree JSON prefix")
    tree.add_argument("--random", type=int, help="Seed of a random skeleton tree")
    tree.add_argument("--depth", type=int)

    code = add("validate-code", "Check monotonicity and the modulus of a code.")
    code.add_argument("--code", required=True)
    code.add_argument("--depth", type=int)

    orders = add("orders-selftest", "Round-trip every coding map.")
    orders.add_argument("--max", type=int, dest="max")
    return p


def _resolve(args: argparse.Namespace, config: Dict[str, Any], manifest: Optional[Dict[str, Any]], name: str) -> Any:
    """Flag, then manifest field, then YAML default."""
    value = getattr(args, name, None)
    if value is not None:
        return value
    if manifest and manifest.get(name) is not None:
        return manifest[name]
    return config.get(name)


def _check_flags(args: argparse.Namespace) -> None:
    for name in ("depth", "horizon", "search_cap", "samples", "length", "max", "seed"):
        value = getattr(args, name, None)
        if value is not None and value < 0:
            raise SchemaError(f"--{name.replace('_', '-')} must be non-negative, got {value}")


def run_catch_single(args, config) -> Tuple[Report, dict]:
    code = parse_code(read_json(args.code))
    tree = parse_tree(read_json(args.tree)) if args.tree else full_tree()
    depth, samples = _resolve(args, config, None, "depth"), _resolve(args, config, None, "samples")
    seed, jobs = _resolve(args, config, None, "seed"), _resolve(args, config, None, "jobs")
    report = Report("catch-single", {"code": code.name, "tree": tree.name, "depth": depth, "samples": samples, "seed": seed})
    report.extend(validate_code(code, depth, seed), "code.")
    report.extend(tree.validate(depth).to_report(), "tree.")
    result = catch_single(tree, code)
    report.extend(verify_catch(result, tree, code, depth))
    report.extend(branch_agreement(result, code, depth, samples, seed, jobs))
    return report, {"trace": result.trace_rows(depth)}


def run_catch_product(args, config) -> Tuple[Report, dict]:
    manifest = parse_catch_manifest(read_json(args.manifest))
    depth = _resolve(args, config, manifest, "depth")
    seed, jobs = _resolve(args, config, manifest, "seed"), _resolve(args, config, manifest, "jobs")
    search_cap, samples = _resolve(args, config, manifest, "search_cap"), _resolve(args, config, manifest, "samples")
    horizon = _resolve(args, config, manifest, "horizon")
    arity, code, family = manifest["arity"], manifest["code"], manifest["family"]
    stages = manifest.get("stages", depth)
    report = Report("catch-product", {"arity": arity, "code": code.name, "family": family.names, "depth": depth,
                                      "stages": stages, "search_cap": search_cap, "samples": samples, "seed": seed,
                                      "horizon": horizon})
    report.extend(family.verify(config.get("cert_horizon", 100)), "family.")
    result = catch_product(arity, code, family, search_cap, stages, progress=config.get("progress", False))
    report.extend(verify_product_catch(result, arity, code, family, depth, samples, seed, horizon, jobs))
    return report, result.to_json()


def run_greedy(args, config) -> Tuple[Report, dict]:
    manifest = parse_catch_manifest(read_json(args.manifest))
    depth = _resolve(args, config, manifest, "depth")
    seed, jobs = _resolve(args, config, manifest, "seed"), _resolve(args, config, manifest, "jobs")
    search_cap, samples = _resolve(args, config, manifest, "search_cap"), _resolve(args, config, manifest, "samples")
    horizon = _resolve(args, config, manifest, "horizon")
    codes = manifest.get("codes") or [manifest["code"]]
    seed_family = manifest["family"]
    report = Report("greedy", {"arity": manifest["arity"], "codes": [c.name for c in codes], "family": seed_family.names,
                               "depth": depth, "search_cap": search_cap, "samples": samples, "seed": seed, "horizon": horizon})
    results = greedy_med_stage(codes, seed_family, search_cap, depth, progress=config.get("progress", False))
    for xi, (code, result) in enumerate(zip(codes, results)):
        report.extend(verify_product_catch(result, code.arity, code, result.family, depth, samples, seed, horizon, jobs),
                      f"stage{xi}.")
    report.extend(greedy_family(results, seed_family).verify(horizon), "family.")
    return report, {"stages": [result.to_json() for result in results]}


def run_encode(args, config) -> Tuple[Report, dict]:
    manifest = read_json(args.manifest)
    if not isinstance(manifest, dict) or "h" not in manifest or "z" not in manifest:
        raise SchemaError("encode manifest needs function specs 'h' and 'z'")
    h, z = parse_function(manifest["h"], "h"), parse_function(manifest["z"], "z")
    length = _resolve(args, config, manifest, "length")
    prefix = encode_prefix(h, z, length)
    report = Report("encode", {"length": length})
    violation = coherence_violation(prefix)
    report.add("coherence", violation is None, violation)
    if length % 2 == 0 and length > 0:
        hs, zs = decode_g(prefix) if violation is None else ((), ())
        expected = (tuple(h(i) for i in range(length - 1)), tuple(z(i) for i in range(length - 1)))
        report.add("roundtrip", (hs, zs) == expected, {"length": length})
    return report, {"prefix": list(prefix)}


def run_decode(args, config) -> Tuple[Report, dict]:
    prefix = parse_prefix(read_json(args.prefix))
    report = Report("decode", {"length": len(prefix)})
    try:
        hs, zs = decode_g(prefix)
    except CoherenceError as e:
        report.add("coherence", False, coherence_violation(prefix), str(e))
        return report, {}
    report.add("coherence", True)
    return report, {"h": list(hs), "z": list(zs)}


def run_ned(args, config) -> Tuple[Report, dict]:
    inp, horizon = parse_ned_instance(read_json(args.instance))
    horizon = args.horizon if args.horizon is not None else horizon if horizon is not None else config.get("horizon")
    report = Report("ned", {"horizon": horizon, "family": len(inp.family)})
    try:
        h = build_h(inp, horizon)
    except (CertificateError, DominationError) as e:
        report.add("construction", False, to_jsonable(e.witness), str(e))
        return report, {}
    report.extend(verify_ned(h, inp, horizon))
    return report, {"h": [h(n) for n in range(horizon)], "N": agreement_set(inp.h_star, inp.f, horizon)}


def run_validate_tree(args, config) -> Tuple[Report, dict]:
    depth = _resolve(args, config, None, "depth")
    seed = _resolve(args, config, None, "random")
    if args.tree:
        tree = parse_tree(read_json(args.tree))
    elif seed is not None:
        tree = random_skeleton_tree(seed)
    else:
        raise SchemaError("validate-tree needs --tree or --random")
    report = tree.validate(depth).to_report()
    report.params["tree"] = tree.name
    return report, {"tree": tree.to_json(min(depth, 4))}


def run_validate_code(args, config) -> Tuple[Report, dict]:
    obj = read_json(args.code)
    depth, seed = _resolve(args, config, None, "depth"), _resolve(args, config, None, "seed")
    if not isinstance(obj, dict):
        raise SchemaError("code must be an object")
    if obj.get("arity", 1) == 1 and "coordinates" not in obj:
        code = parse_code(obj)
        return validate_code(code, depth, seed), {"code": code.to_json() if isinstance(code, TransducerCode) else None}
    return validate_product_code(parse_product_code(obj), depth, seed), {}


def run_orders_selftest(args, config) -> Tuple[Report, dict]:
    return selftest(_resolve(args, config, None, "max")), {}


COMMANDS = {
    "catch-single": run_catch_single,
    "catch-product": run_catch_product,
    "greedy": run_greedy,
    "encode": run_encode,
    "decode": run_decode,
    "ned": run_ned,
    "validate-tree": run_validate_tree,
    "validate-code": run_validate_code,
    "orders-selftest": run_orders_selftest,
}


def _write(report: Report, artifacts: dict, output: Optional[str]) -> str:
    if output is None:
        output = os.path.join(create_exp_dir(os.getenv("EXP_NAME", "run"), report.command), "report.json")
    payload = report.to_dict()
    if artifacts:
        payload["artifacts"] = to_jsonable(artifacts)
    dump_json(payload, output)
    return output


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    config = load_config(args.cmd, args.config)
    logger.info(f"Running {args.cmd} with {vars(args)}")
    try:
        _check_flags(args)
        report, artifacts = COMMANDS[args.cmd](args, config)
    except SchemaError as e:
        logger.error(f"Schema error: {e}")
        print(f"Schema error: {e}", file=sys.stderr)
        return EXIT_SCHEMA
    except SearchCapExhausted as e:
        logger.error(f"Search cap exhausted at stage {e.stage}, tuple {e.tuple}, depth {e.depth}")
        report = Report(args.cmd, {"search_cap": e.depth})
        report.add("search", False, {"stage": e.stage, "tuple": e.tuple, "depth": e.depth, "greedy_stage": e.greedy_stage},
                   str(e))
        _write(report, {}, args.output)
        return EXIT_SEARCH_CAP
    except (ModulusError, CertificateError, DominationError, CoherenceError) as e:
        logger.warning(f"{args.cmd} stopped: {e}")
        report = Report(args.cmd, {})
        report.add("construction", False, getattr(e, "witness", None), str(e))
        _write(report, {}, args.output)
        return EXIT_FAILED
    except ValueError as e:
        logger.error(f"Invalid input: {e}")
        print(f"Invalid input: {e}", file=sys.stderr)
        return EXIT_SCHEMA

    path = _write(report, artifacts, args.output)
    print(report.table().to_string(index=False))
    print(f"Report written to {path}")
    if not report.passed:
        logger.warning(f"{args.cmd}: {len(report.failures())} check(s) failed")
        return EXIT_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
