# -*- coding: utf-8 -*-
import json

import pytest

from fusion.cli import EXIT_FAILED, EXIT_OK, EXIT_SCHEMA, EXIT_SEARCH_CAP, build_parser, main


@pytest.fixture(autouse=True)
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("FUSION_CONFIG", raising=False)
    return tmp_path


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def run(argv, output):
    code = main(argv + ["--output", str(output)])
    report = json.loads(output.read_text()) if output.exists() else None
    return code, report


def test_parser_knows_every_subcommand():
    parser = build_parser()
    for cmd in ("catch-single", "catch-product", "greedy", "encode", "decode", "ned", "validate-tree",
                "validate-code", "orders-selftest"):
        assert parser.parse_args([cmd] + (["--code", "x"] if cmd in ("catch-single", "validate-code") else [])
                                 + (["--manifest", "x"] if cmd in ("catch-product", "greedy", "encode") else [])
                                 + (["--prefix", "x"] if cmd == "decode" else [])
                                 + (["--instance", "x"] if cmd == "ned" else [])).cmd == cmd


def test_orders_selftest(workdir):
    code, report = run(["orders-selftest", "--max", "1000"], workdir / "orders.json")
    assert code == EXIT_OK
    assert report["command"] == "orders-selftest"
    assert report["summary"]["passed"] is True
    assert all(check["status"] == "pass" for check in report["checks"])


def test_catch_single_echo(workdir):
    echo = write(workdir / "echo.json", {"type": "echo"})
    code, report = run(["catch-single", "--code", echo, "--depth", "6"], workdir / "catch.json")
    assert code == EXIT_OK
    trace = report["artifacts"]["trace"]
    assert len(trace) == 2 ** 7 - 1
    assert trace[0] == {"c": [], "t_c": [0], "index": 0, "value": 0}
    assert report["params"]["depth"] == 6


def test_catch_single_is_deterministic(workdir):
    code_file = write(workdir / "code.json", {"states": [0, 1], "start": 0, "trans": [
        {"from": 0, "bit": 0, "to": 1, "out": []}, {"from": 0, "bit": 1, "to": 0, "out": [2]},
        {"from": 1, "bit": 0, "to": 0, "out": [1, 0]}, {"from": 1, "bit": 1, "to": 1, "out": [3]}]})
    args = ["catch-single", "--code", code_file, "--depth", "4", "--samples", "5"]
    assert main(args + ["--output", str(workdir / "a.json")]) == EXIT_OK
    assert main(args + ["--output", str(workdir / "b.json")]) == EXIT_OK
    assert (workdir / "a.json").read_bytes() == (workdir / "b.json").read_bytes()


def test_malformed_code(workdir):
    broken = workdir / "broken.json"
    broken.write_text("{not json")
    code, report = run(["catch-single", "--code", str(broken)], workdir / "out.json")
    assert code == EXIT_SCHEMA
    assert report is None
    missing = write(workdir / "missing.json", {"states": [0], "start": 0})
    assert main(["catch-single", "--code", missing, "--output", str(workdir / "out.json")]) == EXIT_SCHEMA


def test_list_states_are_a_schema_error(workdir):
    nested = write(workdir / "nested.json", {"states": [[0], [1]], "start": [0], "trans": [
        {"from": [0], "bit": 0, "to": [1], "out": [0]}, {"from": [0], "bit": 1, "to": [0], "out": [1]},
        {"from": [1], "bit": 0, "to": [1], "out": [0]}, {"from": [1], "bit": 1, "to": [0], "out": [1]}]})
    code, report = run(["catch-single", "--code", nested], workdir / "out.json")
    assert code == EXIT_SCHEMA
    assert report is None
    code, _ = run(["validate-code", "--code", nested], workdir / "code.json")
    assert code == EXIT_SCHEMA


def test_default_output_directory(workdir, monkeypatch):
    monkeypatch.setenv("EXP_NAME", "smoke")
    assert main(["orders-selftest", "--max", "50"]) == EXIT_OK
    assert main(["orders-selftest", "--max", "50"]) == EXIT_OK
    assert (workdir / "runs" / "orders-selftest" / "smoke_00" / "report.json").exists()
    assert (workdir / "runs" / "orders-selftest" / "smoke_01" / "report.json").exists()


def test_catch_product_manifest(workdir):
    manifest = write(workdir / "manifest.json", {
        "arity": 1, "code": {"type": "echo"}, "depth": 3,
        "family": [{"kind": "affine", "a": 1, "b": 1, "certBound": 0}]})
    code, report = run(["catch-product", "--manifest", manifest, "--samples", "4"], workdir / "product.json")
    assert code == EXIT_OK
    assert report["params"]["depth"] == 3
    assert [0, 0] in report["artifacts"]["h0"]
    assert len(report["artifacts"]["frontTraces"]) == 2 + 4 + 8


def test_catch_product_flag_overrides_manifest(workdir):
    manifest = write(workdir / "manifest.json", {"arity": 2, "code": {"type": "echo"}, "depth": 3, "family": []})
    code, report = run(["catch-product", "--manifest", manifest, "--depth", "2", "--samples", "2"], workdir / "p.json")
    assert code == EXIT_OK
    assert report["params"]["depth"] == 2


def test_catch_product_search_cap(workdir):
    manifest = write(workdir / "manifest.json", {
        "arity": 1, "code": {"type": "constant", "value": 1}, "depth": 2,
        "family": [{"kind": "constant", "value": 1}]})
    code, report = run(["catch-product", "--manifest", manifest, "--search-cap", "8"], workdir / "cap.json")
    assert code == EXIT_SEARCH_CAP
    assert report["checks"][0]["name"] == "search"
    assert report["checks"][0]["witness"]["stage"] == 1


def test_greedy_manifest(workdir):
    manifest = write(workdir / "greedy.json", {
        "arity": 1, "codes": [{"type": "echo"}, {"type": "echo"}], "depth": 2, "samples": 3,
        "family": [{"kind": "affine", "a": 1, "b": 1}]})
    code, report = run(["greedy", "--manifest", manifest, "--horizon", "200"], workdir / "greedy-out.json")
    assert code == EXIT_OK
    assert len(report["artifacts"]["stages"]) == 2
    assert any(check["name"] == "family.certificates" for check in report["checks"])


def test_encode_and_decode(workdir):
    manifest = write(workdir / "encode.json", {"h": {"kind": "periodic", "values": [1, 2]},
                                               "z": {"kind": "constant", "value": 0}})
    code, report = run(["encode", "--manifest", manifest, "--length", "8"], workdir / "enc.json")
    assert code == EXIT_OK
    prefix = report["artifacts"]["prefix"]
    assert prefix[0::2] == [1, 2, 1, 2]
    decoded_file = write(workdir / "prefix.json", {"prefix": prefix})
    code, report = run(["decode", "--prefix", decoded_file], workdir / "dec.json")
    assert code == EXIT_OK
    assert report["artifacts"]["h"] == [1, 2, 1, 2, 1, 2, 1]
    assert report["artifacts"]["z"] == [0] * 7


def test_decode_incoherent_prefix(workdir):
    bad = write(workdir / "bad.json", [3, 99])
    code, report = run(["decode", "--prefix", bad], workdir / "dec.json")
    assert code == EXIT_FAILED
    assert report["checks"][0]["witness"]["reason"] == "length"


def test_ned_instance(workdir):
    instance = write(workdir / "ned.json", {
        "f": {"kind": "constant", "value": 5},
        "family": [{"fn": {"kind": "constant", "value": 0}, "B": 0}],
        "hStar": {"kind": "periodic", "values": [5, 0]},
        "gStar": {"kind": "affine", "a": 10, "b": 10},
        "horizon": 100})
    code, report = run(["ned", "--instance", instance], workdir / "ned-out.json")
    assert code == EXIT_OK
    assert report["artifacts"]["h"][:4] == [5, 1, 5, 1]
    assert report["artifacts"]["N"] == list(range(0, 100, 2))


def test_ned_domination_failure(workdir):
    instance = write(workdir / "ned.json", {
        "f": {"kind": "affine", "a": 1, "b": 1},
        "family": [{"fn": {"kind": "table", "values": [1, 2, 3, 4, 5]}, "B": 5}],
        "hStar": {"kind": "constant", "value": 0},
        "gStar": {"kind": "affine", "a": 1, "b": 0}})
    code, report = run(["ned", "--instance", instance, "--horizon", "40"], workdir / "ned-out.json")
    assert code == EXIT_FAILED
    assert report["checks"][0]["witness"] == [0, 0, 5]


def test_validate_tree_and_code(workdir, silent_code):
    code, report = run(["validate-tree", "--random", "3", "--depth", "6"], workdir / "tree.json")
    assert code == EXIT_OK
    assert [c["name"] for c in report["checks"]] == ["monotone", "splitting_faithful", "lex_preserving", "injective",
                                                     "fronts"]
    silent = write(workdir / "silent.json", silent_code.to_json())
    code, report = run(["validate-code", "--code", silent, "--depth", "4"], workdir / "code.json")
    assert code == EXIT_FAILED
    assert {c["name"] for c in report["checks"] if c["status"] == "fail"} == {"modulus", "cycle_emission"}


def test_validate_tree_from_file(workdir):
    tree = write(workdir / "tree.json", {"depth": 1, "skeleton": [[[], [1]], [[0], [1, 0]], [[1], [1, 1, 0]]]})
    assert main(["validate-tree", "--tree", tree, "--depth", "5", "--output", str(workdir / "t.json")]) == EXIT_OK
    short = write(workdir / "short.json", {"depth": 1, "skeleton": [[[], [1]]]})
    assert main(["validate-tree", "--tree", short, "--output", str(workdir / "t.json")]) == EXIT_SCHEMA


def test_negative_flag_is_rejected(workdir):
    assert main(["orders-selftest", "--max", "-1", "--output", str(workdir / "o.json")]) == EXIT_SCHEMA
    assert not (workdir / "o.json").exists()
