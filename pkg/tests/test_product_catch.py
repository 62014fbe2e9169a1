# -*- coding: utf-8 -*-
import json
from dataclasses import replace

import numpy as np
import pytest

from fusion.codes import ConstantProductCode, InterleavedProductCode, WrappedProductCode
from fusion.errors import AcceptanceError, CertificateError, SearchCapExhausted
from fusion.generators import fusion_instance, random_family, random_transducer
from fusion.product_catch import (EDFamily, ProductCondition, catch_product, greedy_family, greedy_med_stage,
                                  refines_mod, tuple_front, verify_product_catch, with_tuple)
from fusion.utils import Status

from oracle import fusion_tables

SEARCH_CAP = 4096


def failed(report):
    return [c.name for c in report.failures()]


def test_tuple_front_examples():
    full2 = ProductCondition.full(2)
    assert tuple_front(full2, 1) == [((0,),), ((1,),)]
    assert tuple_front(full2, 0) == [()]


@pytest.mark.parametrize("arity", [1, 2, 3])
def test_tuple_front_sizes(arity):
    condition = ProductCondition.full(arity)
    for n in range(4):
        assert len(tuple_front(condition, n)) == 2 ** (n * min(n, arity))


def test_with_tuple_examples():
    full2 = ProductCondition.full(2)
    assert with_tuple(full2, {}).coords == full2.coords
    narrowed = with_tuple(full2, {0: (1,)})
    assert narrowed[0].stem() == (1,)
    assert narrowed[1].stem() == () and narrowed[1].skel((0, 1)) == (0, 1)
    assert refines_mod(narrowed, full2, [], 2, 4)
    assert with_tuple(full2, [(0,), (1, 1)])[1].stem() == (1, 1)


def test_with_tuple_names_rejecting_coordinate():
    condition = with_tuple(ProductCondition.full(3), {2: (1,)})
    with pytest.raises(AcceptanceError) as info:
        with_tuple(condition, {0: (0,), 2: (0,)})
    assert info.value.coordinate == 2


def test_refines_mod_examples():
    full2 = ProductCondition.full(2)
    assert refines_mod(full2, full2, [0, 1], 3, 4)
    below = with_tuple(full2, {0: (0,)})
    assert not refines_mod(below, full2, [0], 1, 4)
    assert refines_mod(below, full2, [1], 1, 4)
    assert refines_mod(below, full2, [], 1, 4)
    assert not refines_mod(full2, below, [], 1, 4)


def test_family_certificates():
    family = EDFamily([lambda n: n, lambda n: 2 * n], {(1, 0): 1})
    assert family.bound(0, 1) == 1
    assert family.verify(100).passed
    lying = EDFamily([lambda n: n, lambda n: 6 - n], {(0, 1): 0})
    assert lying.verify(10).failures()[0].witness == {"pair": [0, 1], "n": 3}
    with pytest.raises(CertificateError):
        lying.check(10)


def test_echo_against_successor(echo, successor_family):
    code = WrappedProductCode(echo)
    result = catch_product(1, code, successor_family, SEARCH_CAP, 5)
    assert result.sharp[(1, ((0,),))] == 0
    assert result.sharp[(1, ((1,),))] == 1
    assert result.d[(1, ((1,),))] == ((1, 0),)
    assert result.h0[0] == 0 and result.h0[1] == 0
    report = verify_product_catch(result, 1, code, successor_family, 5, 10)
    assert report.passed, report.to_json()
    assert all(result.h(n) != n + 1 for n in range(1000))


def test_empty_family(echo):
    code = WrappedProductCode(echo)
    result = catch_product(1, code, EDFamily(), SEARCH_CAP, 3)
    assert verify_product_catch(result, 1, code, EDFamily(), 3, 5).passed
    assert result.h(10_000) == 0


def test_arity_zero():
    word = tuple(i % 2 for i in range(32))
    code = ConstantProductCode(word)
    family = EDFamily([lambda n: 3], {})
    result = catch_product(0, code, family, SEARCH_CAP, 4)
    assert sorted(result.h0) == [0, 1, 2, 3]
    assert all(result.h(m) == word[m] for m in result.h0)
    report = verify_product_catch(result, 0, code, family, 4, 3)
    assert report.passed
    assert {c.name: c.status for c in report.checks}["d_injective"] == Status.SKIP


def test_search_cap_exhaustion():
    code = ConstantProductCode((5,) * 8)
    family = EDFamily([lambda n: 5], {})
    with pytest.raises(SearchCapExhausted) as info:
        catch_product(0, code, family, 8, 2)
    assert info.value.stage == 1
    assert info.value.tuple == ()
    assert info.value.depth == 8


def test_arity_mismatch(echo, successor_family):
    with pytest.raises(ValueError):
        catch_product(2, WrappedProductCode(echo), successor_family, SEARCH_CAP, 1)


def test_stages_refine(echo, successor_family):
    code = InterleavedProductCode([echo, echo])
    result = catch_product(2, code, successor_family, SEARCH_CAP, 3)
    for n in range(1, 4):
        assert refines_mod(result.conditions[n], result.conditions[n - 1], range(min(n - 1, 2)), n - 1, n + 1)


def test_perturbed_value_is_caught(echo, successor_family):
    code = WrappedProductCode(echo)
    result = catch_product(1, code, successor_family, SEARCH_CAP, 3)
    forged = replace(result, h0={**result.h0, 0: result.h0[0] + 7})
    report = verify_product_catch(forged, 1, code, successor_family, 3, 4)
    assert "catches" in failed(report)
    assert report.failures()[0].witness["stage"] == 1
    assert report.failures()[0].witness["index"] == [[0]]


def test_reused_position_is_caught(echo, successor_family):
    code = WrappedProductCode(echo)
    result = catch_product(1, code, successor_family, SEARCH_CAP, 3)
    first, second = result.keys()[0], result.keys()[1]
    forged = replace(result, sharp={**result.sharp, second: result.sharp[first]})
    report = verify_product_catch(forged, 1, code, successor_family, 3, 4)
    assert "sharp_injective" in failed(report)


def test_avoidance_violation_is_caught(echo):
    family = EDFamily([lambda n: 2 * n + 2], {})
    code = WrappedProductCode(echo)
    result = catch_product(1, code, family, SEARCH_CAP, 2)
    gap = max(result.h0) + 1
    forged = replace(result, h0={**result.h0, gap: 2 * gap + 2})
    report = verify_product_catch(forged, 1, code, family, 2, 2)
    assert failed(report) == ["avoidance"]
    assert report.failures()[0].witness == {"n": gap, "j": 0, "value": 2 * gap + 2}


def test_extension_leaves_the_leftmost_path(late_left):
    # the leftmost path above (0,) emits nothing but zeros
    family = EDFamily([lambda n: 0], {})
    code = WrappedProductCode(late_left)
    result = catch_product(1, code, family, 16, 2)
    assert result.d[(1, ((0,),))] == ((0, 1),) and result.h0[0] == 1
    assert result.d[(1, ((1,),))] == ((1,),) and result.sharp[(1, ((1,),))] == 1
    assert verify_product_catch(result, 1, code, family, 2, 5).passed


def test_interleaved_extension_leaves_the_leftmost_path(late_left, echo):
    family = EDFamily([lambda n: 0], {})
    code = InterleavedProductCode([late_left, echo])
    result = catch_product(2, code, family, 16, 2)
    assert verify_product_catch(result, 2, code, family, 2, 5).passed


def dumped(sharp, d, h0):
    rows = [[key[0], [list(c) for c in key[1]], sharp[key], [list(u) for u in d[key]]] for key in sorted(sharp)]
    return json.dumps({"rows": rows, "h0": sorted(h0.items())}, sort_keys=True)


def run_instance(seed, arity, depth, samples=5, family_size=4):
    code, family = fusion_instance(seed, arity, family_size)
    assert family.verify(200).passed
    result = catch_product(arity, code, family, SEARCH_CAP, depth)
    report = verify_product_catch(result, arity, code, family, depth, samples, seed=seed, horizon=1000)
    assert report.passed, report.to_json()
    free = catch_product(arity, code, EDFamily(), SEARCH_CAP, depth)
    assert dumped(result.sharp, result.d, result.h0) != dumped(free.sharp, free.d, free.h0)
    return result


@pytest.mark.parametrize("arity,depth", [(1, 4), (2, 3), (3, 2)])
@pytest.mark.parametrize("seed", range(5))
def test_random_instances(arity, depth, seed):
    run_instance(seed, arity, depth)


def test_random_instance_arity_zero():
    run_instance(3, 0, 5)


@pytest.mark.slow
@pytest.mark.parametrize("arity", [1, 2, 3])
def test_random_instances_full_size(arity):
    for seed in range(30):
        run_instance(seed, arity, 4)


def test_family_values_fall_in_the_code_alphabet():
    code, family = fusion_instance(0, 1, 4)
    values = {family[j](n) for j in range(len(family)) for n in range(8)}
    assert values & {0, 1, 2}
    assert family.verify(500).passed


def test_parallel_verification_matches(echo, successor_family):
    code = InterleavedProductCode([echo, echo])
    result = catch_product(2, code, successor_family, SEARCH_CAP, 3)
    serial = verify_product_catch(result, 2, code, successor_family, 3, 6)
    threaded = verify_product_catch(result, 2, code, successor_family, 3, 6, n_jobs=3)
    assert serial.to_json() == threaded.to_json()


def test_greedy_empty(successor_family):
    assert greedy_med_stage([], successor_family, SEARCH_CAP, 3) == []


def test_greedy_single_echo(echo, successor_family):
    code = WrappedProductCode(echo)
    results = greedy_med_stage([code], successor_family, SEARCH_CAP, 3)
    assert len(results) == 1
    assert all(results[0].h(n) != n + 1 for n in range(1000))
    assert verify_product_catch(results[0], 1, code, results[0].family, 3, 5).passed


def test_greedy_two_stages(echo, successor_family):
    code = WrappedProductCode(echo)
    h0, h1 = (r.h for r in greedy_med_stage([code, code], successor_family, SEARCH_CAP, 3))
    assert all(h1(n) != h0(n) for n in range(1, 1000))


def test_greedy_four_stages():
    rng = np.random.default_rng(8)
    seed_family = random_family(rng, 2)
    codes = [WrappedProductCode(random_transducer(rng, name=f"g{xi}")) for xi in range(4)]
    results = greedy_med_stage(codes, seed_family, SEARCH_CAP, 3)
    hs = [r.h for r in results]
    for xi in range(4):
        for eta in range(xi):
            assert all(hs[xi](n) != hs[eta](n) for n in range(xi, 1000)), (xi, eta)
    assert greedy_family(results, seed_family).verify(1000).passed
    for code, result in zip(codes, results):
        assert verify_product_catch(result, 1, code, result.family, 3, 10).passed


def test_greedy_reports_failing_stage():
    codes = [ConstantProductCode((0, 1, 0, 1)), ConstantProductCode((0, 4, 4, 4))]
    family = EDFamily([lambda n: 4], {})
    with pytest.raises(SearchCapExhausted) as info:
        greedy_med_stage(codes, family, 4, 1)
    assert info.value.greedy_stage == 1


@pytest.mark.parametrize("seed", range(6))
def test_oracle_reproduces_tables(seed):
    code, family = fusion_instance(seed, 1, 3)
    result = catch_product(1, code, family, SEARCH_CAP, 3)
    sharp, d, h0 = fusion_tables(code.code, family.members, 3)
    assert dumped(result.sharp, result.d, result.h0) == dumped(sharp, d, h0)
    assert dumped(sharp, d, h0) != dumped(*fusion_tables(code.code, [], 3))


def test_oracle_on_echo(echo, successor_family):
    result = catch_product(1, WrappedProductCode(echo), successor_family, SEARCH_CAP, 3)
    sharp, d, h0 = fusion_tables(echo, successor_family.members, 3)
    assert result.sharp == sharp and result.d == d and result.h0 == h0


def test_oracle_leaves_the_leftmost_path(late_left):
    family = EDFamily([lambda n: 0], {})
    result = catch_product(1, WrappedProductCode(late_left), family, SEARCH_CAP, 3)
    sharp, d, h0 = fusion_tables(late_left, family.members, 3)
    assert dumped(result.sharp, result.d, result.h0) == dumped(sharp, d, h0)
