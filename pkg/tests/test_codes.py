# -*- coding: utf-8 -*-
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fusion.codes import (Code, ConstantProductCode, InterleavedProductCode, TableCode, TransducerCode, WrappedProductCode,
                          as_product, eval_prefix, eval_product_prefix, eval_product_star, eval_star, validate_code,
                          validate_product_code)
from fusion.errors import ModulusError
from fusion.generators import random_transducer
from fusion.orders import strings_of_length
from fusion.utils import Status


def alternating(n):
    return tuple(i % 2 for i in range(n))


def test_echo_and_constant(echo, zero_code):
    assert eval_prefix(echo, (0, 1, 1)) == (0, 1, 1)
    assert zero_code((1, 0, 1)) == (0, 0, 0)
    assert echo.modulus(5) == 5


def test_table_lookup():
    table = TableCode({(): (), (0,): (7,)}, depth=1)
    assert table((0,)) == (7,)
    assert table((1,)) == ()
    assert table((0, 1, 1)) == (7, 7, 7)
    assert TableCode({(0,): (7,)}, depth=1, tail="zeros")((0, 1)) == (7, 0)


def test_table_rejects_unknown_tail():
    with pytest.raises(ValueError):
        TableCode({(): ()}, depth=0, tail="cycle")


def test_eval_star_examples(echo, zero_code):
    assert eval_star(echo, alternating, 4) == (0, 1, 0, 1)
    assert eval_star(zero_code, alternating, 3) == (0, 0, 0)


def test_product_echo_interleaves(echo):
    code = InterleavedProductCode([echo, echo])
    zeros, ones = (lambda n: (0,) * n), (lambda n: (1,) * n)
    assert eval_product_star(code, [zeros, ones], 4) == (0, 1, 0, 1)
    assert code(((0, 0), (1,))) == (0, 1, 0)
    assert code(((0, 0),)) == (0,)
    assert code(()) == ()


def test_wrapped_and_constant_products(echo):
    wrapped = as_product(echo)
    assert isinstance(wrapped, WrappedProductCode)
    assert wrapped(((1, 0),)) == (1, 0)
    assert as_product(echo, 3).arity == 3
    word = ConstantProductCode((4, 2))
    assert word(()) == (4, 2)
    assert word.modulus(2) == 0
    with pytest.raises(ModulusError):
        word.modulus(3)


def test_product_prefix_rejects_long_tuples(echo):
    with pytest.raises(ValueError):
        eval_product_prefix(WrappedProductCode(echo), ((0,), (1,)))


def test_transducer_modulus_counts_output():
    double = TransducerCode([0], 0, {(0, 0): (0, (0, 0)), (0, 1): (0, (1, 1))}, name="double")
    assert double.modulus(5) == 3
    assert double.modulus(0) == 0


def test_transducer_must_be_total():
    with pytest.raises(ValueError):
        TransducerCode([0], 0, {(0, 0): (0, (0,))})


def test_echo_validates(echo):
    report = validate_code(echo, 8)
    assert report.passed
    assert [c.status for c in report.checks] == [Status.PASS] * 3


def test_silent_cycle_flagged(silent_code):
    assert sorted(silent_code.silent_cycle()) == [0, 1]
    report = validate_code(silent_code, 4)
    failed = {c.name: c for c in report.failures()}
    assert set(failed) == {"modulus", "cycle_emission"}
    assert failed["modulus"].witness == [1]
    with pytest.raises(ModulusError):
        silent_code.modulus(1)


def test_unreachable_silent_cycle_is_harmless():
    code = TransducerCode([0, 1], 0, {(0, 0): (0, (0,)), (0, 1): (0, (1,)),
                                      (1, 0): (1, ()), (1, 1): (1, ())}, name="island")
    assert code.silent_cycle() is None
    assert validate_code(code, 6).passed


def test_non_monotone_table_flagged():
    table = TableCode({(): (1,), (0,): (2,), (1,): (1, 5)}, depth=1)
    report = validate_code(table, 3)
    assert [c.name for c in report.failures()] == ["monotone"]
    assert report.failures()[0].witness == [[], [0]]
    assert report.checks[-1].status == Status.SKIP


def test_product_code_validates(echo):
    assert validate_product_code(InterleavedProductCode([echo, echo]), 4).passed
    assert validate_product_code(InterleavedProductCode([echo, echo, TransducerCode.constant(3)]), 3).passed


def test_interleaved_modulus(echo):
    code = InterleavedProductCode([echo, TransducerCode([0], 0, {(0, 0): (0, (0, 0)), (0, 1): (0, (1, 1))})])
    assert code.modulus(5) == 3
    assert len(code(((0, 0, 0), (1, 1, 1)))) >= 5


@settings(deadline=None, max_examples=25)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 4))
def test_random_transducers_are_codes(seed, n_states):
    code = random_transducer(np.random.default_rng(seed), n_states=n_states)
    assert code.silent_cycle() is None
    assert validate_code(code, 6, seed).passed


def test_least_extension_leaves_the_leftmost_path(late_left, echo):
    assert late_left.least_extension((), 1, 4) == (1,)
    assert late_left.least_extension((0,), 1, 4) == (0,)
    assert late_left.least_extension((1,), 2, 4) == ()
    assert echo.least_extension((0, 1), 3, 5) == (0,)
    assert echo.least_extension((), 4, 2) is None


def test_table_least_extension():
    table = TableCode({(): (), (0,): (), (1,): (7,)}, depth=1)
    assert table.least_extension((), 1, 3) == (1,)
    assert table.least_extension((0,), 2, 3) == (0, 0)
    assert table.least_extension((0,), 2, 1) is None


def test_default_least_extension_walks_zeros(echo):
    class Opaque(Code):
        def apply(self, s):
            return echo.apply(s)

        def modulus(self, n):
            return n

    assert Opaque().least_extension((1,), 3, 4) == (0, 0)


@settings(deadline=None, max_examples=40)
@given(st.integers(0, 2 ** 32 - 1), st.lists(st.integers(0, 1), max_size=4), st.integers(0, 6))
def test_transducer_least_extension_is_shortest_then_lex_least(seed, s, n):
    code = random_transducer(np.random.default_rng(seed), alphabet=3)
    s = tuple(s)
    expected = next((w for length in range(7) for w in strings_of_length(length) if len(code(s + w)) >= n), None)
    assert code.least_extension(s, n, 6) == expected
