# -*- coding: utf-8 -*-
import pytest

from fusion.errors import CertificateError, DominationError
from fusion.generators import ned_instance
from fusion.ned import BlockIndex, NedInput, agreement_set, build_h, compute_m_seq, verify_ned

HORIZON = 1000


def early_collision(n):
    return n + 1 if n < 5 else 0


def test_m_seq_examples():
    never = NedInput(lambda n: 1, [lambda n: 0], [0], lambda n: 0, lambda k: k)
    assert compute_m_seq(never, 0) == [0]
    collide = NedInput(lambda n: n + 1, [early_collision], [5], lambda n: 0, lambda k: k)
    assert compute_m_seq(collide, 0) == [5]


def test_m_seq_is_fresh():
    twice = NedInput(lambda n: n + 1, [early_collision, early_collision], [5, 5], lambda n: 0, lambda k: k)
    assert compute_m_seq(twice, 1) == [5, 6]
    assert compute_m_seq(twice, 4) == [5, 6, 7, 8, 9]


def test_contradicted_bound():
    lying = NedInput(lambda n: 1, [lambda n: 1 if n == 3 else 0], [0], lambda n: 0, lambda k: k)
    with pytest.raises(CertificateError) as info:
        compute_m_seq(lying, 0)
    assert info.value.witness == (0, 3)


def test_h_copies_h_star_without_collisions():
    inp = NedInput(lambda n: 0, [lambda n: 1], [0], lambda n: n % 7 + 2, lambda k: 3 * k)
    h = build_h(inp, 100)
    assert all(h(n) == n % 7 + 2 for n in range(100))


def test_h_moves_off_forbidden_value():
    inp = NedInput(lambda n: 5, [lambda n: 0], [0], lambda n: 0, lambda k: 10 * (k + 1))
    h = build_h(inp, 100)
    assert [h(n) for n in range(10, 20)] == [1] * 10
    assert h(3) == 0


def test_h_keeps_agreements_below_the_first_block():
    # f_0 meets f on [0, 3), where h* = f must be kept
    inp = NedInput(lambda n: 0, [lambda n: 0 if n < 3 else 1], [3], lambda n: 0, lambda k: k + 3)
    h = build_h(inp, 50)
    assert [h(n) for n in range(5)] == [0] * 5
    report = verify_ned(h, inp, 50)
    assert report.passed, report.to_json()


def test_blocks():
    blocks = BlockIndex(lambda k: 10 * (k + 1))
    assert [blocks.block_of(n) for n in (0, 5, 10, 19, 20, 25)] == [-1, -1, 0, 0, 1, 1]
    assert blocks.blocks_below(35) == 3
    with pytest.raises(ValueError):
        BlockIndex(lambda k: 5).block_of(7)


def test_domination_failure():
    inp = NedInput(lambda n: n + 1, [early_collision], [5], lambda n: 0, lambda k: k)
    with pytest.raises(DominationError) as info:
        build_h(inp, 50)
    assert info.value.witness == (0, 0, 5)


def test_family_and_bounds_must_match():
    with pytest.raises(ValueError):
        NedInput(lambda n: 0, [lambda n: 1], [], lambda n: 0, lambda k: k)


@pytest.mark.parametrize("seed", range(50))
def test_seeded_instances(seed):
    inp = ned_instance(seed, horizon=HORIZON)
    h = build_h(inp, HORIZON)
    report = verify_ned(h, inp, HORIZON)
    assert report.passed, report.to_json()
    agree = set(agreement_set(h, inp.f, HORIZON))
    assert set(agreement_set(inp.h_star, inp.f, HORIZON)) <= agree
    for n in range(HORIZON):
        k = inp.block_of(n)
        assert all(h(n) != inp.family[j](n) for j in inp.members_upto(k))


def test_perturbed_agreement_point():
    inp = ned_instance(11, horizon=HORIZON)
    h = build_h(inp, HORIZON)
    target = agreement_set(inp.h_star, inp.f, HORIZON)[0]
    broken = lambda n: h(n) + 1 if n == target else h(n)
    report = verify_ned(broken, inp, HORIZON)
    agreement = {c.name: c for c in report.failures()}["agreement"]
    assert agreement.witness["n"] == target


def test_collision_with_first_member():
    inp = ned_instance(12, horizon=HORIZON)
    h = build_h(inp, HORIZON)
    start = inp.g_star(0)
    broken = lambda n: inp.family[0](n) if n == start else h(n)
    report = verify_ned(broken, inp, HORIZON)
    avoidance = {c.name: c for c in report.failures()}["avoidance"]
    assert avoidance.witness == {"j": 0, "n": start, "value": inp.family[0](start)}
