# -*- coding: utf-8 -*-
""" Shared fixtures: the standard codes, the full tree and small certified families. """

import os
import tempfile

os.environ.setdefault("FUSION_LOG_FILE", os.path.join(tempfile.gettempdir(), "fusion-tests.log"))

import pytest

from fusion.codes import TransducerCode
from fusion.product_catch import EDFamily
from fusion.trees import full_tree


@pytest.fixture
def echo():
    return TransducerCode.echo()


@pytest.fixture
def zero_code():
    return TransducerCode.constant(0)


@pytest.fixture
def full():
    return full_tree()


@pytest.fixture
def successor_family():
    """F₀ = {n ↦ n + 1}."""
    return EDFamily([lambda n: n + 1], {}, ["n+1"])


@pytest.fixture
def silent_code():
    """Two states that pass each other the bit 0 without emitting."""
    return TransducerCode([0, 1], 0, {(0, 0): (1, ()), (0, 1): (0, (1,)),
                                      (1, 0): (0, ()), (1, 1): (1, (0,))}, name="silent")


@pytest.fixture
def late_left():
    """Reading 0 first postpones every symbol, reading 1 first emits two at once."""
    return TransducerCode(["A", "B"], "A", {("A", 0): ("B", ()), ("A", 1): ("A", (5, 5)),
                                            ("B", 0): ("B", (0,)), ("B", 1): ("B", (1,))}, name="late-left")
