"""Shared fixtures: the two worked examples and small helpers"""

import pytest

from main import WORKED_EXAMPLES
from mss_core import SecretVector
from random_source import RandomSource
from sss_core import sss_setup


def build_example(which):
    example = WORKED_EXAMPLES[which]
    params, oneway = sss_setup(example.prime, example.threshold, example.participants,
                               example.public_keys, example.oneway)
    secret = SecretVector.from_ints(params.field, example.secret, example.message_bits)
    return example, params, oneway, secret


@pytest.fixture
def example1():
    return build_example(1)


@pytest.fixture
def example2():
    return build_example(2)


@pytest.fixture
def rng():
    return RandomSource(42)
