"""Shared pytest fixtures."""

import math
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from ldp_compress.compress import RandomizerSpec  # noqa: E402
from ldp_compress.randcore import derive_stream  # noqa: E402


@pytest.fixture
def entropy(request):
    """A stream private to the requesting test."""
    return derive_stream(0, 'test', request.node.name)


@pytest.fixture
def binary_rr():
    """Binary randomized response at e^eps = 3."""
    return RandomizerSpec(
        t=1, ref_sample=lambda stream: stream.read_bits(1),
        density_ratio=lambda x, y: 1.5 if x == y else 0.5,
        eps=math.log(3), inputs=(0, 1), name='binary-rr')
