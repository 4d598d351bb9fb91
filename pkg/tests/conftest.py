"""Shared fixtures: the 8-generator test matrix and a few standard points.

The matrix covers every expansion regime plus the two worked models: a
quadratic Moebius flow, pure powers with alpha above and below 1 (one with
a rotated leading coefficient), one two-term generator per regime ordering
of beta against alpha, the pinned rational model, and a two-term generator
in the large-exponent corner of the parameter square.
"""

import numpy as np
import pytest

from diskflow import make_generator
from diskflow.generators import REMAINDER_RATIONAL, Remainder


def matrix():
    return {
        "quadratic": make_generator(1.0, 1.0),
        "pure_alpha_1_5": make_generator(1.0, 1.5),
        "pure_rotated": make_generator(np.exp(1j * np.pi / 8), 0.5),
        "fig4": make_generator(1.0, 1.0, 1j, 0.5),
        "beta_equal": make_generator(1.0, 1.0, 0.25j, 1.0),
        "beta_greater": make_generator(0.25, 1.0, -0.0625j, 2.0),
        "rational": make_generator(
            0.25, 1.0, remainder=Remainder(kind=REMAINDER_RATIONAL)
        ),
        "omega1_corner": make_generator(1.0, 1.5, 0.25, 2.0),
    }


@pytest.fixture(scope="session")
def gen_matrix():
    return matrix()


@pytest.fixture(scope="session")
def fig4():
    return make_generator(1.0, 1.0, 1j, 0.5)


@pytest.fixture(scope="session")
def disk_points():
    return [0.0, 0.3 + 0.2j, -0.4 + 0.1j, 0.85 - 0.05j, 0.1 - 0.6j]
