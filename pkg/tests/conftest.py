from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    max_examples=100,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def exact_s(values) -> Fraction:
    """Sum of squared deviations by direct two-pass evaluation in Fractions."""
    xs = [Fraction(v) for v in values]
    mean = sum(xs, Fraction(0)) / len(xs)
    return sum(((v - mean) ** 2 for v in xs), Fraction(0))


@pytest.fixture
def uniform10k():
    from varlab.harness import DatasetSpec, generate

    return generate(DatasetSpec(10_000, None, 7))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
