"""Shared fixtures: small domains and catalog metrics used across the suite."""
from __future__ import annotations

import numpy as np
import pytest

from causal_surgery import SpatialDomain, SpdField, ultrastatic_metric, warped_product


@pytest.fixture
def circle():
    return SpatialDomain(1, (2 * np.pi,), (64,))


@pytest.fixture
def torus():
    return SpatialDomain(2, (2 * np.pi, 4.0), (16, 16))


def flrw_exp(domain, rate=1.0, g0=None):
    """FLRW-style metric -dt^2 + e^{2 rate t} g0 over the given torus."""
    if g0 is None:
        g0 = SpdField.constant(domain, np.eye(domain.dimension))
    return warped_product(
        domain, lambda t: np.exp(rate * np.asarray(t, dtype=float)), g0
    )


@pytest.fixture
def flrw_circle(circle):
    return flrw_exp(circle)


@pytest.fixture
def ultra_circle(circle):
    return ultrastatic_metric(circle, SpdField.constant(circle, 4.0 * np.eye(1)))
