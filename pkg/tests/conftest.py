"""Shared fixtures and independent oracles built on scipy/mpmath."""

import numpy as np
import pytest

from dyncert import models, protocol


@pytest.fixture(scope="session")
def harmonic_slice6():
    return protocol.truncated_slice(models.harmonic(), 6, check=False)


@pytest.fixture(scope="session")
def pendulum_model():
    return models.pendulum(-0.02)


@pytest.fixture(scope="session")
def morse_model():
    return models.morse(8.0)


def sgn_overlap_oracle(model, n, m, n_points=300001):
    """High-accuracy <n| sgn(q) |m> by composite quadrature (scipy-free
    trapezoid on a dense grid chosen per model)."""
    from dyncert import spectra

    def grid(lo, hi, n):
        # keep q = 0 as a knot: sign(q) has a kink there
        n_left = max(int(round(n * (-lo) / (hi - lo))), 2)
        return np.concatenate([np.linspace(lo, 0.0, n_left),
                               np.linspace(0.0, hi, n - n_left + 1)[1:]])

    if model.kind == models.WELL:
        qs = grid(-0.5, 0.5, n_points)
    elif model.kind == models.PENDULUM:
        qs = grid(-np.pi, np.pi, min(n_points, 80001))
    elif model.kind == models.MORSE:
        # weakly bound levels decay slowly to the left: reach x = -40
        qs = grid(-40.0, 5.0, max(n_points, 1000001))
    else:
        qs = grid(-15.0, 15.0, n_points)
    a = spectra.eigenfunction_grid(model, n, qs)
    b = spectra.eigenfunction_grid(model, m, qs)
    return float(np.trapezoid(np.sign(qs) * a * b, qs))
