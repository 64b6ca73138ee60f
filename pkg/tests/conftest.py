"""Shared synthetic-oracle helpers: forward models with known truth."""

import numpy as np
import pytest

SIZES_8 = tuple(float(n) for n in np.geomspace(2e7, 1e9, 8))


def power_points(beta, alpha, l_inf, sizes, noise=0.0, seed=0, direction="loss_like"):
    """Noiseless (or seeded multiplicative-noise) points from a known law."""
    rng = np.random.default_rng(seed)
    points = []
    for n in sizes:
        term = beta * float(n) ** -alpha
        y = term + l_inf if direction == "loss_like" else l_inf - term
        if noise > 0:
            y *= 1.0 + noise * rng.standard_normal()
        points.append((float(n), float(y)))
    return points


def joint_points(alpha, l_inf, betas, sizes, noise=0.0, seed=0, direction="loss_like"):
    """(n, p, y) triples from a shared-exponent truth with per-weighting betas."""
    rng = np.random.default_rng(seed)
    points = []
    for p in sorted(betas):
        for n in sizes:
            term = betas[p] * float(n) ** -alpha
            y = term + l_inf if direction == "loss_like" else l_inf - term
            if noise > 0:
                y *= 1.0 + noise * rng.standard_normal()
            points.append((float(n), float(p), float(y)))
    return points


@pytest.fixture
def sizes8():
    return SIZES_8
