"""Inscribed-ellipsoid sandwiches and distance-to-Euclidean tables."""

import math

import numpy as np
import pytest

from greedy_widths.errors import ConfigError, RankError, SandwichError
from greedy_widths.geometry import (EllipsoidSandwich, gamma_bound_for_space,
                                    gamma_table, john_ellipsoid, tilted_norm)
from greedy_widths.spaces import NormedSpace
from greedy_widths.subspaces import Subspace


def test_euclidean_subspace_lambda_is_one(rng):
    space = NormedSpace.lp(8, 2)
    W = rng.normal(size=(8, 3))
    sw = john_ellipsoid(Subspace(W, space))
    assert sw.lam == pytest.approx(1.0, abs=1e-6)
    # gauge equals the ambient norm on the section
    C = rng.normal(size=(20, 3))
    assert np.allclose(sw.gauge(C), np.linalg.norm(C @ W.T, axis=1),
                       atol=1e-9)


@pytest.mark.parametrize("p", [1.0, 1.5, 4.0, np.inf])
def test_coordinate_section_lambda_closed_form(p, rng):
    k = 3
    space = NormedSpace.lp(8, p)
    W = np.eye(8)[:, :k] * np.array([1.0, 2.0, 0.5])
    sw = john_ellipsoid(Subspace(W, space))
    pe = 0.0 if p == np.inf else 1.0 / p
    assert sw.lam == pytest.approx(k ** abs(0.5 - pe), rel=1e-9)


@pytest.mark.parametrize("p", [1.0, 1.5, 4.0, np.inf])
def test_random_subspace_sandwich_is_valid(p, rng):
    space = NormedSpace.lp(6, p)
    W = rng.normal(size=(6, 2))
    V = Subspace(W, space)
    sw = john_ellipsoid(V, samples=300, seed=1)
    assert sw.lam <= math.sqrt(2) * (1 + 1e-6)
    # double inequality on a dense independent sample
    rng2 = np.random.default_rng(99)
    C = rng2.normal(size=(3000, 2))
    C /= np.linalg.norm(C, axis=1, keepdims=True)
    N = space.norm(C @ W.T)
    g = sw.gauge(C)
    assert (g >= N * (1 - 1e-6)).all()          # ellipsoid inside the ball
    assert (g <= sw.lam * N * (1 + 1e-6)).all()  # lambda-dilation contains it


def test_john_requires_positive_dimension():
    space = NormedSpace.lp(4, 3.0)
    with pytest.raises(RankError):
        john_ellipsoid(Subspace.empty(space))


def test_tilted_norm_round_trip(rng):
    space = NormedSpace.lp(6, 4.0)
    W = rng.normal(size=(6, 2))
    V = Subspace(W, space)
    sw = john_ellipsoid(V, samples=300, seed=0)
    e_space = tilted_norm(V, sw)
    assert e_space.is_inner_product
    c = rng.normal(size=2)
    assert e_space.norm(c) == pytest.approx(float(sw.gauge(c)[0]), rel=1e-10)


def test_tilted_norm_rejects_broken_sandwich(rng):
    space = NormedSpace.lp(6, 4.0)
    W = rng.normal(size=(6, 2))
    V = Subspace(W, space)
    sw = john_ellipsoid(V, samples=300, seed=0)
    bad = EllipsoidSandwich(V, sw.E * 25.0, sw.lam,
                            sw.inner_certificates, sw.outer_certificates)
    with pytest.raises(SandwichError):
        tilted_norm(V, bad)


def test_gamma_table_values():
    assert gamma_table("hilbert", 7) == 1.0
    assert gamma_table("lp", 4, 4.0) == pytest.approx(4.0 ** 0.25)
    assert gamma_table("lp", 4, np.inf) == pytest.approx(2.0)
    assert gamma_table("generic", 9) == 3.0
    with pytest.raises(ConfigError):
        gamma_table("lp", 4)
    with pytest.raises(ConfigError):
        gamma_table("weird", 2)


def test_gamma_bound_for_space():
    assert gamma_bound_for_space(NormedSpace.lp(8, 2), 5) == 1.0
    assert gamma_bound_for_space(NormedSpace.lp(8, 3.0), 3) == \
        pytest.approx(3.0 ** abs(0.5 - 1 / 3))
