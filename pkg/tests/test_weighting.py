import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rmsc.weighting import (
    Regularizer,
    WeightRegularizer,
    conjugacy_residual,
    latent_loss,
    minimizer,
    psi,
)


def test_psi_known_values():
    reg = WeightRegularizer(gamma=1.0)
    assert psi(reg, 1.0) == pytest.approx(0.0)
    assert psi(reg, 2.0) == pytest.approx(2.0 + 0.5 - 2.0)
    assert WeightRegularizer(0.0).psi(0.5) == pytest.approx(0.0)


def test_psi_is_not_clamped_below_zero():
    # gamma < 1 makes psi(1) = gamma - 1 < 0
    assert WeightRegularizer(1e-5).psi(1.0) == pytest.approx(1e-5 - 1.0)


def test_latent_loss_and_minimizer_at_zero():
    reg = WeightRegularizer(gamma=4.0)
    assert latent_loss(reg, 0.0) == pytest.approx(2.0)
    assert minimizer(reg, 0.0) == pytest.approx(0.5)


def test_vectorized_shapes():
    reg = WeightRegularizer()
    ell = np.linspace(0, 5, 12).reshape(3, 4)
    assert reg.minimizer(ell).shape == (3, 4)
    assert reg.latent_loss(ell).shape == (3, 4)
    assert isinstance(reg.minimizer(1.0), float)


@pytest.mark.parametrize("bad", [0.0, -1.0])
def test_psi_domain(bad):
    with pytest.raises(ValueError):
        WeightRegularizer().psi(bad)


def test_negative_loss_rejected():
    with pytest.raises(ValueError):
        WeightRegularizer().minimizer(-1e-3)
    with pytest.raises(ValueError):
        WeightRegularizer().latent_loss([1.0, -2.0])


def test_zero_gamma_zero_loss_is_unbounded():
    with pytest.raises(ZeroDivisionError):
        WeightRegularizer(gamma=0.0).minimizer(0.0)


def test_negative_gamma_rejected():
    with pytest.raises(ValueError):
        WeightRegularizer(gamma=-0.1)


def test_protocol_membership():
    assert isinstance(WeightRegularizer(), Regularizer)


def test_conjugacy_residual_small_on_bracketing_grid():
    reg = WeightRegularizer(gamma=1.0)
    grid = np.geomspace(1e-3, 1e3, 200001)
    assert conjugacy_residual(reg, 3.0, grid) < 1e-8


def test_conjugacy_residual_grid_checks():
    reg = WeightRegularizer()
    with pytest.raises(ValueError):
        conjugacy_residual(reg, 1.0, [])
    with pytest.raises(ValueError):
        conjugacy_residual(reg, 1.0, [0.0, 1.0])


@settings(max_examples=200, deadline=None)
@given(gamma=st.floats(1e-6, 50.0), ell=st.floats(0.0, 1e4))
def test_minimizer_attains_latent_loss(gamma, ell):
    reg = WeightRegularizer(gamma)
    p = reg.minimizer(ell)
    assert p * ell + reg.psi(p) == pytest.approx(reg.latent_loss(ell), rel=1e-9, abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(gamma=st.floats(1e-6, 50.0), ell=st.floats(0.0, 1e4), scale=st.floats(0.05, 20.0))
def test_minimizer_beats_perturbed_weights(gamma, ell, scale):
    reg = WeightRegularizer(gamma)
    p = reg.minimizer(ell)
    q = p * scale
    assert p * ell + reg.psi(p) <= q * ell + reg.psi(q) + 1e-9 * max(1.0, abs(q * ell))


@settings(max_examples=100, deadline=None)
@given(gamma=st.floats(1e-6, 10.0), a=st.floats(0.0, 1e3), b=st.floats(0.0, 1e3))
def test_weight_decreases_and_latent_loss_concave(gamma, a, b):
    reg = WeightRegularizer(gamma)
    lo, hi = min(a, b), max(a, b)
    assert reg.minimizer(lo) >= reg.minimizer(hi)
    mid = reg.latent_loss(0.5 * (lo + hi))
    assert mid + 1e-12 >= 0.5 * (reg.latent_loss(lo) + reg.latent_loss(hi))


def test_latent_loss_derivative_is_minimizer():
    # envelope theorem: d phi / d ell = sigma(ell)
    reg = WeightRegularizer(gamma=0.3)
    for ell in (0.1, 1.0, 7.5):
        h = 1e-6
        slope = (reg.latent_loss(ell + h) - reg.latent_loss(ell - h)) / (2 * h)
        assert slope == pytest.approx(reg.minimizer(ell), rel=1e-6)
        assert math.isfinite(slope)
