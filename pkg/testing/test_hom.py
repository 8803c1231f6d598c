# testing/test_hom.py

from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hom.model import (
    CurveKind, HomCurve, HomFitParams, confidence_band, delay_to_stage, hom_from_jsa, pcc_analytic,
    stage_to_delay, synthesize_counts,
)
from spectral.jsa import JsaMatrix, build_state, ideal_hyperentangled_jsa
from utils.errors import ConfigError, FormatError, NonSquareGrid

DELAYS = np.linspace(-4.0, 4.0, 161)


# --- closed form ---

def test_analytic_curve_is_real_and_bounded(unit_params):
    for phi in np.linspace(0, 2 * np.pi, 9):
        values = pcc_analytic(replace(unit_params, phi=phi), DELAYS)
        assert np.all(values >= -1e-12)
        assert np.all(values <= 1 + 1e-12)


@pytest.mark.parametrize("phi", [0.0, np.pi])
def test_analytic_curve_even_for_real_states(unit_params, phi):
    params = replace(unit_params, phi=phi)
    np.testing.assert_allclose(pcc_analytic(params, DELAYS), pcc_analytic(params, -DELAYS), atol=1e-12)


def test_analytic_curve_tends_to_half(unit_params):
    far = pcc_analytic(unit_params, np.array([-40.0, 40.0]))
    np.testing.assert_allclose(far, 0.5, atol=1e-6)


def test_antibunching_and_dip_at_zero_delay(unit_params):
    assert pcc_analytic(replace(unit_params, phi=0.0), [0.0])[0] == pytest.approx(1.0, abs=1e-6)
    assert pcc_analytic(replace(unit_params, phi=np.pi), [0.0])[0] == pytest.approx(0.0, abs=1e-6)


def test_large_separation_limit(unit_params):
    p = replace(unit_params, V=0.8, phi=0.7)
    tau = DELAYS
    theta = p.delta * tau + p.phi
    x = p.sigma ** 2 * tau ** 2
    limit = 0.5 + 0.5 * p.V * np.cos(theta) * np.exp(-x / 4) * (1 - x / 2)
    np.testing.assert_allclose(pcc_analytic(p, tau), limit, atol=1e-12)


@given(
    delta=st.floats(0.5, 20.0), sigma=st.floats(0.3, 3.0), phi=st.floats(0.0, 2 * np.pi),
    v=st.floats(0.0, 1.0),
)
@settings(max_examples=60, deadline=None)
def test_analytic_curve_never_raises_for_valid_parameters(delta, sigma, phi, v):
    values = pcc_analytic(HomFitParams(N=1.0, V=v, delta=delta, sigma=sigma, phi=phi), DELAYS)
    assert np.all(np.isfinite(values))


def test_params_validation():
    with pytest.raises(ConfigError):
        HomFitParams(V=1.5)
    with pytest.raises(ConfigError):
        HomFitParams(sigma=0.0)


# --- numeric model ---

@pytest.mark.parametrize("phi", [0.0, np.pi / 2, np.pi, 3 * np.pi / 2])
def test_numeric_curve_matches_closed_form_for_gaussian_bins(grid, unit_params, phi):
    jsa = ideal_hyperentangled_jsa(grid, unit_params.delta, unit_params.sigma, phi)
    numeric = hom_from_jsa(jsa, DELAYS)
    assert numeric.kind == CurveKind.PROBABILITY
    np.testing.assert_allclose(numeric.values, pcc_analytic(replace(unit_params, phi=phi), DELAYS), atol=1e-6)


def test_separable_gaussian_gives_full_visibility_dip(grid):
    s = 0.8
    g = np.exp(-grid.offsets ** 2 / (4 * s * s))
    jsa = JsaMatrix(grid, grid, np.outer(g, g)).normalize()
    curve = hom_from_jsa(jsa, DELAYS)
    np.testing.assert_allclose(curve.values, 0.5 * (1 - np.exp(-s * s * DELAYS ** 2)), atol=1e-9)
    np.testing.assert_allclose(curve.values, curve.values[::-1], atol=1e-12)


def test_model_state_zero_delay(grid, state):
    antisym = hom_from_jsa(build_state(state, grid), [0.0])
    sym = hom_from_jsa(build_state(replace(state, phase_phi_p=np.pi), grid), [0.0])
    assert antisym.values[0] == pytest.approx(1.0, abs=1e-9)
    assert sym.values[0] == pytest.approx(0.0, abs=1e-9)


def test_numeric_model_needs_square_grid(grid, small_grid):
    jsa = JsaMatrix(grid, small_grid, np.ones((grid.n_points, small_grid.n_points))).normalize()
    with pytest.raises(NonSquareGrid):
        hom_from_jsa(jsa, DELAYS)


# --- curves, stage and bands ---

def test_stage_conversion_round_trip():
    assert stage_to_delay(0.15) == pytest.approx(1.0007, rel=1e-4)
    assert delay_to_stage(stage_to_delay(0.123)) == pytest.approx(0.123, rel=1e-14)


def test_curve_validation():
    with pytest.raises(FormatError):
        HomCurve([0.0, 1.0, 0.5], [1.0, 1.0, 1.0])
    with pytest.raises(FormatError):
        HomCurve([0.0, 1.0], [1.0, -1.0])


def test_synthesized_counts_are_reproducible(unit_params):
    params = replace(unit_params, N=1000.0)
    a = synthesize_counts(params, DELAYS, seed=5)
    b = synthesize_counts(params, DELAYS, seed=5)
    np.testing.assert_array_equal(a.values, b.values)
    assert a.kind == CurveKind.COUNTS


def test_confidence_band_brackets_model(unit_params):
    params = replace(unit_params, N=1000.0, phi=np.pi / 2)
    lower, upper = confidence_band(params, DELAYS, total_counts=1e5, k_sigma=3.0)
    curve = pcc_analytic(params, DELAYS)
    assert np.all(lower <= curve) and np.all(curve <= upper)
    collapsed = confidence_band(params, DELAYS, total_counts=1e5, k_sigma=0.0)
    np.testing.assert_array_equal(collapsed[0], collapsed[1])


def test_confidence_band_narrows_with_counts(unit_params):
    lo1, hi1 = confidence_band(unit_params, DELAYS, total_counts=1e4)
    lo2, hi2 = confidence_band(unit_params, DELAYS, total_counts=4e4)
    np.testing.assert_allclose((hi1 - lo1) / 2, (hi2 - lo2), rtol=1e-12)


def test_confidence_band_rejects_empty():
    with pytest.raises(ConfigError):
        confidence_band(HomFitParams(), DELAYS, total_counts=0.0)


def test_confidence_band_is_three_root_counts_wide():
    flat = HomFitParams(N=200.0, V=0.0)
    delays = np.linspace(-2.0, 2.0, 11)
    lower, upper = confidence_band(flat, delays, total_counts=100.0 * delays.size, k_sigma=3.0)
    np.testing.assert_allclose(upper - 100.0, 30.0)
    np.testing.assert_allclose(100.0 - lower, 30.0)


def test_poisson_counts_stay_inside_the_band(unit_params):
    params = replace(unit_params, N=1000.0, V=0.9, phi=1.0)
    delays = np.linspace(-3.0, 3.0, 100)
    expected = pcc_analytic(params, delays)
    lower, upper = confidence_band(params, delays, total_counts=expected.sum(), k_sigma=3.0)
    inside = [np.mean((lower <= c.values) & (c.values <= upper))
              for c in (synthesize_counts(params, delays, seed=s) for s in range(200))]
    assert np.mean(inside) >= 0.99
