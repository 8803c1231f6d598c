# testing/test_fitting.py

from dataclasses import replace

import numpy as np
import pytest

from hom.fitting import FitResult, fit_interferogram, initial_guess
from hom.model import CurveKind, HomCurve, HomFitParams, pcc_analytic, synthesize_counts
from inference.disambiguation import circular_distance
from utils.errors import ConfigError, FormatError, NoConvergence

from testing.conftest import BIN_DELTA, BIN_SIGMA

TRUE = HomFitParams(N=1000.0, V=0.9, delta=BIN_DELTA, sigma=BIN_SIGMA, phi=1.0)


def _exact_counts(params, delays):
    return HomCurve(delays, pcc_analytic(params, delays), CurveKind.COUNTS)


def test_noiseless_round_trip():
    delays = np.linspace(-4.0, 4.0, 201)
    result = fit_interferogram(_exact_counts(TRUE, delays))
    assert result.converged
    np.testing.assert_allclose(result.params.as_array(), TRUE.as_array(), rtol=1e-6)


@pytest.mark.parametrize("phi", [0.0, np.pi / 2, np.pi, 3 * np.pi / 2])
def test_initial_guess_lands_near_truth(phi):
    params = replace(TRUE, phi=phi)
    guess = initial_guess(_exact_counts(params, np.linspace(-3.0, 3.0, 100)))
    assert guess.N == pytest.approx(params.N, rel=0.15)
    assert guess.delta == pytest.approx(params.delta, rel=0.1)
    assert circular_distance(guess.phi, phi) < 0.5


def test_noisy_fits_recover_parameters():
    delays = np.linspace(-3.0, 3.0, 100)
    hits, total = 0, 0
    for phi in (0.0, np.pi / 2, np.pi, 3 * np.pi / 2):
        params = HomFitParams(N=1000.0, V=1.0, delta=BIN_DELTA, sigma=BIN_SIGMA, phi=phi)
        for seed in range(25):
            result = fit_interferogram(synthesize_counts(params, delays, seed=1000 + seed))
            total += 1
            hits += circular_distance(result.params.phi, phi) <= 3 * result.standard_errors["phi"]
            assert result.params.delta == pytest.approx(BIN_DELTA, rel=0.05)
            assert result.params.V == pytest.approx(1.0, abs=0.03)
    assert hits / total >= 0.95


def test_standard_error_scales_with_counts():
    delays = np.linspace(-3.0, 3.0, 100)

    def mean_error(n):
        params = HomFitParams(N=n, V=0.95, delta=BIN_DELTA, sigma=BIN_SIGMA, phi=0.4)
        return np.mean([
            fit_interferogram(synthesize_counts(params, delays, seed=s)).standard_errors["phi"]
            for s in range(8)
        ])

    ratio = mean_error(1000.0) / mean_error(4000.0)
    assert 1.6 <= ratio <= 2.4


def test_probability_curves_fit_unweighted():
    delays = np.linspace(-4.0, 4.0, 161)
    params = HomFitParams(N=1.0, V=0.97, delta=BIN_DELTA, sigma=BIN_SIGMA, phi=2.0)
    curve = HomCurve(delays, pcc_analytic(params, delays), CurveKind.PROBABILITY)
    result = fit_interferogram(curve, init=replace(params, phi=1.8, V=0.9))
    assert result.params.phi == pytest.approx(2.0, abs=1e-6)


def test_phase_is_reported_in_first_turn():
    delays = np.linspace(-4.0, 4.0, 201)
    result = fit_interferogram(_exact_counts(replace(TRUE, phi=2 * np.pi - 0.2), delays),
                               init=replace(TRUE, phi=-0.3, V=0.8))
    assert 0.0 <= result.params.phi < 2 * np.pi
    assert result.params.phi == pytest.approx(2 * np.pi - 0.2, abs=1e-6)


def test_too_few_points_rejected():
    delays = np.linspace(-1.0, 1.0, 9)
    with pytest.raises(ConfigError):
        fit_interferogram(_exact_counts(TRUE, delays))


def test_initial_value_outside_bounds_rejected():
    delays = np.linspace(-4.0, 4.0, 101)
    with pytest.raises(ConfigError):
        fit_interferogram(_exact_counts(TRUE, delays), init=TRUE, bounds={"delta": (10.0, 20.0)})


def test_unknown_bound_name_rejected():
    delays = np.linspace(-4.0, 4.0, 101)
    with pytest.raises(ConfigError):
        fit_interferogram(_exact_counts(TRUE, delays), bounds={"gamma": (0.0, 1.0)})


def test_iteration_cap_raises_with_partial_result():
    delays = np.linspace(-3.0, 3.0, 100)
    data = synthesize_counts(TRUE, delays, seed=2)
    with pytest.raises(NoConvergence) as info:
        fit_interferogram(data, init=replace(TRUE, phi=3.0, delta=6.0), max_iterations=1)
    assert info.value.result is not None
    assert not info.value.result.converged


def test_fit_result_serializes(tmp_path):
    delays = np.linspace(-4.0, 4.0, 201)
    result = fit_interferogram(_exact_counts(TRUE, delays))
    restored = FitResult.from_dict(result.to_dict())
    assert restored.params == result.params
    assert restored.standard_errors == result.standard_errors


def test_fit_result_reads_nulls_as_nan():
    stored = fit_interferogram(_exact_counts(TRUE, np.linspace(-4.0, 4.0, 201))).to_dict()
    stored["standard_errors"]["V"] = None
    stored["covariance"][1][1] = None
    restored = FitResult.from_dict(stored)
    assert np.isnan(restored.standard_errors["V"])
    assert np.isnan(restored.covariance[1, 1])


@pytest.mark.parametrize("phi_err", [None, "drop", float("inf")])
def test_fit_result_needs_a_finite_phase_error(phi_err):
    stored = fit_interferogram(_exact_counts(TRUE, np.linspace(-4.0, 4.0, 201))).to_dict()
    if phi_err == "drop":
        del stored["standard_errors"]["phi"]
    else:
        stored["standard_errors"]["phi"] = phi_err
    with pytest.raises(FormatError):
        FitResult.from_dict(stored)


def test_fit_result_without_params_is_a_format_error():
    with pytest.raises(FormatError):
        FitResult.from_dict({"standard_errors": {"phi": 0.1}})
