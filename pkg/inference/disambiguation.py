# inference/disambiguation.py

"""
Choosing the bin-map phase. Intensity data cannot tell phi = 0 from
phi = pi/2; the HOM fringe phase can. Each candidate phase is simulated,
its predicted fringe phase is fitted, and the candidate is checked against
the measured phase within its error bar.
"""

from dataclasses import asdict, dataclass, field, replace
from typing import List, Optional, Sequence

import numpy as np

from hom.fitting import fit_interferogram
from hom.model import HomFitParams, hom_from_jsa
from spectral.grid import FrequencyGrid
from spectral.jsa import StateConfig, build_state, imag_norm_fraction, jsi_of
from spectral.lobes import normalized_cross_correlation
from utils.errors import Ambiguous, ConfigError
from utils.logger import logger

TWO_PI = 2.0 * np.pi


def circular_distance(a: float, b: float) -> float:
    d = (a - b) % TWO_PI
    return float(min(d, TWO_PI - d))


@dataclass
class CandidatePrediction:
    phi: float
    imag_norm_fraction: float
    predicted_hom_phase: float
    jsi: np.ndarray = field(repr=False, default=None)


@dataclass
class CandidateReport:
    phi: float
    imag_norm_fraction: float
    predicted_hom_phase: float
    hom_phase_residual: float
    jsi_similarity: Optional[float]
    inside_interval: bool
    selected: bool = False


@dataclass
class DisambiguationReport:
    fit_phi: float
    fit_err: float
    confidence: float
    candidates: List[CandidateReport]
    selected_phi: Optional[float] = None
    ambiguous: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def predict_candidates(candidate_phis: Sequence[float], state: StateConfig, grid: FrequencyGrid,
                       delays: Sequence[float] = None) -> List[CandidatePrediction]:
    """Simulate each candidate state and fit its HOM curve for the fringe phase."""
    if delays is None:
        delays = np.linspace(-4.0, 4.0, 161)
    predictions = []
    for phi in candidate_phis:
        jsa = build_state(replace(state, phase_phi_p=float(phi)), grid)
        curve = hom_from_jsa(jsa, delays)
        init = HomFitParams(N=1.0, V=0.95, delta=state.bin_spacing, sigma=state.bin_width_omega,
                            phi=float(phi) % TWO_PI)
        fitted = fit_interferogram(curve, init=init)
        predictions.append(CandidatePrediction(
            phi=float(phi),
            imag_norm_fraction=imag_norm_fraction(jsa),
            predicted_hom_phase=fitted.params.phi,
            jsi=jsi_of(jsa),
        ))
        logger.debug(f"candidate phi={phi:.4f}: predicted fringe phase {fitted.params.phi:.4f}",
                     module="INFERENCE")
    return predictions


def disambiguate_phase(candidate_phis: Sequence[float], fit_phi: float, fit_err: float, state: StateConfig,
                       grid: FrequencyGrid, measured_jsi: np.ndarray = None, confidence: float = 1.0,
                       predictions: List[CandidatePrediction] = None) -> DisambiguationReport:
    """
    Select the candidate whose predicted fringe phase lies within
    confidence * fit_err of the measured phase. Several candidates inside
    raises Ambiguous carrying the report; none inside falls back to the
    closest with a warning.
    """
    if len(candidate_phis) < 2:
        raise ConfigError("need at least two candidate phases")
    if not fit_err >= 0:
        raise ConfigError(f"fit error must be >= 0, got {fit_err}")
    if predictions is None:
        predictions = predict_candidates(candidate_phis, state, grid)

    tolerance = confidence * fit_err
    reports = []
    for prediction in predictions:
        residual = circular_distance(prediction.predicted_hom_phase, fit_phi)
        similarity = None
        if measured_jsi is not None and prediction.jsi is not None:
            similarity = normalized_cross_correlation(prediction.jsi, measured_jsi)
        reports.append(CandidateReport(
            phi=prediction.phi,
            imag_norm_fraction=prediction.imag_norm_fraction,
            predicted_hom_phase=prediction.predicted_hom_phase,
            hom_phase_residual=residual,
            jsi_similarity=similarity,
            inside_interval=residual <= tolerance,
        ))

    report = DisambiguationReport(fit_phi=float(fit_phi), fit_err=float(fit_err), confidence=float(confidence),
                                  candidates=reports)
    inside = [r for r in reports if r.inside_interval]
    if len(inside) > 1:
        report.ambiguous = True
        raise Ambiguous(
            f"{len(inside)} candidate phases agree with phi = {fit_phi:.4f} +/- {fit_err:.4f}: "
            + ", ".join(f"{r.phi:.4f}" for r in inside),
            report=report,
        )

    if inside:
        chosen = inside[0]
    else:
        ranked = sorted(reports, key=lambda r: r.hom_phase_residual)
        if np.isclose(ranked[0].hom_phase_residual, ranked[1].hom_phase_residual, rtol=0, atol=1e-12):
            report.ambiguous = True
            raise Ambiguous("closest candidate phases are tied", report=report)
        chosen = ranked[0]
        logger.warning(
            f"no candidate within {tolerance:.4f} rad of phi = {fit_phi:.4f}; taking the closest "
            f"(phi_p = {chosen.phi:.4f}, residual {chosen.hom_phase_residual:.4f})",
            module="INFERENCE",
        )

    chosen.selected = True
    report.selected_phi = chosen.phi
    logger.info(f"selected phi_p = {chosen.phi:.4f} rad", module="INFERENCE")
    return report
