# hom/model.py

"""
Hong-Ou-Mandel interferograms: the closed-form model for two Gaussian
frequency bins, the numeric curve of an arbitrary JSA, delay-stage
conversion and shot-noise bands.
"""

from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from spectral.grid import SPEED_OF_LIGHT
from spectral.jsa import JsaMatrix
from utils.errors import ConfigError, FormatError, NonRealResult, NonSquareGrid

PARAMETER_NAMES = ("N", "V", "delta", "sigma", "phi")

# delays processed per block in the numeric model
_DELAY_BLOCK = 256


@dataclass(frozen=True)
class HomFitParams:
    N: float = 1.0          # normalization (counts or 1)
    V: float = 1.0          # visibility
    delta: float = 8.6      # rad/ps, bin spacing
    sigma: float = 1.19     # rad/ps, bin width
    phi: float = 0.0        # rad

    def __post_init__(self):
        if not self.N > 0:
            raise ConfigError(f"N must be > 0, got {self.N}")
        if not 0 <= self.V <= 1:
            raise ConfigError(f"V must be in [0, 1], got {self.V}")
        if not self.delta > 0:
            raise ConfigError(f"delta must be > 0, got {self.delta}")
        if not self.sigma > 0:
            raise ConfigError(f"sigma must be > 0, got {self.sigma}")
        if not np.isfinite(self.phi):
            raise ConfigError("phi must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in PARAMETER_NAMES], dtype=float)

    @classmethod
    def from_array(cls, values) -> "HomFitParams":
        return cls(**{name: float(v) for name, v in zip(PARAMETER_NAMES, values)})

    def to_dict(self) -> dict:
        return asdict(self)


class CurveKind(str, Enum):
    COUNTS = "Counts"
    PROBABILITY = "Probability"


@dataclass
class HomCurve:
    delays: np.ndarray                     # ps, strictly increasing
    values: np.ndarray
    kind: CurveKind = CurveKind.COUNTS
    positions: Optional[np.ndarray] = field(default=None, repr=False)  # stage position, mm

    def __post_init__(self):
        self.delays = np.asarray(self.delays, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        self.kind = CurveKind(self.kind)
        if self.delays.shape != self.values.shape or self.delays.ndim != 1:
            raise FormatError("delays and values must be 1-D arrays of equal length")
        if self.delays.size > 1 and np.any(np.diff(self.delays) <= 0):
            raise FormatError("delays must be strictly increasing")
        if not np.all(np.isfinite(self.values)) or np.any(self.values < 0):
            raise FormatError("HOM values must be finite and non-negative")

    def __len__(self):
        return int(self.delays.size)


def stage_to_delay(position_mm):
    """Delay (ps) of a retro-reflecting stage moved by position_mm (double pass)."""
    return 2.0 * np.asarray(position_mm, dtype=float) * 1e6 / SPEED_OF_LIGHT


def delay_to_stage(delay_ps):
    return np.asarray(delay_ps, dtype=float) * SPEED_OF_LIGHT / 2e6


def pcc_values(N, V, delta, sigma, phi, delays):
    """
    Closed-form coincidence probability, unvalidated parameters. Numerator
    and denominator are scaled by exp(-delta^2/sigma^2) to stay finite for
    well separated bins.
    """
    tau = np.asarray(delays, dtype=float)
    theta = delta * tau + phi
    eps = np.exp(-(delta / sigma) ** 2)
    s2 = sigma * sigma

    numerator = ((1.0 + np.exp(2j * theta)) * s2 * (s2 * tau * tau - 2.0)
                 + 2.0 * eps * np.exp(1j * theta) * (4.0 * delta * delta - 2.0 * s2 + s2 * s2 * tau * tau))
    denominator = s2 + eps * (-2.0 * delta * delta * np.cos(phi) + s2 * np.cos(phi) ** 2)
    prefactor = -(V / 8.0) * np.exp(-1j * theta - s2 * tau * tau / 4.0)

    value = N * (0.5 + prefactor * numerator / denominator)
    residue = np.max(np.abs(value.imag)) if value.size else 0.0
    if residue > 1e-9 * N:
        raise NonRealResult(f"interferogram has imaginary residue {residue:.3e}")
    return value.real


def pcc_analytic(params: HomFitParams, delays) -> np.ndarray:
    """Coincidence counts (or probability for N=1) at each delay (ps)."""
    return pcc_values(params.N, params.V, params.delta, params.sigma, params.phi, delays)


def hom_from_jsa(jsa: JsaMatrix, delays) -> HomCurve:
    """
    Coincidence probability of a JSA behind a balanced beam splitter with
    photon 1 delayed by tau:
        p(tau) = 1/2 (1 - Re sum f(i,j) conj(f(j,i)) exp(-i (w_i - w_j) tau) step^2)
    """
    if not jsa.is_square:
        raise NonSquareGrid("HOM simulation needs identical grids for both photons")
    tau = np.asarray(delays, dtype=float)

    f = jsa.amplitudes
    overlap = f * np.conj(f.T) * jsa.measure / jsa.norm()
    nu = jsa.grid1.offsets

    out = np.empty(tau.size)
    for start in range(0, tau.size, _DELAY_BLOCK):
        block = tau[start:start + _DELAY_BLOCK]
        phases = np.exp(-1j * np.outer(block, nu))
        out[start:start + block.size] = np.real(np.sum((phases @ overlap) * np.conj(phases), axis=1))
    probability = np.clip(0.5 * (1.0 - out), 0.0, 1.0)
    return HomCurve(tau, probability, CurveKind.PROBABILITY)


def synthesize_counts(params: HomFitParams, delays, seed: int) -> HomCurve:
    """Poisson-sampled counts around the closed-form curve."""
    rng = np.random.default_rng(seed)
    expected = pcc_analytic(params, delays)
    counts = rng.poisson(np.clip(expected, 0.0, None)).astype(float)
    return HomCurve(np.asarray(delays, dtype=float), counts, CurveKind.COUNTS)


def confidence_band(model: HomFitParams, delays, total_counts: float, k_sigma: float = 3.0):
    """
    Shot-noise band around the model curve scaled to total_counts:
    returns (lower, upper) in the model's own units.
    """
    if not total_counts > 0:
        raise ConfigError(f"total_counts must be > 0, got {total_counts}")
    if k_sigma < 0:
        raise ConfigError(f"k_sigma must be >= 0, got {k_sigma}")
    curve = pcc_analytic(model, delays)
    scale = total_counts / np.sum(curve)
    half = k_sigma * np.sqrt(np.clip(curve, 0.0, None) * scale) / scale
    return curve - half, curve + half
