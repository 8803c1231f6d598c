# spectral/functions.py

"""
Pump envelope and phase-matching functions of a type-II SPDC source.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from spectral.grid import wavelength_to_omega
from utils.errors import ConfigError, UnsupportedOrder

# time-bandwidth products of transform-limited pulses
TBP_SECH_SQUARED = 0.315
TBP_GAUSSIAN = 0.441

# amplitude FWHM of sech(x) is 2*arccosh(2); intensity FWHM of sech^2(x) is 2*arccosh(sqrt 2)
SECH_INTENSITY_FWHM = 2.0 * np.arccosh(np.sqrt(2.0))

# Gaussian amplitude width (in units of B) with maximal overlap with sech(x/B)
SECH_GAUSSIAN_MATCH = 1.257


class PumpShape(str, Enum):
    SECH_SQUARED = "SechSquared"
    GAUSSIAN = "Gaussian"


@dataclass(frozen=True)
class PumpSpec:
    """Transform-limited pump pulse."""
    center_wavelength: float = 775.0      # nm
    pulse_duration_fwhm: float = 1.27     # ps, intensity FWHM
    repetition_period: float = 12.5       # ns
    shape: PumpShape = PumpShape.SECH_SQUARED

    def __post_init__(self):
        object.__setattr__(self, "shape", PumpShape(self.shape))
        for name in ("center_wavelength", "pulse_duration_fwhm", "repetition_period"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ConfigError(f"pump.{name} must be > 0, got {value}")

    @property
    def center_omega(self) -> float:
        return float(wavelength_to_omega(self.center_wavelength))

    @property
    def bandwidth_fwhm(self) -> float:
        """Intensity FWHM of the pump spectrum in rad/ps."""
        tbp = TBP_SECH_SQUARED if self.shape == PumpShape.SECH_SQUARED else TBP_GAUSSIAN
        return 2.0 * np.pi * tbp / self.pulse_duration_fwhm

    @property
    def envelope_width(self) -> float:
        """Scale B of sech(x/B), or b of exp(-x^2/(2 b^2)) for a Gaussian pump."""
        if self.shape == PumpShape.SECH_SQUARED:
            return self.bandwidth_fwhm / SECH_INTENSITY_FWHM
        return self.bandwidth_fwhm / (2.0 * np.sqrt(np.log(2.0)))

    @property
    def gaussian_equivalent_width(self) -> float:
        if self.shape == PumpShape.SECH_SQUARED:
            return SECH_GAUSSIAN_MATCH * self.envelope_width
        return self.envelope_width

    def integrated_intensity(self) -> float:
        """Integral of |alpha|^2 over the sum frequency."""
        if self.shape == PumpShape.SECH_SQUARED:
            return 2.0 * self.envelope_width
        return np.sqrt(np.pi) * self.envelope_width

    def to_dict(self) -> dict:
        return {
            "center_wavelength": self.center_wavelength,
            "pulse_duration_fwhm": self.pulse_duration_fwhm,
            "repetition_period": self.repetition_period,
            "shape": self.shape.value,
        }


@dataclass(frozen=True)
class PmfSpec:
    order: int = 1
    width: float = 0.5557                 # rad/ps
    mismatch_offset: float = 0.0          # rad/ps

    def __post_init__(self):
        if not np.isfinite(self.width) or self.width <= 0:
            raise ConfigError(f"pmf.width must be > 0, got {self.width}")
        if not np.isfinite(self.mismatch_offset):
            raise ConfigError("pmf.mismatch_offset must be finite")

    @classmethod
    def matched_to(cls, pump: PumpSpec, order: int = 1, mismatch_offset: float = 0.0) -> "PmfSpec":
        """
        PMF width that makes the pump-PMF product separable in the lobe
        coordinates, leaving the two-mode (HG0/HG1) structure of the bin.
        """
        return cls(order=order, width=0.5 * pump.gaussian_equivalent_width, mismatch_offset=mismatch_offset)

    def integrated_intensity(self) -> float:
        """Integral of |pmf|^2 over the half-difference frequency."""
        self._check_order()
        return np.sqrt(np.pi) * self.width

    def _check_order(self):
        if self.order not in (0, 1):
            raise UnsupportedOrder(f"pmf.order must be 0 or 1, got {self.order}")

    def to_dict(self) -> dict:
        return {"order": int(self.order), "width": self.width, "mismatch_offset": self.mismatch_offset}


def _sech(x):
    ax = np.abs(x)
    e = np.exp(-ax)
    return 2.0 * e / (1.0 + e * e)


def pump_envelope(pump: PumpSpec, omega_sum):
    """
    Pump amplitude alpha at the signal+idler sum frequency omega_sum (rad/ps).
    Real, non-negative, peaking at 1 where omega_sum equals the pump frequency.
    """
    detuning = np.asarray(omega_sum, dtype=float) - pump.center_omega
    width = pump.envelope_width
    if pump.shape == PumpShape.SECH_SQUARED:
        return _sech(detuning / width)
    return np.exp(-0.5 * (detuning / width) ** 2)


def pmf_hermite_gauss(pmf: PmfSpec, omega_half_diff):
    """
    Phase-matching amplitude at x = (omega1 - omega2)/2 - mismatch_offset.
    Order 0 is a Gaussian; order 1 is the first Hermite-Gauss function with
    extrema of magnitude sqrt(2)*exp(-1/2) at x = +-width.
    """
    pmf._check_order()
    x = np.asarray(omega_half_diff, dtype=float) - pmf.mismatch_offset
    u = x / pmf.width
    gauss = np.exp(-0.5 * u * u)
    if pmf.order == 0:
        return gauss
    return np.sqrt(2.0) * u * gauss
