# tofs/spectrometer.py

"""
Dispersive fiber spectrometer: wavelength to arrival-time mapping and the
settings of the detection chain.
"""

from dataclasses import asdict, dataclass

import numpy as np

from utils.errors import ConfigError
from utils.logger import logger

FWHM_PER_SIGMA = 2.0 * np.sqrt(2.0 * np.log(2.0))


@dataclass(frozen=True)
class TofsConfig:
    dispersion: float = 20.0              # ps/(nm km)
    fiber_length: float = 20.0            # km
    jitter_fwhm: float = 50.0             # ps, combined detector + electronics
    repetition_period: float = 12.5       # ns
    reference_wavelength: float = 1540.0  # nm, zero of the delay axis
    timing_resolution: float = 1.0        # ps
    survival_probability: float = 1.0     # per photon, fiber and detector loss
    n_bins: int = 320
    bin_width: float = 25.0               # ps

    def __post_init__(self):
        for name in ("dispersion", "fiber_length", "repetition_period", "reference_wavelength",
                     "timing_resolution", "bin_width"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ConfigError(f"tofs.{name} must be > 0, got {value}")
        if not np.isfinite(self.jitter_fwhm) or self.jitter_fwhm < 0:
            raise ConfigError(f"tofs.jitter_fwhm must be >= 0, got {self.jitter_fwhm}")
        if not 0 < self.survival_probability <= 1:
            raise ConfigError(f"tofs.survival_probability must be in (0, 1], got {self.survival_probability}")
        if int(self.n_bins) != self.n_bins or self.n_bins < 1:
            raise ConfigError(f"tofs.n_bins must be a positive integer, got {self.n_bins}")
        ticks = self.period_ps / self.timing_resolution
        if abs(ticks - round(ticks)) > 1e-9 * ticks:
            raise ConfigError("tofs.timing_resolution must divide the repetition period")

    @property
    def ps_per_nm(self) -> float:
        """Total dispersion D * L."""
        return self.dispersion * self.fiber_length

    @property
    def period_ps(self) -> float:
        return self.repetition_period * 1000.0

    @property
    def period_ticks(self) -> int:
        return int(round(self.period_ps / self.timing_resolution))

    @property
    def jitter_sigma(self) -> float:
        return self.jitter_fwhm / FWHM_PER_SIGMA

    @property
    def implied_range_nm(self) -> float:
        """Spectral range that fits in one pulse period before arrivals wrap."""
        return self.period_ps / self.ps_per_nm

    @property
    def resolution_nm(self) -> float:
        """Jitter-limited wavelength resolution (FWHM)."""
        return self.jitter_fwhm / self.ps_per_nm

    def to_dict(self) -> dict:
        return asdict(self)


def wavelength_to_delay(wavelength, config: TofsConfig):
    """Arrival delay (ps) relative to the reference wavelength."""
    return config.ps_per_nm * (np.asarray(wavelength, dtype=float) - config.reference_wavelength)


def delay_to_wavelength(delay_ps, config: TofsConfig):
    return config.reference_wavelength + np.asarray(delay_ps, dtype=float) / config.ps_per_nm


def check_spectral_range(config: TofsConfig, span_nm: float) -> bool:
    """Warn when a spectrum of span_nm would wrap into the next pulse window."""
    fits = span_nm * config.ps_per_nm < config.period_ps
    if not fits:
        logger.warning(
            f"{span_nm:.2f} nm spans {span_nm * config.ps_per_nm:.0f} ps, more than the "
            f"{config.period_ps:.0f} ps pulse period; arrivals will wrap",
            module="TOFS",
        )
    return fits
