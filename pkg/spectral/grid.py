# spectral/grid.py

"""
Frequency grids. Angular frequency is carried in rad/ps and wavelength in nm
throughout the toolkit.
"""

from dataclasses import dataclass, field

import numpy as np

from utils.errors import ConfigError, NonPositiveSpan, TooFewPoints

SPEED_OF_LIGHT = 299792.458  # nm/ps


def wavelength_to_omega(wavelength):
    """Angular frequency (rad/ps) of a vacuum wavelength (nm)."""
    return 2.0 * np.pi * SPEED_OF_LIGHT / np.asarray(wavelength, dtype=float)


def omega_to_wavelength(omega):
    """Vacuum wavelength (nm) of an angular frequency (rad/ps)."""
    return 2.0 * np.pi * SPEED_OF_LIGHT / np.asarray(omega, dtype=float)


@dataclass(frozen=True)
class FrequencyGrid:
    """
    Uniform grid in angular frequency covering
    [center_wavelength - span/2, center_wavelength + span/2] in wavelength.
    The axis is increasing in omega, so decreasing in wavelength.
    """
    center_wavelength: float
    span: float
    n_points: int
    axis: np.ndarray = field(init=False, repr=False, compare=False)
    offsets: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not np.isfinite(self.span) or self.span <= 0:
            raise NonPositiveSpan(f"grid.span must be > 0, got {self.span}")
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise TooFewPoints(f"grid.n_points must be an integer >= 2, got {self.n_points}")
        if self.center_wavelength <= self.span / 2:
            raise ConfigError(
                f"grid.center_wavelength ({self.center_wavelength}) must exceed span/2 ({self.span / 2})"
            )

        lo = float(wavelength_to_omega(self.center_wavelength + self.span / 2))
        hi = float(wavelength_to_omega(self.center_wavelength - self.span / 2))
        mid = 0.5 * (lo + hi)

        axis = np.linspace(lo, hi, int(self.n_points))
        # offsets from the band center keep spacing exact to ~1e-14 relative
        offsets = np.linspace(lo - mid, hi - mid, int(self.n_points))
        axis.flags.writeable = False
        offsets.flags.writeable = False
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "offsets", offsets)

    @property
    def step(self) -> float:
        return (self.axis[-1] - self.axis[0]) / (self.n_points - 1)

    @property
    def mid_omega(self) -> float:
        """Midpoint of the omega axis (not the omega of center_wavelength)."""
        return 0.5 * (self.axis[0] + self.axis[-1])

    @property
    def center_omega(self) -> float:
        return float(wavelength_to_omega(self.center_wavelength))

    @property
    def wavelengths(self) -> np.ndarray:
        return omega_to_wavelength(self.axis)

    def cell_wavelength_edges(self):
        """Short and long wavelength edge of every omega cell."""
        half = 0.5 * self.step
        return omega_to_wavelength(self.axis + half), omega_to_wavelength(self.axis - half)

    def to_dict(self) -> dict:
        return {
            "center_wavelength": self.center_wavelength,
            "span": self.span,
            "n_points": int(self.n_points),
        }


def make_grid(center_wavelength: float, span: float, n_points: int) -> FrequencyGrid:
    """Build a FrequencyGrid, raising NonPositiveSpan / TooFewPoints on bad input."""
    return FrequencyGrid(float(center_wavelength), float(span), int(n_points))
