# spectral/lobes.py

"""
Peak finding on joint spectral intensities and image comparison helpers.
"""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from scipy import ndimage
from scipy.interpolate import RegularGridInterpolator

from spectral.grid import FrequencyGrid, omega_to_wavelength, wavelength_to_omega
from spectral.jsa import JsaMatrix, jsi_of
from utils.errors import NumericError


@dataclass
class Lobe:
    """A local maximum of a JSI, with its position in both index and wavelength."""
    row: int
    col: int
    wavelength1: float
    wavelength2: float
    value: float

    @property
    def center(self):
        return (self.wavelength1, self.wavelength2)


@dataclass
class SpectralImage:
    """JSI sampled on explicit wavelength axes (rows follow photon 1)."""
    intensity: np.ndarray
    wavelengths1: np.ndarray
    wavelengths2: np.ndarray

    def __post_init__(self):
        self.intensity = np.asarray(self.intensity, dtype=float)
        self.wavelengths1 = np.asarray(self.wavelengths1, dtype=float)
        self.wavelengths2 = np.asarray(self.wavelengths2, dtype=float)
        if self.intensity.shape != (self.wavelengths1.size, self.wavelengths2.size):
            raise NumericError(
                f"image shape {self.intensity.shape} does not match axes "
                f"({self.wavelengths1.size}, {self.wavelengths2.size})"
            )

    @classmethod
    def from_jsa(cls, jsa: JsaMatrix) -> "SpectralImage":
        """JSI of a JSA on its own grid points, as a density per nm^2."""
        lam1, lam2 = jsa.grid1.wavelengths, jsa.grid2.wavelengths
        # |d omega / d lambda| for each photon
        return cls(jsi_of(jsa) * np.outer(jsa.grid1.axis / lam1, jsa.grid2.axis / lam2), lam1, lam2)


def find_local_maxima(image: np.ndarray, threshold: float = 0.1) -> List[tuple]:
    """
    (row, col) of 3x3 local maxima above threshold * max, strongest first.
    """
    image = np.asarray(image, dtype=float)
    peak = image.max() if image.size else 0.0
    if peak <= 0:
        return []
    filtered = ndimage.maximum_filter(image, size=3, mode="constant", cval=-np.inf)
    mask = (image == filtered) & (image > threshold * peak)
    rows, cols = np.nonzero(mask)
    order = np.argsort(-image[rows, cols], kind="stable")
    return [(int(rows[k]), int(cols[k])) for k in order]


def detect_lobes(image: SpectralImage, count: Optional[int] = 4, threshold: float = 0.1,
                 radius_nm: float = 1.0, smoothing_bins: float = 0.0) -> List[Lobe]:
    """
    Strongest local maxima of the image, at least radius_nm apart. Optional
    Gaussian smoothing (in bins) suppresses shot-noise maxima.
    """
    data = image.intensity
    if smoothing_bins > 0:
        data = ndimage.gaussian_filter(data, sigma=smoothing_bins, mode="constant")

    lobes: List[Lobe] = []
    for row, col in find_local_maxima(data, threshold):
        w1, w2 = float(image.wavelengths1[row]), float(image.wavelengths2[col])
        if any(np.hypot(w1 - l.wavelength1, w2 - l.wavelength2) < radius_nm for l in lobes):
            continue
        lobes.append(Lobe(row, col, w1, w2, float(data[row, col])))
        if count is not None and len(lobes) == count:
            break
    return lobes


def normalized_cross_correlation(a: np.ndarray, b: np.ndarray) -> float:
    """Pearson correlation of two images of equal shape."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.shape != b.shape:
        raise NumericError(f"cannot correlate images of sizes {a.size} and {b.size}")
    a = a - a.mean()
    b = b - b.mean()
    denom = np.sqrt(np.sum(a * a) * np.sum(b * b))
    if denom == 0:
        return 0.0
    return float(np.sum(a * b) / denom)


def jsi_on_wavelengths(jsa: JsaMatrix, wavelengths1, wavelengths2) -> np.ndarray:
    """
    JSI of a JSA as a density per nm^2, linearly interpolated onto the
    given wavelength axes (zero outside the grid).
    """
    interp = RegularGridInterpolator(
        (jsa.grid1.axis, jsa.grid2.axis), jsi_of(jsa), bounds_error=False, fill_value=0.0
    )
    w1 = wavelength_to_omega(np.asarray(wavelengths1, dtype=float))
    w2 = wavelength_to_omega(np.asarray(wavelengths2, dtype=float))
    mesh1, mesh2 = np.meshgrid(w1, w2, indexing="ij")
    values = interp(np.stack([mesh1, mesh2], axis=-1))
    # |d omega / d lambda| for each photon
    return values * np.outer(w1 / wavelengths1, w2 / wavelengths2)


def resample_to_grid(image: SpectralImage, grid1: FrequencyGrid, grid2: FrequencyGrid) -> np.ndarray:
    """Image values (per nm^2) re-expressed as a density in omega on grid1 x grid2."""
    order1 = np.argsort(image.wavelengths1)
    order2 = np.argsort(image.wavelengths2)
    interp = RegularGridInterpolator(
        (image.wavelengths1[order1], image.wavelengths2[order2]),
        image.intensity[np.ix_(order1, order2)],
        bounds_error=False,
        fill_value=0.0,
    )
    lam1 = omega_to_wavelength(grid1.axis)
    lam2 = omega_to_wavelength(grid2.axis)
    mesh1, mesh2 = np.meshgrid(lam1, lam2, indexing="ij")
    values = interp(np.stack([mesh1, mesh2], axis=-1))
    # |d lambda / d omega| for each photon
    return np.clip(values, 0.0, None) * np.outer(lam1 / grid1.axis, lam2 / grid2.axis)
