# spectral/jsa.py

"""
Joint spectral amplitudes: composition from pump and phase matching,
displacement along the anti-diagonal, the frequency-bin map and the
ideal Gaussian-bin reference state.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from spectral.functions import PmfSpec, PumpSpec, pmf_hermite_gauss, pump_envelope
from spectral.grid import FrequencyGrid, omega_to_wavelength, wavelength_to_omega
from utils.errors import ConfigError, GridMismatch, NonSquareGrid, NumericError, ShiftOutOfGrid
from utils.logger import logger

# grid must capture this fraction of the analytic JSA mass
MIN_CAPTURED_MASS = 0.99
_TINY = 1e-300


@dataclass(frozen=True)
class JsaMatrix:
    """Complex amplitudes f[i, j] = f(grid1.axis[i], grid2.axis[j])."""
    grid1: FrequencyGrid
    grid2: FrequencyGrid
    amplitudes: np.ndarray = field(repr=False, compare=False)
    normalized: bool = False

    def __post_init__(self):
        amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if amplitudes.shape != (self.grid1.n_points, self.grid2.n_points):
            raise GridMismatch(
                f"amplitude shape {amplitudes.shape} does not match grids "
                f"({self.grid1.n_points}, {self.grid2.n_points})"
            )
        if not np.all(np.isfinite(amplitudes)):
            raise NumericError("JSA contains non-finite amplitudes")
        object.__setattr__(self, "amplitudes", amplitudes)

    @property
    def measure(self) -> float:
        return self.grid1.step * self.grid2.step

    @property
    def is_square(self) -> bool:
        return self.grid1 == self.grid2

    def norm(self) -> float:
        """Integrated |f|^2 (sum times the cell area)."""
        return float(np.sum(np.abs(self.amplitudes) ** 2) * self.measure)

    def normalize(self) -> "JsaMatrix":
        total = self.norm()
        if total < _TINY:
            raise GridMismatch("JSA has no mass on this grid")
        return JsaMatrix(self.grid1, self.grid2, self.amplitudes / np.sqrt(total), normalized=True)

    def marginal1(self) -> np.ndarray:
        """Photon-1 spectral density over grid1."""
        return np.sum(np.abs(self.amplitudes) ** 2, axis=1) * self.grid2.step

    def marginal2(self) -> np.ndarray:
        return np.sum(np.abs(self.amplitudes) ** 2, axis=0) * self.grid1.step

    def centroids(self):
        """Intensity-weighted mean omega of photon 1 and photon 2."""
        m1, m2 = self.marginal1(), self.marginal2()
        return (
            float(np.sum(m1 * self.grid1.axis) / np.sum(m1)),
            float(np.sum(m2 * self.grid2.axis) / np.sum(m2)),
        )

    def centroid_wavelengths(self):
        w1, w2 = self.centroids()
        return float(omega_to_wavelength(w1)), float(omega_to_wavelength(w2))


def jsi_of(jsa: JsaMatrix) -> np.ndarray:
    return np.abs(jsa.amplitudes) ** 2


def imag_norm_fraction(jsa: JsaMatrix) -> float:
    """Share of the state norm carried by the imaginary part of f."""
    total = np.sum(np.abs(jsa.amplitudes) ** 2)
    if total < _TINY:
        return 0.0
    return float(np.sum(jsa.amplitudes.imag ** 2) / total)


@dataclass(frozen=True)
class StateConfig:
    bin_separation: float = 11.0          # nm between bin centroids
    bin_width: float = 3.0                # nm, nominal bin FWHM
    phase_phi_p: float = 0.0              # rad, bin-map phase
    pump: PumpSpec = field(default_factory=PumpSpec)
    pmf: PmfSpec = field(default_factory=PmfSpec)

    def __post_init__(self):
        if not self.bin_width > 0:
            raise ConfigError(f"state.bin_width must be > 0, got {self.bin_width}")
        if not self.bin_separation > self.bin_width:
            raise ConfigError(
                f"state.bin_separation ({self.bin_separation}) must exceed state.bin_width ({self.bin_width})"
            )

    @property
    def degenerate_wavelength(self) -> float:
        return 2.0 * self.pump.center_wavelength

    @property
    def bin_offset(self) -> float:
        """Half the omega spacing between the bins (rad/ps)."""
        return antidiagonal_offset(self.degenerate_wavelength, self.bin_separation)

    @property
    def bin_spacing(self) -> float:
        """Omega spacing between the two bins, the HOM beat frequency."""
        return 2.0 * self.bin_offset

    @property
    def bin_width_omega(self) -> float:
        """Gaussian sigma of the bins in omega, taking 2*sigma as the nominal bin width."""
        lam = self.degenerate_wavelength
        return float(wavelength_to_omega(lam - self.bin_width / 2) - wavelength_to_omega(lam + self.bin_width / 2)) / 2

    def to_dict(self) -> dict:
        return {
            "bin_separation": self.bin_separation,
            "bin_width": self.bin_width,
            "phase_phi_p": self.phase_phi_p,
            "pump": self.pump.to_dict(),
            "pmf": self.pmf.to_dict(),
        }


def antidiagonal_offset(center_wavelength: float, shift_nm: float) -> float:
    """Half-difference offset (rad/ps) placing the centroids shift_nm apart around center_wavelength."""
    hi = wavelength_to_omega(center_wavelength - shift_nm / 2)
    lo = wavelength_to_omega(center_wavelength + shift_nm / 2)
    return float(hi - lo) / 2


@dataclass(frozen=True)
class JsaModel:
    """Analytic JSA alpha(w1 + w2) * pmf((w1 - w2)/2) on a pair of grids."""
    grid1: FrequencyGrid
    grid2: FrequencyGrid
    pump: PumpSpec
    pmf: PmfSpec

    def evaluate(self) -> np.ndarray:
        w1 = self.grid1.axis[:, None]
        w2 = self.grid2.axis[None, :]
        alpha = pump_envelope(self.pump, w1 + w2)
        phi = pmf_hermite_gauss(self.pmf, (w1 - w2) / 2)
        return (alpha * phi).astype(complex)

    def analytic_norm(self) -> float:
        """Integral of |f|^2 over the whole plane (the Jacobian of (x, sum) is 1)."""
        return self.pump.integrated_intensity() * self.pmf.integrated_intensity()

    def to_jsa(self) -> JsaMatrix:
        raw = JsaMatrix(self.grid1, self.grid2, self.evaluate())
        return raw.normalize()


def compose_jsa(grid1: FrequencyGrid, grid2: FrequencyGrid, pump: PumpSpec, pmf: PmfSpec) -> JsaMatrix:
    """Normalized JSA of the given pump and phase matching on grid1 x grid2."""
    return JsaModel(grid1, grid2, pump, pmf).to_jsa()


def displace_antidiagonal(model: JsaModel, shift_nm: float) -> JsaMatrix:
    """
    Move the JSA along the anti-diagonal so photon 1 sits shift_nm/2 to the
    blue of the degenerate point and photon 2 shift_nm/2 to the red. Only
    the PMF offset changes; the pump envelope stays on the pump frequency.
    """
    if not np.isfinite(shift_nm) or shift_nm < 0:
        raise ConfigError(f"shift must be >= 0 nm, got {shift_nm}")

    delta = antidiagonal_offset(2.0 * model.pump.center_wavelength, shift_nm)
    shifted = replace(model, pmf=replace(model.pmf, mismatch_offset=model.pmf.mismatch_offset + delta))

    raw = JsaMatrix(shifted.grid1, shifted.grid2, shifted.evaluate())
    captured = raw.norm() / shifted.analytic_norm()
    if captured < MIN_CAPTURED_MASS:
        raise ShiftOutOfGrid(
            f"only {captured:.4f} of the JSA mass lies on the grid after a {shift_nm} nm shift"
        )
    logger.debug(f"displaced by {shift_nm} nm (offset {delta:.5f} rad/ps), captured mass {captured:.6f}",
                 module="SPECTRAL")
    return raw.normalize()


def apply_bin_map(jsa: JsaMatrix, phi: float) -> JsaMatrix:
    """f_out(w1, w2) = (f(w1, w2) - exp(i phi) f(w2, w1)) / N."""
    if not jsa.is_square:
        raise NonSquareGrid("bin map needs identical grids for both photons")
    f = jsa.amplitudes
    mapped = f - np.exp(1j * phi) * f.T
    total = np.sum(np.abs(mapped) ** 2) * jsa.measure
    if total < _TINY:
        raise NumericError(f"bin map with phi={phi} cancels the state")
    return JsaMatrix(jsa.grid1, jsa.grid2, mapped / np.sqrt(total), normalized=True)


def ideal_hyperentangled_jsa(grid: FrequencyGrid, delta: float, sigma: float, phi: float,
                             center_omega: float = None) -> JsaMatrix:
    """
    Reference state built from Gaussian bins: photon 1 in the bin at
    center + delta/2, photon 2 at center - delta/2, antisymmetric in the
    HG0/HG1 modes of intensity width sigma/2, then bin-mapped with phase phi.
    Its HOM curve is the closed-form interferogram exactly.
    """
    if delta <= 0 or sigma <= 0:
        raise ConfigError("delta and sigma must be > 0")
    center = grid.center_omega if center_omega is None else center_omega
    s = sigma / 2.0

    def hg0(nu):
        return (2.0 * np.pi * s * s) ** -0.25 * np.exp(-nu * nu / (4.0 * s * s))

    def hg1(nu):
        return (nu / s) * hg0(nu)

    nu_a = grid.axis - (center + delta / 2)
    nu_b = grid.axis - (center - delta / 2)
    f = np.outer(hg0(nu_a), hg1(nu_b)) - np.outer(hg1(nu_a), hg0(nu_b))
    base = JsaMatrix(grid, grid, f.astype(complex))
    return apply_bin_map(base, phi)


def build_state(state: StateConfig, grid: FrequencyGrid) -> JsaMatrix:
    """Full model state: compose on grid x grid, displace by bin_separation, bin-map with phase_phi_p."""
    model = JsaModel(grid, grid, state.pump, state.pmf)
    displaced = displace_antidiagonal(model, state.bin_separation)
    mapped = apply_bin_map(displaced, state.phase_phi_p)
    logger.debug(f"built state: separation {state.bin_separation} nm, phi {state.phase_phi_p:.4f}",
                 module="SPECTRAL")
    return mapped
