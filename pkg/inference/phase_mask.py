# inference/phase_mask.py

"""
Sign masks that restore the JSA phase structure from an intensity-only
measurement, and the masked square-root JSA itself.

The four lobes of a frequency-bin state sit on lines of constant
d = omega1 - omega2. The mask is piecewise constant in d with nodes at the
middle of each lobe pair (the HG1 zero of that bin) and at the midpoint
between the pairs. From low to high d:

    symmetric bins:      + - - +
    antisymmetric bins:  - + - +
"""

from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import List, Sequence, Tuple

import numpy as np

from spectral.grid import FrequencyGrid, wavelength_to_omega
from spectral.jsa import JsaMatrix
from utils.errors import DegenerateCenters, NegativeInput, NumericError
from utils.logger import logger

MIN_CENTER_SEPARATION = 1e-6  # nm


class BinSymmetry(str, Enum):
    SYMMETRIC = "symmetric"
    ANTISYMMETRIC = "antisymmetric"


@dataclass
class PhaseMask:
    signs: np.ndarray = field(repr=False)      # int8, +1 / -1
    lobe_centers: List[Tuple[float, float]] = field(default_factory=list)
    nodes: Tuple[float, float, float] = (0.0, 0.0, 0.0)   # d at low node, midline, high node (rad/ps)
    symmetry: BinSymmetry = BinSymmetry.SYMMETRIC


def _difference_nodes(centers: Sequence[Tuple[float, float]]):
    if len(centers) != 4:
        raise DegenerateCenters(f"need 4 lobe centers, got {len(centers)}")
    for a, b in combinations(centers, 2):
        if np.hypot(a[0] - b[0], a[1] - b[1]) < MIN_CENTER_SEPARATION:
            raise DegenerateCenters(f"lobe centers {a} and {b} coincide")

    d = np.sort([float(wavelength_to_omega(l1) - wavelength_to_omega(l2)) for l1, l2 in centers])
    low, high = d[:2], d[2:]
    if not low[1] < high[0]:
        raise DegenerateCenters("lobe centers do not split into two pairs along omega1 - omega2")
    low_node = 0.5 * (low[0] + low[1])
    high_node = 0.5 * (high[0] + high[1])
    return low_node, 0.5 * (low_node + high_node), high_node


def build_phase_mask(grid1: FrequencyGrid, grid2: FrequencyGrid, lobe_centers: Sequence[Tuple[float, float]],
                     symmetry: BinSymmetry = BinSymmetry.SYMMETRIC) -> PhaseMask:
    """
    Mask over grid1 x grid2 from four lobe centers given as
    (wavelength1, wavelength2) in nm.
    """
    symmetry = BinSymmetry(symmetry)
    low_node, midline, high_node = _difference_nodes(lobe_centers)
    half = 0.5 * (high_node - low_node)

    offset = grid1.axis[:, None] - grid2.axis[None, :] - midline
    outer = np.where(np.abs(offset) > half, 1, -1)
    if symmetry == BinSymmetry.SYMMETRIC:
        signs = outer
    else:
        signs = np.where(offset >= 0, 1, -1) * outer

    logger.debug(f"phase mask nodes at d = {low_node:.4f}, {midline:.4f}, {high_node:.4f} rad/ps "
                 f"({symmetry.value} bins)", module="INFERENCE")
    return PhaseMask(signs.astype(np.int8), [tuple(map(float, c)) for c in lobe_centers],
                     (float(low_node), float(midline), float(high_node)), symmetry)


def jsa_from_jsi(jsi: np.ndarray, mask: PhaseMask, grid1: FrequencyGrid, grid2: FrequencyGrid) -> JsaMatrix:
    """Normalized sqrt(JSI) carrying the mask's signs."""
    jsi = np.asarray(jsi, dtype=float)
    if jsi.shape != mask.signs.shape:
        raise NumericError(f"JSI shape {jsi.shape} does not match mask {mask.signs.shape}")
    if np.any(jsi < 0) or not np.all(np.isfinite(jsi)):
        raise NegativeInput("JSI must be finite and non-negative")
    return JsaMatrix(grid1, grid2, np.sqrt(jsi) * mask.signs).normalize()
