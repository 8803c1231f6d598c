# schmidt/decomposition.py

"""
Schmidt decomposition of a discretized JSA.

The amplitude matrix is weighted by sqrt(step1 * step2) before the SVD so
the singular values are those of the continuous operator. Mode columns are
divided back by sqrt(step) so that sum |g|^2 * step = 1.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from spectral.grid import FrequencyGrid
from spectral.jsa import JsaMatrix
from utils.errors import DecompositionFailure, NotNormalized, RankOutOfRange
from utils.logger import logger

# coefficients below this fraction of the leading one are set to zero
COEFFICIENT_FLOOR = 1e-12
NORM_TOLERANCE = 1e-6


@dataclass
class SchmidtDecomposition:
    coefficients: np.ndarray          # lambda_i, descending, sum 1
    modes1: np.ndarray = field(repr=False)   # n1 x r, columns g_i
    modes2: np.ndarray = field(repr=False)   # n2 x r, columns h_i
    grid1: FrequencyGrid = None
    grid2: FrequencyGrid = None
    weights: np.ndarray = field(default=None, repr=False)  # untruncated lambda_i

    @property
    def rank(self) -> int:
        return int(self.coefficients.size)

    @property
    def schmidt_number(self) -> float:
        return schmidt_number(self)


def decompose(jsa: JsaMatrix) -> SchmidtDecomposition:
    """Schmidt coefficients and modes of a normalized JSA."""
    total = jsa.norm()
    if abs(total - 1.0) > NORM_TOLERANCE:
        raise NotNormalized(f"JSA norm is {total:.9f}, expected 1")

    s1, s2 = jsa.grid1.step, jsa.grid2.step
    weighted = jsa.amplitudes * np.sqrt(s1 * s2)
    try:
        u, singular, vh = linalg.svd(weighted, full_matrices=False, lapack_driver="gesdd")
    except linalg.LinAlgError as e:
        raise DecompositionFailure(f"SVD did not converge: {e}") from e
    if not np.all(np.isfinite(singular)):
        raise DecompositionFailure("SVD produced non-finite singular values")

    # first significant component of each photon-1 mode made real positive
    for k in range(u.shape[1]):
        column = u[:, k]
        magnitude = np.abs(column)
        first = int(np.argmax(magnitude > 1e-12 * magnitude.max())) if magnitude.max() > 0 else 0
        if magnitude[first] > 0:
            phase = column[first] / magnitude[first]
            u[:, k] = column / phase
            vh[k, :] = vh[k, :] * phase

    weights = singular ** 2 / np.sum(singular ** 2)
    coefficients = np.where(weights < COEFFICIENT_FLOOR * weights[0], 0.0, weights)

    logger.debug(f"decomposed {jsa.amplitudes.shape} JSA, K={1.0 / np.sum(coefficients ** 2):.5f}",
                 module="SCHMIDT")
    return SchmidtDecomposition(
        coefficients=coefficients,
        modes1=u / np.sqrt(s1),
        modes2=vh.T / np.sqrt(s2),
        grid1=jsa.grid1,
        grid2=jsa.grid2,
        weights=weights,
    )


def schmidt_number(decomposition: SchmidtDecomposition) -> float:
    """K = 1 / sum(lambda_i^2)."""
    return float(1.0 / np.sum(decomposition.coefficients ** 2))


def schmidt_number_from_singular_values(singular: np.ndarray) -> float:
    """K straight from singular values of an (unnormalized, uniformly weighted) amplitude matrix."""
    power = np.asarray(singular, dtype=float) ** 2
    total = power.sum()
    if total <= 0:
        return float("nan")
    return float(total ** 2 / np.sum(power ** 2))


def reconstruct(decomposition: SchmidtDecomposition, rank: int, renormalize: bool = False) -> JsaMatrix:
    """
    Sum of the leading `rank` Schmidt terms. Without renormalization the
    squared distance to the original state equals the discarded weight.
    """
    if not 1 <= rank <= decomposition.rank:
        raise RankOutOfRange(f"rank must be in [1, {decomposition.rank}], got {rank}")
    weights = decomposition.weights if decomposition.weights is not None else decomposition.coefficients
    amplitudes = (decomposition.modes1[:, :rank] * np.sqrt(weights[:rank])) @ decomposition.modes2[:, :rank].T
    jsa = JsaMatrix(decomposition.grid1, decomposition.grid2, amplitudes)
    return jsa.normalize() if renormalize else jsa


def hermite_gauss_overlap(decomposition: SchmidtDecomposition, rank: int = 2, photon: int = 1) -> float:
    """
    Fraction of the leading `rank` modes (rank 1 or 2) captured by the
    HG0/HG1 pair fitted to their combined intensity. 1 means the modes span
    exactly the first two Hermite-Gauss functions.
    """
    if rank not in (1, 2):
        raise RankOutOfRange(f"Hermite-Gauss overlap supports rank 1 or 2, got {rank}")
    grid = decomposition.grid1 if photon == 1 else decomposition.grid2
    modes = (decomposition.modes1 if photon == 1 else decomposition.modes2)[:, :rank]

    density = np.sum(np.abs(modes) ** 2, axis=1) / rank
    weight = density / density.sum()
    mean = float(np.sum(weight * grid.axis))
    variance = float(np.sum(weight * (grid.axis - mean) ** 2))
    # variance of (HG0^2 + HG1^2)/2 is 2 s^2 for HG0 intensity std s; HG0 alone gives s^2
    s = np.sqrt(variance / 2.0) if rank == 2 else np.sqrt(variance)

    nu = grid.axis - mean
    hg0 = (2.0 * np.pi * s * s) ** -0.25 * np.exp(-nu * nu / (4.0 * s * s))
    basis = [hg0, (nu / s) * hg0][:rank]

    captured = 0.0
    for m in range(rank):
        for b in basis:
            captured += abs(np.sum(np.conj(b) * modes[:, m]) * grid.step) ** 2
    return float(captured / rank)
