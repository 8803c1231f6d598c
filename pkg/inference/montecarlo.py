# inference/montecarlo.py

from dataclasses import asdict, dataclass

import numpy as np
from scipy.linalg import svdvals

from inference.phase_mask import PhaseMask
from schmidt.decomposition import schmidt_number_from_singular_values
from utils.errors import ConfigError, EmptyCounts, NegativeInput, NumericError
from utils.logger import logger
from utils.parallel import block_rng, parallel_map


@dataclass
class KEstimate:
    mean: float
    bound: float          # 3 sample standard deviations
    rounds: int
    seed: int
    samples_std: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


def monte_carlo_schmidt(counts: np.ndarray, mask: PhaseMask, rounds: int, seed: int) -> KEstimate:
    """
    Schmidt number of the masked sqrt(counts) JSA under Poisson resampling
    of every pixel. Round r is drawn from (seed, r), so the estimate does
    not depend on the worker count.
    """
    counts = np.asarray(counts)
    if counts.shape != mask.signs.shape:
        raise NumericError(f"counts shape {counts.shape} does not match mask {mask.signs.shape}")
    if not np.all(np.isfinite(counts)) or np.any(counts < 0):
        raise NegativeInput("counts must be finite and non-negative")
    if np.any(counts != np.round(counts)):
        raise NegativeInput("counts must be integers")
    if counts.sum() == 0:
        raise EmptyCounts("counts matrix is empty")
    if rounds < 2:
        raise ConfigError(f"rounds must be >= 2, got {rounds}")

    signs = mask.signs.astype(float)
    report_every = max(rounds // 10, 1)

    def one_round(r: int) -> float:
        rng = block_rng(seed, r)
        resampled = rng.poisson(counts)
        k = schmidt_number_from_singular_values(svdvals(np.sqrt(resampled) * signs))
        if (r + 1) % report_every == 0:
            logger.debug(f"round {r + 1}/{rounds}", module="INFERENCE")
        return k

    values = np.array(parallel_map(one_round, range(rounds)))
    std = float(np.std(values, ddof=1))
    estimate = KEstimate(mean=float(np.mean(values)), bound=3.0 * std, rounds=int(rounds), seed=int(seed),
                         samples_std=std)
    logger.info(f"K = {estimate.mean:.4f} +/- {estimate.bound:.4f} (3 sigma, {rounds} rounds)",
                module="INFERENCE")
    return estimate


def counts_from_jsi(jsi: np.ndarray, total_counts: float) -> np.ndarray:
    """Expected integer counts for an intensity image holding total_counts events."""
    jsi = np.asarray(jsi, dtype=float)
    if np.any(jsi < 0):
        raise NegativeInput("JSI must be non-negative")
    total = jsi.sum()
    if total <= 0:
        raise EmptyCounts("JSI is empty")
    return np.rint(jsi * (total_counts / total)).astype(np.int64)
