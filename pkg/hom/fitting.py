# hom/fitting.py

"""
Levenberg-Marquardt fit of the closed-form interferogram to measured or
simulated HOM data. Parameters are optimized in a transformed space that
enforces their bounds; errors come from the Jacobian in physical units.
"""

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.optimize import least_squares

from hom.model import PARAMETER_NAMES, CurveKind, HomCurve, HomFitParams, pcc_values
from utils.errors import ConfigError, FormatError, NoConvergence, SingularJacobian
from utils.logger import logger

Bounds = Dict[str, Tuple[float, float]]

DEFAULT_BOUNDS: Bounds = {
    "N": (0.0, np.inf),
    "V": (0.0, 1.0),
    "delta": (0.0, np.inf),
    "sigma": (0.0, np.inf),
    "phi": (-np.inf, np.inf),
}

MIN_POINTS = 10
MAX_CONDITION = 1e14
TWO_PI = 2.0 * np.pi


@dataclass
class FitResult:
    params: HomFitParams
    standard_errors: Dict[str, float]
    covariance: np.ndarray = field(repr=False)
    residual_sum: float = 0.0
    converged: bool = True
    iterations: int = 0

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "standard_errors": {k: float(v) for k, v in self.standard_errors.items()},
            "covariance": [[float(x) for x in row] for row in self.covariance],
            "residual_sum": float(self.residual_sum),
            "converged": bool(self.converged),
            "iterations": int(self.iterations),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FitResult":
        """Inverse of to_dict; null entries (non-finite on write) read back as nan."""
        def number(value) -> float:
            return np.nan if value is None else float(value)

        try:
            params = HomFitParams(**data["params"])
            errors = {k: number(v) for k, v in data["standard_errors"].items()}
            covariance = np.array([[number(x) for x in row] for row in data.get("covariance", np.zeros((5, 5)))],
                                  dtype=float)
            result = cls(
                params=params,
                standard_errors=errors,
                covariance=covariance,
                residual_sum=number(data.get("residual_sum", 0.0)),
                converged=bool(data.get("converged", True)),
                iterations=int(data.get("iterations", 0)),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise FormatError(f"malformed fit result: {e!r}") from e
        if not np.isfinite(result.standard_errors.get("phi", np.nan)):
            raise FormatError("fit result has no finite phi standard error")
        return result


class _Transform:
    """Map between an unconstrained variable q and a bounded parameter p."""

    def __init__(self, lo: float, hi: float):
        self.lo, self.hi = lo, hi
        self.kind = (
            "interval" if np.isfinite(lo) and np.isfinite(hi)
            else "lower" if np.isfinite(lo)
            else "upper" if np.isfinite(hi)
            else "free"
        )

    def to_param(self, q: float) -> float:
        if self.kind == "interval":
            return self.lo + (self.hi - self.lo) * (np.sin(q) + 1.0) / 2.0
        if self.kind == "lower":
            return self.lo + np.exp(q)
        if self.kind == "upper":
            return self.hi - np.exp(q)
        return q

    def to_free(self, p: float) -> float:
        if self.kind == "interval":
            return float(np.arcsin(np.clip(2.0 * (p - self.lo) / (self.hi - self.lo) - 1.0, -1.0, 1.0)))
        if self.kind == "lower":
            return float(np.log(p - self.lo))
        if self.kind == "upper":
            return float(np.log(self.hi - p))
        return float(p)


def _resolve_bounds(bounds: Optional[Bounds]) -> Bounds:
    merged = dict(DEFAULT_BOUNDS)
    for name, pair in (bounds or {}).items():
        if name not in merged:
            raise ConfigError(f"unknown fit parameter '{name}'")
        lo, hi = float(pair[0]), float(pair[1])
        if not lo < hi:
            raise ConfigError(f"bound for {name} must satisfy lo < hi, got ({lo}, {hi})")
        merged[name] = (lo, hi)
    return merged


def _check_inside(params: HomFitParams, bounds: Bounds):
    for name, (lo, hi) in bounds.items():
        value = getattr(params, name)
        # half-open bounds need a strictly interior start for the log map
        inside = (lo <= value <= hi) if (np.isfinite(lo) and np.isfinite(hi)) else (
            (not np.isfinite(lo) or value > lo) and (not np.isfinite(hi) or value < hi)
        )
        if not inside:
            raise ConfigError(f"initial {name}={value} lies outside its bounds ({lo}, {hi})")


def initial_guess(data: HomCurve) -> HomFitParams:
    """
    Starting point from the data alone: baseline from the outer 20 % of the
    scan, delta and sigma from the Fourier power of the fringes, phi from
    the fringe phase at the spectral peak.
    """
    tau, y = data.delays, data.values
    n_edge = max(1, int(round(0.1 * tau.size)))
    baseline = float(np.mean(np.concatenate([y[:n_edge], y[-n_edge:]])))
    baseline = baseline if baseline > 0 else float(np.mean(y)) or 1.0
    N0 = 2.0 * baseline
    fringe = y - baseline

    step = float(np.median(np.diff(tau)))
    span = float(tau[-1] - tau[0])
    omega = np.linspace(0.0, np.pi / step, 4096)
    spectrum = np.exp(-1j * np.outer(omega, tau)) @ fringe
    power = np.abs(spectrum) ** 2
    power[omega < TWO_PI / span] = 0.0

    if power.max() <= 0:
        delta0, sigma0, phi0 = np.pi / step / 2, np.pi / span, 0.0
    else:
        peak = int(np.argmax(power))
        keep = power >= 0.1 * power[peak]
        w = power[keep] / power[keep].sum()
        delta0 = float(np.sum(w * omega[keep]))
        second = float(np.sum(w * (omega[keep] - delta0) ** 2))
        # fringe power ~ x^4 exp(-2 x^2 / sigma^2) has second moment 5 sigma^2 / 4
        sigma0 = float(np.sqrt(0.8 * second)) if second > 0 else TWO_PI / span
        phi0 = float(np.angle(spectrum[peak])) % TWO_PI

    V0 = float(np.clip(2.0 * np.max(np.abs(fringe)) / N0, 0.05, 0.95))
    return HomFitParams(N=N0, V=V0, delta=max(delta0, 1e-6), sigma=max(sigma0, 1e-6), phi=phi0)


def _covariance(params: np.ndarray, tau: np.ndarray, y: np.ndarray, weights: np.ndarray):
    """Covariance from a central-difference Jacobian in physical parameters."""
    n_params = params.size
    jac = np.empty((tau.size, n_params))
    for k in range(n_params):
        h = 1e-6 * max(abs(params[k]), 1e-3)
        up, down = params.copy(), params.copy()
        up[k] += h
        down[k] -= h
        jac[:, k] = (pcc_values(*up, tau) - pcc_values(*down, tau)) / (2.0 * h) / weights

    residuals = (pcc_values(*params, tau) - y) / weights
    chi2 = float(np.sum(residuals ** 2))
    dof = max(tau.size - n_params, 1)

    normal = jac.T @ jac
    condition = np.linalg.cond(normal)
    if not np.isfinite(condition) or condition > MAX_CONDITION:
        raise SingularJacobian(f"fit Jacobian is singular (condition number {condition:.3e})")
    try:
        inverse = np.linalg.inv(normal)
    except np.linalg.LinAlgError as e:
        raise SingularJacobian(f"cannot invert normal matrix: {e}") from e
    covariance = inverse * chi2 / dof
    return 0.5 * (covariance + covariance.T), chi2


def fit_interferogram(data: HomCurve, init: Optional[HomFitParams] = None, bounds: Optional[Bounds] = None,
                      max_iterations: int = 500) -> FitResult:
    """
    Weighted least-squares fit of the closed-form interferogram. Counts are
    weighted by their Poisson error; probabilities are fitted unweighted.
    The returned phi is wrapped into [0, 2 pi).
    """
    if len(data) < MIN_POINTS:
        raise ConfigError(f"need at least {MIN_POINTS} data points, got {len(data)}")
    bounds = _resolve_bounds(bounds)
    init = init or initial_guess(data)
    _check_inside(init, bounds)

    tau, y = data.delays, data.values
    weights = np.sqrt(np.maximum(y, 1.0)) if data.kind == CurveKind.COUNTS else np.ones_like(y)
    transforms = [_Transform(*bounds[name]) for name in PARAMETER_NAMES]

    def to_params(q):
        return np.array([t.to_param(v) for t, v in zip(transforms, q)])

    def residuals(q):
        return (pcc_values(*to_params(q), tau) - y) / weights

    q0 = np.array([t.to_free(getattr(init, name)) for t, name in zip(transforms, PARAMETER_NAMES)])
    n_params = q0.size
    logger.debug(f"fit start {init}", module="FIT")

    solution = least_squares(
        residuals, q0, method="lm", xtol=1e-12, ftol=1e-12, gtol=1e-12,
        max_nfev=max_iterations * (n_params + 1),
    )
    iterations = int(np.ceil(solution.nfev / (n_params + 1)))
    physical = to_params(solution.x)

    # a negative spacing is the same curve with the phase mirrored
    if physical[2] < 0:
        physical[2], physical[4] = -physical[2], -physical[4]
    physical[4] = physical[4] % TWO_PI
    physical[1] = min(max(physical[1], 0.0), 1.0)

    if solution.status <= 0:
        partial = FitResult(
            params=HomFitParams.from_array(physical),
            standard_errors={name: float("nan") for name in PARAMETER_NAMES},
            covariance=np.full((n_params, n_params), np.nan),
            residual_sum=float(np.sum(solution.fun ** 2)),
            converged=False,
            iterations=iterations,
        )
        raise NoConvergence(f"fit did not converge: {solution.message}", result=partial)

    covariance, chi2 = _covariance(physical, tau, y, weights)
    errors = np.sqrt(np.clip(np.diag(covariance), 0.0, None))
    result = FitResult(
        params=HomFitParams.from_array(physical),
        standard_errors={name: float(e) for name, e in zip(PARAMETER_NAMES, errors)},
        covariance=covariance,
        residual_sum=chi2,
        converged=True,
        iterations=iterations,
    )
    logger.info(
        f"fit converged in {iterations} iterations: phi={result.params.phi:.4f} "
        f"+/- {result.standard_errors['phi']:.4f} rad, V={result.params.V:.4f}",
        module="FIT",
    )
    return result
