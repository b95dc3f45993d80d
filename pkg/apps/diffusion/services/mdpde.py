"""
Minimum density power divergence estimation for the Gaussian working model

For a design (y, z1, z2) the working density of y_t is Normal(beta1 z1 + beta2 z2, sigma^2)
and the objective is

    H(theta) = sum_t [ int f^(1+a) - (1+a)/a f^a(y_t) + 1/a ],

which tends to the negative log-likelihood as a -> 0.
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import minimize
from scipy.stats import norm

from apps.diffusion.exceptions import ParameterError
from apps.diffusion.services.regression import EstimateTheta, RegressionDesign, ols_estimate

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITERS = 2000
# OLS start scaled coordinate-wise: (beta1, beta2, sigma)
RESTART_FACTORS = (
    (1.5, 1.0, 1.0),
    (0.5, 1.0, 1.0),
    (1.0, 1.5, 1.0),
    (1.0, 0.5, 1.0),
    (1.0, 1.0, 1.5),
)
LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

ThetaLike = Union[EstimateTheta, Sequence[float]]


@dataclass(frozen=True)
class MdpdeConfig:
    """Tuning of the MDPDE fit; init=None starts from the OLS estimate"""
    alpha: float
    init: Optional[EstimateTheta] = None
    max_iters: int = DEFAULT_MAX_ITERS
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha >= 0):
            raise ParameterError('alpha must be nonnegative')
        if not self.tol > 0:
            raise ParameterError('tol must be positive')
        if self.max_iters < 1:
            raise ParameterError('max_iters must be at least 1')


@dataclass(frozen=True, eq=False)
class InfluenceProfile:
    residuals: np.ndarray
    contributions: np.ndarray
    likelihoods: np.ndarray


def _unpack(theta: ThetaLike) -> Tuple[float, float, float]:
    if isinstance(theta, EstimateTheta):
        return theta.beta1_hat, theta.beta2_hat, theta.sigma_hat
    beta1, beta2, sigma = theta
    return float(beta1), float(beta2), float(sigma)


def gaussian_power_integral(sigma: float, alpha: float) -> float:
    """Closed form of int f^(1+alpha) for Normal(., sigma^2): (2 pi sigma^2)^(-alpha/2) / sqrt(1+alpha)"""
    if not sigma > 0:
        raise ParameterError('sigma must be positive')
    if alpha < 0:
        raise ParameterError('alpha must be nonnegative')
    return math.exp(-0.5 * alpha * math.log(2.0 * math.pi * sigma ** 2)) / math.sqrt(1.0 + alpha)


def observation_bracket(residuals: np.ndarray, sigma: float, alpha: float) -> np.ndarray:
    """
    Per-observation term of the objective as a function of raw residuals

    For alpha == 0 this is the per-observation negative log-likelihood.
    f^alpha is evaluated as exp(alpha * log f); it underflows to 0 for huge
    residuals, which is the exact limit of the bracket.
    """
    if not sigma > 0:
        raise ParameterError('sigma must be positive')
    residuals = np.asarray(residuals, dtype=float)
    log_f = -LOG_SQRT_2PI - math.log(sigma) - residuals ** 2 / (2.0 * sigma ** 2)
    if alpha == 0:
        return -log_f
    return (gaussian_power_integral(sigma, alpha)
            - (1.0 + alpha) / alpha * np.exp(alpha * log_f)
            + 1.0 / alpha)


def negative_log_likelihood(theta: ThetaLike, design: RegressionDesign) -> float:
    beta1, beta2, sigma = _unpack(theta)
    return float(np.sum(observation_bracket(design.residuals(beta1, beta2), sigma, 0.0)))


def mdpde_objective(theta: ThetaLike, design: RegressionDesign, alpha: float) -> float:
    """H_n^(alpha)(theta); alpha == 0 gives the negative log-likelihood"""
    beta1, beta2, sigma = _unpack(theta)
    if not sigma > 0:
        raise ParameterError('sigma must be positive')
    return float(np.sum(observation_bracket(design.residuals(beta1, beta2), sigma, alpha)))


def mdpde_gradient(theta: ThetaLike, design: RegressionDesign, alpha: float) -> np.ndarray:
    """Analytic gradient of H_n^(alpha) with respect to (beta1, beta2, sigma)"""
    beta1, beta2, sigma = _unpack(theta)
    if not sigma > 0:
        raise ParameterError('sigma must be positive')
    r = design.residuals(beta1, beta2)
    s2 = sigma ** 2
    if alpha == 0:
        return np.array([
            -np.sum(r * design.z1) / s2,
            -np.sum(r * design.z2) / s2,
            design.n / sigma - np.sum(r ** 2) / sigma ** 3,
        ])
    f_alpha = np.exp(alpha * (-LOG_SQRT_2PI - math.log(sigma) - r ** 2 / (2.0 * s2)))
    d_integral = -alpha / sigma * gaussian_power_integral(sigma, alpha)
    return np.array([
        -(1.0 + alpha) * np.sum(f_alpha * r * design.z1) / s2,
        -(1.0 + alpha) * np.sum(f_alpha * r * design.z2) / s2,
        design.n * d_integral - (1.0 + alpha) * np.sum(f_alpha * (r ** 2 / sigma ** 3 - 1.0 / sigma)),
    ])


def _simplex_fit(design: RegressionDesign, alpha: float, start: Tuple[float, float, float],
                 cfg: MdpdeConfig):
    beta1, beta2, sigma = start

    def objective(x: np.ndarray) -> float:
        value = mdpde_objective((x[0], x[1], math.exp(x[2])), design, alpha)
        return value if math.isfinite(value) else math.inf

    x0 = np.array([beta1, beta2, math.log(sigma)])
    scale = max(abs(objective(x0)), 1.0)
    return minimize(
        objective, x0,
        method='Nelder-Mead',
        options={
            'maxiter': cfg.max_iters,
            'xatol': math.sqrt(cfg.tol),
            'fatol': cfg.tol * scale,
        },
    )


def _polish(design: RegressionDesign, alpha: float, x0: np.ndarray, cfg: MdpdeConfig):
    """
    BFGS refinement of a converged simplex point with the analytic gradient

    The simplex stops once its spread is below sqrt(tol); this drives the
    gradient in (beta1, beta2, log sigma) down to roundoff level.
    """
    def objective(x: np.ndarray) -> float:
        value = mdpde_objective((x[0], x[1], math.exp(x[2])), design, alpha)
        return value if math.isfinite(value) else math.inf

    def gradient(x: np.ndarray) -> np.ndarray:
        sigma = math.exp(x[2])
        grad = mdpde_gradient((x[0], x[1], sigma), design, alpha)
        grad[2] *= sigma
        return grad

    scale = max(abs(objective(x0)), 1.0)
    return minimize(
        objective, x0,
        jac=gradient,
        method='BFGS',
        options={'maxiter': cfg.max_iters, 'gtol': cfg.tol * scale},
    )


def mdpde_estimate(design: RegressionDesign, cfg: MdpdeConfig) -> EstimateTheta:
    """
    Minimize H_n^(alpha) by Nelder-Mead over (beta1, beta2, log sigma)

    alpha == 0 delegates to ols_estimate, which is the Gaussian quasi-MLE.
    When the first run does not converge the fit restarts from the OLS point
    scaled by +-50% per coordinate and keeps the lowest objective. A converged
    simplex point is then polished by BFGS on the analytic gradient.
    Non-convergence is reported through EstimateTheta.converged.
    """
    if cfg.alpha == 0:
        return ols_estimate(design)

    init = cfg.init if cfg.init is not None else ols_estimate(design)
    start = _unpack(init)
    if not (all(math.isfinite(v) for v in start) and start[2] > 0):
        raise ParameterError('MDPDE initial value needs finite betas and sigma > 0')

    best = _simplex_fit(design, cfg.alpha, start, cfg)
    iterations = int(best.nit)
    if not best.success:
        logger.info(
            f'MDPDE alpha={cfg.alpha} did not converge from the initial point, '
            f'trying {len(RESTART_FACTORS)} restarts'
        )
        for factors in RESTART_FACTORS:
            restart = tuple(v * f for v, f in zip(start, factors))
            result = _simplex_fit(design, cfg.alpha, restart, cfg)
            iterations += int(result.nit)
            better = result.fun < best.fun
            if (result.success and not best.success) or (result.success == best.success and better):
                best = result

    fun, x = best.fun, best.x
    if best.success:
        polished = _polish(design, cfg.alpha, best.x, cfg)
        iterations += int(polished.nit)
        if np.all(np.isfinite(polished.x)) and polished.fun <= fun:
            fun, x = polished.fun, polished.x

    beta1, beta2, log_sigma = x
    return EstimateTheta(
        beta1_hat=float(beta1),
        beta2_hat=float(beta2),
        sigma_hat=float(math.exp(log_sigma)),
        alpha=cfg.alpha,
        converged=bool(best.success),
        objective_value=float(fun),
        iterations=iterations,
    )


def influence_profile(theta: EstimateTheta, design: RegressionDesign, alpha: float) -> InfluenceProfile:
    """Standardized residuals, per-observation objective terms and phi(residual)"""
    beta1, beta2, sigma = _unpack(theta)
    raw = design.residuals(beta1, beta2)
    standardized = raw / sigma
    return InfluenceProfile(
        residuals=standardized,
        contributions=observation_bracket(raw, sigma, alpha),
        likelihoods=norm.pdf(standardized),
    )


def robust_discrepancy(classical: EstimateTheta, robust: EstimateTheta) -> Dict[str, float]:
    """
    Relative gap (robust - classical) / |classical| per parameter

    Large systematic gaps point at misspecification of the pure diffusion,
    typically unmodelled jumps.
    """
    gaps = {}
    for name in ('beta1_hat', 'beta2_hat', 'sigma_hat'):
        reference = getattr(classical, name)
        delta = getattr(robust, name) - reference
        if reference == 0:
            gaps[name] = 0.0 if delta == 0 else math.copysign(math.inf, delta)
        else:
            gaps[name] = delta / abs(reference)
    return gaps


def fit_alphas(design: RegressionDesign, alphas: Iterable[float],
               tol: float = DEFAULT_TOL, max_iters: int = DEFAULT_MAX_ITERS) -> Dict[float, EstimateTheta]:
    """Fit every alpha on one design, sharing the OLS start"""
    ols = ols_estimate(design)
    fits = {}
    for alpha in alphas:
        if alpha == 0:
            fits[alpha] = ols
        else:
            fits[alpha] = mdpde_estimate(design, MdpdeConfig(alpha=alpha, init=ols, tol=tol, max_iters=max_iters))
    return fits
