"""
Linearized increment regression y = beta1 z1 + beta2 z2 + eps and its OLS fit
"""
import logging
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np
from scipy.stats import norm

from apps.diffusion.exceptions import ParameterError, SingularDesignError
from apps.diffusion.services.params import (
    DiffusionParams, SamplingScheme, cir_sigma_matrix,
)
from apps.diffusion.services.simulation import SamplePath

logger = logging.getLogger(__name__)

SINGULARITY_RATIO = 1e-12


@dataclass(frozen=True)
class EstimateTheta:
    """
    Fitted (beta1, beta2, sigma) with optimizer bookkeeping

    alpha = 0 marks the classical (OLS / quasi-likelihood) fit.
    """
    beta1_hat: float
    beta2_hat: float
    sigma_hat: float
    alpha: float = 0.0
    converged: bool = True
    objective_value: float = 0.0
    iterations: int = 0

    def __post_init__(self):
        if self.alpha < 0:
            raise ParameterError('alpha must be nonnegative')
        # sigma_hat == 0 only for noiseless data; z-statistics reject it later
        if self.converged and not (np.isfinite(self.sigma_hat) and self.sigma_hat >= 0):
            raise ParameterError('a converged estimate needs a finite sigma_hat >= 0')

    def as_vector(self) -> np.ndarray:
        return np.array([self.beta1_hat, self.beta2_hat, self.sigma_hat])

    def to_dict(self) -> Dict[str, object]:
        return {
            'beta1_hat': self.beta1_hat,
            'beta2_hat': self.beta2_hat,
            'sigma_hat': self.sigma_hat,
            'alpha': self.alpha,
            'converged': self.converged,
            'objective_value': self.objective_value,
            'iterations': self.iterations,
        }


@dataclass(frozen=True, eq=False)
class RegressionDesign:
    """Normalized increments y and regressors z1, z2 conditioned on x_prev"""
    y: np.ndarray
    z1: np.ndarray
    z2: np.ndarray
    x_prev: np.ndarray
    delta_n: float
    gamma: float

    def __post_init__(self):
        n = len(self.y)
        if n < 2:
            raise ParameterError('a regression design needs at least 2 observations')
        if not (len(self.z1) == len(self.z2) == len(self.x_prev) == n):
            raise ParameterError('y, z1, z2 and x_prev must have equal length')

    @property
    def n(self) -> int:
        return len(self.y)

    def residuals(self, beta1: float, beta2: float) -> np.ndarray:
        return self.y - beta1 * self.z1 - beta2 * self.z2


def build_design(path: SamplePath, gamma: float) -> RegressionDesign:
    """
    Transform increments of a path for known elasticity gamma

    y = dX / (X^gamma sqrt(dt)), z1 = sqrt(dt) / X^gamma, z2 = -X^(1-gamma) sqrt(dt)
    """
    if not 0.5 <= gamma <= 1.0:
        raise ParameterError('gamma must lie in [0.5, 1.0]')
    x_prev = path.values[:-1]
    if np.any(x_prev <= 0):
        raise ParameterError('conditioning states must be strictly positive')
    dt = path.scheme.delta_n
    sqrt_dt = np.sqrt(dt)
    scale = x_prev ** gamma
    return RegressionDesign(
        y=np.diff(path.values) / (scale * sqrt_dt),
        z1=sqrt_dt / scale,
        z2=-(x_prev ** (1.0 - gamma)) * sqrt_dt,
        x_prev=x_prev.copy(),
        delta_n=dt,
        gamma=gamma,
    )


def ols_estimate(design: RegressionDesign) -> EstimateTheta:
    """
    Closed-form OLS of y on (z1, z2) with residual variance over divisor n

    Raises:
        SingularDesignError: when det(Gram) < 1e-12 * g11 * g22
    """
    z1, z2, y = design.z1, design.z2, design.y
    g11 = float(np.dot(z1, z1))
    g12 = float(np.dot(z1, z2))
    g22 = float(np.dot(z2, z2))
    h1 = float(np.dot(z1, y))
    h2 = float(np.dot(z2, y))

    det = g11 * g22 - g12 * g12
    if not det > SINGULARITY_RATIO * g11 * g22:
        raise SingularDesignError(
            f'Gram determinant {det:.3e} is below {SINGULARITY_RATIO:g} of its scale'
        )

    beta1 = (g22 * h1 - g12 * h2) / det
    beta2 = (g11 * h2 - g12 * h1) / det
    resid = design.residuals(beta1, beta2)
    rss = float(np.dot(resid, resid))
    return EstimateTheta(
        beta1_hat=beta1,
        beta2_hat=beta2,
        sigma_hat=float(np.sqrt(rss / design.n)),
        alpha=0.0,
        converged=True,
        objective_value=rss,
        iterations=0,
    )


def cir_confidence_intervals(estimate: EstimateTheta, scheme: SamplingScheme,
                             level: float = 0.95) -> Dict[str, Tuple[float, float]]:
    """
    Plug-in normal intervals for (beta1, beta2) in the CIR case

    Uses sqrt(n dt) / sigma_hat (beta_hat - beta) -> N(0, Sigma^-1) with
    Sigma evaluated at the estimate.
    """
    if not 0 < level < 1:
        raise ParameterError('level must lie in (0, 1)')
    plug_in = DiffusionParams(
        beta1=estimate.beta1_hat, beta2=estimate.beta2_hat,
        sigma=estimate.sigma_hat, gamma=0.5,
    )
    sigma_matrix = np.array(cir_sigma_matrix(plug_in).as_tuple())
    covariance = np.linalg.inv(sigma_matrix) * estimate.sigma_hat ** 2 / scheme.horizon
    half_widths = norm.ppf(0.5 + level / 2.0) * np.sqrt(np.diag(covariance))
    return {
        'beta1': (estimate.beta1_hat - half_widths[0], estimate.beta1_hat + half_widths[0]),
        'beta2': (estimate.beta2_hat - half_widths[1], estimate.beta2_hat + half_widths[1]),
    }
