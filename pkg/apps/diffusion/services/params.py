"""
CKLS model parameters and the closed-form facts of the CIR special case
"""
import math
from dataclasses import dataclass
from typing import Tuple

from apps.diffusion.exceptions import ParameterError

CIR_GAMMA = 0.5
DEFAULT_DESIGN_EXPONENT = 0.55


@dataclass(frozen=True)
class DiffusionParams:
    """
    Parameters of dX = (beta1 - beta2 X) dt + sigma X^gamma dW

    Validated eagerly: an instance always satisfies beta1, beta2, sigma > 0
    and gamma in [1/2, 1].
    """
    beta1: float
    beta2: float
    sigma: float
    gamma: float = CIR_GAMMA

    def __post_init__(self):
        for name in ('beta1', 'beta2', 'sigma', 'gamma'):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ParameterError(f'{name} must be finite')
        if self.beta1 <= 0:
            raise ParameterError('beta1 must be positive')
        if self.beta2 <= 0:
            raise ParameterError('beta2 must be positive')
        if self.sigma <= 0:
            raise ParameterError('sigma must be positive')
        if not 0.5 <= self.gamma <= 1.0:
            raise ParameterError('gamma must lie in [0.5, 1.0]')

    @property
    def is_cir(self) -> bool:
        return self.gamma == CIR_GAMMA

    @property
    def feller_satisfied(self) -> bool:
        """2*beta1 > sigma^2; only meaningful for the CIR case"""
        return 2.0 * self.beta1 > self.sigma ** 2

    @property
    def mean_level(self) -> float:
        """Fixed point of the drift, beta1 / beta2"""
        return self.beta1 / self.beta2


@dataclass(frozen=True)
class JumpParams:
    """Compound-Poisson jumps: Poisson(lam) arrivals, Normal(mu_j, sigma_j^2) sizes"""
    lam: float = 0.0
    mu_j: float = 0.0
    sigma_j: float = 0.0

    def __post_init__(self):
        for name in ('lam', 'mu_j', 'sigma_j'):
            if not math.isfinite(getattr(self, name)):
                raise ParameterError(f'{name} must be finite')
        if self.lam < 0:
            raise ParameterError('lambda must be nonnegative')
        if self.sigma_j < 0:
            raise ParameterError('sigma_J must be nonnegative')

    @property
    def is_pure_diffusion(self) -> bool:
        return self.lam == 0


@dataclass(frozen=True)
class SamplingScheme:
    """Equidistant grid of n increments with mesh delta_n, started at x0"""
    n: int
    delta_n: float
    x0: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ParameterError('n must be an integer >= 2')
        if not (math.isfinite(self.delta_n) and self.delta_n > 0):
            raise ParameterError('delta_n must be positive')
        if not (math.isfinite(self.x0) and self.x0 > 0):
            raise ParameterError('x0 must be positive')

    @classmethod
    def high_frequency(cls, n: int, x0: float,
                       exponent: float = DEFAULT_DESIGN_EXPONENT) -> 'SamplingScheme':
        """Infill design with delta_n = n^(-exponent)"""
        if not 0 < exponent < 1:
            raise ParameterError('design exponent must lie in (0, 1)')
        return cls(n=n, delta_n=float(n) ** (-exponent), x0=x0)

    @property
    def horizon(self) -> float:
        return self.n * self.delta_n


@dataclass(frozen=True)
class CirSigmaMatrix:
    """Asymptotic information matrix of the OLS drift estimator, CIR case"""
    a11: float
    a12: float
    a21: float
    a22: float

    def as_tuple(self) -> Tuple[Tuple[float, float], Tuple[float, float]]:
        return ((self.a11, self.a12), (self.a21, self.a22))


def validate_params(params: DiffusionParams, jumps: JumpParams) -> Tuple[DiffusionParams, JumpParams]:
    """
    Check a (DiffusionParams, JumpParams) pair and return it unchanged

    Both types validate at construction, so this mostly guards against
    foreign objects (e.g. duck-typed configs) reaching the services.
    """
    if not isinstance(params, DiffusionParams):
        params = DiffusionParams(
            beta1=float(params.beta1), beta2=float(params.beta2),
            sigma=float(params.sigma), gamma=float(params.gamma),
        )
    if not isinstance(jumps, JumpParams):
        jumps = JumpParams(lam=float(jumps.lam), mu_j=float(jumps.mu_j),
                           sigma_j=float(jumps.sigma_j))
    return params, jumps


def _require_cir(params: DiffusionParams) -> None:
    if not params.is_cir:
        raise ParameterError(
            f'closed-form stationary facts need gamma = 0.5, got {params.gamma}'
        )


def cir_gamma_law(params: DiffusionParams) -> Tuple[float, float]:
    """
    Shape and rate of the Gamma stationary law of the CIR process

    Returns:
        (2*beta1/sigma^2, 2*beta2/sigma^2)
    """
    _require_cir(params)
    if not params.feller_satisfied:
        raise ParameterError('Feller condition 2*beta1 > sigma^2 fails')
    scale = 2.0 / params.sigma ** 2
    return params.beta1 * scale, params.beta2 * scale


def cir_stationary_moments(params: DiffusionParams) -> Tuple[float, float]:
    """Mean beta1/beta2 and variance beta1 sigma^2 / (2 beta2^2) of the CIR stationary law"""
    shape, rate = cir_gamma_law(params)
    return shape / rate, shape / rate ** 2


def cir_sigma_matrix(params: DiffusionParams) -> CirSigmaMatrix:
    """
    Sigma of the OLS asymptotic normality law for the CIR case

    a11 = beta2 / (beta1 - sigma^2/2), a12 = a21 = -1, a22 = beta1 / beta2
    """
    _require_cir(params)
    margin = params.beta1 - params.sigma ** 2 / 2.0
    if margin <= 0:
        raise ParameterError('cir_sigma_matrix needs beta1 > sigma^2 / 2')
    return CirSigmaMatrix(
        a11=params.beta2 / margin,
        a12=-1.0,
        a21=-1.0,
        a22=params.beta1 / params.beta2,
    )
