"""
Standardized increment statistics, Gumbel thresholds and jump classification
"""
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, Iterable, Optional, Tuple

import numpy as np
from scipy.stats import gumbel_r, kstest

from apps.diffusion.exceptions import ParameterError
from apps.diffusion.services.params import SamplingScheme
from apps.diffusion.services.regression import EstimateTheta
from apps.diffusion.services.simulation import SamplePath

logger = logging.getLogger(__name__)

GUMBEL_QUANTILE = 'gumbel_quantile'
ADDITIVE = 'additive'
FIXED = 'fixed'
THRESHOLD_MODES = (GUMBEL_QUANTILE, ADDITIVE, FIXED)
MODE_ALIASES = {
    'gumbel': GUMBEL_QUANTILE,
    'quantile': GUMBEL_QUANTILE,
    GUMBEL_QUANTILE: GUMBEL_QUANTILE,
    ADDITIVE: ADDITIVE,
    FIXED: FIXED,
}
DEFAULT_THRESHOLD = 'gumbel:0.05'


@dataclass(frozen=True, eq=False)
class ZStatistics:
    z: np.ndarray
    theta_used: EstimateTheta
    scheme: SamplingScheme
    gamma: float

    @property
    def n(self) -> int:
        return len(self.z)

    @property
    def robust(self) -> bool:
        return self.theta_used.alpha > 0


@dataclass(frozen=True)
class ThresholdSpec:
    """
    Resolved detection threshold xi_n

    parameter holds q for gumbel_quantile, c_n for additive and the value
    itself for fixed.
    """
    mode: str
    parameter: float
    n: int
    resolved_xi: float
    a_n: float
    b_n: float

    def to_dict(self) -> Dict[str, object]:
        return {
            'n': self.n,
            'mode': self.mode,
            'q_or_c': self.parameter,
            'a_n': self.a_n,
            'b_n': self.b_n,
            'xi': self.resolved_xi,
        }


@dataclass(frozen=True, eq=False)
class DetectionReport:
    """
    Classification of the increments of one path

    jump_size_estimates is None until estimate_jump_sizes has been applied.
    """
    detected_set: FrozenSet[int]
    z_stats: ZStatistics
    threshold: ThresholdSpec
    jump_size_estimates: Optional[Dict[int, float]] = None

    def __post_init__(self):
        if self.jump_size_estimates is not None and set(self.jump_size_estimates) != set(self.detected_set):
            raise ParameterError('jump size estimates must be keyed by the detected set')

    def with_jump_sizes(self, sizes: Dict[int, float]) -> 'DetectionReport':
        return replace(self, jump_size_estimates=dict(sizes))


@dataclass(frozen=True, eq=False)
class GumbelCheckSummary:
    n: int
    replications: int
    a_n: float
    b_n: float
    ks_distance: float
    ks_pvalue: float
    median: float
    ecdf_at_zero: float
    normalized_maxima: np.ndarray = field(repr=False)

    def to_dict(self) -> Dict[str, object]:
        return {
            'n': self.n,
            'replications': self.replications,
            'a_n': self.a_n,
            'b_n': self.b_n,
            'ks_distance': self.ks_distance,
            'ks_pvalue': self.ks_pvalue,
            'median': self.median,
            'gumbel_median': -math.log(math.log(2.0)),
            'ecdf_at_zero': self.ecdf_at_zero,
            'gumbel_cdf_at_zero': math.exp(-1.0),
        }


def compute_z_stats(path: SamplePath, theta: EstimateTheta, gamma: float) -> ZStatistics:
    """
    Z_i = (dX_i - (b1 - b2 X_{i-1}) dt) / (sigma X_{i-1}^gamma sqrt(dt))

    A robust theta (alpha > 0) gives the robust statistic; the formula is the
    same.
    """
    if not theta.sigma_hat > 0:
        raise ParameterError('sigma_hat must be positive to standardize increments')
    dt = path.scheme.delta_n
    x_prev = path.values[:-1]
    drift = (theta.beta1_hat - theta.beta2_hat * x_prev) * dt
    scale = theta.sigma_hat * x_prev ** gamma * math.sqrt(dt)
    z = (path.increments - drift) / scale
    if not np.all(np.isfinite(z)):
        raise ParameterError('standardized increments are not finite')
    return ZStatistics(z=z, theta_used=theta, scheme=path.scheme, gamma=gamma)


def gumbel_constants(n: int) -> Tuple[float, float]:
    """
    Normalizing constants of the maximum of n absolute standard normals

    a_n = sqrt(2 log n) - (log log n + log pi) / (2 sqrt(2 log n)), b_n = 1 / sqrt(2 log n)
    """
    if n < 3:
        raise ParameterError('gumbel_constants needs n >= 3')
    root = math.sqrt(2.0 * math.log(n))
    a_n = root - (math.log(math.log(n)) + math.log(math.pi)) / (2.0 * root)
    return a_n, 1.0 / root


def parse_threshold(text: str) -> Tuple[str, float]:
    """Parse 'gumbel:0.05', 'additive:1.0' or 'fixed:3.512' into (mode, parameter)"""
    name, sep, raw = text.strip().partition(':')
    mode = MODE_ALIASES.get(name.strip().lower())
    if mode is None or not sep:
        raise ParameterError(
            f"threshold must look like 'gumbel:<q>', 'additive:<c>' or 'fixed:<value>', got {text!r}"
        )
    try:
        return mode, float(raw)
    except ValueError:
        raise ParameterError(f'threshold parameter {raw!r} is not a number')


def detection_threshold(n: int, mode: str, parameter: float) -> ThresholdSpec:
    """
    Resolve xi_n for one of the three threshold modes

    gumbel_quantile(q): a_n + b_n * G^-1(1 - q), additive(c): sqrt(2 log n) + c,
    fixed(v): v.
    """
    mode = MODE_ALIASES.get(mode, mode)
    a_n, b_n = gumbel_constants(n)
    if mode == GUMBEL_QUANTILE:
        if not 0 < parameter < 1:
            raise ParameterError('gumbel quantile level q must lie in (0, 1)')
        xi = a_n + b_n * float(gumbel_r.ppf(1.0 - parameter))
    elif mode == ADDITIVE:
        if not parameter > 0:
            raise ParameterError('additive constant c_n must be positive')
        xi = math.sqrt(2.0 * math.log(n)) + parameter
    elif mode == FIXED:
        xi = float(parameter)
    else:
        raise ParameterError(f'unknown threshold mode {mode!r}')
    if not (math.isfinite(xi) and xi > 0):
        raise ParameterError(f'threshold xi_n must be positive, got {xi}')
    return ThresholdSpec(mode=mode, parameter=float(parameter), n=n,
                         resolved_xi=xi, a_n=a_n, b_n=b_n)


def detect_jumps(z_stats: ZStatistics, threshold: ThresholdSpec) -> DetectionReport:
    """Declare a jump at every 1-based index with |z| > xi_n (strict)"""
    if z_stats.n != threshold.n:
        raise ParameterError(
            f'threshold was resolved for n={threshold.n} but there are {z_stats.n} statistics'
        )
    hits = np.flatnonzero(np.abs(z_stats.z) > threshold.resolved_xi)
    return DetectionReport(
        detected_set=frozenset(int(i) + 1 for i in hits),
        z_stats=z_stats,
        threshold=threshold,
    )


def estimate_jump_sizes(path: SamplePath, theta: EstimateTheta,
                        detected: Iterable[int]) -> Dict[int, float]:
    """Drift-corrected increment dX_i - (b1 - b2 X_{i-1}) dt at each detected index"""
    dt = path.scheme.delta_n
    sizes = {}
    for index in sorted(detected):
        if not 1 <= index <= path.n:
            raise ParameterError(f'detected index {index} outside 1..{path.n}')
        x_prev = path.values[index - 1]
        sizes[index] = float(path.values[index] - x_prev - (theta.beta1_hat - theta.beta2_hat * x_prev) * dt)
    return sizes


def run_detection(path: SamplePath, theta: EstimateTheta, gamma: float,
                  threshold: ThresholdSpec) -> DetectionReport:
    """z-statistics, classification and jump sizes in one pass"""
    report = detect_jumps(compute_z_stats(path, theta, gamma), threshold)
    return report.with_jump_sizes(estimate_jump_sizes(path, theta, report.detected_set))


def separation_event(z_stats: ZStatistics, true_set: FrozenSet[int]) -> bool:
    """max over diffusion |z| < sqrt(2 log n) < min over jump |z|"""
    level = math.sqrt(2.0 * math.log(z_stats.n))
    abs_z = np.abs(z_stats.z)
    is_jump = np.zeros(z_stats.n, dtype=bool)
    is_jump[np.array(sorted(true_set), dtype=int) - 1] = True
    diffusion_max = abs_z[~is_jump].max(initial=-math.inf)
    jump_min = abs_z[is_jump].min(initial=math.inf)
    return bool(diffusion_max < level < jump_min)


def gumbel_max_check(n: int, replications: int, seed: int) -> GumbelCheckSummary:
    """
    Compare normalized maxima of n i.i.d. |N(0,1)| with the standard Gumbel law

    Each replication draws from its own child stream of SeedSequence(seed),
    so the summary does not depend on evaluation order.
    """
    if n < 100:
        raise ParameterError('gumbel_max_check needs n >= 100')
    if replications < 500:
        raise ParameterError('gumbel_max_check needs at least 500 replications')
    a_n, b_n = gumbel_constants(n)
    streams = np.random.SeedSequence(seed).spawn(replications)
    maxima = np.array([
        np.abs(np.random.default_rng(stream).standard_normal(n)).max()
        for stream in streams
    ])
    normalized = (maxima - a_n) / b_n
    ks = kstest(normalized, gumbel_r.cdf)
    summary = GumbelCheckSummary(
        n=n,
        replications=replications,
        a_n=a_n,
        b_n=b_n,
        ks_distance=float(ks.statistic),
        ks_pvalue=float(ks.pvalue),
        median=float(np.median(normalized)),
        ecdf_at_zero=float(np.mean(normalized <= 0.0)),
        normalized_maxima=normalized,
    )
    logger.info(
        f'Gumbel check n={n}, replications={replications}: KS={summary.ks_distance:.4f}',
        extra={'event_type': 'gumbel_check', **summary.to_dict()},
    )
    return summary
