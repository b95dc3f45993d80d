"""
Euler-Maruyama simulation of CKLS jump-diffusion paths
"""
import logging
from dataclasses import dataclass
from typing import FrozenSet, Optional

import numpy as np

from apps.diffusion.exceptions import ParameterError
from apps.diffusion.services.params import (
    DiffusionParams, JumpParams, SamplingScheme, validate_params,
)

logger = logging.getLogger(__name__)

POSITIVITY_FLOOR = 1e-8


@dataclass(frozen=True)
class SimConfig:
    params: DiffusionParams
    jumps: JumpParams
    scheme: SamplingScheme
    seed: int

    def __post_init__(self):
        validate_params(self.params, self.jumps)
        if int(self.seed) != self.seed or not 0 <= self.seed < 2 ** 64:
            raise ParameterError('seed must be an unsigned 64-bit integer')


@dataclass(frozen=True, eq=False)
class SamplePath:
    """
    Discrete observations X_{t_0}, ..., X_{t_n}

    true_jump_increments[k] is the jump increment of increment k+1 (jump
    indices are 1-based); it is None for ingested data without ground truth.
    """
    times: np.ndarray
    values: np.ndarray
    scheme: SamplingScheme
    true_jump_increments: Optional[np.ndarray] = None

    def __post_init__(self):
        n = self.scheme.n
        if self.times.shape != (n + 1,) or self.values.shape != (n + 1,):
            raise ParameterError(f'times and values must hold n+1 = {n + 1} points')
        if self.true_jump_increments is not None and self.true_jump_increments.shape != (n,):
            raise ParameterError(f'true_jump_increments must hold n = {n} entries')
        if not np.all(np.isfinite(self.values)) or np.any(self.values <= 0):
            raise ParameterError('path values must be finite and strictly positive')

    @property
    def n(self) -> int:
        return self.scheme.n

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.values)

    @property
    def has_ground_truth(self) -> bool:
        return self.true_jump_increments is not None


def simulate(cfg: SimConfig) -> SamplePath:
    """
    Simulate one path with full-truncation Euler steps plus compound-Poisson jumps

    Each step evaluates drift and diffusion at max(X, floor), adds the sum of
    K ~ Poisson(lam * delta_n) Normal(mu_J, sigma_J^2) sizes, and clamps a
    nonpositive result to the floor. Draws are taken in a fixed order
    (normals, counts, sizes) from one generator seeded by cfg.seed, so the
    path is a pure function of cfg.
    """
    p, j, scheme = cfg.params, cfg.jumps, cfg.scheme
    n, dt = scheme.n, scheme.delta_n
    rng = np.random.default_rng(cfg.seed)

    shocks = rng.standard_normal(n)
    counts = rng.poisson(j.lam * dt, size=n)
    total = int(counts.sum())
    sizes = rng.normal(j.mu_j, j.sigma_j, size=total)
    owners = np.repeat(np.arange(n), counts)
    jump_increments = np.bincount(owners, weights=sizes, minlength=n).astype(float)

    sqrt_dt = np.sqrt(dt)
    values = np.empty(n + 1)
    values[0] = scheme.x0
    x = scheme.x0
    for i in range(n):
        x_pos = max(x, POSITIVITY_FLOOR)
        x = (x + (p.beta1 - p.beta2 * x_pos) * dt
             + p.sigma * x_pos ** p.gamma * sqrt_dt * shocks[i]
             + jump_increments[i])
        if x <= 0:
            x = POSITIVITY_FLOOR
        values[i + 1] = x

    logger.debug(
        f'Simulated path n={n}, delta_n={dt:.6g}, jumps={int(np.count_nonzero(jump_increments))}, '
        f'seed={cfg.seed}'
    )
    return SamplePath(
        times=np.arange(n + 1) * dt,
        values=values,
        scheme=scheme,
        true_jump_increments=jump_increments,
    )


def jump_index_set(path: SamplePath) -> FrozenSet[int]:
    """True jump indices {i : Delta_i J != 0}, 1-based"""
    if not path.has_ground_truth:
        raise ParameterError('path carries no ground-truth jump increments')
    return frozenset(int(i) + 1 for i in np.flatnonzero(path.true_jump_increments))
