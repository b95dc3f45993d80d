"""
JSON schema of experiment configuration files

Example (every key optional, defaults give the full study grid):

    {
        "diffusion": {"beta1": 1.0, "beta2": 0.8, "sigma": 0.3, "gamma": 0.7},
        "sigma_J": 0.1,
        "grid_n": [200, 500, 1000, 1500, 2000],
        "grid_lambda": [1, 2, 3, 5],
        "grid_mu_J": [1, 2, 3, 4, 5],
        "grid_alpha": [0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5],
        "replications": 100,
        "threshold_mode": "gumbel:0.05",
        "master_seed": 20240601,
        "output_dir": "results"
    }
"""
from typing import Annotated, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from apps.diffusion.services.params import DiffusionParams, JumpParams, SamplingScheme
from apps.detection.services.detection import detection_threshold, parse_threshold

DEFAULT_ALPHA_GRID = [0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5]

SampleSize = Annotated[int, Field(ge=3)]
NonNegative = Annotated[float, Field(ge=0)]


class DiffusionSettings(BaseModel):
    model_config = ConfigDict(extra='forbid')

    beta1: float = 1.0
    beta2: float = 0.8
    sigma: float = 0.3
    gamma: float = 0.7

    @model_validator(mode='after')
    def check_assumption(self):
        self.to_params()
        return self

    def to_params(self) -> DiffusionParams:
        return DiffusionParams(beta1=self.beta1, beta2=self.beta2, sigma=self.sigma, gamma=self.gamma)


class ExperimentConfig(BaseModel):
    """
    A replication grid over (n, lambda, mu_J, alpha)

    x0 defaults to the drift fixed point beta1 / beta2; delta_n is
    n^(-delta_exponent).
    """
    model_config = ConfigDict(extra='forbid', populate_by_name=True)

    diffusion: DiffusionSettings = Field(default_factory=DiffusionSettings)
    sigma_j: NonNegative = Field(0.1, alias='sigma_J')
    x0: Optional[float] = Field(None, gt=0)
    delta_exponent: float = Field(0.55, gt=0, lt=1)
    grid_n: List[SampleSize] = Field(default_factory=lambda: [200, 500, 1000, 1500, 2000], min_length=1)
    grid_lambda: List[NonNegative] = Field(default_factory=lambda: [1.0, 2.0, 3.0, 5.0], min_length=1)
    grid_mu_j: List[float] = Field(default_factory=lambda: [1.0, 2.0, 3.0, 4.0, 5.0],
                                   min_length=1, alias='grid_mu_J')
    grid_alpha: List[NonNegative] = Field(default_factory=lambda: list(DEFAULT_ALPHA_GRID), min_length=1)
    replications: int = Field(100, ge=1)
    threshold_mode: str = 'gumbel:0.05'
    master_seed: int = Field(20240601, ge=0, lt=2 ** 64)
    output_dir: str = 'results'
    mdpde_tol: float = Field(1e-10, gt=0)
    mdpde_max_iters: int = Field(2000, ge=1)

    @field_validator('threshold_mode')
    @classmethod
    def check_threshold(cls, value: str) -> str:
        parse_threshold(value)
        return value

    @field_validator('grid_n', 'grid_lambda', 'grid_mu_j', 'grid_alpha')
    @classmethod
    def check_distinct(cls, values: list) -> list:
        if len(set(values)) != len(values):
            raise ValueError('grid values must be distinct')
        return values

    @model_validator(mode='after')
    def check_threshold_range(self):
        mode, parameter = parse_threshold(self.threshold_mode)
        detection_threshold(min(self.grid_n), mode, parameter)
        return self

    @model_validator(mode='after')
    def check_jump_grid(self):
        for lam in self.grid_lambda:
            for mu_j in self.grid_mu_j:
                JumpParams(lam=lam, mu_j=mu_j, sigma_j=self.sigma_j)
        return self

    @property
    def params(self) -> DiffusionParams:
        return self.diffusion.to_params()

    @property
    def initial_state(self) -> float:
        return self.x0 if self.x0 is not None else self.params.mean_level

    def scheme(self, n: int) -> SamplingScheme:
        return SamplingScheme.high_frequency(n, x0=self.initial_state, exponent=self.delta_exponent)

    @property
    def path_cell_count(self) -> int:
        return len(self.grid_n) * len(self.grid_lambda) * len(self.grid_mu_j)

    @property
    def grid_size(self) -> int:
        """Number of result rows: |grid| x replications"""
        return self.path_cell_count * len(self.grid_alpha) * self.replications

    def echo(self) -> dict:
        return self.model_dump(mode='json', by_alias=True)
