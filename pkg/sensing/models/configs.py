import math
from typing import ClassVar, Dict, List, Literal, Optional, Union

from pydantic import Field, field_validator, model_validator

from sensing.config import RunConfig

SYSTEM_NAMES = ("randn", "bispar", "sparse", "sparse-etf", "sparse-a")
SWEEP_AXES = ("snr", "m", "k", "kappa", "lambda")


def _split_list(v):
    """Parse a comma-separated string (command line, environment) into a list"""
    if isinstance(v, str):
        return [item.strip() for item in v.split(",") if item.strip()]
    return v


class StepRuleConfig(RunConfig):
    """Step-size rule shared by design and benchmark configurations"""

    step_rule: Literal["backtracking", "constant"] = "backtracking"
    eta: float = Field(default=1e-3, gt=0, description="Constant step size")
    eta0: float = Field(default=1.0, gt=0, description="Initial backtracking step")
    gamma: float = Field(default=0.9, gt=0, lt=1, description="Sufficient-decrease constant")
    alpha: float = Field(default=0.5, gt=0, lt=1, description="Step shrink factor")
    tol_phi: float = Field(default=1e-8, ge=0, description="Stop when ||Phi_k - Phi_k-1||_F falls below")
    tol_obj: float = Field(default=1e-12, ge=0, description="Relative objective change tolerance")
    patience: int = Field(default=5, ge=1, description="Consecutive iterations below tol_obj")


class DesignConfig(StepRuleConfig):
    """
    Hyperparameters of one sensing-matrix design run.

    ``xi`` is a relaxation level in [0, 1) or the string "welch", resolved to
    the Welch bound of (m, l) when the run starts.
    """

    section: ClassVar[str] = "design"

    m: int = Field(default=25, ge=1)
    n: int = Field(default=60, ge=1)
    l: int = Field(default=80, ge=1)
    kappa: int = Field(default=20, ge=1)
    xi: Union[Literal["welch"], float] = "welch"
    lam: float = Field(default=0.25, ge=0)
    max_iters: int = Field(default=1000, ge=0)
    seed: int = Field(default=0, ge=0)

    # Inputs used by the command line; library callers pass matrices directly
    base: str = "identity"
    dictionary: Optional[str] = None
    log_every: int = Field(default=100, ge=1)

    @field_validator("xi")
    @classmethod
    def validate_xi(cls, v):
        if v == "welch":
            return v
        if not 0.0 <= v < 1.0:
            raise ValueError("xi must lie in [0, 1) or be 'welch'")
        return v

    @model_validator(mode="after")
    def validate_dimensions(self):
        if self.kappa > self.n:
            raise ValueError(f"kappa ({self.kappa}) must not exceed n ({self.n})")
        return self


class BenchmarkConfig(StepRuleConfig):
    """
    Settings of a benchmark or sweep over named CS systems.

    Every system is designed and evaluated once per seed in ``seeds``; a sweep
    repeats that for each entry of ``values`` along ``axis``.
    """

    section: ClassVar[str] = "benchmark"

    m: int = Field(default=25, ge=1)
    n: int = Field(default=60, ge=1)
    l: int = Field(default=80, ge=1)
    k: int = Field(default=4, ge=1, description="Sparsity of signals and of recovery")
    j: int = Field(default=2000, ge=1, description="Signals per ensemble")
    snr_db: float = 20.0
    lam: float = Field(default=0.25, ge=0)
    kappa: int = Field(default=20, ge=1)
    systems: List[str] = ["randn", "bispar", "sparse", "sparse-etf"]
    seeds: List[int] = [0]
    psnr_bits: int = Field(default=8, ge=1)
    design_iters: int = Field(default=500, ge=0)

    axis: Literal["snr", "m", "k", "kappa", "lambda"] = "snr"
    values: List[float] = [10.0, 15.0, 20.0, 25.0, 30.0]
    snr_grid: List[float] = []

    external: Dict[str, str] = {}

    @field_validator("systems", "seeds", "values", "snr_grid", mode="before")
    @classmethod
    def parse_lists(cls, v):
        return _split_list(v)

    @field_validator("snr_db", mode="before")
    @classmethod
    def parse_snr(cls, v):
        """Accept "inf" for noiseless ensembles"""
        if isinstance(v, str) and v.strip().lower() in ("inf", "+inf", "infinity"):
            return math.inf
        return v

    @field_validator("systems")
    @classmethod
    def validate_systems(cls, v):
        if not v:
            raise ValueError("at least one system is required")
        unknown = [name for name in v if name not in SYSTEM_NAMES]
        if unknown:
            raise ValueError(f"unknown system(s) {unknown}; choose from {list(SYSTEM_NAMES)}")
        return v

    @field_validator("seeds")
    @classmethod
    def validate_seeds(cls, v):
        if not v:
            raise ValueError("at least one seed is required")
        if any(seed < 0 for seed in v):
            raise ValueError("seeds must be non-negative")
        return v

    @field_validator("values")
    @classmethod
    def validate_values(cls, v):
        if not v:
            raise ValueError("sweep values must not be empty")
        return v

    @model_validator(mode="after")
    def validate_dimensions(self):
        if self.kappa > self.n:
            raise ValueError(f"kappa ({self.kappa}) must not exceed n ({self.n})")
        if self.k > self.l:
            raise ValueError(f"k ({self.k}) must not exceed l ({self.l})")
        return self

    def design_config(self, *, m: int, kappa: int, lam: float, xi, seed: int) -> DesignConfig:
        """DesignConfig for one designed system of this benchmark"""
        return DesignConfig(
            m=m, n=self.n, l=self.l, kappa=kappa, xi=xi, lam=lam,
            max_iters=self.design_iters, seed=seed,
            step_rule=self.step_rule, eta=self.eta, eta0=self.eta0,
            gamma=self.gamma, alpha=self.alpha,
            tol_phi=self.tol_phi, tol_obj=self.tol_obj, patience=self.patience,
        )
