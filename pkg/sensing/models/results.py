import math
from dataclasses import dataclass, field
from datetime import datetime
from statistics import median
from typing import Any, Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from sensing.models.matrices import SparseSensingMatrix, TargetGram

TerminationReason = Literal["max_iters", "phi_tolerance", "objective_tolerance"]


@dataclass(frozen=True)
class TraceRecord:
    """One iteration of the alternating minimisation"""

    iteration: int
    f: float                 # f(Phi_k, G_k)
    d_phi: float             # ||Phi_k - Phi_k-1||_F
    d_g: float               # ||G_k - G_k-1||_F
    eta: float               # accepted step size
    halvings: int            # backtracking reductions before acceptance
    f_half: float = math.nan  # f(Phi_k, G_k-1), before the Gram update


@dataclass(frozen=True, eq=False)
class DesignResult:
    phi: SparseSensingMatrix
    g: TargetGram
    trace: List[TraceRecord]
    termination_reason: TerminationReason
    xi: float
    initial_phi: SparseSensingMatrix
    initial_objective: float
    stationarity: float

    @property
    def objective(self) -> float:
        """Objective at the returned pair"""
        return self.trace[-1].f if self.trace else self.initial_objective


@dataclass(frozen=True, eq=False)
class RecoveryResult:
    coefficients: np.ndarray
    support: List[int]
    residual_norm: float
    iterations: int
    residual_history: List[float] = field(default_factory=list)


@dataclass(frozen=True, eq=False)
class SignalEnsemble:
    """J signals X = Psi S + noise with their K-sparse codes"""

    signals: np.ndarray   # N x J
    codes: np.ndarray     # L x J
    sigma: float
    snr_db: float
    seed: int
    k: int

    @property
    def count(self) -> int:
        return self.signals.shape[1]


class ExperimentCell(BaseModel):
    """Result of one system at one sweep value for one seed"""

    system: str
    axis: str
    axis_value: float
    mse: float = Field(ge=0)
    psnr_db: float
    failures: int = Field(ge=0)
    seed: int


class ExperimentReport(BaseModel):
    """Benchmark results plus the configuration that produced them"""

    model_config = ConfigDict(ser_json_inf_nan="strings")

    cells: List[ExperimentCell] = []
    config: Dict[str, Any] = {}
    seeds: List[int] = []
    support_sampler: str = "uniform"

    def extend(self, other: "ExperimentReport") -> None:
        self.cells.extend(other.cells)
        for seed in other.seeds:
            if seed not in self.seeds:
                self.seeds.append(seed)

    def systems(self) -> List[str]:
        return list(dict.fromkeys(cell.system for cell in self.cells))

    def axis_values(self) -> List[float]:
        return list(dict.fromkeys(cell.axis_value for cell in self.cells))

    def median_mse(self, system: str, axis_value: Optional[float] = None) -> float:
        """Median MSE across seeds of one system (at one axis value)"""
        values = [
            cell.mse for cell in self.cells
            if cell.system == system and (axis_value is None or cell.axis_value == axis_value)
        ]
        if not values:
            raise KeyError(f"no cells for system {system!r} at {axis_value!r}")
        return median(values)


class RunManifest(BaseModel):
    """Audit record written next to every command's outputs"""

    model_config = ConfigDict(ser_json_inf_nan="strings")

    subcommand: str
    config: Dict[str, Any]
    defaults_applied: List[str]
    inputs: Dict[str, Optional[str]] = {}
    outputs: Dict[str, Optional[str]] = {}
    tool_version: str
    started_at: datetime
    finished_at: Optional[datetime] = None
    exit_status: Optional[int] = None
    messages: List[str] = []
