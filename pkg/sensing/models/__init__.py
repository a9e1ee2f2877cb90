from sensing.models.configs import BenchmarkConfig, DesignConfig
from sensing.models.matrices import CoherenceReport, ObjectiveContext, SparseSensingMatrix, TargetGram
from sensing.models.results import (
    DesignResult,
    ExperimentCell,
    ExperimentReport,
    RecoveryResult,
    RunManifest,
    SignalEnsemble,
    TraceRecord,
)
