"""
SBOC: surrogatbasierte Black-Box-Optimierung mit Clustering.

Öffentliche Einstiegspunkte::

    from sboc import BoxDomain, SbocConfig, run
    result = run(objective, BoxDomain([-2, -1], [2, 1]), SbocConfig(k_max=50, seed=7))
"""

from .core import (
    BelowOptimum,
    BoxDomain,
    Dataset,
    DegenerateSpread,
    DimensionUnsupported,
    DuplicatePoint,
    EmptyDataset,
    IllConditioned,
    InvalidConfig,
    ObjectiveFailure,
    OutOfBounds,
    RngStream,
    SamplePoint,
    SbocError,
    SingularSystem,
    SurrogateFailure,
    TooFewPoints,
    default_epsilon,
    denormalize,
    incumbent,
    min_separation_ok,
    normalize,
)
from .engine import IterationRecord, LedgerEntry, PointAddition, RunResult, SbocConfig, SbocOptimizer, Strategy, run
from .surrogate import KrigingModel, RbfModel, SurrogateSpec, load_model, train

__version__ = "0.1.0"

__all__ = [
    "BelowOptimum",
    "BoxDomain",
    "Dataset",
    "DegenerateSpread",
    "DimensionUnsupported",
    "DuplicatePoint",
    "EmptyDataset",
    "IllConditioned",
    "InvalidConfig",
    "IterationRecord",
    "KrigingModel",
    "LedgerEntry",
    "ObjectiveFailure",
    "OutOfBounds",
    "PointAddition",
    "RbfModel",
    "RngStream",
    "RunResult",
    "SamplePoint",
    "SbocConfig",
    "SbocError",
    "SbocOptimizer",
    "SingularSystem",
    "Strategy",
    "SurrogateFailure",
    "SurrogateSpec",
    "TooFewPoints",
    "default_epsilon",
    "denormalize",
    "incumbent",
    "load_model",
    "min_separation_ok",
    "normalize",
    "run",
    "train",
]
