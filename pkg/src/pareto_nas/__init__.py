"""Multi-objective neural architecture search at desk scale.

Search spaces and encodings live in :mod:`pareto_nas.archspace`, analytical
cost models in :mod:`pareto_nas.costmodel`, accuracy backends in
:mod:`pareto_nas.evaluator`, reward functions in :mod:`pareto_nas.reward`,
Pareto machinery in :mod:`pareto_nas.pareto`, the neural substrate in
:mod:`pareto_nas.neuralcore`, the search engines in
:mod:`pareto_nas.engines`, and the CLI in :mod:`pareto_nas.cli`.
"""

__version__ = "0.1.0"

from .archspace import ArchSpec, MacroSpace, MicroSpace, OpDef, decode, encode
from .costmodel import DeviceProfile, MetricVector, get_preset
from .errors import ParetoNasError
from .evaluator import FidelityConfig, SyntheticOracle, TabularBenchmark
from .pareto import ObjectiveSpec, ParetoFront
from .reward import RewardConfig

__all__ = [
    "ArchSpec",
    "MacroSpace",
    "MicroSpace",
    "OpDef",
    "decode",
    "encode",
    "DeviceProfile",
    "MetricVector",
    "get_preset",
    "ParetoNasError",
    "FidelityConfig",
    "SyntheticOracle",
    "TabularBenchmark",
    "ObjectiveSpec",
    "ParetoFront",
    "RewardConfig",
    "__version__",
]
