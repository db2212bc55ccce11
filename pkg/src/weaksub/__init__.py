"""Greedy maximization of weakly submodular set functions with certified approximation factors."""

from .errors import (ConfigError, ConvergenceError, DegenerateDataError, DomainError, ResourceError,
                     UndefinedMetricError, WeakSubError)
from .greedy import (DistributedResult, RandomSource, distributed, distributed_greedy, greedy,
                     partition_uniform, stochastic_greedy, subsample, subsample_size)
from .ratios import (BoundCertificate, RatioReport, brute_force_opt, make_certificate,
                     subadditivity_ratio_k, subadditivity_ratio_set, submodularity_ratio_pair,
                     submodularity_ratio_uk, uniform_submodularity_ratio)
from .setfunc import (CardinalityFunction, CoverageFunction, GroundSet, ModularFunction, SelectionStep,
                      SelectionTrace, SetFunction, TabulatedFunction, evaluate, marginal_gain)

__version__ = "0.1.0"
