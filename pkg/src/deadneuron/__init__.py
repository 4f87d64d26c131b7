"""Exact and statistical tools for stably unactivated neurons in the second
layer of ReLU networks."""

from .arrangement import (CoorientedArrangement, Hyperplane, RegionInfo, bounded_region,
                          enumerate_regions, facet_statistics, is_generic, region_counts)
from .experiments import (EstimateReport, DeltaReport, check_c0_relation, conjecture_sweep,
                          estimate_deltas, estimate_prob_stable, facet_report, theorem_probability)
from .intercepts import InterceptTuple, PartitionClass, classify, in_h1, intercept_tuple, p_plus_intercepts
from .linear_core import AffineMap, LpResult, maximize_linear, solve_linear
from .network import (Architecture, Distribution, NetworkParams, configuration_index,
                      first_layer_arrangement, layer_map, sample_params)
from .stability import (DetectorConfig, NeuronRef, StabilityVerdict, all_negative_test,
                        detector_paper_style, is_stably_unactivated_exact)

__version__ = "0.1.0"
