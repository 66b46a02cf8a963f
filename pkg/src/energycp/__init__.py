"""Nonparametric multiple change-point detection with energy statistics.

Change points follow the left-cluster convention throughout: a change
point ``tau`` is the 1-based index of the last observation before the
change, so ``x[:tau]`` and ``x[tau:]`` are the two sides in 0-based
slicing.
"""

from .agglo import MergeTrace, e_agglo, equal_width_init, goodness_of_fit
from .divisive import (
    DivisiveConfig,
    DivisiveResult,
    DivisiveStep,
    e_divisive,
    permutation_pvalue,
    propose_next,
)
from .energy import (
    SplitCandidate,
    alpha_distance,
    best_split,
    distance_matrix,
    empirical_divergence,
    scaled_divergence,
)
from .errors import DataError, InsufficientSampleError, InvalidInputError
from .evaluation import adjusted_rand, adjusted_rand_from_counts, rand_index
from .ingest import ingest_csv
from .partition import Partition
from .results import ResultDocument, detect
from .simlab import Scenario, StudyReport, generate, make_scenario, run_study

__version__ = "0.1.0"
