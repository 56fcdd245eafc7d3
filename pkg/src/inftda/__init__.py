"""Differentially private synthetic contingency tables via TopDown release
with integer Chebyshev projection."""

from .dgauss import NoiseScale, RngStream, expand_seed
from .evaluate import bound_experiment, max_abs_error, utility_bound
from .intopt import ProjectionSolution, lower_bound, solve
from .mechanism import PrivacyParams, PrivateTree, parse_rho, release, run, to_table
from .model import (
    ContingencyTable,
    Dataset,
    Schema,
    contingency,
    ingest_csv,
    materialize_records,
    prefix_counts,
)

__version__ = "0.1.0"
