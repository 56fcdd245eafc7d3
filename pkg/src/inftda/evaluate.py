"""Utility measurement for released tables.

Compares a private table with the true one on every hierarchical level,
evaluates the high-probability error bound of the TopDown mechanism and
provides the naive baseline that perturbs each cell of the dense table.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Union

import numpy as np

from . import dgauss, mechanism
from .dgauss import NoiseScale, RngStream
from .model import ContingencyTable, Dataset, contingency, prefix_counts

BASELINE_MAX_CELLS = 10**6


def max_abs_error(true_table: ContingencyTable, dp_table: ContingencyTable, k: int) -> int:
    """Largest absolute difference over all length-``k`` prefixes."""
    if true_table.schema != dp_table.schema:
        raise ValueError("tables have different schemas")
    a = prefix_counts(true_table, k)
    b = prefix_counts(dp_table, k)
    return max((abs(a.get(key, 0) - b.get(key, 0)) for key in a.keys() | b.keys()), default=0)


def utility_bound(
    k: int,
    d: int,
    rho: Union[Fraction, float, str],
    beta: float,
    domain_sizes: Sequence[int],
) -> float:
    """Error level that the level-``k`` maximum error stays below w.p. ``1 - beta``.

    Sum over ``l = 1..k`` of ``sqrt(8 d / rho * ln(k * prod(sizes[:l]) / beta))``;
    a term whose log argument is below 1 contributes 0.
    """
    if not 1 <= d:
        raise ValueError("d must be at least 1")
    if not 1 <= k <= d:
        raise ValueError(f"k must be in [1, {d}], got {k}")
    if not 0 < beta < 1:
        raise ValueError(f"beta must be in (0, 1), got {beta}")
    rho = mechanism.parse_rho(rho)
    if len(domain_sizes) < k:
        raise ValueError(f"need at least {k} domain sizes, got {len(domain_sizes)}")
    scale = 8 * d / float(rho)
    total = 0.0
    prod = 1
    for size in domain_sizes[:k]:
        if size < 1:
            raise ValueError("domain sizes must be positive")
        prod *= size
        log_term = math.log(k * prod) - math.log(beta)
        if log_term > 0:
            total += math.sqrt(scale * log_term)
    return total


def baseline_noisy_table(
    table: ContingencyTable,
    rho,
    seed: bytes,
    *,
    zero_noise: bool = False,
) -> np.ndarray:
    """Dense table with independent discrete Gaussian noise on every cell.

    Variance ``1 / rho``. No consistency, rounding or clipping is applied, so
    cells can be negative. Axes follow the schema order.
    """
    shape = tuple(table.schema.sizes)
    cells = table.schema.universe_size()
    if cells > BASELINE_MAX_CELLS:
        raise ValueError(f"universe has {cells} cells; baseline is limited to {BASELINE_MAX_CELLS}")
    dense = np.zeros(shape, dtype=np.int64)
    for key, value in table.counts.items():
        dense[key] = value
    if zero_noise:
        return dense
    scale = NoiseScale(1 / mechanism.parse_rho(rho))
    noise = dgauss.sample_vector(scale, cells, RngStream(seed, "baseline"))
    return dense + np.asarray(noise, dtype=np.int64).reshape(shape)


def baseline_marginal(noisy: np.ndarray, k: int) -> np.ndarray:
    """Level-``k`` answers from a dense noisy table (sum of trailing axes)."""
    return noisy.sum(axis=tuple(range(k, noisy.ndim))) if k < noisy.ndim else noisy


@dataclass
class LevelReport:
    level: int
    max_abs_error: int
    bound: float
    nodes_true: int
    nodes_dp: int
    pass_rate: Optional[float] = None


@dataclass
class ErrorReport:
    per_level: List[LevelReport]
    rho: Fraction
    beta: float
    seed: Union[int, str]
    runtime_ms: Optional[float] = None
    trials: int = 1
    joint_pass_rate: Optional[float] = None

    def to_dict(self, include_runtime: bool = False) -> dict:
        levels = []
        for entry in self.per_level:
            item = asdict(entry)
            if item["pass_rate"] is None:
                del item["pass_rate"]
            levels.append(item)
        out = {
            "rho": str(self.rho),
            "beta": self.beta,
            "seed": self.seed,
            "trials": self.trials,
            "levels": levels,
        }
        if self.joint_pass_rate is not None:
            out["joint_pass_rate"] = self.joint_pass_rate
        if include_runtime:
            out["runtime_ms"] = self.runtime_ms
        return out

    def to_json(self, include_runtime: bool = False) -> str:
        return json.dumps(self.to_dict(include_runtime), indent=2) + "\n"


def level_bounds(schema, rho, beta) -> List[float]:
    """Bound per level, with 0 for the exactly released root."""
    return [0.0] + [
        utility_bound(k, schema.d, rho, beta, schema.sizes) for k in range(1, schema.d + 1)
    ]


def error_report(
    true_table: ContingencyTable,
    dp_table: ContingencyTable,
    rho,
    beta: float,
    seed: Union[int, str],
    runtime_ms: Optional[float] = None,
) -> ErrorReport:
    rho = mechanism.parse_rho(rho)
    bounds = level_bounds(true_table.schema, rho, beta)
    levels = [
        LevelReport(
            level=k,
            max_abs_error=max_abs_error(true_table, dp_table, k),
            bound=bounds[k],
            nodes_true=len(prefix_counts(true_table, k)),
            nodes_dp=len(prefix_counts(dp_table, k)),
        )
        for k in range(true_table.schema.d + 1)
    ]
    return ErrorReport(levels, rho, beta, seed, runtime_ms)


def trial_seed(seed: bytes, trial: int) -> bytes:
    return hashlib.blake2b(b"trial" + trial.to_bytes(8, "big"), key=seed, digest_size=32).digest()


def _one_trial(dataset: Dataset, true_table, rho, seed: bytes, zero_noise: bool):
    dp = mechanism.release(dataset, rho, seed, zero_noise=zero_noise)
    d = dataset.schema.d
    return (
        [max_abs_error(true_table, dp, k) for k in range(d + 1)],
        [len(prefix_counts(dp, k)) for k in range(d + 1)],
    )


@dataclass
class ExperimentResult:
    report: ErrorReport
    errors: List[List[int]] = field(repr=False)

    @property
    def pass_rates(self) -> List[float]:
        return [entry.pass_rate for entry in self.report.per_level]

    @property
    def joint_pass_rate(self) -> float:
        return self.report.joint_pass_rate


def bound_experiment(
    dataset: Dataset,
    rho,
    beta: float,
    trials: int,
    seed: bytes,
    *,
    zero_noise: bool = False,
    workers: int = 1,
    report_seed: Union[int, str, None] = None,
) -> ExperimentResult:
    """Repeat the release ``trials`` times and count bound violations.

    Per-level pass rates and the rate at which every level passes at once are
    reported. Each level entry carries the worst error seen across trials.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if not 0 < beta < 1:
        raise ValueError(f"beta must be in (0, 1), got {beta}")
    rho = mechanism.parse_rho(rho)
    start = time.perf_counter()
    true_table = contingency(dataset)
    seeds = [trial_seed(seed, t) for t in range(trials)]
    args = [(dataset, true_table, rho, s, zero_noise) for s in seeds]
    if workers > 1 and trials > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_one_trial, *zip(*args)))
    else:
        outcomes = [_one_trial(*a) for a in args]

    d = dataset.schema.d
    bounds = level_bounds(dataset.schema, rho, beta)
    errors = [errs for errs, _ in outcomes]
    passes = [[errs[k] <= bounds[k] for k in range(d + 1)] for errs in errors]
    levels = [
        LevelReport(
            level=k,
            max_abs_error=max(errs[k] for errs in errors),
            bound=bounds[k],
            nodes_true=len(prefix_counts(true_table, k)),
            nodes_dp=max(nodes[k] for _, nodes in outcomes),
            pass_rate=sum(p[k] for p in passes) / trials,
        )
        for k in range(d + 1)
    ]
    joint = sum(all(p) for p in passes) / trials
    runtime = (time.perf_counter() - start) * 1000
    report = ErrorReport(
        levels,
        rho,
        beta,
        report_seed if report_seed is not None else seed.hex(),
        runtime,
        trials=trials,
        joint_pass_rate=joint,
    )
    return ExperimentResult(report, errors)
