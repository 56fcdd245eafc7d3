"""TopDown release of a private non-negative hierarchical tree.

Level ``k`` of the tree holds one integer per length-``k`` prefix of the
attribute order. The root is the dataset size and is released exactly
(neighbouring datasets differ by substitution). Each retained node at level
``k - 1`` gets discrete Gaussian noise on the dense vector of its children's
counts, and the noisy vector is projected back onto non-negative integers
summing to the node's own released value. Nodes released as 0 are dropped
together with their whole subtree.

The total budget ``rho`` (zCDP) is split evenly over the ``d`` levels. Each
level partitions the data and has L2 sensitivity sqrt(2), so the per-level
variance is ``d / rho``.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Tuple, Union

from . import dgauss, intopt
from .dgauss import NoiseScale, RngStream
from .model import ContingencyTable, Dataset, Prefix, Schema, contingency, prefix_counts

logger = logging.getLogger(__name__)

LevelMap = Dict[Prefix, int]


def parse_rho(value: Union[str, int, float, Fraction]) -> Fraction:
    """Parse a zCDP budget from ``"0.5"``, ``"1/2"`` or a number, exactly."""
    try:
        if isinstance(value, float):
            rho = Fraction(str(value))
        else:
            rho = Fraction(value.strip() if isinstance(value, str) else value)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"cannot parse rho from {value!r}") from exc
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    return rho


@dataclass(frozen=True)
class PrivacyParams:
    rho: Fraction
    d: int

    def __post_init__(self):
        object.__setattr__(self, "rho", parse_rho(self.rho))
        if self.d < 1:
            raise ValueError("depth d must be at least 1")

    @property
    def sigma_sq_per_level(self) -> Fraction:
        return Fraction(self.d) / self.rho


def per_level_sigma(params: PrivacyParams) -> NoiseScale:
    return NoiseScale(params.sigma_sq_per_level)


@dataclass(frozen=True)
class PrivateTree:
    schema: Schema
    levels: Tuple[LevelMap, ...]
    params: PrivacyParams
    seed: bytes

    @property
    def n(self) -> int:
        return self.levels[0][()]

    @property
    def complete(self) -> bool:
        return len(self.levels) == self.schema.d + 1


def node_stream(seed: bytes, level: int, prefix: Prefix) -> RngStream:
    """RNG for the children of ``prefix``; ``level`` is the children's level."""
    return RngStream(seed, "inftda-node", level, prefix)


def _expand(
    prefix: Prefix,
    budget: int,
    true_children: LevelMap,
    size: int,
    scale: NoiseScale,
    seed: bytes,
    level: int,
) -> List[Tuple[Prefix, int]]:
    counts = [true_children.get(prefix + (j,), 0) for j in range(size)]
    if scale.is_zero:
        noisy = counts
    else:
        noise = dgauss.sample_vector(scale, size, node_stream(seed, level, prefix))
        noisy = [a + b for a, b in zip(counts, noise)]
    projected = intopt.solve(noisy, budget).y
    return [(prefix + (j,), v) for j, v in enumerate(projected) if v]


def run(
    dataset: Dataset,
    params: PrivacyParams,
    seed: bytes,
    *,
    zero_noise: bool = False,
    workers: int = 1,
) -> PrivateTree:
    """Release the private tree for ``dataset``.

    ``zero_noise`` replaces every noise draw by 0 (test mode, not private).
    ``workers`` parallelizes node expansion within a level; output does not
    depend on it because every node has its own derived stream.
    """
    schema = dataset.schema
    if params.d != schema.d:
        raise ValueError(f"privacy params are for depth {params.d}, dataset has d={schema.d}")
    if len(seed) != 32:
        raise ValueError("seed must be a 32-byte key")
    scale = NoiseScale(0) if zero_noise else per_level_sigma(params)
    table = contingency(dataset)

    exact = true_levels(table)
    levels: List[LevelMap] = [{(): dataset.n}]

    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for k in range(1, schema.d + 1):
            size = schema.attributes[k - 1].size
            parents = sorted(levels[-1].items())
            args = [
                (prefix, budget, exact[k], size, scale, seed, k)
                for prefix, budget in parents
            ]
            if pool is None:
                results = [_expand(*a) for a in args]
            else:
                results = list(pool.map(lambda a: _expand(*a), args))
            level: LevelMap = {}
            for chunk in results:
                level.update(chunk)
            logger.debug("level %d: %d parents, %d nodes kept", k, len(parents), len(level))
            levels.append(level)
    finally:
        if pool is not None:
            pool.shutdown()
    return PrivateTree(schema, tuple(levels), params, seed)


def to_table(tree: PrivateTree) -> ContingencyTable:
    """Leaf level of a complete tree as a contingency table."""
    if not tree.complete:
        raise ValueError(
            f"tree has {len(tree.levels) - 1} levels, expected {tree.schema.d}"
        )
    leaves = tree.levels[-1]
    if not leaves:
        raise ValueError("tree has no leaves (empty dataset)")
    return ContingencyTable(tree.schema, dict(leaves))


def release(
    dataset: Dataset,
    rho,
    seed: bytes,
    *,
    zero_noise: bool = False,
    workers: int = 1,
) -> ContingencyTable:
    """Convenience wrapper: run the mechanism and return the leaf table."""
    params = PrivacyParams(parse_rho(rho), dataset.schema.d)
    return to_table(run(dataset, params, seed, zero_noise=zero_noise, workers=workers))


def true_levels(table: ContingencyTable) -> List[LevelMap]:
    return [prefix_counts(table, k) for k in range(table.schema.d + 1)]
