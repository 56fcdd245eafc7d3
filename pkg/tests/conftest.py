import random

import pytest

from inftda.dgauss import expand_seed
from inftda.model import Dataset, Schema


def random_dataset(rng: random.Random, d_max=4, size_max=5, n_max=200, n_min=1) -> Dataset:
    d = rng.randint(1, d_max)
    sizes = [rng.randint(2, size_max) for _ in range(d)]
    schema = Schema.of_sizes(sizes)
    n = rng.randint(n_min, n_max)
    # skewed records so that some branches are empty
    records = tuple(tuple(_skewed(rng, s) for s in sizes) for _ in range(n))
    return Dataset(schema, records)


def _skewed(rng: random.Random, size: int) -> int:
    v = 0
    while v < size - 1 and rng.random() < 0.45:
        v += 1
    return v


def uniform_dataset(rng: random.Random, sizes, n) -> Dataset:
    schema = Schema.of_sizes(sizes)
    records = tuple(tuple(rng.randrange(s) for s in sizes) for _ in range(n))
    return Dataset(schema, records)


@pytest.fixture
def key():
    return expand_seed(2024)


@pytest.fixture
def small_csv():
    return "a,b\nx,p\nx,q\nx,p\n"
