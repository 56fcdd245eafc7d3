"""Exit criteria for the release pipeline.

Each ``check_*`` function runs one criterion at its fixed tolerance and returns
``(passed, detail)``. Under pytest every criterion is a test and prints one
PASS/FAIL line; ``python tests/test_acceptance.py`` prints the same lines.
"""

import hashlib
import math
import random
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

from inftda import dgauss, evaluate, intopt, mechanism
from inftda.cli import main as cli_main
from inftda.dgauss import NoiseScale, RngStream, expand_seed
from inftda.model import Dataset, Schema, aggregate, contingency, prefix_counts


def _random_dataset(rng, d_max=4, size_max=5, n_max=200):
    d = rng.randint(1, d_max)
    sizes = [rng.randint(2, size_max) for _ in range(d)]
    n = rng.randint(1, n_max)
    # mix of uniform and skewed columns so some branches are empty
    records = []
    for _ in range(n):
        rec = []
        for s in sizes:
            if rng.random() < 0.5:
                rec.append(rng.randrange(s))
            else:
                v = 0
                while v < s - 1 and rng.random() < 0.3:
                    v += 1
                rec.append(v)
        records.append(tuple(rec))
    return Dataset(Schema.of_sizes(sizes), tuple(records))


def check_zero_noise_identity():
    rng = random.Random(101)
    datasets = [_random_dataset(rng) for _ in range(20)]
    start = time.perf_counter()
    mismatches = 0
    for i, ds in enumerate(datasets):
        params = mechanism.PrivacyParams(1, ds.schema.d)
        tree = mechanism.run(ds, params, expand_seed(i), zero_noise=True)
        table = contingency(ds)
        for k in range(ds.schema.d + 1):
            mismatches += tree.levels[k] != prefix_counts(table, k)
        mismatches += mechanism.to_table(tree) != table
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and elapsed < 1.0
    return ok, f"20 datasets, {mismatches} level mismatches, {elapsed:.3f}s (limit 1s)"


def check_mass_and_consistency():
    rng = random.Random(202)
    rhos = ["1/10", "1", "10"]
    failures = []
    for run_idx in range(100):
        ds = _random_dataset(rng)
        rho = rhos[run_idx % 3]
        tree = mechanism.run(ds, mechanism.PrivacyParams(rho, ds.schema.d), expand_seed(run_idx))
        d = ds.schema.d
        if tree.levels[0] != {(): ds.n}:
            failures.append((run_idx, "root"))
        if sum(tree.levels[d].values()) != ds.n or mechanism.to_table(tree).total != ds.n:
            failures.append((run_idx, "mass"))
        for k, level in enumerate(tree.levels):
            if any(type(v) is not int or v < 0 for v in level.values()):
                failures.append((run_idx, f"attribute at level {k}"))
            if k < d and aggregate(tree.levels[k + 1], k) != {p: v for p, v in level.items() if v}:
                failures.append((run_idx, f"consistency at level {k}"))
    return not failures, f"100 runs over rho in {rhos}, failures={failures[:5]}"


def check_intopt_oracle():
    rng = random.Random(303)
    start = time.perf_counter()
    bad = []
    for _ in range(1000):
        m = rng.randint(1, 6)
        x = [rng.randint(-8, 8) for _ in range(m)]
        c = rng.randint(0, 30)
        sol = intopt.solve(x, c)
        feasible = sum(sol.y) == c and min(sol.y) >= 0
        if not feasible or sol.objective != intopt.brute_force(x, c):
            bad.append((x, c))
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 5.0
    return ok, f"1000 instances, {len(bad)} mismatches, {elapsed:.3f}s (limit 5s)"


def _series_zero_mass(sigma_sq, cutoff=20):
    weights = [math.exp(-z * z / (2 * sigma_sq)) for z in range(-cutoff, cutoff + 1)]
    return 1.0 / math.fsum(weights)


def check_discrete_gaussian():
    n = 100_000
    start = time.perf_counter()
    notes = []
    ok = True
    for sigma_sq in (1, 4, 25):
        rng = RngStream(expand_seed(404), "acceptance", sigma_sq)
        xs = np.array([dgauss.sample(NoiseScale(sigma_sq), rng) for _ in range(n)], dtype=float)
        centered = xs - xs.mean()
        var = centered.var()
        se_var = math.sqrt(max((centered**4).mean() - var**2, 0.0) / n)
        var_ok = var <= sigma_sq + 4 * se_var
        sigma = math.sqrt(sigma_sq)
        tail_ok = True
        for t in range(1, int(math.ceil(5 * sigma)) + 1):
            bound = math.exp(-t * t / (2 * sigma_sq))
            band = 4 * math.sqrt(bound * (1 - bound) / n) if bound < 1 else 0.0
            if (xs >= t).mean() > bound + band:
                tail_ok = False
        notes.append(f"s2={sigma_sq}: var={var:.4f} (<= {sigma_sq + 4 * se_var:.4f}) tail={'ok' if tail_ok else 'VIOLATED'}")
        ok &= var_ok and tail_ok
        if sigma_sq == 1:
            p0 = (xs == 0).mean()
            ref = _series_zero_mass(1)
            zero_ok = abs(p0 - 0.39894) <= 0.01 and abs(ref - 0.39894) < 1e-5
            notes.append(f"Pr[Z=0]={p0:.5f} (0.39894 +- 0.01)")
            ok &= zero_ok
    elapsed = time.perf_counter() - start
    ok &= elapsed < 30.0
    return ok, "; ".join(notes) + f"; {elapsed:.1f}s (limit 30s)"


def check_utility_bound():
    rng = random.Random(505)
    sizes = [4, 4, 4]
    ds = Dataset(
        Schema.of_sizes(sizes),
        tuple(tuple(rng.randrange(s) for s in sizes) for _ in range(1000)),
    )
    start = time.perf_counter()
    result = evaluate.bound_experiment(ds, 1, 0.05, 100, expand_seed(505))
    elapsed = time.perf_counter() - start
    rates = result.pass_rates[1:]
    bounds = [round(entry.bound, 3) for entry in result.report.per_level[1:]]
    worst = [entry.max_abs_error for entry in result.report.per_level[1:]]
    ok = all(r >= 0.95 for r in rates) and elapsed < 60.0
    return ok, (
        f"pass rates k=1..3 {rates}, worst errors {worst}, bounds {bounds}, "
        f"joint {result.joint_pass_rate}, {elapsed:.1f}s (limit 60s)"
    )


def check_determinism():
    rng = random.Random(606)
    rows = ["region,product,channel"] + [
        f"r{rng.randrange(5)},p{rng.randrange(4)},c{rng.randrange(3)}" for _ in range(400)
    ]
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        src = tmp / "in.csv"
        src.write_text("\n".join(rows) + "\n")
        digests = set()
        for name, threads in [("a", 1), ("b", 1), ("c", 4), ("d", 4)]:
            out = tmp / f"{name}.csv"
            code = cli_main(["run", "--input", str(src), "--output", str(out), "--rho", "1/2",
                             "--seed", "123456789", "--threads", str(threads)])
            if code != 0:
                return False, f"run {name} exited {code}"
            report = out.with_suffix(".report.json")
            digests.add(
                (hashlib.sha256(out.read_bytes()).hexdigest(),
                 hashlib.sha256(report.read_bytes()).hexdigest())
            )
    return len(digests) == 1, f"{len(digests)} distinct (csv, json) digest pair(s) over 4 runs"


def check_baseline_contrast():
    sizes = [6, 6, 6, 6]
    schema = Schema.of_sizes(sizes)
    rng = random.Random(707)
    ds = Dataset(schema, tuple(tuple(rng.randrange(s) for s in sizes) for _ in range(100)))
    table = contingency(ds)
    baseline_negative = 0
    inftda_negative = 0
    for seed in range(100):
        key = expand_seed(seed)
        noisy = evaluate.baseline_noisy_table(table, 1, key)
        baseline_negative += bool((noisy < 0).any())
        tree = mechanism.run(ds, mechanism.PrivacyParams(1, 4), key)
        inftda_negative += any(v < 0 for level in tree.levels for v in level.values())
    ok = baseline_negative >= 95 and inftda_negative == 0
    return ok, f"baseline negative in {baseline_negative}/100 seeds, InfTDA in {inftda_negative}/100"


CRITERIA = [
    (1, "zero-noise identity", check_zero_noise_identity),
    (2, "mass and consistency", check_mass_and_consistency),
    (3, "IntOPT oracle equivalence", check_intopt_oracle),
    (4, "discrete Gaussian statistics", check_discrete_gaussian),
    (5, "utility-bound experiment", check_utility_bound),
    (6, "determinism", check_determinism),
    (7, "baseline contrast", check_baseline_contrast),
]


def _line(number, name, ok, detail):
    return f"[criterion {number}] {'PASS' if ok else 'FAIL'} {name}: {detail}"


@pytest.mark.parametrize("number,name,check", CRITERIA, ids=[c[1].replace(" ", "-") for c in CRITERIA])
def test_criterion(number, name, check, capsys):
    ok, detail = check()
    with capsys.disabled():
        print("\n" + _line(number, name, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for number, name, check in CRITERIA:
        ok, detail = check()
        failed += not ok
        print(_line(number, name, ok, detail), flush=True)
    sys.exit(1 if failed else 0)
