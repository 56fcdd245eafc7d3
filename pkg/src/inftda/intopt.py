"""Integer Chebyshev projection onto ``{y in N_0^m : sum(y) = c}``.

Given noisy integer counts ``x`` and a target total ``c``, find non-negative
integers ``y`` summing to ``c`` that minimize ``max_i |x_i - y_i|``. Work is
done on the offset ``z = y - x``: start from a vector whose sup-norm does not
exceed the integer lower bound and whose sum is at least ``c - sum(x)``, then
shave the surplus off, smallest ``x`` first.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

BRUTE_FORCE_MAX_DIM = 6
BRUTE_FORCE_MAX_TOTAL = 30


@dataclass(frozen=True)
class ProjectionSolution:
    y: Tuple[int, ...]
    objective: int


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def _check(x: Sequence[int], c: int) -> None:
    if len(x) < 1:
        raise ValueError("x must have at least one element")
    if c < 0:
        raise ValueError(f"target total must be non-negative, got {c}")


def lower_bound(x: Sequence[int], c: int) -> int:
    """``max(ceil(|c - sum(x)| / m), -min(x), 0)``."""
    _check(x, c)
    return max(_ceil_div(abs(c - sum(x)), len(x)), -min(x), 0)


def solve(x: Sequence[int], c: int) -> ProjectionSolution:
    x = [int(v) for v in x]
    _check(x, c)
    m = len(x)
    delta = c - sum(x)
    share = _ceil_div(delta, m)
    z = [max(share, -xi) for xi in x]
    a = max(abs(zi) for zi in z)
    surplus = sum(z) - delta

    order = sorted(range(m), key=lambda i: (x[i], i))
    for i in order:
        if not surplus:
            break
        step = min(surplus, z[i] - max(-x[i], -a))
        z[i] -= step
        surplus -= step

    while surplus:
        for i in order:
            if not surplus:
                break
            if z[i] > -x[i]:
                z[i] -= 1
                surplus -= 1

    y = tuple(xi + zi for xi, zi in zip(x, z))
    return ProjectionSolution(y, max(abs(zi) for zi in z))


def feasible_at(x: Sequence[int], c: int, alpha: int) -> bool:
    """Whether some admissible ``y`` lies within sup-distance ``alpha`` of ``x``."""
    if alpha < 0 or any(xi + alpha < 0 for xi in x):
        return False
    low = sum(max(0, xi - alpha) for xi in x)
    high = sum(max(0, xi + alpha) for xi in x)
    return low <= c <= high


def brute_force(x: Sequence[int], c: int) -> int:
    """Optimal objective by scanning ``alpha`` upward from the lower bound.

    Restricted to small instances; intended as a reference only.
    """
    _check(x, c)
    if len(x) > BRUTE_FORCE_MAX_DIM or c > BRUTE_FORCE_MAX_TOTAL:
        raise ValueError(
            f"brute force limited to m <= {BRUTE_FORCE_MAX_DIM}, c <= {BRUTE_FORCE_MAX_TOTAL}"
        )
    alpha = lower_bound(x, c)
    while not feasible_at(x, c, alpha):
        alpha += 1
    return alpha


def enumerate_optimum(x: Sequence[int], c: int) -> Tuple[int, List[Tuple[int, ...]]]:
    """Exhaustive search over every composition of ``c`` into ``len(x)`` parts.

    Returns the optimal objective and all minimizers. Exponential; tiny inputs only.
    """
    _check(x, c)
    m = len(x)
    best = None
    argmins: List[Tuple[int, ...]] = []

    def rec(prefix: List[int], remaining: int):
        nonlocal best, argmins
        if len(prefix) == m - 1:
            y = tuple(prefix + [remaining])
            obj = max(abs(a - b) for a, b in zip(x, y))
            if best is None or obj < best:
                best, argmins = obj, [y]
            elif obj == best:
                argmins.append(y)
            return
        for v in range(remaining + 1):
            prefix.append(v)
            rec(prefix, remaining - v)
            prefix.pop()

    rec([], c)
    return best, argmins
