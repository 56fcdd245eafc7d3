"""Exact discrete Gaussian sampling over the integers.

All arithmetic on the sampling path is done with Python integers (rationals are
carried as numerator/denominator pairs), so no floating-point value ever
influences which integer is returned. The construction follows Canonne, Kamath
and Steinke: a discrete Laplace proposal corrected by an exact Bernoulli
rejection step.

Randomness comes from :class:`RngStream`, a thin wrapper around numpy's
counter-based Philox generator keyed by a hash of a 256-bit master key and a
purpose tag.
"""

from __future__ import annotations

import hashlib
import math
from fractions import Fraction
from typing import Iterable, List, Union

import numpy as np

MAX_REJECTIONS = 10**6
_BUFFER_WORDS = 256
_MASK64 = (1 << 64) - 1

Rational = Union[int, Fraction]


class SamplerError(RuntimeError):
    """Raised when a rejection loop exceeds its iteration guard."""


def _encode_tag(parts: Iterable) -> bytes:
    out = []
    for part in parts:
        if isinstance(part, (tuple, list)):
            body = _encode_tag(part)
            out.append(b"T" + len(body).to_bytes(4, "big") + body)
        elif isinstance(part, bool):
            out.append(b"B" + (b"1" if part else b"0"))
        elif isinstance(part, int):
            raw = str(part).encode()
            out.append(b"I" + len(raw).to_bytes(4, "big") + raw)
        elif isinstance(part, bytes):
            out.append(b"Y" + len(part).to_bytes(4, "big") + part)
        else:
            raw = str(part).encode("utf-8")
            out.append(b"S" + len(raw).to_bytes(4, "big") + raw)
    return b"".join(out)


def expand_seed(seed: int) -> bytes:
    """Expand an unsigned 64-bit seed to a 256-bit key with SHA-256."""
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return hashlib.sha256(b"inftda-seed" + seed.to_bytes(8, "big")).digest()


class RngStream:
    """Deterministic random stream identified by a key and a tag.

    Two streams built from the same key and tag yield the same sequence.
    Streams are not thread-safe; give each worker its own.
    """

    def __init__(self, key: bytes, *tag):
        if len(key) != 32:
            raise ValueError("master key must be 32 bytes")
        self.key = key
        self.tag = tag
        digest = hashlib.blake2b(_encode_tag(tag), key=key, digest_size=16).digest()
        philox_key = np.frombuffer(digest, dtype="<u8").astype(np.uint64)
        self._bitgen = np.random.Philox(key=philox_key)
        self._buf: List[int] = []

    def derive(self, *tag) -> "RngStream":
        """Child stream whose tag extends this one."""
        return RngStream(self.key, *self.tag, *tag)

    def _word(self) -> int:
        if not self._buf:
            self._buf = self._bitgen.random_raw(_BUFFER_WORDS).tolist()
            self._buf.reverse()
        return self._buf.pop()

    def randbits(self, k: int) -> int:
        value = 0
        got = 0
        while got < k:
            value = (value << 64) | self._word()
            got += 64
        return value >> (got - k)

    def randbelow(self, m: int) -> int:
        """Uniform integer in ``[0, m)`` by rejection on ``bit_length(m)`` bits."""
        if m <= 0:
            raise ValueError("m must be positive")
        if m == 1:
            return 0
        k = (m - 1).bit_length()
        if k <= 64:
            # fast path: one word per attempt
            shift = 64 - k
            while True:
                r = self._word() >> shift
                if r < m:
                    return r
        while True:
            r = self.randbits(k)
            if r < m:
                return r


class NoiseScale:
    """Variance parameter ``sigma_sq`` of a discrete Gaussian, kept exact."""

    __slots__ = ("sigma_sq",)

    def __init__(self, sigma_sq: Rational):
        sigma_sq = Fraction(sigma_sq)
        if sigma_sq < 0:
            raise ValueError("sigma_sq must be non-negative")
        self.sigma_sq = sigma_sq

    @property
    def is_zero(self) -> bool:
        return self.sigma_sq == 0

    def __eq__(self, other):
        return isinstance(other, NoiseScale) and other.sigma_sq == self.sigma_sq

    def __hash__(self):
        return hash(self.sigma_sq)

    def __repr__(self):
        return f"NoiseScale({self.sigma_sq})"


def _bernoulli(num: int, den: int, rng: RngStream) -> bool:
    return rng.randbelow(den) < num


def _bernoulli_exp_unit(num: int, den: int, rng: RngStream) -> bool:
    # Bernoulli(exp(-num/den)) for 0 <= num/den <= 1
    k = 1
    while _bernoulli(num, den * k, rng):
        k += 1
    return k % 2 == 1


def bernoulli_exp(num: int, den: int, rng: RngStream) -> bool:
    """Exact Bernoulli(exp(-num/den)) draw for a non-negative rational."""
    whole, num = divmod(num, den)
    for _ in range(whole):
        if not _bernoulli_exp_unit(1, 1, rng):
            return False
    return _bernoulli_exp_unit(num, den, rng)


def _discrete_laplace(t: int, rng: RngStream) -> int:
    # Pr[Y=y] proportional to exp(-|y|/t)
    for _ in range(MAX_REJECTIONS):
        u = rng.randbelow(t)
        if not bernoulli_exp(u, t, rng):
            continue
        v = 0
        while bernoulli_exp(1, 1, rng):
            v += 1
        x = u + t * v
        negative = rng.randbelow(2) == 1
        if negative and x == 0:
            continue
        return -x if negative else x
    raise SamplerError("discrete Laplace rejection loop exceeded its guard")


def sample(scale: NoiseScale, rng: RngStream) -> int:
    """Draw one integer with probability proportional to ``exp(-z^2 / (2 sigma_sq))``."""
    s = scale.sigma_sq
    if s == 0:
        return 0
    p, q = s.numerator, s.denominator
    t = math.isqrt(p // q) + 1
    # accept Y with prob exp(-(|Y| - s/t)^2 / (2s)); with s = p/q the exponent is
    # (|Y|*t*q - p)^2 / (2 * p * q * t^2)
    den = 2 * p * q * t * t
    for _ in range(MAX_REJECTIONS):
        y = _discrete_laplace(t, rng)
        diff = abs(y) * t * q - p
        if bernoulli_exp(diff * diff, den, rng):
            return y
    raise SamplerError("discrete Gaussian rejection loop exceeded its guard")


def sample_vector(scale: NoiseScale, m: int, rng: RngStream) -> List[int]:
    """``m`` independent draws from :func:`sample`."""
    if m < 1:
        raise ValueError("m must be at least 1")
    if scale.is_zero:
        return [0] * m
    return [sample(scale, rng) for _ in range(m)]


def tail_bound(t: int, scale: NoiseScale) -> float:
    """Upper bound ``exp(-t^2 / (2 sigma_sq))`` on ``Pr[Z >= t]``."""
    if t < 0:
        raise ValueError("t must be non-negative")
    if t == 0:
        return 1.0
    if scale.is_zero:
        return 0.0
    return math.exp(-(t * t) / (2 * float(scale.sigma_sq)))


def pmf(z: int, scale: NoiseScale, cutoff: int = None) -> float:
    """Probability mass at ``z`` normalized by a truncated series.

    Used as a reference for the sampler; the series runs over ``|j| <= cutoff``
    (default ``20 * sigma + 20``), where the omitted tail is negligible.
    """
    s = float(scale.sigma_sq)
    if cutoff is None:
        cutoff = int(20 * math.sqrt(s)) + 20
    norm = math.fsum(math.exp(-j * j / (2 * s)) for j in range(-cutoff, cutoff + 1))
    return math.exp(-z * z / (2 * s)) / norm
