"""Winner-count selection, bounded partition enumeration, and quota rounding.

These are the deterministic combinatorial kernels of the protocol: choose
the smallest number of lottery winners K that makes every K-subset of QLANs
able to cover the request, enumerate the feasible quota vectors for a given
winner set, and split a request over concrete winners by largest-remainder
rounding under hard capacity caps.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass

from .errors import ResourceShortageError


@dataclass(frozen=True)
class Allocation:
    """A resolved assignment: sorted winner indices and their quotas."""

    winners: tuple[int, ...]
    quotas: tuple[int, ...]

    def __post_init__(self):
        if len(self.winners) != len(self.quotas):
            raise ValueError("winners and quotas must have equal length")
        if list(self.winners) != sorted(set(self.winners)):
            raise ValueError(f"winners must be strictly increasing, got {self.winners}")
        if any(q < 0 for q in self.quotas):
            raise ValueError(f"quotas must be non-negative, got {self.quotas}")

    @property
    def k_total(self) -> int:
        return sum(self.quotas)

    def quota_vector(self, m: int) -> tuple[int, ...]:
        """Scatter quotas into a length-m vector with zeros for non-winners."""
        full = [0] * m
        for i, q in zip(self.winners, self.quotas):
            full[i] = q
        return tuple(full)


@dataclass(frozen=True)
class PartitionSet:
    """All ways to write k as non-negative parts bounded by per-slot caps.

    ``vectors`` holds each feasible quota vector exactly once, in ascending
    lexicographic order.
    """

    k: int
    caps: tuple[int, ...]
    vectors: tuple[tuple[int, ...], ...]

    def __len__(self) -> int:
        return len(self.vectors)

    def __iter__(self):
        return iter(self.vectors)

    def __contains__(self, vec) -> bool:
        vec = tuple(vec)
        i = bisect_left(self.vectors, vec)
        return i < len(self.vectors) and self.vectors[i] == vec


def _validate_caps(caps) -> tuple[int, ...]:
    caps = tuple(caps)
    if not caps:
        raise ValueError("caps must be non-empty")
    if any(c < 0 or c != int(c) for c in caps):
        raise ValueError(f"caps must be non-negative integers, got {caps}")
    return tuple(int(c) for c in caps)


def _ceil_stable(x: float) -> int:
    """Ceiling that forgives float dust just above an integer.

    (1 + 0.1) * 20 evaluates to 22.000000000000004 in binary floating
    point; a bare ceil would inflate the target by one unit.
    """
    f = math.floor(x)
    if x - f <= 1e-9 * max(1.0, abs(x)):
        return f
    return f + 1


def safe_select_k(k_req: int, caps, beta: float = 0.0) -> int:
    """Smallest K such that every K-subset of QLANs can cover the request.

    The margin beta inflates the coverage target to ceil((1+beta)*k_req)
    when total capacity allows it, and falls back to k_req otherwise.
    Because the minimum over K-subsets of the capacity sum is attained by
    the K smallest caps, K is found by scanning ascending prefix sums.

    Raises ResourceShortageError when sum(caps) < k_req.
    """
    caps = _validate_caps(caps)
    if k_req < 1:
        raise ValueError(f"k_req must be >= 1, got {k_req}")
    if beta < 0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    total = sum(caps)
    if total < k_req:
        raise ResourceShortageError(
            f"total capacity {total} cannot cover k_req={k_req}")
    target = _ceil_stable((1.0 + beta) * k_req)
    if target > total:
        target = k_req
    prefix = 0
    for count, c in enumerate(sorted(caps), start=1):
        prefix += c
        if prefix >= target:
            return count
    raise AssertionError("unreachable: target is at most sum(caps)")


def enum_partitions(k: int, caps) -> PartitionSet:
    """Enumerate every bounded split of k over the given caps.

    Depth-first with both-sided pruning: slot j may take x parts only when
    x <= caps[j] and the remaining slots can still absorb the rest, so every
    visited branch yields at least one vector. Output is lexicographically
    ascending. An empty set (k > sum(caps)) is returned, not raised.
    """
    caps = _validate_caps(caps)
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    n = len(caps)
    suffix = [0] * (n + 1)
    for j in range(n - 1, -1, -1):
        suffix[j] = suffix[j + 1] + caps[j]
    out: list[tuple[int, ...]] = []
    if k > suffix[0]:
        return PartitionSet(k=k, caps=caps, vectors=())
    prefix: list[int] = []

    def rec(j: int, r: int) -> None:
        if j == n:
            out.append(tuple(prefix))
            return
        lo = max(0, r - suffix[j + 1])
        hi = min(caps[j], r)
        for x in range(lo, hi + 1):
            prefix.append(x)
            rec(j + 1, r - x)
            prefix.pop()

    rec(0, k)
    return PartitionSet(k=k, caps=caps, vectors=tuple(out))


def count_partitions(k: int, caps) -> int:
    """Number of bounded splits of k over caps, by dynamic programming.

    Sliding-window convolution over the caps, O(len(caps) * k); used to
    size enumerations before materializing them.
    """
    caps = _validate_caps(caps)
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    dp = [1] + [0] * k
    for c in caps:
        acc = 0
        ndp = [0] * (k + 1)
        for r in range(k + 1):
            acc += dp[r]
            if r - c - 1 >= 0:
                acc -= dp[r - c - 1]
            ndp[r] = acc
        dp = ndp
    return dp[k]


def quota_round(k_req: int, winner_caps) -> tuple[int, ...]:
    """Split k_req over winners proportionally to capacity, in whole pairs.

    Largest-remainder rounding: each winner gets the floor of its ideal
    share k_req * c_j / C, then leftover units are handed out in order of
    descending fractional remainder (ties: larger capacity, then lower
    position). A unit that would push a winner past its cap flows to the
    next candidate in that order. All arithmetic is exact (integer
    remainders k_req * c_j mod C), so equal shares compare as equal.

    Raises ResourceShortageError when sum(winner_caps) < k_req.
    """
    caps = _validate_caps(winner_caps)
    if k_req < 1:
        raise ValueError(f"k_req must be >= 1, got {k_req}")
    c_total = sum(caps)
    if c_total < k_req:
        raise ResourceShortageError(
            f"winner capacity {c_total} cannot cover k_req={k_req}")
    n = len(caps)
    floors = [(k_req * c) // c_total for c in caps]
    rems = [(k_req * c) % c_total for c in caps]
    quotas = list(floors)
    residual = k_req - sum(floors)
    order = sorted(range(n), key=lambda j: (-rems[j], -caps[j], j))
    pos = 0
    while residual > 0:
        j = order[pos % n]
        if quotas[j] < caps[j]:
            quotas[j] += 1
            residual -= 1
        pos += 1
    return tuple(quotas)
