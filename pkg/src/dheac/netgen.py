"""Synthetic network instances: Zipf-skewed QLAN capacities and demand levels.

A network is a row of QLANs indexed from 0, each holding ``caps[i]`` nodes
able to accept one entangled pair apiece. Capacity mass follows a Zipf
profile with exponent ``skew`` (0 gives a uniform split), so one knob moves
the instance from homogeneous to heavily concentrated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class NetworkConfig:
    """An immutable network instance.

    Attributes
    ----------
    m:     number of QLANs, at least 1.
    caps:  per-QLAN node capacities, non-negative integers.
    skew:  Zipf exponent the instance was generated with (0.0 for hand-built).
    total: sum of caps, kept explicit so result tables are self-describing.
    """

    m: int
    caps: tuple[int, ...]
    skew: float = 0.0
    total: int = field(default=-1)

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if len(self.caps) != self.m:
            raise ValueError(f"caps has {len(self.caps)} entries, expected m={self.m}")
        if any(c < 0 or c != int(c) for c in self.caps):
            raise ValueError(f"caps must be non-negative integers, got {self.caps}")
        if self.skew < 0:
            raise ValueError(f"skew must be >= 0, got {self.skew}")
        if self.total == -1:
            object.__setattr__(self, "total", sum(self.caps))
        elif self.total != sum(self.caps):
            raise ValueError(f"total={self.total} does not match sum(caps)={sum(self.caps)}")

    @classmethod
    def from_caps(cls, caps, skew: float = 0.0) -> "NetworkConfig":
        caps = tuple(int(c) for c in caps)
        return cls(m=len(caps), caps=caps, skew=skew)


@dataclass(frozen=True)
class Request:
    """An access request for k_req simultaneous end-to-end pairs.

    ``demand`` is the requested fraction of total capacity when the request
    was derived from one (None for requests stated directly in pairs).
    ``max_attempts`` is the per-pair delivery retry limit carried by the
    request envelope; the delivery model itself reads the limit from
    ModelParams.
    """

    k_req: int
    demand: float | None = None
    max_attempts: int = 3

    def __post_init__(self):
        if self.k_req < 1:
            raise ValueError(f"k_req must be >= 1, got {self.k_req}")
        if self.demand is not None and not 0.0 < self.demand <= 1.0:
            raise ValueError(f"demand must lie in (0, 1], got {self.demand}")
        if self.max_attempts < 1:
            raise ValueError(f"max_attempts must be >= 1, got {self.max_attempts}")

    @classmethod
    def from_demand(cls, net: NetworkConfig, demand: float, max_attempts: int = 3) -> "Request":
        return cls(k_req=demand_to_kreq(demand, net.total), demand=demand,
                   max_attempts=max_attempts)


def generate_network(m: int, skew: float, total: int) -> NetworkConfig:
    """Split ``total`` nodes over ``m`` QLANs with Zipf weight 1/i^skew.

    Each QLAN first receives the floor of its ideal share total*w_i/sum(w);
    leftover units then go one at a time to the bins of largest weight
    (ties resolved toward the lower index). Capacities are therefore
    non-increasing in the QLAN index and sum exactly to ``total``.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if total < 0:
        raise ValueError(f"total must be >= 0, got {total}")
    if skew < 0:
        raise ValueError(f"skew must be >= 0, got {skew}")
    weights = [float(i) ** -skew for i in range(1, m + 1)]
    wsum = math.fsum(weights)
    caps = [math.floor(total * w / wsum) for w in weights]
    residual = total - sum(caps)
    # residual < m in exact arithmetic; the loops below also absorb any
    # off-by-one drift from the float shares without breaking conservation
    order = sorted(range(m), key=lambda i: (-weights[i], i))
    j = 0
    while residual > 0:
        caps[order[j % m]] += 1
        residual -= 1
        j += 1
    j = 0
    while residual < 0:
        i = order[m - 1 - (j % m)]
        if caps[i] > 0:
            caps[i] -= 1
            residual += 1
        j += 1
    return NetworkConfig(m=m, caps=tuple(caps), skew=skew, total=total)


def demand_to_kreq(demand: float, total: int) -> int:
    """Requested pair count for a demand fraction: round half up, floor 1."""
    if not 0.0 < demand <= 1.0:
        raise ValueError(f"demand must lie in (0, 1], got {demand}")
    if total < 1:
        raise ValueError(f"total must be >= 1, got {total}")
    return max(1, math.floor(demand * total + 0.5))
