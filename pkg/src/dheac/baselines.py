"""Reference schemes the quantum lottery is compared against.

B1 (single-QLAN): serve the whole request from the largest QLAN, possible
only when one QLAN can hold every requested pair. No arbitration cost, one
distribution stage.

B2 (classical arbitration): a controller polls every QLAN over classical
channels, splits the request over all of them by capacity-proportional
rounding, then pairs are distributed. Coordination costs rounds * m * t_ctl
before distribution starts.
"""

from __future__ import annotations

from dataclasses import dataclass

from .analytics import ModelParams, latency_b2, success_b2, throughput
from .errors import ResourceShortageError
from .netgen import NetworkConfig, Request
from .partition import Allocation, quota_round


@dataclass(frozen=True)
class BaselineResult:
    """Outcome of evaluating one baseline on one point.

    ``applicable`` is False when the scheme cannot serve the request at
    all (B1 without a big-enough QLAN); metric fields are then None.
    """

    scheme: str
    applicable: bool
    allocation: Allocation | None
    p_success: float | None
    latency: float | None
    thr: float | None


def b1_evaluate(net: NetworkConfig, req: Request, params: ModelParams) -> BaselineResult:
    """Single-QLAN scheme: all k_req pairs inside the largest QLAN."""
    best = max(range(net.m), key=lambda i: (net.caps[i], -i))
    if net.caps[best] < req.k_req:
        return BaselineResult("B1", False, None, None, None, None)
    alloc = Allocation(winners=(best,), quotas=(req.k_req,))
    p = params.unit_success ** req.k_req
    lat = (params.t_gen
           + params.expected_attempts * params.t_dist * req.k_req
           + params.t_meas)
    return BaselineResult("B1", True, alloc, p, lat, throughput(p, lat))


def b2_evaluate(net: NetworkConfig, req: Request, params: ModelParams) -> BaselineResult:
    """Classical arbitration: proportional split over every QLAN.

    Raises ResourceShortageError when the request exceeds total capacity.
    """
    if net.total < req.k_req:
        raise ResourceShortageError(
            f"total capacity {net.total} cannot cover k_req={req.k_req}")
    full = quota_round(req.k_req, net.caps)
    winners = tuple(i for i, q in enumerate(full) if q > 0)
    quotas = tuple(full[i] for i in winners)
    alloc = Allocation(winners=winners, quotas=quotas)
    p = success_b2(req.k_req, params)
    lat = latency_b2(net.m, max(full), params)
    return BaselineResult("B2", True, alloc, p, lat, throughput(p, lat))
