import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from dheac import (
    ModelParams,
    NetworkConfig,
    Request,
    ResourceShortageError,
    b1_evaluate,
    b2_evaluate,
    enum_partitions,
    generate_network,
    quota_round,
)

PARAMS = ModelParams(q=0.05)


def test_b1_uses_the_largest_qlan():
    net = NetworkConfig.from_caps((4, 9, 9, 2))
    res = b1_evaluate(net, Request(8), PARAMS)
    assert res.applicable
    # ties break toward the lower index
    assert res.allocation.winners == (1,)
    assert res.allocation.quotas == (8,)
    assert res.p_success == pytest.approx(PARAMS.unit_success ** 8, rel=1e-12)


def test_b1_inapplicable_when_no_qlan_is_big_enough():
    net = NetworkConfig.from_caps((5, 5, 5))
    res = b1_evaluate(net, Request(6), PARAMS)
    assert not res.applicable
    assert res.p_success is None and res.latency is None


def test_b1_has_no_arbitration_cost():
    net = NetworkConfig.from_caps((10, 2))
    res = b1_evaluate(net, Request(4), ModelParams(q=0.0))
    # t_gen + 4 * t_dist + t_meas only
    assert res.latency == pytest.approx(3.2)


def test_b2_allocation_matches_quota_round():
    net = NetworkConfig.from_caps((20, 10, 6, 4))
    res = b2_evaluate(net, Request(7), PARAMS)
    full = quota_round(7, net.caps)
    assert res.allocation.winners == (0, 1, 2, 3)
    assert res.allocation.quotas == full == (3, 2, 1, 1)
    assert res.thr == pytest.approx(res.p_success / res.latency, rel=1e-12)


def test_b2_drops_zero_quota_qlans_from_winners():
    net = NetworkConfig.from_caps((50, 1))
    res = b2_evaluate(net, Request(2), PARAMS)
    assert res.allocation.winners == (0,)
    assert res.allocation.quotas == (2,)


def test_b2_shortage():
    net = NetworkConfig.from_caps((2, 2))
    with pytest.raises(ResourceShortageError):
        b2_evaluate(net, Request(5), PARAMS)


def test_b2_lossfree_latency():
    net = NetworkConfig.from_caps((3, 3, 3, 3))
    res = b2_evaluate(net, Request(4), ModelParams(q=0.0))
    # 4 * 0.5 control + (2 + 0.05 * 1 + 1) distribution, k_max = 1
    assert res.latency == pytest.approx(5.05)


@settings(max_examples=100)
@given(m=st.integers(1, 12), skew=st.floats(0.0, 2.0), data=st.data())
def test_b2_split_is_feasible(m, skew, data):
    net = generate_network(m, skew, 10 * m)
    k_req = data.draw(st.integers(1, net.total))
    res = b2_evaluate(net, Request(k_req), PARAMS)
    full = [0] * m
    for i, quota in zip(res.allocation.winners, res.allocation.quotas):
        full[i] = quota
    assert sum(full) == k_req
    assert all(0 <= q <= c for q, c in zip(full, net.caps))
    assert all(q >= 1 for q in res.allocation.quotas)


def test_b2_split_lies_in_the_enumerated_feasible_set():
    net = NetworkConfig.from_caps((5, 4, 3))
    res = b2_evaluate(net, Request(6), PARAMS)
    full = [0, 0, 0]
    for i, quota in zip(res.allocation.winners, res.allocation.quotas):
        full[i] = quota
    assert tuple(full) in enum_partitions(6, net.caps)


def test_baseline_success_is_mode_free():
    net = NetworkConfig.from_caps((10, 10))
    res1 = b2_evaluate(net, Request(5), PARAMS)
    assert res1.p_success == pytest.approx(PARAMS.unit_success ** 5, rel=1e-12)
