"""Winner-count selection, bounded splits and quota rounding.

Brute-force cross checks over the full stated domains live in
test_acceptance.py; these are targeted cases plus structural properties.
"""

import itertools
import math

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from dheac import (
    ResourceShortageError,
    count_partitions,
    enum_partitions,
    quota_round,
    safe_select_k,
)

caps_lists = st.lists(st.integers(1, 30), min_size=1, max_size=10)


def test_symmetric_network_needs_three_winners():
    # target ceil(1.1 * 20) = 22; two bins cover 20, three cover 30
    assert safe_select_k(20, (10, 10, 10, 10), beta=0.1) == 3
    assert safe_select_k(20, (10, 10, 10, 10), beta=0.0) == 2


def test_worst_case_subset_drives_k():
    # every K-subset must cover the target, so the K smallest caps decide
    assert safe_select_k(3, (100, 1, 1, 1), beta=0.1) == 4
    assert safe_select_k(100, (100, 1, 1, 1), beta=0.0) == 4


def test_inflated_target_falls_back_when_infeasible():
    # ceil(1.1 * 5) = 6 exceeds the 5 units available; covering k_req
    # itself still needs both bins
    assert safe_select_k(5, (3, 2), beta=0.1) == 2


def test_inflation_target_is_exact_at_float_dust():
    # 1.1 * 50 evaluates to 55.000000000000007; the target must stay 55
    assert safe_select_k(50, (7, 8, 8, 8, 8, 8, 8, 8), beta=0.1) == 7


def test_shortage_raises():
    with pytest.raises(ResourceShortageError):
        safe_select_k(5, (2, 2), beta=0.0)


def test_rejects_bad_inputs():
    with pytest.raises(ValueError):
        safe_select_k(0, (3, 3))
    with pytest.raises(ValueError):
        safe_select_k(2, (3, 3), beta=-0.1)
    with pytest.raises(ValueError):
        safe_select_k(2, (3, -3))
    with pytest.raises(ValueError):
        safe_select_k(2, ())


@given(caps=caps_lists, beta=st.sampled_from([0.0, 0.1, 0.25]),
       data=st.data())
def test_select_k_permutation_invariant(caps, beta, data):
    k_req = data.draw(st.integers(1, sum(caps)))
    perm = data.draw(st.permutations(caps))
    assert safe_select_k(k_req, caps, beta) == safe_select_k(k_req, perm, beta)


@given(caps=caps_lists, zeros=st.integers(1, 5), data=st.data())
def test_empty_bins_shift_k_exactly(caps, zeros, data):
    """A zero-capacity QLAN is always part of some worst-case subset, so
    each one added raises the winner count by exactly one."""
    k_req = data.draw(st.integers(1, sum(caps)))
    base = safe_select_k(k_req, caps, beta=0.1)
    padded = list(caps) + [0] * zeros
    assert safe_select_k(k_req, padded, beta=0.1) == base + zeros


@given(caps=caps_lists, data=st.data())
def test_select_k_is_minimal(caps, data):
    k_req = data.draw(st.integers(1, sum(caps)))
    K = safe_select_k(k_req, caps, beta=0.0)
    ordered = sorted(caps)
    assert sum(ordered[:K]) >= k_req
    if K > 1:
        assert sum(ordered[:K - 1]) < k_req


def test_enum_small_cases():
    assert list(enum_partitions(4, (3, 3))) == [(1, 3), (2, 2), (3, 1)]
    assert list(enum_partitions(2, (3, 3))) == [(0, 2), (1, 1), (2, 0)]
    assert list(enum_partitions(0, (3, 3))) == [(0, 0)]
    assert list(enum_partitions(7, (3, 3))) == []


def test_enum_is_lexicographic():
    vecs = list(enum_partitions(6, (4, 4, 4)))
    assert vecs == sorted(vecs)


def test_partition_set_membership():
    omega = enum_partitions(4, (3, 3, 3))
    assert (1, 0, 3) in omega
    assert (4, 0, 0) not in omega
    assert (1, 1, 1) not in omega
    assert len(omega) == count_partitions(4, (3, 3, 3))


@settings(max_examples=150)
@given(k=st.integers(0, 15),
       caps=st.lists(st.integers(0, 6), min_size=1, max_size=4))
def test_enum_matches_product_filter(k, caps):
    got = list(enum_partitions(k, caps))
    want = [v for v in itertools.product(*(range(c + 1) for c in caps))
            if sum(v) == k]
    assert got == want
    assert count_partitions(k, caps) == len(want)


def test_count_unbounded_reduces_to_stars_and_bars():
    # caps >= k never bind, so the count is C(k + K - 1, K - 1)
    for k, K in [(5, 3), (7, 2), (10, 4)]:
        assert count_partitions(k, (k,) * K) == math.comb(k + K - 1, K - 1)


def test_count_frozen_instance():
    assert count_partitions(12, (13, 6, 4, 3, 2, 2)) == 1147


def test_quota_even_split():
    assert quota_round(20, (10, 10, 10, 10)) == (5, 5, 5, 5)


def test_quota_remainder_goes_to_front_on_ties():
    # all remainders 0.5; equal capacity, so lower positions win
    assert quota_round(22, (10, 10, 10, 10)) == (6, 6, 5, 5)
    # remainders 0.5, 0.75, 0.75; the two capacity-2 bins tie and both
    # precede the capacity-4 bin
    assert quota_round(3, (4, 2, 2)) == (1, 1, 1)


def test_quota_skewed_instance():
    assert quota_round(7, (20, 10, 6, 4)) == (3, 2, 1, 1)


def test_quota_exhausts_network():
    caps = (5, 3, 2)
    assert quota_round(10, caps) == caps


def test_quota_rejects_overdemand():
    with pytest.raises(ResourceShortageError):
        quota_round(11, (5, 3, 2))


@given(caps=caps_lists, data=st.data())
def test_quota_conservation_and_bounds(caps, data):
    k = data.draw(st.integers(1, sum(caps)))
    quotas = quota_round(k, caps)
    assert sum(quotas) == k
    assert all(0 <= q <= c for q, c in zip(quotas, caps))


@given(caps=caps_lists, factor=st.integers(2, 9), data=st.data())
def test_quota_scale_invariant(caps, factor, data):
    """Proportional shares, and therefore the rounding, depend only on
    capacity ratios."""
    k = data.draw(st.integers(1, sum(caps)))
    scaled = [c * factor for c in caps]
    assert quota_round(k, scaled) == quota_round(k, caps)
