import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sinefv.coeffs import (
    coefficient_table,
    compute_q_coefficients,
    compute_s_coefficients,
)

# frozen from direct evaluation of the closed forms at delta = 0.5
S_HALF = (0.7071067811865476, -0.1894686909815062, -0.16124413151244055)
Q_HALF = (-0.7071067811865476, 0.8965754721680538, -0.028224559469065658)


def test_s_values_at_half():
    s = compute_s_coefficients(0.5, 2)
    assert s == pytest.approx(S_HALF, abs=1e-14)
    # re-derive from scratch as the oracle
    assert s[0] == 0.5**0.5
    assert s[1] == 1.5**0.5 - 2 * 0.5**0.5
    assert s[2] == 2.5**0.5 - 2 * 1.5**0.5 + 0.5**0.5


def test_q_values_at_half():
    q = compute_q_coefficients(0.5, 2)
    assert q == pytest.approx(Q_HALF, abs=1e-14)


def test_limit_order_to_one():
    # at delta = 1 the closed forms give s = [1/2, 1/2, 0, 0, ...]
    s = compute_s_coefficients(1.0 - 1e-9, 8)
    assert s[0] == pytest.approx(0.5, abs=1e-7)
    assert s[1] == pytest.approx(0.5, abs=1e-7)
    assert np.abs(s[2:]).max() < 1e-7


@pytest.mark.parametrize("order", [-0.5, 0.0, 1.0, 1.5])
def test_order_outside_open_interval_rejected(order):
    with pytest.raises(ValueError):
        compute_s_coefficients(order, 4)
    with pytest.raises(ValueError):
        compute_q_coefficients(order, 4)


def test_small_n_rejected():
    with pytest.raises(ValueError):
        compute_s_coefficients(0.5, 1)


def test_partial_sums_telescope_to_minus_s():
    # sum_{k=0}^{m} q_k = -s_m exactly (pure telescoping, no cancellation)
    table = coefficient_table(0.37, 200)
    np.testing.assert_allclose(np.cumsum(table.q), -table.s, rtol=0, atol=1e-15)


def test_total_sum_decreases_toward_zero():
    totals = [abs(compute_q_coefficients(0.5, n).sum()) for n in (100, 1000, 10000)]
    assert totals[0] > totals[1] > totals[2]
    assert totals[2] < 1e-5


@pytest.mark.parametrize("order", [0.1, 0.5, 0.9])
def test_tail_monotonicity_n5(order):
    q = compute_q_coefficients(order, 5)
    assert q[0] + q[2] < q[3] < q[4] < q[5]


def test_reconstruct_s_from_q():
    table = coefficient_table(0.73, 300)
    s = np.empty_like(table.s)
    s[0] = -table.q[0]
    for k in range(1, len(s)):
        s[k] = s[k - 1] - table.q[k]
    np.testing.assert_allclose(s, table.s, rtol=1e-14)


@settings(max_examples=150, deadline=None)
@given(
    order=st.floats(min_value=1e-3, max_value=1.0 - 1e-3),
    n=st.integers(min_value=2, max_value=512),
)
def test_structure_invariants(order, n):
    coefficient_table(order, n).validate()


def test_table_is_cached_and_read_only():
    a = coefficient_table(0.5, 16)
    b = coefficient_table(0.5, 16)
    assert a is b
    with pytest.raises(ValueError):
        a.q[0] = 0.0
