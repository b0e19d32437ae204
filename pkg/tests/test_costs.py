import math

import pytest

from qbsync.costs import (
    CostModel,
    Scheme,
    channel_accounting,
    detections_per_position,
    list_type_count,
    monte_carlo_efficiency,
    p_success,
)
from qbsync.rng import derive_rng


def test_detection_counts():
    assert [detections_per_position("SingleQudit", m) for m in (3, 4, 8)] == [1, 1, 1]
    assert [detections_per_position("QkdLists", m) for m in (3, 4, 8)] == [3, 4, 9]
    assert [detections_per_position("EntangledState", m) for m in (3, 4, 8)] == [4, 6, 21]


def test_closed_forms():
    assert p_success(CostModel(Scheme.QKD_LISTS, 4, 0.8)) == pytest.approx(0.4096)
    assert p_success(CostModel(Scheme.SINGLE_QUDIT, 4, 0.8)) == pytest.approx(0.8)
    assert p_success(CostModel("QkdLists", 3, 0.9)) == pytest.approx(0.729)


def test_channel_accounting_m4():
    assert channel_accounting("QkdLists", 4) == [("P4-P1", 2), ("P4-P2", 1), ("P4-P3", 1)]
    assert len(channel_accounting("EntangledState", 4)) == 3


def test_bad_model():
    with pytest.raises(ValueError):
        CostModel(Scheme.QKD_LISTS, 4, 1.2)
    with pytest.raises(ValueError):
        CostModel("Teleport", 4, 0.5)
    with pytest.raises(ValueError):
        monte_carlo_efficiency("QkdLists", 4, 0.5, 0, derive_rng(0))


def test_list_types():
    assert list_type_count(3) == (4, 6)
    assert list_type_count(2) == (2, 2)
    assert list_type_count(4) == (8, 24)


@pytest.mark.parametrize("scheme", list(Scheme))
@pytest.mark.parametrize("m", [3, 5])
def test_monte_carlo_within_three_sigma(scheme, m):
    est = monte_carlo_efficiency(scheme, m, 0.8, 10_000, derive_rng(1, m))
    assert abs(est.z) < 3


def test_qkd_falls_with_m_qudit_flat():
    eta = 0.8
    qkd = [p_success(CostModel("QkdLists", m, eta)) for m in range(3, 10)]
    assert all(a > b for a, b in zip(qkd, qkd[1:]))
    assert {p_success(CostModel("SingleQudit", m, eta)) for m in range(2, 10)} == {eta}


def test_extremes():
    est = monte_carlo_efficiency("QkdLists", 4, 1.0, 500, derive_rng(2))
    assert est.rate == 1.0 and est.z == 0.0
    est = monte_carlo_efficiency("SingleQudit", 3, 0.0, 200, derive_rng(3))
    assert est.successes == 0
    assert math.isfinite(est.sigma)
