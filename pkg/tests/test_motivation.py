import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from grail_lab.env import ConfigError
from grail_lab.motivation import CompetenceTracker, TrackerParams

RAW = TrackerParams(alpha_fast=0.2, alpha_slow=0.05, clamp_negative=False, debias=False)


def closed_form(outcomes, alpha):
    """EMA from zero as an explicit weighted sum."""
    n = len(outcomes)
    return math.fsum(alpha * (1 - alpha) ** (n - 1 - k) * o for k, o in enumerate(outcomes))


def test_constant_stream():
    t = CompetenceTracker(RAW)
    for n in range(1, 101):
        t.record(0, 0, True)
        fast, slow = t.estimates(0, 0)
        assert fast == pytest.approx(1 - 0.8**n, abs=1e-12)
        assert slow == pytest.approx(1 - 0.95**n, abs=1e-12)
    assert round(t.competence(0, 0), 4) == 0.9941


def test_alternating_band():
    t = CompetenceTracker(RAW)
    for i in range(2000):
        t.record(0, 0, i % 2 == 0)
    fast, slow = t.estimates(0, 0)
    # last record was a failure: lower point of the two-cycle (1 - a) / (2 - a)
    assert fast == pytest.approx(0.8 / 1.8, abs=1e-12)
    assert slow == pytest.approx(0.95 / 1.95, abs=1e-12)
    for a, v in ((0.2, fast), (0.05, slow)):
        assert abs(v - 0.5) <= a / 2


def test_learning_curve_peak():
    t = CompetenceTracker(RAW)
    rewards = []
    for _ in range(300):
        t.record(0, 0, True)
        rewards.append(t.intrinsic_reward(0, 0))
    af, asl = 0.2, 0.05
    analytic = [(1 - asl) ** n - (1 - af) ** n for n in range(1, 301)]
    assert rewards == pytest.approx(analytic, abs=1e-12)
    # continuous maximiser of (1-as)^n - (1-af)^n
    n_star = math.log(math.log(1 - af) / math.log(1 - asl)) / math.log((1 - asl) / (1 - af))
    peak = int(np.argmax(rewards)) + 1
    assert peak in (math.floor(n_star), math.ceil(n_star))
    assert rewards[-1] < 1e-6
    assert all(r >= 0 for r in rewards)


@given(st.lists(st.booleans(), min_size=1, max_size=2000))
def test_ema_exact(outcomes):
    t = CompetenceTracker(RAW)
    for o in outcomes:
        t.record(3, 1, o)
    fast, slow = t.estimates(3, 1)
    assert abs(fast - closed_form(outcomes, 0.2)) <= 1e-12
    assert abs(slow - closed_form(outcomes, 0.05)) <= 1e-12


def test_clamp():
    t = CompetenceTracker(TrackerParams(clamp_negative=True))
    for _ in range(50):
        t.record(0, 0, True)
    for _ in range(3):
        t.record(0, 0, False)
    assert t.intrinsic_reward(0, 0) == 0.0
    u = CompetenceTracker(RAW)
    for _ in range(50):
        u.record(0, 0, True)
    for _ in range(3):
        u.record(0, 0, False)
    assert u.intrinsic_reward(0, 0) < 0


def test_debias_reads_observed_mean_early():
    t = CompetenceTracker(TrackerParams(alpha_fast=0.2, alpha_slow=0.05, debias=True, clamp_negative=False))
    t.record(0, 0, True)
    assert t.estimates(0, 0) == pytest.approx((1.0, 1.0))
    assert t.intrinsic_reward(0, 0) == pytest.approx(0.0)
    # raw table is untouched by the correction
    assert t.table[(0, 0)][:2] == pytest.approx([0.2, 0.05])


def test_key_locality():
    t = CompetenceTracker(RAW)
    t.record(1, 2, True)
    assert t.estimates(0, 2) == (0.0, 0.0)
    assert t.estimates(1, 3) == (0.0, 0.0)
    assert t.count(1, 2) == 1 and t.count(0, 2) == 0


def test_dump_round_trips():
    import csv
    import io

    t = CompetenceTracker(RAW)
    for i in range(7):
        t.record(i % 3, i % 2, i % 4 == 0)
    buf = io.StringIO()
    t.dump_csv(buf)
    rows = list(csv.reader(io.StringIO(buf.getvalue())))
    assert rows[0] == ["key", "goal", "c_fast", "c_slow"]
    for (key, goal, cf, cs), row in zip(t.rows(), rows[1:]):
        assert [int(row[0]), int(row[1]), float(row[2]), float(row[3])] == [key, goal, cf, cs]


def test_params_validate():
    with pytest.raises(ConfigError):
        TrackerParams(alpha_fast=0.05, alpha_slow=0.2).validate()
