import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from grail_lab.env import ConfigError
from grail_lab.selectors import GoalSelector, SelectorParams, softmax_probabilities

values_st = st.lists(st.floats(-5, 5, allow_nan=False), min_size=1, max_size=8)


def test_two_arm_softmax():
    p = softmax_probabilities([1.0, 0.0], tau=1.0, epsilon_floor=0.0)
    assert p[0] == pytest.approx(math.e / (math.e + 1))
    assert round(p[0], 4) == 0.7311


def test_sampling_matches_probabilities():
    sel = GoalSelector("c-grail", 4, SelectorParams(tau=0.5, epsilon_floor=0.1))
    row = sel._row(9)
    row[:] = [0.3, 0.1, 0.0, 0.6]
    rng = np.random.default_rng(2)
    n = 100_000
    counts = np.bincount([sel.select(9, rng) for _ in range(n)], minlength=4)
    assert np.abs(counts / n - np.array(sel.probabilities(9))).max() < 0.01


@given(values_st, st.floats(0.01, 5), st.floats(0, 0.99))
def test_probability_floor_and_sum(values, tau, eps):
    p = softmax_probabilities(values, tau, eps)
    assert sum(p) == pytest.approx(1.0)
    assert min(p) >= eps / len(values) - 1e-12


@given(values_st, st.floats(-3, 3, allow_nan=False))
def test_shift_invariance(values, c):
    a = softmax_probabilities(values, 0.3, 0.05)
    b = softmax_probabilities([v + c for v in values], 0.3, 0.05)
    assert a == pytest.approx(b, abs=1e-9)


def test_greedy_tie_break():
    sel = GoalSelector("m-grail", 6)
    assert sel.greedy_goal(0) == 0
    sel._row(0)[:] = [0, 1, 0, 1, 0, 0]
    assert sel.greedy_goal(0) == 1


def test_bandit_ema_and_locality():
    sel = GoalSelector("c-grail", 3, SelectorParams(alpha_v=0.3))
    sel.update(1, 2, 1.0, None)
    sel.update(1, 2, 1.0, None)
    assert sel.values(1)[2] == pytest.approx(1 - 0.7**2, abs=1e-12)
    assert sel.values(0) == [0.0, 0.0, 0.0]


def test_grail_ignores_key():
    sel = GoalSelector("grail", 3)
    sel.update(5, 1, 1.0, None)
    assert sel.values(0) == sel.values(17)


def test_update_kind_guards():
    with pytest.raises(ValueError):
        GoalSelector("m-grail", 2).update_bandit(0, 0, 1.0)
    with pytest.raises(ValueError):
        GoalSelector("c-grail", 2).update_q(0, 0, 1.0, 1)
    with pytest.raises(ConfigError):
        GoalSelector("greedy", 2)


def test_three_state_chain_alpha_one():
    # s0 -> s1 -> s2 -> terminal, reward 1 only on the last step
    sel = GoalSelector("m-grail", 1, SelectorParams(alpha_q=1.0, gamma=0.9))
    for _ in range(5):
        sel.update(0, 0, 0.0, 1)
        sel.update(1, 0, 0.0, 2)
        sel.update(2, 0, 1.0, None)
    assert sel.values(0)[0] == pytest.approx(0.81)


@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 2), st.floats(0, 1), st.integers(-1, 3)), max_size=400))
def test_q_bound(steps):
    params = SelectorParams(alpha_q=0.7, gamma=0.9)
    sel = GoalSelector("m-grail", 3, params)
    for key, goal, r, nxt in steps:
        sel.update(key, goal, r, None if nxt < 0 else nxt)
    for _, _, _, v in sel.rows():
        assert 0.0 <= v <= 1 / (1 - params.gamma) + 1e-9
