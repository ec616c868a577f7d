import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from grail_lab.env import (
    Always,
    ConfigError,
    ContextBit,
    SpheresActive,
    WorldConfig,
    all_states,
    apply_outcome,
    decode_key,
    empty_state,
    exp1_world,
    exp2_world,
    parse_goal,
    preconditions_met,
    reset,
    satisfying_state,
    state_key,
)

A, B, C, D, E, F = range(6)


def state(world, context=(), active=()):
    return type(empty_state(world))(
        tuple(context) or (False,) * world.n_context_bits,
        tuple(g in active for g in range(world.n_goals)),
    )


def test_exp1_context_gate():
    w = exp1_world()
    on = state(w, (True,))
    off = state(w, (False,))
    for g in (A, C, E):
        assert preconditions_met(on, g, w) and not preconditions_met(off, g, w)
    for g in (B, D, F):
        assert preconditions_met(off, g, w) and not preconditions_met(on, g, w)


def test_exp1_reach_without_context_does_not_activate():
    w = exp1_world()
    s = state(w, (False,))
    nxt, achieved = apply_outcome(s, A, True, w)
    assert not achieved and nxt == s


def test_exp2_chain():
    w = exp2_world()
    s = empty_state(w)
    s, ok = apply_outcome(s, F, True, w)
    assert not ok and not s.active[F]
    s, ok = apply_outcome(s, C, True, w)
    assert ok and s.active_set() == {C}
    s, ok = apply_outcome(s, F, True, w)
    assert ok and s.active_set() == {C, F}
    s, ok = apply_outcome(s, A, True, w)
    assert ok and s.active_set() == {A, C, F}


def test_exp2_free_goals():
    w = exp2_world()
    for g in (B, D, E, C):
        assert preconditions_met(empty_state(w), g, w)


def test_missed_reach_changes_nothing():
    w = exp2_world()
    s = state(w, active={C})
    assert apply_outcome(s, F, False, w) == (s, False)


def test_achieving_active_goal_keeps_state():
    w = exp2_world()
    s = state(w, active={C})
    nxt, ok = apply_outcome(s, C, True, w)
    assert ok and nxt == s


def test_exp2_state_space_and_orderings():
    w = exp2_world()
    states = all_states(w)
    assert len(states) == 64
    assert len({state_key(s) for s in states}) == 64
    # only the ordering c, f, a activates all three chain spheres
    full = []
    for order in itertools.permutations((C, F, A)):
        s = empty_state(w)
        for g in order:
            s, _ = apply_outcome(s, g, True, w)
        full.append({A, C, F} <= s.active_set())
    assert full.count(True) == 1
    assert full[list(itertools.permutations((C, F, A))).index((C, F, A))]


def test_key_layout():
    w = exp1_world()
    s = state(w, (True,), active={B})
    # context bit 0, sphere b at bit 1 + 1
    assert state_key(s, "full") == 1 | (1 << 2)
    assert state_key(s, "context_only") == 1
    assert state_key(s, "spheres_only") == 1 << 1


@pytest.mark.parametrize("mode", ["full", "context_only", "spheres_only"])
def test_decode_inverts_key(mode):
    w = exp1_world()
    for s in all_states(w, mode):
        assert decode_key(state_key(s, mode), w, mode) == s


@given(st.lists(st.booleans(), min_size=7, max_size=7), st.lists(st.booleans(), min_size=7, max_size=7))
def test_full_key_injective(a, b):
    w = exp1_world()
    sa = state(w, (a[0],), {i for i in range(6) if a[i + 1]})
    sb = state(w, (b[0],), {i for i in range(6) if b[i + 1]})
    assert (state_key(sa) == state_key(sb)) == (sa == sb)


def test_satisfying_state_minimal():
    w = exp2_world()
    assert satisfying_state(A, w).active_set() == {C, F}
    assert satisfying_state(F, w).active_set() == {C}
    assert satisfying_state(C, w).active_set() == frozenset()
    w1 = exp1_world()
    assert satisfying_state(A, w1).context == (True,)
    assert satisfying_state(B, w1).context == (False,)
    for world in (w, w1):
        for g in range(6):
            assert preconditions_met(satisfying_state(g, world), g, world)


def test_satisfying_state_contradiction():
    w = WorldConfig(
        n_goals=2,
        n_context_bits=1,
        preconditions=(ContextBit(0, True), SpheresActive(frozenset({0}))),
    )
    assert preconditions_met(satisfying_state(1, w), 1, w)
    bad = WorldConfig(
        n_goals=3,
        n_context_bits=1,
        preconditions=(ContextBit(0, True), ContextBit(0, False), SpheresActive(frozenset({0, 1}))),
    )
    with pytest.raises(ConfigError):
        satisfying_state(2, bad)


def test_cycle_rejected():
    w = WorldConfig(
        n_goals=2,
        n_context_bits=0,
        preconditions=(SpheresActive(frozenset({1})), SpheresActive(frozenset({0}))),
    )
    with pytest.raises(ConfigError, match="cycle"):
        w.validate()


def test_validation_errors():
    with pytest.raises(ConfigError):
        WorldConfig(n_goals=2, n_context_bits=0, preconditions=(Always(),)).validate()
    with pytest.raises(ConfigError):
        WorldConfig(n_goals=1, n_context_bits=0, preconditions=(ContextBit(0),)).validate()
    with pytest.raises(ConfigError):
        WorldConfig(n_goals=1, n_context_bits=0, preconditions=(SpheresActive(frozenset({0})),)).validate()


def test_world_dict_round_trip():
    for w in (exp1_world(), exp2_world()):
        assert WorldConfig.from_dict(w.to_dict()) == w


def test_goal_letters():
    w = exp2_world()
    assert parse_goal("f", w) == F
    assert WorldConfig.from_dict(
        {"preconditions": [{"type": "always"}, {"type": "spheres", "required": ["a"]}], "n_context_bits": 0}
    ).preconditions[1] == SpheresActive(frozenset({0}))


def test_context_probability():
    w = exp1_world()
    rng = np.random.default_rng(7)
    hits = sum(reset(w, rng).context[0] for _ in range(20000))
    assert abs(hits / 20000 - 0.5) < 0.02


def test_reset_clears_spheres():
    w = exp2_world()
    s = reset(w, np.random.default_rng(0))
    assert s.active_set() == frozenset() and s.context == ()
