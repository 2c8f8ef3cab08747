import random

import pytest
from hypothesis import given, settings, strategies as st

from tesys import (EMPTY, ExplicitSystem, ExplosionLimit, RuntimeDeadlock, SharedIdentity,
                   check_compatible, enabled_joint_transitions, finite_runs, initial_state,
                   is_deadlock_free, observable, product_n, reach, run, runtime_step,
                   validate_trace)
from tesys.composability import SyncKappa
from tesys.product import flatten_state
from tesys.robots import p_battery_out, p_sorted
from tesys.runtime import ScriptedChooser, SeededChooser, SystemState
from tesys.specfile import load_spec
from tesys.system import explore

from support import prefix_closed_system, random_system

SI = SharedIdentity()
K = SyncKappa(SI)
seeds = st.integers(0, 10 ** 9)


def loop(name, *events):
    o = observable(*events)
    return ExplicitSystem(o, name, [(name, o, name)], name=name)


def test_single_component_keeps_its_transitions():
    T = random_system(random.Random(3), density=0.8)
    jts = enabled_joint_transitions(initial_state([T]), SI)
    assert {(j.label, j.nexts[0]) for j in jts} == set(T.successors(T.initial))


def test_triple_has_nothing_enabled():
    comps = load_spec("demo:triple").components
    assert enabled_joint_transitions(initial_state(comps), SI) == ()
    with pytest.raises(RuntimeDeadlock):
        runtime_step(initial_state(comps), SI, SeededChooser(0))


def test_disjoint_components_give_three_joint_transitions():
    s = initial_state([loop("p", "a"), loop("q", "b")])
    jts = enabled_joint_transitions(s, SI)
    assert sorted(j.moves for j in jts) == sorted([
        ((True, "p"), (False, None)), ((False, None), (True, "q")), ((True, "p"), (True, "q"))])
    assert {j.label for j in jts} == {observable("a"), observable("b"), observable("a", "b")}


def test_single_enabled_transition_ignores_seed():
    s = initial_state([loop("p", "a")])
    picks = {runtime_step(s, SI, SeededChooser(seed))[0] for seed in range(20)}
    assert len(picks) == 1


def test_run_basics():
    comps = load_spec("demo:trolls").components
    s0 = initial_state(comps)
    assert run(s0, SI, 0, seed=5).trace == ()
    a, b = run(s0, SI, 15, seed=5), run(s0, SI, 15, seed=5)
    assert a.trace == b.trace and a.final == b.final
    assert [o.time for o in a.trace] == list(range(1, 16))
    assert a.final.step == 15
    validate_trace(a.trace)
    with pytest.raises(ValueError):
        run(s0, SI, -1)


def test_fold_limit():
    s = initial_state([loop("p", "a"), loop("q", "b"), loop("r", "c")])
    with pytest.raises(ExplosionLimit):
        enabled_joint_transitions(s, SI, limit=2)


def _check_joint_transition(s, jt):
    assert any(n is not None for n in jt.nexts)
    union = frozenset()
    for (T, q), n in zip(zip(s.systems, s.states), jt.nexts):
        own = jt.label & T.interface
        if n is None:
            assert not own
        else:
            assert (own, n) in T.successors(q)
            union |= own
    assert union == jt.label


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_runs_replay_in_eager_product(seed):
    rng = random.Random(seed)
    comps = [random_system(rng, density=0.7) for _ in range(3)]
    P = product_n(comps, K)
    res = run(initial_state(comps), SI, 5, seed=seed)
    validate_trace(res.trace)
    assert tuple(o.observable for o in res.trace) in finite_runs(P, 5)


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_enabled_sets_match_eager_product(seed):
    rng = random.Random(seed)
    comps = [random_system(rng, density=0.7) for _ in range(3)]
    P = product_n(comps, K)
    parents, complete, _ = explore(P, 5000)
    assert complete
    for q in parents:
        s = SystemState(tuple(comps), flatten_state(q, 3))
        jts = enabled_joint_transitions(s, SI)
        for jt in jts:
            _check_joint_transition(s, jt)
        lazy = {(j.label, tuple(o if n is None else n for o, n in zip(s.states, j.nexts))) for j in jts}
        assert lazy == {(l, flatten_state(p, 3)) for l, p in P.successors(q)}


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_reach_visits_eager_reachable_states(seed):
    rng = random.Random(seed)
    comps = [random_system(rng, density=0.6) for _ in range(3)]
    parents, complete, _ = explore(product_n(comps, K), 5000)
    assert reach(initial_state(comps), SI, lambda s: False).visited == len(parents)


def test_reach_visits_eager_reachable_states_case_study():
    spec = load_spec("demo:trolls-protocols")
    parents, complete, _ = explore(product_n(spec.components, SyncKappa(spec.base)), 10 ** 5)
    assert complete
    assert reach(initial_state(spec.components), spec.base, lambda s: False).visited == len(parents)


def test_reach_examples():
    spec = load_spec("demo:trolls-protocols")
    s0 = initial_state(spec.components)
    hit = reach(s0, spec.base, lambda s: True)
    assert hit.found and hit.trace == ()
    found = reach(s0, spec.base, p_sorted)
    assert found.found and p_sorted(found.state)
    # replaying the witness by labels reaches a sorted state
    s = s0
    for obs in found.witness:
        s = next(s.advance(j) for j in enabled_joint_transitions(s, spec.base) if j.label == obs.observable)
    assert p_sorted(s) and len(found.witness) > 0
    with pytest.raises(ExplosionLimit):
        reach(s0, spec.base, p_sorted, max_states=3)


def test_battery_out_unreachable_with_protocols():
    spec = load_spec("demo:trolls-protocols-batteries")
    res = reach(initial_state(spec.components), spec.base, p_battery_out)
    assert not res.found and res.witness is None


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_compatible_deadlock_free_runs_never_stop(seed):
    rng = random.Random(seed)
    T1, T2 = prefix_closed_system(rng), prefix_closed_system(rng)
    assert check_compatible(T1, T2, K).compatible and is_deadlock_free(T1)
    res = run(initial_state([T1, T2]), SI, 25, seed=seed)
    assert not res.deadlocked and len(res.trace) == 25


def test_scripted_chooser_reaches_strategies_deadlock():
    spec = load_spec("demo:strategies")
    comps = spec.components
    verdict = is_deadlock_free(product_n(comps, SyncKappa(spec.base)))
    assert verdict.status == "no"
    script = [lambda jt, l=l: jt.label == l for l in verdict.trace]
    res = run(initial_state(comps), spec.base, len(script) + 5,
              chooser=ScriptedChooser(script))
    assert res.deadlocked and len(res.trace) == len(script)
    assert res.final.states == flatten_state(verdict.state, len(comps))
    with pytest.raises(RuntimeDeadlock):
        runtime_step(res.final, spec.base, SeededChooser(0))


def test_scripted_chooser_rejects_impossible_entry():
    s = initial_state([loop("p", "a")])
    with pytest.raises(LookupError):
        runtime_step(s, SI, ScriptedChooser([lambda jt: EMPTY == jt.label]))
