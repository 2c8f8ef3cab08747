"""Step-wise runtime composition of initialised TES transition systems.

Instead of building the product eagerly, the engine computes, at each
system state, the one-step product of all components' outgoing transitions
by folding them pairwise, then commits one composable joint transition.
Timestamps are a logical clock: the n-th committed step happens at time n.
"""
from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from typing import Callable, Sequence

from .composability import ComposabilityBase, SyncKappa
from .errors import ExplosionLimit, RuntimeDeadlock
from .events import Observation, Trace, term_key
from .product import TransitionSet, combine
from .system import DEFAULT_STATE_CAP, TesTransitionSystem

__all__ = [
    "SystemState", "JointTransition", "enabled_joint_transitions", "runtime_step",
    "run", "reach", "RunResult", "ReachResult", "SeededChooser", "ScriptedChooser",
    "initial_state",
]

DEFAULT_FOLD_LIMIT = 10**6


@dataclass(frozen=True)
class SystemState:
    """Components with their current states, plus the logical clock.

    Component states must not be ``None``.
    """

    systems: tuple
    states: tuple
    step: int = 0

    def __post_init__(self):
        if not self.systems or len(self.systems) != len(self.states):
            raise ValueError("a system state needs one state per component")

    def advance(self, jt: "JointTransition") -> "SystemState":
        states = tuple(q if n is None else n for q, n in zip(self.states, jt.nexts))
        return SystemState(self.systems, states, self.step + 1)

    def component(self, i):
        return self.systems[i], self.states[i]


def initial_state(systems: Sequence[TesTransitionSystem]) -> SystemState:
    systems = tuple(systems)
    return SystemState(systems, tuple(T.initial for T in systems))


@dataclass(frozen=True)
class JointTransition:
    """A composite step: its label and, per component, the next state or ``None`` if idle."""

    label: frozenset
    nexts: tuple

    @property
    def moves(self):
        return tuple((n is not None, n) for n in self.nexts)

    def sort_key(self):
        return (term_key(self.label), tuple(term_key(n) for n in self.nexts))


def _kappa(base_or_kappa):
    if isinstance(base_or_kappa, ComposabilityBase):
        return SyncKappa(base_or_kappa)
    return base_or_kappa


# Tags complete enabled sets in a shared cache; prefix entries are plain state tuples.
_FULL = object()


def _fold(systems, states, kappa, limit, indexed=True, cache=None):
    """Pairwise one-step product in component order.

    ``cache`` memoises the partial products of every proper prefix, keyed
    by the prefix's component states; searches revisit prefixes often.
    """
    n = len(systems)
    acc = None
    start = 1
    if cache is not None:
        for k in range(n - 1, 0, -1):
            acc = cache.get(states[:k])
            if acc is not None:
                start = k
                break
    if acc is None:
        acc = [(label, (p,)) for label, p in systems[0].successors(states[0])]
        if cache is not None and n > 1:
            cache[states[:1]] = acc
    E_acc = frozenset().union(*(T.interface for T in systems[:start]))
    for i in range(start, n):
        if not acc:
            return []
        T, q = systems[i], states[i]
        idle = (None,) * i
        new = {}
        for label, pl, pr in combine(E_acc, acc, T.interface, TransitionSet(T, q), kappa,
                                     T.mode, indexed):
            new[(label, (idle if pl is None else pl) + (pr,))] = None
            if len(new) > limit:
                raise ExplosionLimit(limit, "joint transitions")
        acc = list(new)
        E_acc = E_acc | T.interface
        if cache is not None and i < n - 1:
            cache[states[:i + 1]] = acc
    return acc


def enabled_joint_transitions(s: SystemState, base, limit: int = DEFAULT_FOLD_LIMIT,
                              indexed: bool = True, cache: dict | None = None) -> tuple:
    """All composable joint transitions at ``s``, in canonical order.

    ``base`` is a composability base (its synchronous relation is used) or
    any relation on observations callable as ``kappa(E1, E2, o1, o2)``.
    ``cache`` may be shared between calls on the same components and base.
    """
    key = (_FULL, s.states)
    if cache is not None and key in cache:
        return cache[key]
    acc = _fold(s.systems, s.states, _kappa(base), limit, indexed, cache)
    jts = [JointTransition(label, nexts) for label, nexts in acc]
    jts.sort(key=JointTransition.sort_key)
    out = tuple(jts)
    if cache is not None:
        cache[key] = out
    return out


class SeededChooser:
    """Uniform choice driven by a seeded generator."""

    def __init__(self, seed=None):
        self.rng = random.Random(seed)

    def __call__(self, enabled: Sequence[JointTransition], state: SystemState) -> JointTransition:
        return enabled[self.rng.randrange(len(enabled))]


class ScriptedChooser:
    """Pick, at each step, the first enabled transition satisfying the next script entry.

    Script entries are predicates on joint transitions; once the script is
    exhausted the fallback chooser (default: first enabled) takes over.
    """

    def __init__(self, script: Sequence[Callable], fallback=None):
        self.script = list(script)
        self.pos = 0
        self.fallback = fallback

    def __call__(self, enabled, state):
        if self.pos < len(self.script):
            pred = self.script[self.pos]
            self.pos += 1
            for jt in enabled:
                if pred(jt):
                    return jt
            raise LookupError(f"script entry {self.pos - 1} matches no enabled transition")
        if self.fallback is not None:
            return self.fallback(enabled, state)
        return enabled[0]


def runtime_step(s: SystemState, base, chooser, cache: dict | None = None) -> tuple:
    enabled = enabled_joint_transitions(s, base, cache=cache)
    if not enabled:
        raise RuntimeDeadlock(s)
    jt = chooser(enabled, s)
    return jt, s.advance(jt)


@dataclass(frozen=True)
class RunResult:
    trace: Trace
    final: SystemState
    deadlocked: bool
    transitions: tuple = ()


def run(s0: SystemState, base, steps: int, seed=None, chooser=None,
        cache: dict | None = None) -> RunResult:
    """Commit up to ``steps`` joint transitions; a deadlock ends the run early.

    Pass the same ``cache`` dict to many runs over one system to reuse
    one-step products.
    """
    if steps < 0:
        raise ValueError("steps must be non-negative")
    chooser = chooser or SeededChooser(seed)
    cache = {} if cache is None else cache
    s = s0
    obs, jts = [], []
    for _ in range(steps):
        try:
            jt, s = runtime_step(s, base, chooser, cache)
        except RuntimeDeadlock:
            return RunResult(Trace(obs), s, True, tuple(jts))
        obs.append(Observation(jt.label, s.step))
        jts.append(jt)
    return RunResult(Trace(obs), s, False, tuple(jts))


@dataclass(frozen=True)
class ReachResult:
    found: bool
    trace: Trace | None
    visited: int
    state: SystemState | None = None

    @property
    def witness(self):
        return self.trace if self.found else None


def _witness(parents, states, extra=()):
    labels = list(extra)
    q = states
    while parents[q] is not None:
        q, label = parents[q]
        labels.append(label)
    labels.reverse()
    return Trace(Observation(l, i + 1) for i, l in enumerate(labels))


def reach(s0: SystemState, base, predicate: Callable[[SystemState], bool] | None,
          max_states: int = DEFAULT_STATE_CAP,
          on_label: Callable[[frozenset], bool] | None = None) -> ReachResult:
    """Breadth-first search for a state satisfying ``predicate``.

    States are identified by their component-state tuple; the logical clock
    is not part of the visited set. The witness is a shortest trace. With
    ``on_label`` the search also stops at the first joint transition whose
    label satisfies it; the witness then ends with that transition.
    """
    if max_states <= 0:
        raise ValueError("max_states must be positive")
    kappa = _kappa(base)
    systems = s0.systems
    parents = {s0.states: None}
    queue = deque([s0.states])
    cache: dict = {}
    while queue:
        states = queue.popleft()
        if predicate is not None and predicate(SystemState(systems, states, 0)):
            trace = _witness(parents, states)
            return ReachResult(True, trace, len(parents), SystemState(systems, states, len(trace)))
        for label, nexts in _fold(systems, states, kappa, DEFAULT_FOLD_LIMIT, cache=cache):
            nxt = tuple(q if n is None else n for q, n in zip(states, nexts))
            if on_label is not None and on_label(label):
                trace = _witness(parents, states, [label])
                return ReachResult(True, trace, len(parents),
                                   SystemState(systems, nxt, len(trace)))
            if nxt not in parents:
                if len(parents) >= max_states:
                    raise ExplosionLimit(max_states)
                parents[nxt] = (states, label)
                queue.append(nxt)
    return ReachResult(False, None, len(parents))
