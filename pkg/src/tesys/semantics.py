"""Run semantics, live-state pruning, deadlock freedom and prefix closure."""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ExplosionLimit, ModeMismatch
from .events import EMPTY
from .system import (DEFAULT_STATE_CAP, DELAY_INSENSITIVE, TesTransitionSystem, explore,
                     path_to)

__all__ = [
    "finite_runs", "live_states", "Verdict", "is_deadlock_free",
    "is_prefix_closed_syntactic", "prefix_closure", "reachable_graph",
]


def finite_runs(T: TesTransitionSystem, depth: int, cap: int = DEFAULT_STATE_CAP) -> frozenset:
    """Label sequences of length at most ``depth`` along runs from the initial state."""
    if depth < 0:
        raise ValueError("depth must be non-negative")
    out = {()}
    layer = {((), T.initial)}
    for _ in range(depth):
        nxt = set()
        for trace, q in layer:
            for label, p in T.successors(q):
                nxt.add((trace + (label,), p))
        if len(nxt) > cap:
            raise ExplosionLimit(cap, "runs")
        out.update(t for t, _ in nxt)
        layer = nxt
        if not layer:
            break
    return frozenset(out)


def reachable_graph(T: TesTransitionSystem, max_states: int = DEFAULT_STATE_CAP) -> dict:
    """Successor map of the whole reachable part; raises if it is not finite within the cap."""
    parents, complete, _ = explore(T, max_states)
    if not complete:
        raise ExplosionLimit(max_states)
    return {q: T.successors(q) for q in parents}


def live_states(T: TesTransitionSystem, bound: int = DEFAULT_STATE_CAP) -> frozenset:
    """Greatest set of reachable states that each have a successor inside the set."""
    graph = reachable_graph(T, bound)
    preds: dict = {q: set() for q in graph}
    outdeg = {}
    for q, succ in graph.items():
        targets = {p for _, p in succ}
        outdeg[q] = len(targets)
        for p in targets:
            preds[p].add(q)
    alive = set(graph)
    work = [q for q, d in outdeg.items() if d == 0]
    while work:
        q = work.pop()
        if q not in alive:
            continue
        alive.discard(q)
        for r in preds[q]:
            if r in alive:
                outdeg[r] -= 1
                if outdeg[r] == 0:
                    work.append(r)
    return frozenset(alive)


@dataclass(frozen=True)
class Verdict:
    """Outcome of an analysis: ``yes``, ``no`` (with witness) or ``unknown``."""

    status: str
    state: object = None
    trace: tuple = ()
    explored: int = 0
    detail: dict = field(default_factory=dict)

    def __bool__(self):
        return self.status == "yes"


def is_deadlock_free(T: TesTransitionSystem, bound: int = DEFAULT_STATE_CAP) -> Verdict:
    """Every finite run extends to an infinite one.

    On a finite reachable graph a state is dead exactly when every path from it
    ends in a state without successors, so the search stops at the first
    reachable sink, which is also the nearest non-live state.
    """
    parents, complete, sink = explore(T, bound, stop=lambda q, succ: not succ)
    if sink is not None:
        return Verdict("no", sink, tuple(path_to(parents, sink)), len(parents))
    if not complete:
        return Verdict("unknown", explored=len(parents))
    return Verdict("yes", explored=len(parents))


def is_prefix_closed_syntactic(T: TesTransitionSystem, bound: int = DEFAULT_STATE_CAP) -> bool:
    """Every reachable state carries an empty-observable self-loop."""
    if T.mode != DELAY_INSENSITIVE:
        return False
    graph = reachable_graph(T, bound)
    return all((EMPTY, q) in set(succ) for q, succ in graph.items())


class PrefixClosure(TesTransitionSystem):
    def __init__(self, T: TesTransitionSystem):
        if T.mode != DELAY_INSENSITIVE:
            raise ModeMismatch("prefix closure is built for delay-insensitive systems")
        super().__init__(T.interface, T.initial, mode=T.mode, name=f"{T.name}*")
        self.inner = T

    def _successors(self, q):
        return (*self.inner.successors(q), (EMPTY, q))


def prefix_closure(T: TesTransitionSystem) -> TesTransitionSystem:
    """``T`` with an empty-observable self-loop added at every state."""
    return PrefixClosure(T)
