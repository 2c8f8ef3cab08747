"""Random instance generators and brute-force oracles shared by the test modules.

The oracles here deliberately avoid the library's product, pruning and
search code; they work on plain label sequences and adjacency dicts.
"""
from __future__ import annotations

import itertools
import random
from functools import lru_cache

from tesys.composability import REPRESENTATIVE_TIMES, SharedIdentity, at, kappa_sync
from tesys.events import EMPTY, Event
from tesys.system import ExplicitSystem

POOL = [Event(c) for c in "abcdef"]


def subsets(xs):
    xs = sorted(xs)
    return [frozenset(c) for r in range(len(xs) + 1) for c in itertools.combinations(xs, r)]


def random_system(rng: random.Random, max_states=4, events=None, max_events=3,
                  density=0.35, empty_loops=0.0, name=None) -> ExplicitSystem:
    """Explicit delay-insensitive system over a random (or given) interface."""
    if events is None:
        k = rng.randint(1, max_events)
        events = rng.sample(POOL[:max_events + 1], k)
    E = frozenset(events)
    n = rng.randint(1, max_states)
    states = [f"s{i}" for i in range(n)]
    labels = subsets(E)
    trs = []
    for q in states:
        for label in labels:
            for p in states:
                if rng.random() < density / len(states):
                    trs.append((q, label, p))
        if rng.random() < empty_loops:
            trs.append((q, EMPTY, q))
    return ExplicitSystem(E, states[0], trs, name=name, states=states)


def prefix_closed_system(rng, **kw) -> ExplicitSystem:
    return random_system(rng, empty_loops=1.0, **kw)


def adjacency(T):
    """Reachable part of an explicit system as ``{q: [(label, p), ...]}``, by plain DFS."""
    adj, todo = {}, [T.initial]
    while todo:
        q = todo.pop()
        if q in adj:
            continue
        adj[q] = list(T.table.get(q, ()))
        todo.extend(p for _, p in adj[q])
    return adj


def has_infinite_path(adj, q) -> bool:
    """A path of length |Q| from ``q`` exists iff some cycle is reachable (pigeonhole)."""
    frontier = {q}
    for _ in range(len(adj)):
        frontier = {p for r in frontier for _, p in adj[r]}
        if not frontier:
            return False
    return True


def label_paths(adj, q, depth):
    """All label sequences of length exactly ``depth`` from ``q``, with end states."""
    out = [((), q)]
    for _ in range(depth):
        out = [(seq + (l,), p) for seq, r in out for l, p in adj[r]]
    return out


def traces_upto(adj, q, depth) -> set:
    out, layer = {()}, {((), q)}
    for _ in range(depth):
        layer = {(seq + (l,), p) for seq, r in layer for l, p in adj[r]}
        out |= {seq for seq, _ in layer}
    return out


def composed_traces(T1, T2, depth, base=None) -> set:
    """Brute-force composition of component trace pairs.

    Each side contributes a label sequence from its own trace set. At every
    step both sides must have a next observation (its head); heads stay
    committed until consumed. The composable order of the two heads is
    decided by the decomposition oracle at representative timestamps.
    """
    base = base or SharedIdentity()
    E1, E2 = T1.interface, T2.interface
    L1 = traces_upto(adjacency(T1), T1.initial, depth + 1)
    L2 = traces_upto(adjacency(T2), T2.initial, depth + 1)
    nxt1, nxt2 = _next_map(L1), _next_map(L2)
    t = REPRESENTATIVE_TIMES

    @lru_cache(maxsize=None)
    def ok(l1, l2, order):
        t1, t2 = t[order]
        return kappa_sync(base, E1, E2, at(l1, t1), at(l2, t2))

    out = set()

    @lru_cache(maxsize=None)
    def go(p1, h1, p2, h2, emitted):
        out.add(emitted)
        if len(emitted) == depth:
            return
        heads1 = [h1] if h1 is not None else nxt1.get(p1, ())
        heads2 = [h2] if h2 is not None else nxt2.get(p2, ())
        for a in heads1:
            for b in heads2:
                if ok(a, b, "left"):
                    go(p1 + (a,), None, p2, b, emitted + (a,))
                if ok(a, b, "right"):
                    go(p1, a, p2 + (b,), None, emitted + (b,))
                if ok(a, b, "both"):
                    go(p1 + (a,), None, p2 + (b,), None, emitted + (a | b,))

    go((), None, (), None, ())
    return out


def _next_map(L):
    m = {}
    for seq in L:
        if seq:
            m.setdefault(seq[:-1], set()).add(seq[-1])
    return {k: sorted(v, key=lambda o: sorted(map(str, o))) for k, v in m.items()}
