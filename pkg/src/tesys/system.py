"""TES transition systems: explicit finite ones and generator-backed ones."""
from __future__ import annotations

from collections import deque
from fractions import Fraction
from typing import Callable, Iterable

from .errors import ExplosionLimit, SpecError
from .events import Observation, parse_event, term_key

__all__ = [
    "TIMED", "DELAY_INSENSITIVE", "TesTransitionSystem", "ExplicitSystem",
    "successors_of", "reachable_states", "label_events", "system_from_json",
    "DEFAULT_STATE_CAP",
]

TIMED = "timed"
DELAY_INSENSITIVE = "delay-insensitive"
DEFAULT_STATE_CAP = 10**6


def label_events(label) -> frozenset:
    """The event set of a transition label in either mode."""
    return label.observable if isinstance(label, Observation) else label


def _transition_key(tr):
    return (term_key(tr[0]), term_key(tr[1]))


class TesTransitionSystem:
    """A TES transition system ``(Q, E, ->)`` with an initial state.

    ``successors`` is a pure function from a state to an iterable of
    ``(label, next_state)`` pairs. In delay-insensitive mode labels are
    observables (frozensets of events); in timed mode they are
    :class:`Observation` values. Successor sets are computed on demand and
    memoised, so products over these systems stay lazy.

    Subclasses whose generator already yields a deterministic order set
    ``ordered = True`` to skip the canonical sort.
    """

    ordered = False

    def __init__(self, interface: Iterable, initial, successors: Callable | None = None,
                 mode: str = DELAY_INSENSITIVE, name: str | None = None):
        if mode not in (TIMED, DELAY_INSENSITIVE):
            raise ValueError(f"unknown mode {mode!r}")
        self.interface = frozenset(interface)
        self.initial = initial
        self.mode = mode
        self.name = name or type(self).__name__
        self._gen = successors
        self._succ_cache: dict = {}
        self._index_cache: dict = {}

    def __repr__(self):
        return f"<{self.name} |E|={len(self.interface)} {self.mode}>"

    def _successors(self, q):
        if self._gen is None:
            raise NotImplementedError
        return self._gen(q)

    def successors(self, q) -> tuple:
        """Outgoing ``(label, state)`` pairs in canonical order."""
        hit = self._succ_cache.get(q)
        if hit is None:
            if self.ordered:
                hit = tuple(dict.fromkeys(self._successors(q)))
            else:
                hit = tuple(sorted(set(self._successors(q)), key=_transition_key))
            self._succ_cache[q] = hit
        return hit

    def matching(self, q, events: frozenset, key: frozenset) -> tuple:
        """Transitions from ``q`` whose label restricted to ``events`` is ``key``.

        Subclasses with large successor sets override this to build the
        matching transitions directly instead of filtering.
        """
        ck = (q, events)
        index = self._index_cache.get(ck)
        if index is None:
            index = {}
            for tr in self.successors(q):
                k = events.intersection(label_events(tr[0]))
                index.setdefault(k, []).append(tr)
            index = {k: tuple(v) for k, v in index.items()}
            self._index_cache[ck] = index
        return index.get(key, ())

    def has_successor(self, q) -> bool:
        return bool(self.successors(q))


class ExplicitSystem(TesTransitionSystem):
    """A finite system backed by an explicit transition table."""

    def __init__(self, interface, initial, transitions: Iterable, mode=DELAY_INSENSITIVE,
                 name=None, states: Iterable = ()):
        super().__init__(interface, initial, mode=mode, name=name or "explicit")
        table: dict = {}
        self.states = {initial, *states}
        for src, label, dst in transitions:
            if mode == DELAY_INSENSITIVE:
                if isinstance(label, Observation):
                    raise TypeError("delay-insensitive labels are observables")
                label = frozenset(label)
            elif not isinstance(label, Observation):
                raise TypeError("timed labels are observations")
            extra = label_events(label) - self.interface
            if extra:
                raise ValueError(f"label uses events outside the interface: {sorted(extra)}")
            table.setdefault(src, set()).add((label, dst))
            self.states.update((src, dst))
        self.table = {q: frozenset(v) for q, v in table.items()}

    def _successors(self, q):
        return self.table.get(q, ())

    def transitions(self):
        for q in sorted(self.table, key=term_key):
            for label, p in self.successors(q):
                yield q, label, p


def successors_of(T: TesTransitionSystem, q) -> tuple:
    return T.successors(q)


def reachable_states(T: TesTransitionSystem, bound: int, cap: int = DEFAULT_STATE_CAP) -> frozenset:
    """States reachable from the initial state in at most ``bound`` steps."""
    if bound < 0:
        raise ValueError("bound must be non-negative")
    seen = {T.initial}
    frontier = [T.initial]
    for _ in range(bound):
        nxt = []
        for q in frontier:
            for _, p in T.successors(q):
                if p not in seen:
                    seen.add(p)
                    nxt.append(p)
                    if len(seen) > cap:
                        raise ExplosionLimit(cap)
        if not nxt:
            break
        frontier = nxt
    return frozenset(seen)


def explore(T: TesTransitionSystem, max_states: int = DEFAULT_STATE_CAP, stop=None):
    """Breadth-first exploration with parent links.

    Returns ``(parents, complete, hit)`` where ``parents`` maps each visited
    state to ``(previous_state, label)`` (``None`` for the initial state),
    ``complete`` tells whether the reachable set was exhausted and ``hit`` is
    the first state for which ``stop(state, successors)`` held.
    """
    parents = {T.initial: None}
    queue = deque([T.initial])
    while queue:
        q = queue.popleft()
        succ = T.successors(q)
        if stop is not None and stop(q, succ):
            return parents, False, q
        for label, p in succ:
            if p not in parents:
                if len(parents) >= max_states:
                    return parents, False, None
                parents[p] = (q, label)
                queue.append(p)
    return parents, True, None


def path_to(parents, q) -> list:
    """Labels along the BFS tree path from the initial state to ``q``."""
    out = []
    while parents[q] is not None:
        prev, label = parents[q]
        out.append(label)
        q = prev
    out.reverse()
    return out


def term_from_json(x):
    if isinstance(x, list):
        return tuple(term_from_json(y) for y in x)
    return x


def system_from_json(doc: dict) -> ExplicitSystem:
    """Build an explicit system from its JSON description."""
    try:
        mode = doc.get("mode", DELAY_INSENSITIVE)
        interface = [parse_event(e) for e in doc["interface"]]
        initial = term_from_json(doc["initial"])
        trs = []
        for t in doc["transitions"]:
            lab = t["label"]
            events = frozenset(parse_event(e) for e in lab["events"])
            if mode == TIMED:
                label = Observation(events, Fraction(str(lab["time"])))
            else:
                label = events
            trs.append((term_from_json(t["from"]), label, term_from_json(t["to"])))
    except KeyError as exc:
        raise SpecError(f"missing field {exc.args[0]!r} in explicit system") from None
    return ExplicitSystem(interface, initial, trs, mode=mode, name=doc.get("name"))
