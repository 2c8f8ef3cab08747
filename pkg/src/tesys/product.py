"""Syntactic products of TES transition systems."""
from __future__ import annotations

from functools import reduce
from typing import Sequence

from .composability import REPRESENTATIVE_TIMES, SyncKappa, at
from .errors import ModeMismatch
from .events import Observation
from .system import DELAY_INSENSITIVE, TIMED, TesTransitionSystem

__all__ = [
    "product", "product_n", "ProductSystem", "combine", "bounded_lang_equal",
    "flatten_state", "TransitionSet",
]


class TransitionSet:
    """Outgoing transitions of one component state, queried by projection."""

    def __init__(self, system: TesTransitionSystem, state):
        self.system = system
        self.state = state

    def all(self):
        return self.system.successors(self.state)

    def matching(self, events, key):
        return self.system.matching(self.state, events, key)

    def nonempty(self):
        return self.system.has_successor(self.state)


def _combine_sync(E1, left, E2, right, rules):
    """Indexed evaluation of the three product rules under shared identity.

    ``left`` is a sequence of ``(label, payload)``; ``right`` answers
    projection queries. Yields ``(label, left_payload|None, right_payload|None)``.
    """
    right_any = right.nonempty()
    for O1, p1 in left:
        key = E2.intersection(O1)
        for O2, p2 in right.matching(E1, key):
            if rules is None or (rules.satisfied(O1, E2, O2) and rules.satisfied(O2, E1, O1)):
                yield O1 | O2, p1, p2
        if right_any and not key and not (rules and rules.obligates(O1, E2)):
            yield O1, p1, None
    if left:
        for O2, p2 in right.matching(E1, frozenset()):
            if not (rules and rules.obligates(O2, E1)):
                yield O2, None, p2


def _combine_pairs(E1, left, E2, right, kappa, mode):
    """All-pairs evaluation of the three product rules for an arbitrary relation."""
    rights = right.all()
    for l1, p1 in left:
        for l2, p2 in rights:
            if mode == TIMED:
                if not kappa(E1, E2, l1, l2):
                    continue
                if l1.time < l2.time:
                    yield l1, p1, None
                elif l2.time < l1.time:
                    yield l2, None, p2
                else:
                    yield Observation(l1.observable | l2.observable, l1.time), p1, p2
            else:
                t = REPRESENTATIVE_TIMES
                if kappa(E1, E2, at(l1, t["left"][0]), at(l2, t["left"][1])):
                    yield l1, p1, None
                if kappa(E1, E2, at(l1, t["right"][0]), at(l2, t["right"][1])):
                    yield l2, None, p2
                if kappa(E1, E2, at(l1, 1), at(l2, 1)):
                    yield l1 | l2, p1, p2


def combine(E1, left, E2, right, kappa, mode=DELAY_INSENSITIVE, indexed=True):
    """Combine one side's transitions with another's under ``kappa``.

    The indexed path is used for shared-identity synchronous relations in
    delay-insensitive mode; ``indexed=False`` forces the all-pairs path.
    """
    if indexed and mode == DELAY_INSENSITIVE and isinstance(kappa, SyncKappa) and kappa.fast:
        return _combine_sync(E1, left, E2, right, kappa.rules)
    return _combine_pairs(E1, left, E2, right, kappa, mode)


class ProductSystem(TesTransitionSystem):
    """``T1 x_kappa T2`` with pair states, computed lazily."""

    ordered = True

    def __init__(self, T1, T2, kappa, indexed=True):
        if T1.mode != T2.mode:
            raise ModeMismatch(f"cannot compose {T1.mode} with {T2.mode}")
        super().__init__(T1.interface | T2.interface, (T1.initial, T2.initial),
                         mode=T1.mode, name=f"({T1.name} x {T2.name})")
        self.left, self.right, self.kappa = T1, T2, kappa
        self.indexed = indexed

    def _successors(self, q):
        q1, q2 = q
        T1, T2 = self.left, self.right
        left = T1.successors(q1)
        if not left or not T2.has_successor(q2):
            return ()
        return [(label, (q1 if p1 is None else p1, q2 if p2 is None else p2))
                for label, p1, p2 in combine(T1.interface, left, T2.interface,
                                             TransitionSet(T2, q2), self.kappa, self.mode,
                                             self.indexed)]


def product(T1, T2, kappa, indexed=True) -> ProductSystem:
    return ProductSystem(T1, T2, kappa, indexed)


def product_n(systems: Sequence[TesTransitionSystem], kappa, indexed=True) -> TesTransitionSystem:
    """Left fold of :func:`product`; states are nested pairs."""
    if not systems:
        raise ValueError("product_n needs at least one system")
    return reduce(lambda a, b: product(a, b, kappa, indexed), systems[1:], systems[0])


def flatten_state(q, n: int) -> tuple:
    """Turn a left-nested pair state of an ``n``-fold product into a flat tuple."""
    out = []
    for _ in range(n - 1):
        q, last = q
        out.append(last)
    out.append(q)
    return tuple(reversed(out))


def nest_state(states: Sequence) -> object:
    return reduce(lambda a, b: (a, b), states[1:], states[0])


def bounded_lang_equal(Ta, Tb, depth: int, cap: int | None = None) -> bool:
    """Do the label traces of length at most ``depth`` coincide?"""
    from .semantics import finite_runs
    kw = {} if cap is None else {"cap": cap}
    return finite_runs(Ta, depth, **kw) == finite_runs(Tb, depth, **kw)

