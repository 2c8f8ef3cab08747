"""Compatibility of TES transition systems under a composability relation."""
from __future__ import annotations

from dataclasses import dataclass

from .composability import ComposabilityBase, REPRESENTATIVE_TIMES, Ruleset, at
from .errors import ExplosionLimit, TesError
from .product import product
from .semantics import is_deadlock_free, is_prefix_closed_syntactic
from .system import DEFAULT_STATE_CAP, TIMED, explore, path_to

__all__ = ["CompatibilityVerdict", "check_compatible", "shortcut_compatible",
           "composable_steps", "verify_relation"]


@dataclass(frozen=True)
class CompatibilityVerdict:
    compatible: bool
    relation: frozenset | None = None
    counterexample: tuple | None = None  # (state pair, trace reaching it)

    def __bool__(self):
        return self.compatible


def composable_steps(T1, T2, kappa, p1, p2):
    """Target pairs of every composable transition pair from ``(p1, p2)``.

    Follows the minimum-time advancement rule: a side moves iff its
    timestamp is the smaller one (both move on a tie).
    """
    E1, E2 = T1.interface, T2.interface
    out = []
    for l1, r1 in T1.successors(p1):
        for l2, r2 in T2.successors(p2):
            if T1.mode == TIMED:
                if kappa(E1, E2, l1, l2):
                    t = min(l1.time, l2.time)
                    out.append((r1 if l1.time == t else p1, r2 if l2.time == t else p2))
                continue
            for order, (t1, t2) in REPRESENTATIVE_TIMES.items():
                if kappa(E1, E2, at(l1, t1), at(l2, t2)):
                    out.append((r1 if t1 <= t2 else p1, r2 if t2 <= t1 else p2))
    return out


def check_compatible(T1, T2, kappa, bound: int = DEFAULT_STATE_CAP) -> CompatibilityVerdict:
    """Is ``(T1, q1)`` kappa-compatible with ``(T2, q2)`` from the initial states?

    The candidate relation starts as the pairs reachable by composable joint
    steps and is pruned to the greatest subset where every pair has a
    composable step and all composable steps stay inside.
    """
    P = product(T1, T2, kappa)
    parents, complete, _ = explore(P, bound)
    if not complete:
        raise ExplosionLimit(bound)
    succ = {q: {p for _, p in P.successors(q)} for q in parents}
    rel = set(succ)
    changed = True
    while changed:
        changed = False
        for q in list(rel):
            targets = succ[q]
            if not targets or not targets <= rel:
                rel.discard(q)
                changed = True
    if P.initial in rel:
        return CompatibilityVerdict(True, frozenset(rel))
    # nearest reachable pair without any composable step
    order = list(parents)
    bad = next(q for q in order if not succ[q])
    return CompatibilityVerdict(False, counterexample=(bad, tuple(path_to(parents, bad))))


def verify_relation(T1, T2, kappa, relation) -> bool:
    """Re-check both conditions of the definition for every pair of ``relation``."""
    for p1, p2 in relation:
        steps = composable_steps(T1, T2, kappa, p1, p2)
        if not steps or any(u not in relation for u in steps):
            return False
    return True


def _rules_link(base, E1, E2) -> bool:
    if not isinstance(base, Ruleset):
        return False
    return any(base.obligates(frozenset([e]), E2) for e in E1) or \
        any(base.obligates(frozenset([e]), E1) for e in E2)


def shortcut_compatible(T1, T2, base: ComposabilityBase, bound: int = DEFAULT_STATE_CAP):
    """``True`` when a sufficient condition for compatibility holds, else ``None``.

    Either the base relates nothing across the two interfaces and both systems
    are deadlock free, or both systems are syntactically prefix-closed.
    """
    try:
        if base.independent(T1.interface, T2.interface) and not _rules_link(base, T1.interface, T2.interface):
            if is_deadlock_free(T1, bound) and is_deadlock_free(T2, bound):
                return True
        if is_prefix_closed_syntactic(T1, bound) and is_prefix_closed_syntactic(T2, bound):
            return True
    except TesError:
        return None
    return None
