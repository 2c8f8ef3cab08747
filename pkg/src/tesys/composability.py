"""Relations on observables and the synchronous composability relation.

A composability base relates pairs of non-empty observables. From it we
derive the independence predicate and the synchronous relation on
observations: simultaneous observations must agree on whatever they can
compose, and an observation may only happen strictly earlier than the other
side's when it is independent of the other side's interface.
"""
from __future__ import annotations

import enum
import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .errors import DecompositionLimit, SpecError, TimeMismatch
from .events import Event, Observation, parse_event

__all__ = [
    "ComposabilityBase", "SharedIdentity", "Ruleset", "ExplicitPairs", "EmptyBase",
    "SyncRule", "StepOutcome", "independent", "kappa_sync", "kappa_sync_shared",
    "SyncKappa", "lift_step", "merge", "base_from_json", "REPRESENTATIVE_TIMES",
    "DEFAULT_DECOMPOSITION_BOUND",
]

DEFAULT_DECOMPOSITION_BOUND = 16

# Timestamp pairs standing for "left earlier", "right earlier", "simultaneous".
REPRESENTATIVE_TIMES = {"left": (1, 2), "right": (2, 1), "both": (1, 1)}


def _nonempty_subsets(xs):
    xs = sorted(xs)
    for r in range(1, len(xs) + 1):
        for c in itertools.combinations(xs, r):
            yield frozenset(c)


class ComposabilityBase:
    """A relation on observables; never relates an empty observable."""

    kind = "abstract"

    def relates(self, x: frozenset, y: frozenset) -> bool:
        raise NotImplementedError

    def independent(self, X: frozenset, Y: frozenset) -> bool:
        """No non-empty ``x <= X`` and ``y <= Y`` are related."""
        return not any(self.relates(x, y)
                       for x in _nonempty_subsets(X) for y in _nonempty_subsets(Y))

    def is_symmetric_on(self, universe) -> bool:
        subs = list(_nonempty_subsets(universe))
        return all(self.relates(x, y) == self.relates(y, x) for x in subs for y in subs)


class EmptyBase(ComposabilityBase):
    kind = "empty"

    def relates(self, x, y):
        return False

    def independent(self, X, Y):
        return True

    def __repr__(self):
        return "EmptyBase()"


class SharedIdentity(ComposabilityBase):
    """``{(O, O) | O non-empty}``: shared events must happen together."""

    kind = "shared-identity"
    rules: tuple = ()

    def relates(self, x, y):
        return bool(x) and x == y

    def independent(self, X, Y):
        return frozenset(X).isdisjoint(Y)

    def __repr__(self):
        return "SharedIdentity()"

    def __eq__(self, other):
        return type(other) is type(self) and other.rules == self.rules

    def __hash__(self):
        return hash((type(self), self.rules))


class ExplicitPairs(ComposabilityBase):
    kind = "pairs"

    def __init__(self, pairs: Iterable):
        ps = set()
        for a, b in pairs:
            a, b = frozenset(a), frozenset(b)
            if not a or not b:
                raise ValueError("composability pairs never involve the empty observable")
            ps.add((a, b))
        self.pairs = frozenset(ps)

    def relates(self, x, y):
        return (frozenset(x), frozenset(y)) in self.pairs

    def independent(self, X, Y):
        return not any(a <= X and b <= Y for a, b in self.pairs)

    def __repr__(self):
        return f"ExplicitPairs({len(self.pairs)} pairs)"


# -- synchronisation rules -------------------------------------------------

_VAR = re.compile(r"^[a-z]$")
_COND = re.compile(r"^\s*([a-z])\s*(<=|>=|!=|==|<|>)\s*([a-z]|-?\d+)\s*$")


def ordinal(atom) -> int:
    """Numeric value of an identifier atom: ``3`` or ``R3`` both give 3."""
    if isinstance(atom, int):
        return atom
    if isinstance(atom, str):
        m = re.search(r"(-?\d+)$", atom)
        if m:
            return int(m.group(1))
    raise ValueError(f"identifier {atom!r} has no numeric value")


def _match(pat, term, env):
    if isinstance(pat, str) and _VAR.match(pat):
        if pat in env:
            return env if env[pat] == term else None
        env = dict(env)
        env[pat] = term
        return env
    if isinstance(pat, Event):
        if not isinstance(term, Event) or term.name != pat.name or len(term.args) != len(pat.args):
            return None
        for p, t in zip(pat.args, term.args):
            env = _match(p, t, env)
            if env is None:
                return None
        return env
    if isinstance(pat, tuple):
        if not isinstance(term, tuple) or len(pat) != len(term):
            return None
        for p, t in zip(pat, term):
            env = _match(p, t, env)
            if env is None:
                return None
        return env
    return env if pat == term else None


_OPS = {
    "<": lambda a, b: a < b, "<=": lambda a, b: a <= b, ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b, "==": lambda a, b: a == b, "!=": lambda a, b: a != b,
}


@dataclass(frozen=True)
class Pattern:
    term: Event
    conditions: tuple = ()  # (var, op, var-or-int)

    @classmethod
    def parse(cls, text: str) -> "Pattern":
        head, _, where = text.partition(" where ")
        conds = []
        if where:
            for part in re.split(r",|\band\b", where):
                if not part.strip():
                    continue
                m = _COND.match(part)
                if not m:
                    raise SpecError(f"bad rule condition {part.strip()!r}")
                rhs = m.group(3)
                conds.append((m.group(1), m.group(2), rhs if _VAR.match(rhs) else int(rhs)))
        return cls(parse_event(head.strip()), tuple(conds))

    def match(self, term, env):
        env = _match(self.term, term, env)
        if env is None:
            return None
        for var, op, rhs in self.conditions:
            if var not in env or (isinstance(rhs, str) and rhs not in env):
                return None
            a = ordinal(env[var])
            b = ordinal(env[rhs]) if isinstance(rhs, str) else rhs
            if not _OPS[op](a, b):
                return None
        return env

    def __str__(self):
        s = str(self.term)
        if self.conditions:
            s += " where " + ", ".join(f"{a}{op}{b}" for a, op, b in self.conditions)
        return s


@dataclass(frozen=True)
class SyncRule:
    """``trigger`` in one observable obliges partner events in the other.

    The partner candidates are the events of the other side's interface that
    match one of ``required`` under the trigger's bindings. With quantifier
    ``any`` at least one candidate must occur simultaneously; with ``all``
    every candidate must. A triggered observation can never happen strictly
    before the other side when candidates exist there.
    """

    trigger: Pattern
    required: tuple
    quantifier: str = "any"

    def __post_init__(self):
        if self.quantifier not in ("any", "all"):
            raise ValueError("quantifier is 'any' or 'all'")

    @classmethod
    def parse(cls, trigger: str, required: Iterable[str], quantifier="any") -> "SyncRule":
        return cls(Pattern.parse(trigger), tuple(Pattern.parse(r) for r in required), quantifier)


class Ruleset(SharedIdentity):
    """Shared identity extended additively with :class:`SyncRule` obligations."""

    kind = "rules"

    def __init__(self, rules: Iterable[SyncRule]):
        self.rules = tuple(rules)
        self._trig: dict = {}
        self._cand: dict = {}

    def __repr__(self):
        return f"Ruleset({len(self.rules)} rules)"

    def triggers(self, e: Event) -> tuple:
        hit = self._trig.get(e)
        if hit is None:
            hit = []
            for r in self.rules:
                env = r.trigger.match(e, {})
                if env is not None:
                    hit.append((r, tuple(sorted(env.items()))))
            hit = tuple(hit)
            self._trig[e] = hit
        return hit

    def candidates(self, rule, env, other_interface: frozenset) -> frozenset:
        ck = (rule, env, other_interface)
        hit = self._cand.get(ck)
        if hit is None:
            benv = dict(env)
            hit = frozenset(f for f in other_interface
                            if any(p.match(f, benv) is not None for p in rule.required))
            self._cand[ck] = hit
        return hit

    def obligations(self, O: frozenset, other_interface: frozenset):
        """Yield ``(rule, candidates)`` for every obligation ``O`` puts on the other side."""
        for e in O:
            for rule, env in self.triggers(e):
                c = self.candidates(rule, env, other_interface)
                if c:
                    yield rule, c

    def obligates(self, O, other_interface) -> bool:
        return any(True for _ in self.obligations(O, other_interface))

    def satisfied(self, O, other_interface, other_O) -> bool:
        for rule, c in self.obligations(O, other_interface):
            if rule.quantifier == "any":
                if c.isdisjoint(other_O):
                    return False
            elif not c <= other_O:
                return False
        return True


def independent(base: ComposabilityBase, X, Y) -> bool:
    return base.independent(frozenset(X), frozenset(Y))


# -- the synchronous relation ----------------------------------------------

def _viable_sync_parts(base, O, ind_ok):
    """Sync parts ``S`` of covers ``O = S u S'`` whose rest ``S'`` passes ``ind_ok``."""
    evs = sorted(O)
    out = set()
    for assign in itertools.product((0, 1, 2), repeat=len(evs)):
        sync = frozenset(e for e, a in zip(evs, assign) if a != 1)
        rest = frozenset(e for e, a in zip(evs, assign) if a != 0)
        if sync not in out and ind_ok(rest):
            out.add(sync)
    return out


def kappa_sync(base: ComposabilityBase, E1, E2, o1: Observation, o2: Observation,
               limit: int = DEFAULT_DECOMPOSITION_BOUND) -> bool:
    """Reference decision of the synchronous relation by decomposition search."""
    E1, E2 = frozenset(E1), frozenset(E2)
    O1, O2 = o1.observable, o2.observable
    if len(O1) + len(O2) > limit:
        raise DecompositionLimit(f"{len(O1) + len(O2)} events exceed the bound {limit}")
    rules = base if isinstance(base, Ruleset) else None
    if o1.time == o2.time:
        left = _viable_sync_parts(base, O1, lambda rest: base.independent(rest, E2))
        if not left:
            return False
        right = _viable_sync_parts(base, O2, lambda rest: base.independent(E1, rest))
        ok = any((not a and not b) or base.relates(a, b) for a in left for b in right)
        if ok and rules is not None:
            ok = rules.satisfied(O1, E2, O2) and rules.satisfied(O2, E1, O1)
        return ok
    if o1.time < o2.time:
        return base.independent(O1, E2) and not (rules and rules.obligates(O1, E2))
    return base.independent(E1, O2) and not (rules and rules.obligates(O2, E1))


def kappa_sync_shared(E1, E2, o1: Observation, o2: Observation, rules: Ruleset | None = None) -> bool:
    """Closed form of the synchronous relation over shared identity (plus rules)."""
    O1, O2 = o1.observable, o2.observable
    if o1.time == o2.time:
        if E2.intersection(O1) != E1.intersection(O2):
            return False
        return rules is None or (rules.satisfied(O1, E2, O2) and rules.satisfied(O2, E1, O1))
    if o1.time < o2.time:
        return E2.isdisjoint(O1) and not (rules and rules.obligates(O1, E2))
    return E1.isdisjoint(O2) and not (rules and rules.obligates(O2, E1))


class SyncKappa:
    """The synchronous composability relation induced by a base, as a callable.

    Shared-identity bases (with or without rules) take the closed form; any
    other base is decided by decomposition search.
    """

    def __init__(self, base: ComposabilityBase):
        self.base = base
        self.fast = isinstance(base, SharedIdentity)
        self.rules = base if isinstance(base, Ruleset) else None

    def __call__(self, E1, E2, o1: Observation, o2: Observation) -> bool:
        if self.fast:
            return kappa_sync_shared(frozenset(E1), frozenset(E2), o1, o2, self.rules)
        return kappa_sync(self.base, E1, E2, o1, o2)

    def __repr__(self):
        return f"SyncKappa({self.base!r})"


class StepOutcome(enum.Enum):
    ADVANCE_LEFT = "left"
    ADVANCE_RIGHT = "right"
    ADVANCE_BOTH = "both"
    INCOMPATIBLE = "incompatible"


def lift_step(kappa, E1, E2, o1: Observation, o2: Observation) -> StepOutcome:
    """One unfolding of the coinductive lifting of ``kappa`` to streams."""
    if not kappa(E1, E2, o1, o2):
        return StepOutcome.INCOMPATIBLE
    if o1.time < o2.time:
        return StepOutcome.ADVANCE_LEFT
    if o2.time < o1.time:
        return StepOutcome.ADVANCE_RIGHT
    return StepOutcome.ADVANCE_BOTH


def merge(o1: Observation, o2: Observation) -> Observation:
    if o1.time != o2.time:
        raise TimeMismatch(f"cannot merge observations at {o1.time} and {o2.time}")
    return Observation(o1.observable | o2.observable, o1.time)


def at(O, t) -> Observation:
    return Observation(frozenset(O), Fraction(t))


def base_from_json(doc: dict) -> ComposabilityBase:
    kind = doc.get("kind")
    if kind == "shared-identity":
        return SharedIdentity()
    if kind == "empty":
        return EmptyBase()
    if kind == "pairs":
        return ExplicitPairs(
            ([parse_event(e) for e in a], [parse_event(e) for e in b]) for a, b in doc["pairs"])
    if kind == "rules":
        rules = []
        for r in doc["rules"]:
            if "requires-all" in r:
                rules.append(SyncRule.parse(r["trigger"], r["requires-all"], "all"))
            else:
                rules.append(SyncRule.parse(r["trigger"], r["requires-any"], "any"))
        return Ruleset(rules)
    raise SpecError(f"unknown composability kind {kind!r}")
