"""Events, observables, observations and traces.

Events are interned: constructing the same ``name(args)`` twice yields the
same object, so the default identity hash and equality coincide with value
equality. Observables are plain ``frozenset`` objects of events.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import NonMonotoneTime, SpecError

__all__ = [
    "Event", "ev", "parse_event", "observable", "Observation", "Trace",
    "validate_trace", "term_key", "format_observable", "EMPTY",
]


class Event:
    """An observable happening ``name(arg, ...)``.

    Arguments are atoms: strings (symbols), integers, tuples of atoms, or
    nested events such as ``S(R1,R2)``.
    """

    __slots__ = ("name", "args", "_key", "__weakref__")
    _table: dict = {}

    def __new__(cls, name: str, *args):
        args = tuple(_norm_atom(a) for a in args)
        ident = (name, args)
        hit = cls._table.get(ident)
        if hit is not None:
            return hit
        self = object.__new__(cls)
        self.name = name
        self.args = args
        self._key = (name, tuple(term_key(a) for a in args))
        cls._table[ident] = self
        return self

    def __reduce__(self):
        return (Event, (self.name, *self.args))

    def __lt__(self, other):
        if not isinstance(other, Event):
            return NotImplemented
        return self._key < other._key

    def __le__(self, other):
        return self is other or self < other

    def __gt__(self, other):
        if not isinstance(other, Event):
            return NotImplemented
        return self._key > other._key

    def __ge__(self, other):
        return self is other or self > other

    def __repr__(self):
        return f"ev({str(self)!r})"

    def __str__(self):
        if not self.args:
            return self.name
        return f"{self.name}({','.join(_atom_str(a) for a in self.args)})"


def _norm_atom(a):
    if isinstance(a, bool):
        raise TypeError("booleans are not event atoms")
    if isinstance(a, (str, int, Event)):
        return a
    if isinstance(a, (tuple, list)):
        return tuple(_norm_atom(x) for x in a)
    raise TypeError(f"unsupported event argument {a!r}")


def _atom_str(a):
    if isinstance(a, tuple):
        return "(" + ",".join(_atom_str(x) for x in a) + ")"
    return str(a)


_SET_KEYS: dict = {}


def term_key(x):
    """Total-order key over state and event terms of mixed types."""
    t = type(x)
    if t is Event:
        return (3, x._key)
    if t is frozenset:
        k = _SET_KEYS.get(x)
        if k is None:
            k = _SET_KEYS[x] = (5, tuple(sorted(term_key(y) for y in x)))
        return k
    if t is tuple:
        return (4, tuple(term_key(y) for y in x))
    if t is str:
        return (2, x)
    if t is int:
        return (1, x)
    if x is None:
        return (0,)
    if isinstance(x, bool):
        return (1, int(x))
    if isinstance(x, (int, Fraction)):
        return (1, x)
    if isinstance(x, str):
        return (2, x)
    if isinstance(x, Event):
        return (3, x._key)
    if isinstance(x, tuple):
        return (4, tuple(term_key(y) for y in x))
    if isinstance(x, (frozenset, set)):
        return (5, tuple(sorted(term_key(y) for y in x)))
    if isinstance(x, Observation):
        return (6, term_key(x.observable), x.time)
    raise TypeError(f"no canonical order for {x!r}")


_TOKEN = re.compile(r"\s*(?:(-?\d+)|([A-Za-z_][A-Za-z0-9_'.\-]*)|(.))")


class _Parser:
    def __init__(self, text):
        self.text = text
        self.toks = []
        for m in _TOKEN.finditer(text):
            if m.group(0).strip() == "":
                continue
            if m.group(1) is not None:
                self.toks.append(("int", int(m.group(1)), m.start(1)))
            elif m.group(2) is not None:
                self.toks.append(("sym", m.group(2), m.start(2)))
            else:
                self.toks.append(("punct", m.group(3), m.start(3)))
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None, len(self.text))

    def take(self, punct=None):
        tok = self.peek()
        if tok[0] is None:
            raise SpecError(f"unexpected end of event {self.text!r}", 1, len(self.text) + 1)
        if punct is not None and tok[1] != punct:
            raise SpecError(f"expected {punct!r} in event {self.text!r}", 1, tok[2] + 1)
        self.i += 1
        return tok

    def atom(self):
        kind, val, pos = self.peek()
        if kind == "int":
            self.take()
            return val
        if kind == "sym":
            self.take()
            if self.peek()[1] == "(":
                return Event(val, *self.arglist())
            return val
        if val == "(":
            return tuple(self.arglist())
        raise SpecError(f"unexpected {val!r} in event {self.text!r}", 1, pos + 1)

    def arglist(self):
        self.take("(")
        out = []
        if self.peek()[1] == ")":
            self.take()
            return out
        while True:
            out.append(self.atom())
            tok = self.take()
            if tok[1] == ")":
                return out
            if tok[1] != ",":
                raise SpecError(f"expected ',' or ')' in event {self.text!r}", 1, tok[2] + 1)


def parse_event(text: str) -> Event:
    """Parse ``name(arg,...)`` into an interned :class:`Event`."""
    p = _Parser(text)
    kind, val, pos = p.take()
    if kind != "sym":
        raise SpecError(f"event must start with a name: {text!r}", 1, pos + 1)
    ev_ = Event(val, *p.arglist()) if p.peek()[1] == "(" else Event(val)
    if p.peek()[0] is not None:
        raise SpecError(f"trailing input in event {text!r}", 1, p.peek()[2] + 1)
    return ev_


def ev(text: str) -> Event:
    """Shorthand for :func:`parse_event`."""
    return parse_event(text)


def observable(*events) -> frozenset:
    """Build an observable; strings are parsed as events."""
    return frozenset(parse_event(e) if isinstance(e, str) else e for e in events)


EMPTY: frozenset = frozenset()


def format_observable(o: Iterable[Event]) -> str:
    return "{" + ",".join(str(e) for e in sorted(o)) + "}"


@dataclass(frozen=True)
class Observation:
    observable: frozenset
    time: Fraction

    def __post_init__(self):
        t = Fraction(self.time)
        if t < 0:
            raise ValueError("timestamps are non-negative")
        object.__setattr__(self, "time", t)
        if not isinstance(self.observable, frozenset):
            object.__setattr__(self, "observable", frozenset(self.observable))

    def __str__(self):
        return f"({format_observable(self.observable)},{self.time})"


class Trace(tuple):
    """A finite sequence of observations with strictly increasing times."""

    __slots__ = ()

    def __repr__(self):
        return "Trace(" + ", ".join(str(o) for o in self) + ")"


def validate_trace(items: Sequence[Observation]) -> Trace:
    items = list(items)
    for i in range(len(items) - 1):
        if items[i + 1].time <= items[i].time:
            raise NonMonotoneTime(i + 1)
    return Trace(items)
