"""Self-sorting robots: robots, grid, batteries, swap protocols and predicates.

Coordinates are 0-based: ``0 <= x < n`` and ``0 <= y < m``. Robot ``id`` is
written ``R<id>`` inside events, e.g. ``move(R1,N)`` or ``pos(R1,2,0)``.
"""
from __future__ import annotations

import itertools
from typing import Iterable, Mapping, Sequence

from .composability import Ruleset, SharedIdentity, SyncRule
from .errors import IdentifierOrder, InvalidInit, MissingComponent
from .events import EMPTY, Event
from .runtime import SystemState
from .system import TesTransitionSystem

__all__ = [
    "DIRECTIONS", "robot_atom", "pos", "move", "swap_term", "start", "end", "locked",
    "unlocked", "robot_events", "make_robot", "make_strategy_robot", "make_grid",
    "make_battery", "make_swap", "robots_composability", "p_sorted", "p_battery_out",
    "GridSystem", "BatterySystem", "SwapProtocol", "StrategyRobot", "grid_state",
]

DIRECTIONS = {"N": (0, 1), "S": (0, -1), "E": (1, 0), "W": (-1, 0)}


def robot_atom(i: int) -> str:
    return f"R{i}"


def pos(i, x, y) -> Event:
    return Event("pos", robot_atom(i), x, y)


def move(i, d) -> Event:
    return Event("move", robot_atom(i), d)


def swap_term(i, j) -> Event:
    return Event("S", robot_atom(i), robot_atom(j))


def start(i, j) -> Event:
    return Event("start", swap_term(i, j))


def end(i, j) -> Event:
    return Event("end", swap_term(i, j))


def locked(target, locker) -> Event:
    """``target`` protocol is locked because ``locker`` started."""
    return Event("locked", swap_term(*target), swap_term(*locker))


def unlocked(target, locker) -> Event:
    return Event("unlocked", swap_term(*target), swap_term(*locker))


def robot_events(i, n, m) -> frozenset:
    """Reads of every cell plus the four moves of robot ``i``."""
    return frozenset([pos(i, x, y) for x in range(n) for y in range(m)]
                     + [move(i, d) for d in DIRECTIONS])


def _step(x, y, d):
    dx, dy = DIRECTIONS[d]
    return x + dx, y + dy


# -- robots -----------------------------------------------------------------

def make_robot(i: int, n: int, m: int) -> TesTransitionSystem:
    """A robot that may read any position or move in any direction at any time."""
    E = robot_events(i, n, m)
    trs = tuple((frozenset([e]), "R") for e in E) + ((EMPTY, "R"),)
    return TesTransitionSystem(E, "R", lambda q: trs, name=f"R{i}")


class StrategyRobot(TesTransitionSystem):
    """A robot following a fixed local strategy.

    States are ``("read", x, y)`` (next action: read the position) or
    ``("go", x, y, moves)`` (next action: the first of the pending moves),
    where ``(x, y)`` is the position the robot believes it has. After a read
    at ``x``: if ``x`` is right of its target column it plans North, West,
    South; otherwise it plans one step East. An unknown start position
    (``None``) makes the first read accept any cell.
    """

    def __init__(self, i, n, m, target_x, start=None):
        init = ("read", None, None) if start is None else ("read", *start)
        super().__init__(robot_events(i, n, m), init, name=f"R{i}")
        self.id, self.n, self.m, self.target = i, n, m, target_x

    def _plan(self, x, y):
        return ("N", "W", "S") if x > self.target else ("E",)

    def _successors(self, q):
        if q[0] == "read":
            _, x0, y0 = q
            cells = [(x0, y0)] if x0 is not None else [
                (x, y) for x in range(self.n) for y in range(self.m)]
            return [(frozenset([pos(self.id, x, y)]), ("go", x, y, self._plan(x, y)))
                    for x, y in cells]
        _, x, y, moves = q
        d, rest = moves[0], moves[1:]
        nx, ny = _step(x, y, d)
        nxt = ("go", nx, ny, rest) if rest else ("read", nx, ny)
        return [(frozenset([move(self.id, d)]), nxt)]


def make_strategy_robot(i: int, n: int, m: int, target_x: int | None = None,
                        start=None) -> StrategyRobot:
    """Strategy robot ``i`` on an ``n`` by ``m`` grid; target column defaults to ``i - 1``."""
    return StrategyRobot(i, n, m, i - 1 if target_x is None else target_x, start)


# -- grid -------------------------------------------------------------------

def grid_state(occupancy: Mapping[int, tuple]) -> tuple:
    return tuple(sorted((i, x, y) for i, (x, y) in occupancy.items()))


class GridSystem(TesTransitionSystem):
    """The shared physical grid.

    In one step each robot is read at its current cell, moves by one cell,
    or is left alone. Steps that leave the grid or put two robots on one
    cell do not exist. State: sorted tuple of ``(id, x, y)``.

    ``idle=False`` drops the empty-observable self-loop. Without it a grid
    composed with robots lacking their own idle steps cannot stutter past a
    configuration where every pending move is blocked.
    """

    ordered = True

    def __init__(self, ids, n, m, init, idle=True):
        self.ids = tuple(sorted(ids))
        self.n, self.m, self.idle = n, m, idle
        E = frozenset().union(*(robot_events(i, n, m) for i in self.ids)) if self.ids else frozenset()
        super().__init__(E, init, name="G")
        self._robot_events = {i: robot_events(i, n, m) for i in self.ids}

    def occupancy(self, q) -> dict:
        return {i: (x, y) for i, x, y in q}

    def _options(self, q):
        opts = []
        for i, x, y in q:
            o = [(EMPTY, (i, x, y)), (frozenset([pos(i, x, y)]), (i, x, y))]
            for d in DIRECTIONS:
                nx, ny = _step(x, y, d)
                if 0 <= nx < self.n and 0 <= ny < self.m:
                    o.append((frozenset([move(i, d)]), (i, nx, ny)))
            opts.append(o)
        return opts

    def _assemble(self, choices):
        out = []
        for combo in itertools.product(*choices):
            cells = {(x, y) for _, (_, x, y) in combo}
            if len(cells) != len(combo):
                continue
            label = frozenset().union(*(c[0] for c in combo))
            if not label and not self.idle:
                continue
            out.append((label, tuple(c[1] for c in combo)))
        return out

    def _successors(self, q):
        return self._assemble(self._options(q))

    def has_successor(self, q):
        return self.idle or bool(self.successors(q))

    def matching(self, q, events, key):
        ck = (q, events, key)
        hit = self._index_cache.get(ck)
        if hit is None:
            choices = []
            for opts, (i, _, _) in zip(self._options(q), q):
                want = key & self._robot_events[i]
                choices.append([o for o in opts if events.intersection(o[0]) == want])
            hit = tuple(self._assemble(choices))
            self._index_cache[ck] = hit
        return hit


def make_grid(ids: Iterable[int], n: int, m: int, init: Mapping[int, tuple],
              idle: bool = True) -> GridSystem:
    ids = sorted(ids)
    if set(init) != set(ids):
        raise InvalidInit("initial occupancy must place exactly the given robots")
    cells = list(init.values())
    if len(set(cells)) != len(cells):
        raise InvalidInit("two robots share a cell")
    for i, (x, y) in init.items():
        if not (0 <= x < n and 0 <= y < m):
            raise InvalidInit(f"robot {i} placed outside the grid at {(x, y)}")
    return GridSystem(ids, n, m, grid_state(init), idle)


# -- batteries --------------------------------------------------------------

class BatterySystem(TesTransitionSystem):
    """Each move of its robot costs one unit; no recharge. State: remaining charge."""

    def __init__(self, i, capacity):
        super().__init__(frozenset(move(i, d) for d in DIRECTIONS), capacity, name=f"B{i}")
        self.id, self.capacity = i, capacity

    def _successors(self, c):
        out = [(EMPTY, c)]
        if c > 0:
            out += [(frozenset([move(self.id, d)]), c - 1) for d in DIRECTIONS]
        return out


def make_battery(i: int, capacity: int) -> BatterySystem:
    if capacity < 0:
        raise ValueError("capacity must be non-negative")
    return BatterySystem(i, capacity)


# -- swap protocols ---------------------------------------------------------

class SwapProtocol(TesTransitionSystem):
    """Swap protocol for robots ``i < j``.

    ``s1`` idle: robots may be read; another protocol sharing a robot may lock
    it (``s2``); or it starts when ``i`` stands just right of ``j``.
    ``s2`` locked by a protocol ``X``: reads of both robots and moves of the
    robots shared with ``X`` pass through until ``X`` ends.
    ``s3`` to ``s6``: ``j`` goes North, then ``j`` East with ``i`` West, then
    ``j`` South, then the protocol ends.
    """

    def __init__(self, i, j, ids, n, m):
        if not i < j:
            raise IdentifierOrder(f"swap protocol needs i < j, got {i}, {j}")
        self.i, self.j, self.n, self.m = i, j, n, m
        self.pair = (i, j)
        self.lockers = tuple(p for p in itertools.combinations(sorted(ids), 2)
                             if p != self.pair and set(p) & {i, j})
        E = robot_events(i, n, m) | robot_events(j, n, m) | {start(i, j), end(i, j)}
        E |= {locked(self.pair, p) for p in self.lockers}
        E |= {unlocked(self.pair, p) for p in self.lockers}
        super().__init__(E, ("s1",), name=f"S{i}{j}")

    def _reads(self, r):
        return [EMPTY] + [frozenset([pos(r, x, y)]) for x in range(self.n) for y in range(self.m)]

    def _parts(self, movable=()):
        i, j = self.pair
        pi = self._reads(i) + ([frozenset([move(i, d)]) for d in DIRECTIONS] if i in movable else [])
        pj = self._reads(j) + ([frozenset([move(j, d)]) for d in DIRECTIONS] if j in movable else [])
        return [a | b for a in pi for b in pj]

    def _successors(self, q):
        i, j = self.pair
        phase = q[0]
        if phase == "s1":
            out = [(r, q) for r in self._parts()]
            for p in self.lockers:
                lk = frozenset([locked(self.pair, p)])
                out += [(lk | r, ("s2", p)) for r in self._parts()]
            for x in range(self.n - 1):
                for y in range(self.m - 1):
                    out.append((frozenset([start(i, j), pos(i, x + 1, y), pos(j, x, y)]), ("s3",)))
            return out
        if phase == "s2":
            p = q[1]
            shared = set(p) & {i, j}
            out = [(r, q) for r in self._parts(shared)]
            ul = frozenset([unlocked(self.pair, p)])
            out += [(ul | r, ("s1",)) for r in self._parts()]
            return out
        if phase == "s3":
            return [(frozenset([move(j, "N")]), ("s4",))]
        if phase == "s4":
            return [(frozenset([move(j, "E"), move(i, "W")]), ("s5",))]
        if phase == "s5":
            return [(frozenset([move(j, "S")]), ("s6",))]
        if phase == "s6":
            return [(frozenset([end(i, j)]), ("s1",))]
        return ()


def make_swap(i: int, j: int, ids: Sequence[int], n: int, m: int) -> SwapProtocol:
    return SwapProtocol(i, j, ids, n, m)


def robots_composability(ids: Sequence[int] = (), protocols: Sequence = ()):
    """Shared identity, plus lock/unlock obligations when protocols are present.

    Starting ``S(i,j)`` must coincide with every ``locked(_, S(i,j))`` event
    of the other side and a lock only happens with the start of its locker;
    ends and unlocks are tied the same way.
    """
    if not protocols:
        return SharedIdentity()
    rules = [
        SyncRule.parse("start(S(i,j))", ["locked(S(k,l),S(i,j))"], "all"),
        SyncRule.parse("locked(S(k,l),S(i,j))", ["start(S(i,j))"], "all"),
        SyncRule.parse("end(S(i,j))", ["unlocked(S(k,l),S(i,j))"], "all"),
        SyncRule.parse("unlocked(S(k,l),S(i,j))", ["end(S(i,j))"], "all"),
    ]
    return Ruleset(rules)


# -- predicates -------------------------------------------------------------

def _grid(s: SystemState):
    for T, q in zip(s.systems, s.states):
        if isinstance(T, GridSystem):
            return T, q
    raise MissingComponent("no grid component in the system")


def p_sorted(s: SystemState) -> bool:
    """Robot of rank ``k`` (by identifier) stands at ``(k, 0)``."""
    G, q = _grid(s)
    occ = G.occupancy(q)
    return all(occ[i] == (k, 0) for k, i in enumerate(G.ids))


def p_battery_out(s: SystemState) -> bool:
    charges = [q for T, q in zip(s.systems, s.states) if isinstance(T, BatterySystem)]
    if not charges:
        raise MissingComponent("no battery component in the system")
    return all(c == 0 for c in charges)
