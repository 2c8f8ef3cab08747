"""System spec files: composability base plus components, as versioned JSON.

A spec looks like::

    {"version": 1,
     "composability": {"kind": "shared-identity"},
     "components": [{"builtin": "grid", "ids": [0, 1], "n": 3, "m": 2,
                     "init": {"0": [1, 0], "1": [0, 0]}},
                    {"interface": [...], "initial": "q0", "transitions": [...]}]}

Components are either explicit systems or ``builtin`` entries.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from . import robots
from .composability import ComposabilityBase, base_from_json
from .errors import SpecError, TesError
from .system import TesTransitionSystem, system_from_json

__all__ = ["SystemSpec", "load_spec", "parse_spec", "spec_from_doc", "DEMOS", "demo_doc"]

SPEC_VERSION = 1


@dataclass
class SystemSpec:
    base: ComposabilityBase
    components: list
    doc: dict

    def names(self):
        return [T.name for T in self.components]


def _need(d, key, where):
    if key not in d:
        raise SpecError(f"{where}: missing field {key!r}")
    return d[key]


def _cell(v, where):
    if not (isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(c, int) for c in v)):
        raise SpecError(f"{where}: cell must be [x, y], got {v!r}")
    return tuple(v)


def _protocols_in(entries):
    return [(e["i"], e["j"]) for e in entries if e.get("builtin") == "swap"]


def _builtin(d: dict, pos: int) -> TesTransitionSystem:
    where = f"component {pos}"
    kind = d["builtin"]
    if kind == "robot":
        return robots.make_robot(_need(d, "id", where), _need(d, "n", where), _need(d, "m", where))
    if kind == "strategy-robot":
        start = d.get("start")
        return robots.make_strategy_robot(
            _need(d, "id", where), _need(d, "n", where), _need(d, "m", where),
            d.get("target"), None if start is None else _cell(start, where))
    if kind == "grid":
        init = {int(k): _cell(v, where) for k, v in _need(d, "init", where).items()}
        return robots.make_grid(_need(d, "ids", where), _need(d, "n", where),
                                _need(d, "m", where), init, d.get("idle", True))
    if kind == "battery":
        return robots.make_battery(_need(d, "id", where), _need(d, "capacity", where))
    if kind == "swap":
        return robots.make_swap(_need(d, "i", where), _need(d, "j", where),
                                _need(d, "ids", where), _need(d, "n", where), _need(d, "m", where))
    raise SpecError(f"{where}: unknown builtin {kind!r}")


def spec_from_doc(doc: dict) -> SystemSpec:
    if not isinstance(doc, dict):
        raise SpecError("spec must be a JSON object")
    version = doc.get("version")
    if version != SPEC_VERSION:
        raise SpecError(f"unsupported spec version {version!r} (expected {SPEC_VERSION})")
    entries = _need(doc, "components", "spec")
    if not isinstance(entries, list) or not entries:
        raise SpecError("spec: 'components' must be a nonempty list")
    comps = []
    try:
        for pos, d in enumerate(entries, 1):
            if not isinstance(d, dict):
                raise SpecError(f"component {pos}: expected an object")
            comps.append(_builtin(d, pos) if "builtin" in d else system_from_json(d))
        cdoc = doc.get("composability", {"kind": "shared-identity"})
        if cdoc.get("kind") == "robots":
            base = robots.robots_composability(protocols=_protocols_in(entries))
        else:
            base = base_from_json(cdoc)
    except SpecError:
        raise
    except (TesError, TypeError, ValueError, KeyError) as exc:
        raise SpecError(f"invalid spec: {exc}") from None
    return SystemSpec(base, comps, doc)


def parse_spec(text: str) -> SystemSpec:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(exc.msg, exc.lineno, exc.colno) from None
    return spec_from_doc(doc)


def load_spec(ref: str) -> SystemSpec:
    """Load a spec from a file path, or a built-in demo written ``demo:<name>``."""
    if ref.startswith("demo:"):
        return spec_from_doc(demo_doc(ref[5:]))
    try:
        text = Path(ref).read_text()
    except OSError as exc:
        raise SpecError(f"cannot read {ref}: {exc.strerror}") from None
    return parse_spec(text)


# -- demos ------------------------------------------------------------------

def _explicit(name, interface, initial, transitions):
    return {"name": name, "interface": interface, "initial": initial,
            "transitions": [{"from": a, "label": {"events": ev}, "to": b}
                            for a, ev, b in transitions]}


def _triple():
    E = ["a", "b", "c", "d"]
    t1 = _explicit("T1", E, "q1", [("q1", ["a", "b"], "q1"), ("q1", ["a", "c"], "q1")])
    t2 = _explicit("T2", E, "q2", [("q2", ["a", "c"], "q2"), ("q2", ["a", "d"], "q2")])
    t3 = _explicit("T3", E, "q3", [("q3", ["a", "d"], "q3"), ("q3", ["a", "b"], "q3")])
    return {"version": 1, "composability": {"kind": "shared-identity"},
            "components": [t1, t2, t3]}


def _strategies():
    ids, n, m = [1, 2, 3, 4, 5], 5, 2
    init = {i: [n - i, 0] for i in ids}
    comps = [{"builtin": "strategy-robot", "id": i, "n": n, "m": m, "start": init[i]}
             for i in ids]
    comps.append({"builtin": "grid", "ids": ids, "n": n, "m": m,
                  "init": {str(i): c for i, c in init.items()}, "idle": False})
    return {"version": 1, "composability": {"kind": "shared-identity"}, "components": comps}


def _trolls(protocols: bool, batteries: bool, capacity: int | None = None):
    ids, n, m = [0, 1, 2], 3, 2
    init = {0: [2, 0], 1: [1, 0], 2: [0, 0]}
    comps = [{"builtin": "grid", "ids": ids, "n": n, "m": m,
              "init": {str(i): c for i, c in init.items()}}]
    comps += [{"builtin": "robot", "id": i, "n": n, "m": m} for i in ids]
    if batteries:
        cap = 3 * n if capacity is None else capacity
        comps += [{"builtin": "battery", "id": i, "capacity": cap} for i in ids]
    if protocols:
        comps += [{"builtin": "swap", "i": i, "j": j, "ids": ids, "n": n, "m": m}
                  for i in ids for j in ids if i < j]
    kind = "robots" if protocols else "shared-identity"
    return {"version": 1, "composability": {"kind": kind}, "components": comps}


def _components():
    ids, n, m = [1, 2], 5, 2
    return {"version": 1, "composability": {"kind": "robots"}, "components": [
        {"builtin": "robot", "id": 1, "n": n, "m": m},
        {"builtin": "grid", "ids": ids, "n": n, "m": m, "init": {"1": [1, 0], "2": [0, 0]}},
        {"builtin": "swap", "i": 1, "j": 2, "ids": ids, "n": n, "m": m},
    ]}


DEMOS = {
    "components": _components,
    "triple": _triple,
    "strategies": _strategies,
    "trolls": lambda: _trolls(False, False),
    "trolls-protocols": lambda: _trolls(True, False),
    "trolls-batteries": lambda: _trolls(False, True),
    "trolls-protocols-batteries": lambda: _trolls(True, True),
}


def demo_doc(name: str) -> dict:
    try:
        return DEMOS[name]()
    except KeyError:
        raise SpecError(f"unknown demo {name!r}; choose from {', '.join(sorted(DEMOS))}") from None
