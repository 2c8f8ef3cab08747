"""Command-line interface: simulate, reach, check, demo.

Exit codes: 0 ok, 1 input error, 2 runtime deadlock, 3 resource limit.
"""
from __future__ import annotations

import argparse
import json
import sys
from itertools import combinations

from .compat import check_compatible, shortcut_compatible
from .composability import SyncKappa
from .errors import ExplosionLimit, MissingComponent, SpecError, TesError
from .events import format_observable, parse_event
from .product import bounded_lang_equal, flatten_state, product, product_n
from .robots import p_battery_out, p_sorted
from .runtime import initial_state, reach, run
from .semantics import is_deadlock_free, is_prefix_closed_syntactic
from .specfile import DEMOS, demo_doc, load_spec
from .system import DEFAULT_STATE_CAP, term_from_json

EXIT_OK, EXIT_INPUT, EXIT_DEADLOCK, EXIT_LIMIT = 0, 1, 2, 3


class TraceWriter:
    """Writes observations in the text or jsonl trace format."""

    def __init__(self, stream, fmt="text"):
        self.stream, self.fmt = stream, fmt

    def observation(self, step, label):
        if self.fmt == "jsonl":
            line = json.dumps({"step": step, "events": [str(e) for e in sorted(label)]})
        else:
            line = f"{step}\t{format_observable(label)}"
        self.stream.write(line + "\n")

    def trace(self, labels):
        for i, label in enumerate(labels, 1):
            self.observation(i, label)

    def deadlock(self):
        self.stream.write(json.dumps({"deadlock": True}) + "\n" if self.fmt == "jsonl"
                          else "DEADLOCK\n")

    def line(self, text):
        if self.fmt == "jsonl":
            text = json.dumps({"report": text})
        self.stream.write(text + "\n")


def _labels(trace):
    return [o.observable for o in trace]


def _component(spec, token):
    """``"2"`` is component 2 (1-based); ``"2x3"`` or ``"2,3"`` is their product."""
    parts = token.replace(",", "x").split("x")
    try:
        idx = [int(p) for p in parts]
    except ValueError:
        raise SpecError(f"bad component reference {token!r}") from None
    n = len(spec.components)
    for i in idx:
        if not 1 <= i <= n:
            raise SpecError(f"component {i} out of range 1..{n}")
    systems = [spec.components[i - 1] for i in idx]
    return product_n(systems, SyncKappa(spec.base)) if len(systems) > 1 else systems[0]


def cmd_simulate(args, out):
    spec = load_spec(args.spec)
    res = run(initial_state(spec.components), spec.base, args.steps, seed=args.seed)
    w = TraceWriter(out, args.format)
    for o in res.trace:
        w.observation(int(o.time), o.observable)  # logical clock, always integral
    if res.deadlocked:
        w.deadlock()
        return EXIT_DEADLOCK
    return EXIT_OK


def _state_predicate(spec, text):
    index, _, value = text.partition("=")
    if not value:
        raise SpecError("state query must look like INDEX=JSON")
    try:
        i, target = int(index), term_from_json(json.loads(value))
    except (ValueError, json.JSONDecodeError):
        raise SpecError(f"bad state query {text!r}") from None
    if not 1 <= i <= len(spec.components):
        raise SpecError(f"component {i} out of range")
    return lambda s: s.states[i - 1] == target


def cmd_reach(args, out):
    spec = load_spec(args.spec)
    s0 = initial_state(spec.components)
    query = args.query
    predicate, on_label = None, None
    if query[0] == "sorted":
        predicate = p_sorted
    elif query[0] == "battery-out":
        predicate = p_battery_out
    elif query[0] == "event" and len(query) == 2:
        e = parse_event(query[1])
        on_label = lambda label: e in label
    elif query[0] == "state" and len(query) == 2:
        predicate = _state_predicate(spec, query[1])
    else:
        raise SpecError(f"unknown query {' '.join(query)!r}")
    if predicate is not None:
        predicate(s0)  # surfaces MissingComponent before searching
    res = reach(s0, spec.base, predicate, args.max_states, on_label=on_label)
    w = TraceWriter(out, args.format)
    if res.found:
        w.line(f"FOUND depth={len(res.trace)} states={res.visited}")
        w.trace(_labels(res.trace))
    else:
        w.line(f"EXHAUSTED states={res.visited}")
    return EXIT_OK


def _check_deadlock(spec, args, w):
    P = product_n(spec.components, SyncKappa(spec.base))
    v = is_deadlock_free(P, args.max_states)
    if v.status == "unknown":
        w.line(f"UNKNOWN states={v.explored}")
        return EXIT_LIMIT
    if v:
        w.line(f"DEADLOCK-FREE states={v.explored}")
        return EXIT_OK
    w.line(f"DEADLOCK states={v.explored} depth={len(v.trace)}")
    state = flatten_state(v.state, len(spec.components)) if len(spec.components) > 1 else (v.state,)
    for T, q in zip(spec.components, state):
        w.line(f"  {T.name}: {q!r}")
    w.trace(v.trace)
    return EXIT_OK


def _check_compat(spec, args, w):
    if len(args.args) != 2:
        raise SpecError("compatibility needs two component references")
    A, B = (_component(spec, t) for t in args.args)
    fast = shortcut_compatible(A, B, spec.base, args.max_states)
    v = check_compatible(A, B, SyncKappa(spec.base), args.max_states)
    if v.compatible:
        note = " (sufficient condition holds)" if fast else ""
        w.line(f"COMPATIBLE relation={len(v.relation)}{note}")
    else:
        pair, trace = v.counterexample
        w.line(f"NOT COMPATIBLE at {pair!r} depth={len(trace)}")
        w.trace(trace)
    return EXIT_OK


def _check_prefix(spec, args, w):
    if len(args.args) != 1:
        raise SpecError("prefix-closed needs one component reference")
    T = _component(spec, args.args[0])
    ok = is_prefix_closed_syntactic(T, args.max_states)
    w.line("PREFIX-CLOSED" if ok else "NOT PREFIX-CLOSED (some reachable state lacks an empty self-loop)")
    return EXIT_OK


def _check_algebra(spec, args, w):
    kappa = SyncKappa(spec.base)
    comps = spec.components
    d = args.depth
    failed = 0

    def report(what, ok):
        nonlocal failed
        failed += not ok
        w.line(f"{what}: {'ok' if ok else 'FAILED'}")

    for i, T in enumerate(comps, 1):
        report(f"idempotence {i}", bounded_lang_equal(product(T, T, kappa), T, d))
    for (i, A), (j, B) in combinations(enumerate(comps, 1), 2):
        report(f"commutativity {i} {j}",
               bounded_lang_equal(product(A, B, kappa), product(B, A, kappa), d))
    for (i, A), (j, B), (k, C) in combinations(enumerate(comps, 1), 3):
        report(f"associativity {i} {j} {k}",
               bounded_lang_equal(product(product(A, B, kappa), C, kappa),
                                  product(A, product(B, C, kappa), kappa), d))
    w.line(f"{failed} failed")
    return EXIT_OK


def cmd_check(args, out):
    spec = load_spec(args.spec)
    w = TraceWriter(out, args.format)
    analyses = {"deadlock": _check_deadlock, "compatibility": _check_compat,
                "prefix-closed": _check_prefix, "algebra": _check_algebra}
    if args.analysis not in analyses:
        raise SpecError(f"unknown analysis {args.analysis!r}")
    return analyses[args.analysis](spec, args, w)


def cmd_demo(args, out):
    if args.name is None:
        for name in sorted(DEMOS):
            out.write(name + "\n")
        return EXIT_OK
    out.write(json.dumps(demo_doc(args.name), indent=2) + "\n")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors; 2 is reserved for runtime deadlock
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tesys", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("spec", help="spec file path, or demo:<name>")
        sp.add_argument("--out", help="write the report here instead of stdout")
        sp.add_argument("--format", choices=("text", "jsonl"), default="text")
        sp.add_argument("--max-states", type=int, default=DEFAULT_STATE_CAP)

    sp = sub.add_parser("simulate", help="run the lazy composition for a number of steps")
    common(sp)
    sp.add_argument("--steps", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("reach", help="breadth-first reachability query")
    common(sp)
    sp.add_argument("query", nargs="+",
                    help="sorted | battery-out | event <e> | state <index>=<json>")
    sp.set_defaults(func=cmd_reach)

    sp = sub.add_parser("check", help="deadlock, compatibility, prefix-closure or algebra checks")
    common(sp)
    sp.add_argument("analysis", help="deadlock | compatibility | prefix-closed | algebra")
    sp.add_argument("args", nargs="*", help="component references such as 1 or 2x3")
    sp.add_argument("--depth", type=int, default=4)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("demo", help="list built-in demos or print one as a spec file")
    sp.add_argument("name", nargs="?")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_demo)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT
    if getattr(args, "steps", 0) is not None and getattr(args, "steps", 0) < 0:
        print("error: --steps must be non-negative", file=sys.stderr)
        return EXIT_INPUT
    if getattr(args, "max_states", 1) <= 0:
        print("error: --max-states must be positive", file=sys.stderr)
        return EXIT_INPUT
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        return args.func(args, out)
    except (SpecError, MissingComponent) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ExplosionLimit as exc:
        print(f"limit: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except TesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    finally:
        if out is not sys.stdout:
            out.close()


if __name__ == "__main__":
    sys.exit(main())
