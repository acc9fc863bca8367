"""Command-line front end.

Exit status discipline: 0 = positive verdict / success, 1 = negative
verdict, 2 = usage, I/O or model error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import dataclass, field

from .model import Arena, Fsm, ModelError, validate_arena, validate_fsm
from .bisim import is_bisimilar, max_bisimulation, naive_bisim_oracle, quotient
from .expand import DEFAULT_MAX_STATES, GuardExceeded, expand, state_count
from .compositional import (
    comp_bisimulation,
    is_comp_bisimilar,
    machine_classes,
    reduce as reduce_arena,
)
from .formats import ModelDocument, export_dot, parse, serialize


@dataclass
class RunReport:
    command: str
    inputs: list = field(default_factory=list)
    verdict: bool | None = None
    statistics: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)

    def to_dict(self):
        return {
            "command": self.command,
            "inputs": self.inputs,
            "verdict": self.verdict,
            "statistics": self.statistics,
            "outputs": self.outputs,
        }

    def render(self, as_json: bool) -> str:
        if as_json:
            return json.dumps(self.to_dict(), indent=2, sort_keys=True)
        lines = [f"command: {self.command}"]
        if self.verdict is not None:
            lines.append(f"verdict: {'yes' if self.verdict else 'no'}")
        for k in sorted(self.statistics):
            lines.append(f"{k}: {self.statistics[k]}")
        for p in self.outputs:
            lines.append(f"wrote: {p}")
        return "\n".join(lines)


class CliError(Exception):
    pass


def _load(path: str) -> ModelDocument:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}") from exc
    return parse(text, source=path)


def _get_fsm(doc: ModelDocument, name: str) -> Fsm:
    if name not in doc.fsms:
        raise CliError(f"no machine named {name!r} in {doc.source}")
    return doc.fsms[name]


def _get_arena(doc: ModelDocument, name: str) -> Arena:
    if name not in doc.arenas:
        raise CliError(f"no arena named {name!r} in {doc.source}")
    return doc.arenas[name]


def _write(path: str, text: str, report: RunReport):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    report.outputs.append(path)


def _write_fsm(path: str, fsm: Fsm, report: RunReport):
    doc = ModelDocument(fsms={fsm.id: fsm})
    _write(path, serialize(doc), report)


def cmd_check_bisim(args) -> tuple[int, RunReport]:
    doc = _load(args.file)
    m1 = _get_fsm(doc, args.m1)
    m2 = _get_fsm(doc, args.m2)
    report = RunReport("check-bisim", [args.file])
    t0 = time.perf_counter()
    verdict = is_bisimilar(m1, m2)
    rel = max_bisimulation(m1, m2)
    if args.oracle:
        if rel != naive_bisim_oracle(m1, m2):
            raise CliError("oracle divergence: refinement and fixpoint disagree")
        report.statistics["oracle"] = "agree"
    report.verdict = verdict
    report.statistics["pairs"] = len(rel)
    report.statistics["elapsed_ms"] = round((time.perf_counter() - t0) * 1000, 3)
    if args.witness:
        for a, b in sorted(rel):
            print(f"  {a} ~ {b}")
    return (0 if verdict else 1), report


def cmd_expand(args) -> tuple[int, RunReport]:
    doc = _load(args.file)
    arena = _get_arena(doc, args.arena)
    report = RunReport("expand", [args.file])
    mode = "accessible" if args.accessible else "full"
    t0 = time.perf_counter()
    try:
        comp = expand(arena, mode=mode, max_states=args.max_states)
    except GuardExceeded as exc:
        count = exc.count if exc.count is not None else state_count(arena)
        raise CliError(f"{exc} (analytic state count: {count})") from exc
    report.statistics["states"] = len(comp.states)
    report.statistics["transitions"] = len(comp.transitions)
    report.statistics["elapsed_ms"] = round((time.perf_counter() - t0) * 1000, 3)
    if args.output:
        _write_fsm(args.output, comp.fsm, report)
    return 0, report


def cmd_minimize(args) -> tuple[int, RunReport]:
    doc = _load(args.file)
    m = _get_fsm(doc, args.machine)
    report = RunReport("minimize", [args.file])
    t0 = time.perf_counter()
    q = quotient(m)
    report.statistics["states_in"] = len(m.states)
    report.statistics["states_out"] = len(q.states)
    report.statistics["transitions_out"] = len(q.transitions)
    report.statistics["elapsed_ms"] = round((time.perf_counter() - t0) * 1000, 3)
    if args.output:
        _write_fsm(args.output, q, report)
    return 0, report


def cmd_check_comp_bisim(args) -> tuple[int, RunReport]:
    doc1 = _load(args.file1)
    a1 = _get_arena(doc1, args.arena1)
    doc2 = _load(args.file2)
    a2 = _get_arena(doc2, args.arena2)
    report = RunReport("check-comp-bisim", [args.file1, args.file2])
    t0 = time.perf_counter()
    classes = machine_classes(a1, a2)
    verdict = is_comp_bisimilar(a1, a2)
    report.verdict = verdict
    report.statistics["classes"] = len(classes.classes)
    report.statistics["elapsed_ms"] = round((time.perf_counter() - t0) * 1000, 3)
    if args.witness:
        for k, block in enumerate(classes.classes):
            members = ", ".join(f"{'AB'[t]}:{v}" for t, v in sorted(block))
            print(f"  class {classes.token(k)}: {members}")
        for v1, v2 in sorted(comp_bisimulation(a1, a2)):
            print(f"  {v1} ~ {v2}")
    return (0 if verdict else 1), report


def cmd_reduce(args) -> tuple[int, RunReport]:
    doc = _load(args.file)
    arena = _get_arena(doc, args.arena)
    report = RunReport("reduce", [args.file])
    t0 = time.perf_counter()
    minimal, steps = reduce_arena(arena, max_states=args.max_states)
    report.statistics.update(steps)
    report.statistics["elapsed_ms"] = round((time.perf_counter() - t0) * 1000, 3)
    if args.output:
        _write_fsm(args.output, minimal, report)
    return 0, report


def cmd_classes(args) -> tuple[int, RunReport]:
    doc = _load(args.file)
    arena = _get_arena(doc, args.arena)
    report = RunReport("classes", [args.file])
    classes = machine_classes(arena)
    report.statistics["classes"] = len(classes.classes)
    report.statistics["vertices"] = len(arena.vertices)
    for k, block in enumerate(classes.classes):
        members = ", ".join(v for _, v in sorted(block))
        print(f"  class {classes.token(k)}: {members}")
    return 0, report


def cmd_export_dot(args) -> tuple[int, RunReport]:
    doc = _load(args.file)
    if args.name in doc.fsms:
        obj = doc.fsms[args.name]
    elif args.name in doc.arenas:
        obj = doc.arenas[args.name]
    else:
        raise CliError(f"no machine or arena named {args.name!r} in {args.file}")
    report = RunReport("export-dot", [args.file])
    text = export_dot(obj)
    if args.output:
        _write(args.output, text, report)
    else:
        print(text, end="")
    return 0, report


def _bench_templates() -> tuple[Fsm, Fsm]:
    ping = validate_fsm(
        "ping", ["p", "q"], ["tick"], ["hot"],
        {"p": [], "q": ["hot"]},
        [("p", ["tick"], "q"), ("q", [], "p")],
        initial="p",
    )
    pong = validate_fsm(
        "pong", ["p", "q"], ["tock"], ["cold"],
        {"p": [], "q": ["cold"]},
        [("p", ["tock"], "q"), ("q", [], "p")],
        initial="p",
    )
    return ping, pong


def _bench_arena(family: str, n: int) -> Arena:
    ping, pong = _bench_templates()
    vertices = {f"v{i:03d}": (ping if i % 2 == 0 else pong) for i in range(n)}
    names = sorted(vertices)
    if n == 1:
        edges = []
    elif family == "star":
        edges = [(names[i], names[0]) for i in range(1, n)]
    else:  # ring
        edges = [(names[i], names[(i + 1) % n]) for i in range(n)]
    return validate_arena(f"{family}{n:03d}", vertices, edges)


def cmd_bench_scaling(args) -> tuple[int, RunReport]:
    report = RunReport("bench-scaling")
    rows = []
    for n in range(1, args.n_max + 1):
        arena = _bench_arena(args.family, n)
        t0 = time.perf_counter()
        ok = is_comp_bisimilar(arena, arena)
        elapsed = (time.perf_counter() - t0) * 1000
        if not ok:
            raise CliError(f"self-check failed at N={n}")
        rows.append(
            {
                "N": n,
                "product_states": state_count(arena),
                "induced_states": len(arena.vertices),
                "comp_check_ms": round(elapsed, 3),
            }
        )
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            writer = csv.DictWriter(
                fh, fieldnames=["N", "product_states", "induced_states", "comp_check_ms"]
            )
            writer.writeheader()
            writer.writerows(rows)
        report.outputs.append(args.csv)
    report.statistics["rows"] = len(rows)
    report.statistics["max_product_states"] = rows[-1]["product_states"]
    report.statistics["last_comp_check_ms"] = rows[-1]["comp_check_ms"]
    return 0, report


def cmd_stats(args) -> tuple[int, RunReport]:
    doc = _load(args.file)
    report = RunReport("stats", [args.file])
    for name, fsm in doc.fsms.items():
        report.statistics[f"fsm.{name}.states"] = len(fsm.states)
        report.statistics[f"fsm.{name}.transitions"] = len(fsm.transitions)
    for name, arena in doc.arenas.items():
        report.statistics[f"arena.{name}.vertices"] = len(arena.vertices)
        report.statistics[f"arena.{name}.edges"] = len(arena.edges)
        report.statistics[f"arena.{name}.product_states"] = state_count(arena)
    return 0, report


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="afsm", description="Arenas of finite state machines toolkit"
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p, output=True):
        p.add_argument("--json", action="store_true", help="machine-readable report")
        if output:
            p.add_argument("-o", "--output", help="output file path")

    p = sub.add_parser("check-bisim", help="decide bisimilarity of two machines")
    p.add_argument("file")
    p.add_argument("m1")
    p.add_argument("m2")
    p.add_argument("--witness", action="store_true", help="print the maximal relation")
    p.add_argument("--oracle", action="store_true", help="cross-check with the brute-force oracle")
    common(p, output=False)
    p.set_defaults(func=cmd_check_bisim)

    p = sub.add_parser("expand", help="expand an arena to its flat machine")
    p.add_argument("file")
    p.add_argument("arena")
    p.add_argument("--accessible", action="store_true", help="reachable states only")
    p.add_argument("--max-states", type=int, default=DEFAULT_MAX_STATES)
    common(p)
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("minimize", help="bisimulation quotient of a machine")
    p.add_argument("file")
    p.add_argument("machine")
    common(p)
    p.set_defaults(func=cmd_minimize)

    p = sub.add_parser("check-comp-bisim", help="decide compositional bisimilarity of two arenas")
    p.add_argument("file1")
    p.add_argument("arena1")
    p.add_argument("file2")
    p.add_argument("arena2")
    p.add_argument("--witness", action="store_true", help="print classes and vertex relation")
    common(p, output=False)
    p.set_defaults(func=cmd_check_comp_bisim)

    p = sub.add_parser("reduce", help="five-step compositional reduction of an arena")
    p.add_argument("file")
    p.add_argument("arena")
    p.add_argument("--max-states", type=int, default=DEFAULT_MAX_STATES)
    common(p)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("classes", help="machine-equivalence classes of an arena")
    p.add_argument("file")
    p.add_argument("arena")
    common(p, output=False)
    p.set_defaults(func=cmd_classes)

    p = sub.add_parser("export-dot", help="GraphViz rendering of a machine or arena")
    p.add_argument("file")
    p.add_argument("name")
    common(p)
    p.set_defaults(func=cmd_export_dot)

    p = sub.add_parser("bench-scaling", help="exponential vs polynomial scaling evidence")
    p.add_argument("--family", choices=["star", "ring"], default="star")
    p.add_argument("--n-max", type=int, default=20)
    p.add_argument("--csv", help="CSV output path")
    common(p, output=False)
    p.set_defaults(func=cmd_bench_scaling)

    p = sub.add_parser("stats", help="size statistics of a model file")
    p.add_argument("file")
    common(p, output=False)
    p.set_defaults(func=cmd_stats)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code, report = args.func(args)
    except (CliError, ModelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(report.render(args.json))
    return code


def main() -> None:
    sys.exit(run())
