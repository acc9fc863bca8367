"""The `.afsm` textual model format, canonical serialization and DOT export.

One directive per line; ``#`` starts a comment, blank lines are ignored.

    fsm <name>
      inputs {<sym>,...}
      outputs {<sym>,...}
      state <id> {<output-sym>,...}
      initial <id>
      trans <src> {<sym>,...} <dst>
    end
    arena <name>
      node <vertex-id> <fsm-name>
      edge <vertex-id> <vertex-id>
    end

Canonical output sorts everything (definitions by name, states and
transitions lexicographically, set members alphabetically), uses UTF-8,
LF line endings and two-space indentation, so serialization is a fixpoint
of parse-then-serialize.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .model import (
    Arena,
    Fsm,
    MissingState,
    ModelError,
    TOKEN_RE,
    validate_arena,
    validate_fsm,
)

_SET_RE = re.compile(r"\{([^{}]*)\}\Z")


class FormatError(ModelError):
    """A parse error carrying the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DuplicateName(FormatError):
    pass


class MissingStateAtLine(FormatError, MissingState):
    """Undeclared state referenced by a transition directive."""


@dataclass
class ModelDocument:
    """An ordered collection of machine and arena definitions."""

    fsms: dict = field(default_factory=dict)  # name -> Fsm
    arenas: dict = field(default_factory=dict)  # name -> Arena
    arena_nodes: dict = field(default_factory=dict)  # arena name -> {vertex: fsm name}
    source: str | None = None

    def __eq__(self, other):
        if not isinstance(other, ModelDocument):
            return NotImplemented
        return self.fsms == other.fsms and self.arenas == other.arenas


def _split_directive(line: str):
    # tokens are runs of non-space; sets keep their braces as one token
    return line.split()


def _parse_set(tok: str, line_no: int) -> list:
    m = _SET_RE.match(tok)
    if not m:
        raise FormatError(f"expected a symbol set like {{a,b}}, got {tok!r}", line_no)
    body = m.group(1).strip()
    if not body:
        return []
    parts = [p.strip() for p in body.split(",")]
    for p in parts:
        if not TOKEN_RE.match(p):
            raise FormatError(f"invalid symbol {p!r}", line_no)
    return parts


def _require_token(tok: str, what: str, line_no: int) -> str:
    if not TOKEN_RE.match(tok):
        raise FormatError(f"invalid {what} {tok!r}", line_no)
    return tok


def parse(text: str, source: str | None = None) -> ModelDocument:
    """Parse a document; raises ``FormatError`` with a line number on failure."""
    doc = ModelDocument(source=source)
    block = None  # None | ("fsm", name, acc) | ("arena", name, acc)

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = _split_directive(line)
        kw = toks[0]

        if kw in ("fsm", "arena"):
            if block is not None:
                raise FormatError(f"'{kw}' inside an open block; missing 'end'?", line_no)
            if len(toks) != 2:
                raise FormatError(f"'{kw}' takes exactly one name", line_no)
            name = _require_token(toks[1], f"{kw} name", line_no)
            if name in doc.fsms or name in doc.arenas:
                raise DuplicateName(f"duplicate definition of {name!r}", line_no)
            if kw == "fsm":
                block = ("fsm", name, {
                    "inputs": None, "outputs": None, "states": {},
                    "initial": None, "trans": [], "line": line_no,
                })
            else:
                block = ("arena", name, {"nodes": {}, "edges": [], "line": line_no})
            continue

        if block is None:
            raise FormatError(f"directive {kw!r} outside any block", line_no)

        kind, name, acc = block

        if kw == "end":
            if len(toks) != 1:
                raise FormatError("'end' takes no arguments", line_no)
            try:
                if kind == "fsm":
                    doc.fsms[name] = validate_fsm(
                        name,
                        acc["states"].keys(),
                        acc["inputs"] or [],
                        acc["outputs"] or [],
                        acc["states"],
                        acc["trans"],
                        initial=acc["initial"],
                    )
                else:
                    vertices = {}
                    for v, fsm_name in acc["nodes"].items():
                        if fsm_name not in doc.fsms:
                            raise FormatError(
                                f"arena {name!r}: unknown machine {fsm_name!r}", acc["line"]
                            )
                        vertices[v] = doc.fsms[fsm_name]
                    doc.arenas[name] = validate_arena(name, vertices, acc["edges"])
                    doc.arena_nodes[name] = dict(acc["nodes"])
            except FormatError:
                raise
            except ModelError as exc:
                raise FormatError(str(exc), acc["line"]) from exc
            block = None
            continue

        if kind == "fsm":
            if kw in ("inputs", "outputs"):
                if len(toks) != 2:
                    raise FormatError(f"'{kw}' takes one symbol set", line_no)
                if acc[kw] is not None:
                    raise FormatError(f"duplicate '{kw}' directive", line_no)
                acc[kw] = _parse_set(toks[1], line_no)
            elif kw == "state":
                if len(toks) != 3:
                    raise FormatError("'state' takes an id and an output set", line_no)
                sid = _require_token(toks[1], "state id", line_no)
                if sid in acc["states"]:
                    raise DuplicateName(f"duplicate state {sid!r}", line_no)
                acc["states"][sid] = _parse_set(toks[2], line_no)
            elif kw == "initial":
                if len(toks) != 2:
                    raise FormatError("'initial' takes one state id", line_no)
                if acc["initial"] is not None:
                    raise FormatError("at most one 'initial' directive is allowed", line_no)
                acc["initial"] = _require_token(toks[1], "state id", line_no)
            elif kw == "trans":
                if len(toks) != 4:
                    raise FormatError("'trans' takes source, label set, target", line_no)
                src = _require_token(toks[1], "state id", line_no)
                dst = _require_token(toks[3], "state id", line_no)
                if src not in acc["states"]:
                    raise MissingStateAtLine(
                        f"transition source {src!r} is not a declared state", line_no
                    )
                if dst not in acc["states"]:
                    raise MissingStateAtLine(
                        f"transition target {dst!r} is not a declared state", line_no
                    )
                acc["trans"].append((src, _parse_set(toks[2], line_no), dst))
            else:
                raise FormatError(f"unknown directive {kw!r} in fsm block", line_no)
        else:
            if kw == "node":
                if len(toks) != 3:
                    raise FormatError("'node' takes a vertex id and a machine name", line_no)
                vid = _require_token(toks[1], "vertex id", line_no)
                if vid in acc["nodes"]:
                    raise DuplicateName(f"duplicate vertex {vid!r}", line_no)
                acc["nodes"][vid] = _require_token(toks[2], "machine name", line_no)
            elif kw == "edge":
                if len(toks) != 3:
                    raise FormatError("'edge' takes two vertex ids", line_no)
                acc["edges"].append(
                    (
                        _require_token(toks[1], "vertex id", line_no),
                        _require_token(toks[2], "vertex id", line_no),
                    )
                )
            else:
                raise FormatError(f"unknown directive {kw!r} in arena block", line_no)

    if block is not None:
        raise FormatError(f"unterminated {block[0]} block {block[1]!r}", len(text.splitlines()))
    return doc


def _fmt_set(symbols) -> str:
    return "{" + ",".join(sorted(symbols)) + "}"


def serialize_fsm(fsm: Fsm) -> str:
    lines = [f"fsm {fsm.id}"]
    lines.append(f"  inputs {_fmt_set(fsm.inputs)}")
    lines.append(f"  outputs {_fmt_set(fsm.outputs)}")
    for s in fsm.states:
        lines.append(f"  state {s} {_fmt_set(fsm.output_map[s])}")
    if fsm.initial is not None:
        lines.append(f"  initial {fsm.initial}")
    for src, label, dst in fsm.transitions:
        lines.append(f"  trans {src} {_fmt_set(label)} {dst}")
    lines.append("end")
    return "\n".join(lines)


def serialize_arena(arena: Arena, fsm_names: dict | None = None) -> str:
    names = fsm_names or {v: fsm.id for v, fsm in arena.vertices}
    lines = [f"arena {arena.id}"]
    for v, _ in arena.vertices:
        lines.append(f"  node {v} {names[v]}")
    for a, b in arena.edges:
        lines.append(f"  edge {a} {b}")
    lines.append("end")
    return "\n".join(lines)


def serialize(doc: ModelDocument) -> str:
    """Canonical textual form of a document (a parse/serialize fixpoint)."""
    chunks = [serialize_fsm(doc.fsms[name]) for name in sorted(doc.fsms)]
    chunks += [
        serialize_arena(doc.arenas[name], doc.arena_nodes.get(name))
        for name in sorted(doc.arenas)
    ]
    return "\n\n".join(chunks) + "\n"


def _dot_quote(s: str) -> str:
    return '"' + s.replace('"', r"\"") + '"'


def export_dot(obj) -> str:
    """Render a machine or an arena as a GraphViz digraph."""
    if isinstance(obj, Fsm):
        lines = [f"digraph {_dot_quote(obj.id)} {{", "  rankdir=LR;"]
        for s in obj.states:
            label = f"{s} / {_fmt_set(obj.output_map[s])}"
            lines.append(f"  {_dot_quote(s)} [label={_dot_quote(label)}];")
        if obj.initial is not None:
            lines.append('  __start__ [shape=point, label=""];')
            lines.append(f"  __start__ -> {_dot_quote(obj.initial)};")
        for src, label, dst in obj.transitions:
            lines.append(
                f"  {_dot_quote(src)} -> {_dot_quote(dst)} [label={_dot_quote(_fmt_set(label))}];"
            )
        lines.append("}")
        return "\n".join(lines) + "\n"
    if isinstance(obj, Arena):
        lines = [f"digraph {_dot_quote(obj.id)} {{"]
        for v, fsm in obj.vertices:
            lines.append(f"  {_dot_quote(v)} [shape=box, label={_dot_quote(f'{v} : {fsm.id}')}];")
        for a, b in obj.edges:
            lines.append(f"  {_dot_quote(a)} -> {_dot_quote(b)};")
        lines.append("}")
        return "\n".join(lines) + "\n"
    raise TypeError(f"cannot export {type(obj).__name__} as DOT")
