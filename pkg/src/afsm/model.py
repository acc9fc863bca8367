"""Core domain types: Moore-style machines with set-valued labels, and arenas.

An ``Fsm`` is a tuple (states, initial, inputs, outputs, output map,
transitions) where every transition is labelled with a *set* of input
symbols and every state emits a *set* of output symbols.  The empty set is
a legal label (an internal step) and a legal output (an invisible state).

An ``Arena`` is a self-loop-free directed graph whose vertices each carry
an ``Fsm``.  Distinct vertices may share one machine definition.

All types are immutable after validation and canonically ordered, so that
serialization and downstream computations are deterministic.
"""

from __future__ import annotations

import re
import sys
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

TOKEN_RE = re.compile(r"[A-Za-z0-9_.*'+-]+\Z")

# A symbol is an interned token string; a symbol set is a frozenset of them.
SymbolSet = frozenset
Transition = tuple  # (src, label: SymbolSet, dst)


class ModelError(ValueError):
    """Base class for all model validation errors."""


class EmptyStateSet(ModelError):
    pass


class BadInitial(ModelError):
    pass


class MissingState(ModelError):
    pass


class AlphabetViolation(ModelError):
    pass


class BadSymbol(ModelError):
    pass


class SelfLoop(ModelError):
    pass


class DanglingEdge(ModelError):
    pass


class UnknownMachine(ModelError):
    pass


class UnknownVertex(ModelError):
    pass


def symbol(name: str) -> str:
    """Validate and intern a single symbol token."""
    if not isinstance(name, str) or not TOKEN_RE.match(name):
        raise BadSymbol(f"invalid symbol token: {name!r}")
    return sys.intern(name)


def symbol_set(names: Iterable[str]) -> SymbolSet:
    """Validate and intern a set of symbol tokens."""
    return frozenset(symbol(n) for n in names)


def _token(kind: str, name: str) -> str:
    if not isinstance(name, str) or not TOKEN_RE.match(name):
        raise ModelError(f"invalid {kind} token: {name!r}")
    return sys.intern(name)


def _label_key(label: SymbolSet) -> tuple:
    return tuple(sorted(label))


@dataclass(frozen=True)
class Fsm:
    """A validated, canonically ordered finite state machine.

    Construct through :func:`validate_fsm`; the constructor itself trusts
    its arguments.
    """

    id: str
    states: tuple
    initial: Optional[str]
    inputs: SymbolSet
    outputs: SymbolSet
    output_map: Mapping[str, SymbolSet]
    transitions: tuple  # of (src, label, dst), canonically sorted

    _succ: dict = field(default=None, repr=False, compare=False)

    def successors(self, state: str):
        """Outgoing (label, dst) pairs of ``state``."""
        if self._succ is None:
            succ = {s: [] for s in self.states}
            for src, label, dst in self.transitions:
                succ[src].append((label, dst))
            object.__setattr__(self, "_succ", succ)
        return self._succ[state]

    def renamed(self, new_id: str, mapping: Mapping[str, str]) -> "Fsm":
        """Copy of this machine with states renamed through ``mapping``."""
        return validate_fsm(
            new_id,
            [mapping[s] for s in self.states],
            self.inputs,
            self.outputs,
            {mapping[s]: out for s, out in self.output_map.items()},
            [(mapping[a], u, mapping[b]) for a, u, b in self.transitions],
            initial=None if self.initial is None else mapping[self.initial],
        )


def validate_fsm(
    fsm_id: str,
    states: Iterable[str],
    inputs: Iterable[str],
    outputs: Iterable[str],
    output_map: Mapping[str, Iterable[str]],
    transitions: Iterable[tuple],
    initial: Optional[str] = None,
) -> Fsm:
    """Validate a raw machine description and return a canonical ``Fsm``.

    States and transitions are ordered lexicographically, so equal raw
    descriptions always produce identical machines.
    """
    fsm_id = _token("fsm id", fsm_id)
    state_list = sorted({_token("state id", s) for s in states})
    if not state_list:
        raise EmptyStateSet(f"fsm {fsm_id}: at least one state is required")
    state_set = set(state_list)

    inp = symbol_set(inputs)
    out = symbol_set(outputs)

    if initial is not None:
        initial = _token("state id", initial)
        if initial not in state_set:
            raise BadInitial(f"fsm {fsm_id}: initial state {initial!r} is not declared")

    omap = {}
    for s in state_list:
        if s not in output_map:
            raise MissingState(f"fsm {fsm_id}: no output set declared for state {s!r}")
        value = symbol_set(output_map[s])
        extra = value - out
        if extra:
            raise AlphabetViolation(
                f"fsm {fsm_id}: output of state {s!r} uses undeclared symbols {sorted(extra)}"
            )
        omap[s] = value
    for s in output_map:
        if _token("state id", s) not in state_set:
            raise MissingState(f"fsm {fsm_id}: output map mentions unknown state {s!r}")

    trans = set()
    for src, label, dst in transitions:
        src = _token("state id", src)
        dst = _token("state id", dst)
        if src not in state_set:
            raise MissingState(f"fsm {fsm_id}: transition source {src!r} is not declared")
        if dst not in state_set:
            raise MissingState(f"fsm {fsm_id}: transition target {dst!r} is not declared")
        label = symbol_set(label)
        extra = label - inp
        if extra:
            raise AlphabetViolation(
                f"fsm {fsm_id}: transition label of {src!r} uses undeclared symbols {sorted(extra)}"
            )
        trans.add((src, label, dst))

    ordered = tuple(sorted(trans, key=lambda t: (t[0], _label_key(t[1]), t[2])))
    return Fsm(fsm_id, tuple(state_list), initial, inp, out, omap, ordered)


@dataclass(frozen=True)
class Arena:
    """A validated arena: vertices carrying machines, self-loop-free edges."""

    id: str
    vertices: tuple  # of (vertex_id, Fsm), sorted by vertex id
    edges: tuple  # of (src_vertex, dst_vertex), sorted

    @property
    def vertex_ids(self) -> tuple:
        return tuple(v for v, _ in self.vertices)

    def machine(self, v: str) -> Fsm:
        for vid, fsm in self.vertices:
            if vid == v:
                return fsm
        raise UnknownVertex(f"arena {self.id}: unknown vertex {v!r}")


def validate_arena(
    arena_id: str,
    vertices: Mapping[str, Fsm],
    edges: Iterable[tuple],
) -> Arena:
    """Validate a raw arena description against a library of machines."""
    arena_id = _token("arena id", arena_id)
    if not vertices:
        raise ModelError(f"arena {arena_id}: at least one vertex is required")
    vmap = {}
    for v, fsm in vertices.items():
        v = _token("vertex id", v)
        if not isinstance(fsm, Fsm):
            raise UnknownMachine(f"arena {arena_id}: vertex {v!r} has no machine attached")
        vmap[v] = fsm

    edge_set = set()
    for a, b in edges:
        a = _token("vertex id", a)
        b = _token("vertex id", b)
        if a == b:
            raise SelfLoop(f"arena {arena_id}: self-loop on vertex {a!r}")
        if a not in vmap:
            raise DanglingEdge(f"arena {arena_id}: edge source {a!r} is not a vertex")
        if b not in vmap:
            raise DanglingEdge(f"arena {arena_id}: edge target {b!r} is not a vertex")
        edge_set.add((a, b))

    ordered_vertices = tuple(sorted(vmap.items()))
    return Arena(arena_id, ordered_vertices, tuple(sorted(edge_set)))


def predecessors(arena: Arena, v: str) -> frozenset:
    """Sources of the communication edges pointing into vertex ``v``."""
    if v not in dict(arena.vertices):
        raise UnknownVertex(f"arena {arena.id}: unknown vertex {v!r}")
    return frozenset(a for a, b in arena.edges if b == v)
