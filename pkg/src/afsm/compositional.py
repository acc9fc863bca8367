"""Compositional bisimulation of arenas.

Vertices are grouped into machine-equivalence classes; each arena is then
summarised by a small induced machine (one state per vertex, outputs =
class tokens, edges relabelled with the empty input set).  Compositional
bisimilarity of two arenas is totality of the maximal bisimulation between
their induced machines, which never touches the product state space.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import Arena, Fsm, ModelError, validate_arena
from .bisim import (
    InitialStateMismatch,
    is_bisimilar,
    max_bisimulation,
    quotient,
    self_partition,
)
from .expand import DEFAULT_MAX_STATES, expand


class CompositionalError(ModelError):
    pass


class ClassCoverageGap(CompositionalError):
    """A vertex is not covered by the supplied machine classes."""


class QuotientSelfLoop(CompositionalError):
    """An arena edge connects two vertices of the same quotient block."""


@dataclass(frozen=True)
class MachineClasses:
    """Partition of the vertices of one or two arenas by machine bisimilarity.

    Vertices are tagged (arena_index, vertex_id); classes are ordered by
    least member, and ``token(k)`` names class k for use as an output
    symbol of the induced machines.
    """

    classes: tuple  # of frozensets of (arena_index, vertex_id)
    class_index: dict  # (arena_index, vertex_id) -> ordinal

    def token(self, k: int) -> str:
        return f"C{k}"

    def tokens(self) -> tuple:
        return tuple(self.token(k) for k in range(len(self.classes)))

    def token_of(self, arena_index: int, vertex_id: str) -> str:
        return self.token(self.class_index[(arena_index, vertex_id)])


def machine_classes(a1: Arena, a2: Arena | None = None) -> MachineClasses:
    """Group all vertices of one or two arenas by machine bisimilarity."""
    tagged = [(0, v, fsm) for v, fsm in a1.vertices]
    if a2 is not None:
        tagged += [(1, v, fsm) for v, fsm in a2.vertices]

    with_initial = [fsm.initial is not None for _, _, fsm in tagged]
    if any(with_initial) and not all(with_initial):
        raise InitialStateMismatch(
            "machines disagree on declaring initial states; classes would be ill-defined"
        )

    # bucket by invariants that bisimilar machines must share, then run
    # the pairwise check only against one representative per class
    buckets = {}
    for tag, v, fsm in tagged:
        if fsm.initial is not None:
            key = tuple(sorted(fsm.output_map[fsm.initial]))
        else:
            key = None
        buckets.setdefault(key, []).append((tag, v, fsm))

    reps = []  # (class ordinal, representative fsm)
    member_class = {}
    classes = []
    for key in buckets:
        local_reps = []
        for tag, v, fsm in buckets[key]:
            placed = False
            for k, rep in local_reps:
                if fsm is rep or fsm == rep or is_bisimilar(fsm, rep):
                    member_class[(tag, v)] = k
                    classes[k].append((tag, v))
                    placed = True
                    break
            if not placed:
                k = len(classes)
                classes.append([(tag, v)])
                local_reps.append((k, fsm))
                member_class[(tag, v)] = k

    # canonical order: by least member of each class
    order = sorted(range(len(classes)), key=lambda k: min(classes[k]))
    renumber = {old: new for new, old in enumerate(order)}
    final_classes = tuple(frozenset(classes[old]) for old in order)
    index = {m: renumber[k] for m, k in member_class.items()}
    return MachineClasses(classes=final_classes, class_index=index)


def induce_fsm(arena: Arena, classes: MachineClasses, arena_index: int = 0) -> Fsm:
    """The induced machine of an arena: one state per vertex.

    Outputs are the class tokens, every transition carries the empty input
    set, and there is no initial state (the decision procedure uses the
    totality convention).
    """
    for v, _ in arena.vertices:
        if (arena_index, v) not in classes.class_index:
            raise ClassCoverageGap(
                f"arena {arena.id}: vertex {v!r} is not covered by the machine classes"
            )
    empty = frozenset()
    return Fsm(
        id=f"induced_{arena.id}",
        states=arena.vertex_ids,
        initial=None,
        inputs=empty,
        outputs=frozenset(classes.tokens()),
        output_map={v: frozenset({classes.token_of(arena_index, v)}) for v in arena.vertex_ids},
        transitions=tuple((a, empty, b) for a, b in arena.edges),
    )


def comp_bisimulation(a1: Arena, a2: Arena) -> frozenset:
    """The maximal compositional bisimulation as vertex pairs of a1 x a2."""
    classes = machine_classes(a1, a2)
    f1 = induce_fsm(a1, classes, 0)
    f2 = induce_fsm(a2, classes, 1)
    return max_bisimulation(f1, f2)


def is_comp_bisimilar(a1: Arena, a2: Arena) -> bool:
    """Decide compositional bisimilarity via the induced machines."""
    rel = comp_bisimulation(a1, a2)
    left = {a for a, _ in rel}
    right = {b for _, b in rel}
    return left == set(a1.vertex_ids) and right == set(a2.vertex_ids)


def arena_vertex_partition(arena: Arena) -> tuple:
    """Blocks of the maximal compositional self-bisimulation of an arena.

    Machine classes alone are too coarse: two vertices carrying bisimilar
    machines may still sit in different network contexts.  The partition is
    therefore the self-bisimulation of the induced machine, which refines
    the machine classes by edge structure.
    """
    classes = machine_classes(arena)
    return self_partition(induce_fsm(arena, classes, 0))


def arena_quotient(arena: Arena) -> Arena:
    """The minimal compositionally bisimilar arena.

    One vertex per block of the compositional self-bisimulation,
    represented by the block's least member with its machine reused
    verbatim.  An arena edge inside a single block would force a self-loop
    in the quotient, which the model forbids, so it is a hard error.
    """
    rep = {}
    for block in arena_vertex_partition(arena):
        least = min(block)
        for v in block:
            rep[v] = least
    machines = dict(arena.vertices)
    vertices = {least: machines[least] for least in set(rep.values())}
    edges = set()
    for a, b in arena.edges:
        ra, rb = rep[a], rep[b]
        if ra == rb:
            raise QuotientSelfLoop(
                f"arena {arena.id}: edge ({a!r}, {b!r}) connects two vertices of one block"
            )
        edges.add((ra, rb))
    return validate_arena(f"{arena.id}_min", vertices, edges)


def reduce(arena: Arena, max_states: int = DEFAULT_MAX_STATES):
    """Five-step reduction: classes, arena quotient, expansion, quotient.

    Returns (minimal machine, report) where the report records the size of
    every intermediate step.
    """
    classes = machine_classes(arena)
    a_min = arena_quotient(arena)
    composite = expand(a_min, mode="full", max_states=max_states)
    minimal = quotient(composite.fsm)
    report = {
        "classes": len(classes.classes),
        "quotient_vertices": len(a_min.vertices),
        "expanded_states": len(composite.states),
        "expanded_transitions": len(composite.transitions),
        "final_states": len(minimal.states),
        "final_transitions": len(minimal.transitions),
    }
    return minimal, report


def verify_theorem_4_2(a1: Arena, a2: Arena, max_states: int = DEFAULT_MAX_STATES) -> dict:
    """Check that compositional bisimilarity implies expansion bisimilarity.

    Test-harness operation.  The implication is *not* a theorem of this
    semantics: merging bisimilar vertices can remove composite labels
    that only several concurrent copies of a machine can produce (labels
    are unions of the component labels), so ``consistent = False`` is a
    genuine counterexample, not necessarily an implementation bug.  See
    the compositional tests for the minimal two-copies-vs-one example.
    """
    comp = is_comp_bisimilar(a1, a2)
    m1 = expand(a1, mode="full", max_states=max_states).fsm
    m2 = expand(a2, mode="full", max_states=max_states).fsm
    flat = is_bisimilar(m1, m2)
    return {"comp": comp, "flat": flat, "consistent": (not comp) or flat}
