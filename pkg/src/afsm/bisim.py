"""Bisimulation equivalence: maximal relation, decision, quotient, isomorphism.

The maximal bisimulation is computed by partition refinement on the
disjoint union of the two machines: states start grouped by output set and
blocks are split by their outgoing (label, target-block) signatures until
the partition is stable.  A brute-force greatest-fixpoint oracle over the
dense pair table is provided for cross-checking.
"""

from __future__ import annotations

from typing import Optional

from .model import Fsm, _label_key


class BisimError(ValueError):
    pass


class InitialStateMismatch(BisimError):
    """One machine declares an initial state and the other does not."""


class TooLarge(BisimError):
    """Input exceeds the dense pair-table guard of the oracle."""


class TooLargeForGeneralIso(BisimError):
    """Backtracking isomorphism guard exceeded on a non-minimal machine."""


def _refine(n_states, outputs, succ):
    """Partition states 0..n-1 by bisimilarity.

    ``outputs[s]`` is the output set of state ``s``; ``succ[s]`` is a list
    of (label_id, target) pairs.  Returns a list mapping state -> block id.
    Each pass recomputes every state's signature (the set of label/block
    pairs it can move to), so a pass costs O(transitions) and the loop
    stops as soon as no block splits.
    """
    block_of = {}
    block = [0] * n_states
    for s in range(n_states):
        block[s] = block_of.setdefault(outputs[s], len(block_of))
    n_blocks = len(block_of)

    while True:
        new_of = {}
        new_block = [0] * n_states
        for s in range(n_states):
            sig = (block[s], frozenset((lab, block[d]) for lab, d in succ[s]))
            b = new_of.get(sig)
            if b is None:
                b = len(new_of)
                new_of[sig] = b
            new_block[s] = b
        if len(new_of) == n_blocks:
            return block
        block = new_block
        n_blocks = len(new_of)


def _union_index(m1: Fsm, m2: Fsm):
    """Index the disjoint union of two machines for refinement.

    Returns (n, outputs, succ, offsets) where states of ``m1`` occupy
    0..|X1|-1 and states of ``m2`` follow.
    """
    idx1 = {s: i for i, s in enumerate(m1.states)}
    off = len(m1.states)
    idx2 = {s: i + off for i, s in enumerate(m2.states)}
    n = off + len(m2.states)

    labels = {}

    def lab_id(label):
        i = labels.get(label)
        if i is None:
            i = len(labels)
            labels[label] = i
        return i

    outputs = [None] * n
    succ = [[] for _ in range(n)]
    for s in m1.states:
        outputs[idx1[s]] = m1.output_map[s]
    for s in m2.states:
        outputs[idx2[s]] = m2.output_map[s]
    for src, label, dst in m1.transitions:
        succ[idx1[src]].append((lab_id(label), idx1[dst]))
    for src, label, dst in m2.transitions:
        succ[idx2[src]].append((lab_id(label), idx2[dst]))
    return n, outputs, succ, idx1, idx2


def max_bisimulation(m1: Fsm, m2: Fsm) -> frozenset:
    """The maximal bisimulation relation R*(m1, m2) as a set of state pairs.

    Two states are related iff they end up in the same block of the
    refined partition of the disjoint union.
    """
    n, outputs, succ, idx1, idx2 = _union_index(m1, m2)
    block = _refine(n, outputs, succ)
    by_block = {}
    for s, i in idx2.items():
        by_block.setdefault(block[i], []).append(s)
    pairs = set()
    for s1, i in idx1.items():
        for s2 in by_block.get(block[i], ()):
            pairs.add((s1, s2))
    return frozenset(pairs)


def self_partition(m: Fsm) -> tuple:
    """Blocks of the maximal self-bisimulation R*(m, m), canonically ordered.

    Blocks are frozensets of state ids, sorted by their least member.
    """
    idx = {s: i for i, s in enumerate(m.states)}
    labels = {}
    succ = [[] for _ in m.states]
    for src, label, dst in m.transitions:
        i = labels.setdefault(label, len(labels))
        succ[idx[src]].append((i, idx[dst]))
    outputs = [m.output_map[s] for s in m.states]
    block = _refine(len(m.states), outputs, succ)
    groups = {}
    for s in m.states:
        groups.setdefault(block[idx[s]], []).append(s)
    blocks = [frozenset(g) for g in groups.values()]
    return tuple(sorted(blocks, key=min))


def naive_bisim_oracle(m1: Fsm, m2: Fsm, guard: int = 10**6) -> frozenset:
    """Greatest-fixpoint reference implementation over the dense pair table.

    Starts from all output-compatible pairs and deletes pairs whose
    transitions cannot be matched, until nothing changes.  Independent of
    the partition-refinement path; used as its oracle in tests.
    """
    if len(m1.states) * len(m2.states) > guard:
        raise TooLarge(
            f"{len(m1.states)} x {len(m2.states)} pairs exceed the oracle guard {guard}"
        )
    rel = {
        (s1, s2)
        for s1 in m1.states
        for s2 in m2.states
        if m1.output_map[s1] == m2.output_map[s2]
    }
    changed = True
    while changed:
        changed = False
        for s1, s2 in list(rel):
            ok = all(
                any(u1 == u2 and (d1, d2) in rel for u2, d2 in m2.successors(s2))
                for u1, d1 in m1.successors(s1)
            ) and all(
                any(u1 == u2 and (d1, d2) in rel for u1, d1 in m1.successors(s1))
                for u2, d2 in m2.successors(s2)
            )
            if not ok:
                rel.discard((s1, s2))
                changed = True
    return frozenset(rel)


def _is_total(rel, m1: Fsm, m2: Fsm) -> bool:
    left = {a for a, _ in rel}
    right = {b for _, b in rel}
    return left == set(m1.states) and right == set(m2.states)


def is_bisimilar(m1: Fsm, m2: Fsm) -> bool:
    """Decide m1 = m2 up to bisimulation.

    With initial states on both sides the verdict is membership of the
    initial pair in R*; with no initial states anywhere it is totality of
    R*.  Mixed presence is rejected, since the two acceptance conditions
    differ.
    """
    if (m1.initial is None) != (m2.initial is None):
        raise InitialStateMismatch(
            f"{m1.id} and {m2.id} disagree on declaring an initial state"
        )
    rel = max_bisimulation(m1, m2)
    if m1.initial is not None:
        return (m1.initial, m2.initial) in rel
    return _is_total(rel, m1, m2)


def _accessible_part(m: Fsm) -> Fsm:
    """The sub-machine on the states reachable from the initial state."""
    if m.initial is None:
        return m
    seen = {m.initial}
    frontier = [m.initial]
    while frontier:
        nxt = []
        for s in frontier:
            for _, dst in m.successors(s):
                if dst not in seen:
                    seen.add(dst)
                    nxt.append(dst)
        frontier = nxt
    if len(seen) == len(m.states):
        return m
    return Fsm(
        id=m.id,
        states=tuple(s for s in m.states if s in seen),
        initial=m.initial,
        inputs=m.inputs,
        outputs=m.outputs,
        output_map={s: m.output_map[s] for s in seen},
        transitions=tuple(t for t in m.transitions if t[0] in seen),
    )


def quotient(m: Fsm) -> Fsm:
    """The minimal machine bisimilar to ``m``.

    A machine with an initial state is first restricted to its reachable
    part (an unreachable state can always be dropped from a bisimilar
    machine, so a minimal one has none).  States are then the blocks of
    the maximal self-bisimulation; each block is named after its
    lexicographically least member, so the result is deterministic.
    """
    m = _accessible_part(m)
    blocks = self_partition(m)
    rep = {}
    for b in blocks:
        name = min(b)
        for s in b:
            rep[s] = name
    out_map = {min(b): m.output_map[min(b)] for b in blocks}
    trans = {(rep[src], label, rep[dst]) for src, label, dst in m.transitions}
    return Fsm(
        id=m.id,
        states=tuple(sorted(out_map)),
        initial=None if m.initial is None else rep[m.initial],
        inputs=m.inputs,
        outputs=m.outputs,
        output_map=out_map,
        transitions=tuple(sorted(trans, key=lambda t: (t[0], _label_key(t[1]), t[2]))),
    )


def _is_minimal(m: Fsm) -> bool:
    if len(_accessible_part(m).states) != len(m.states):
        return False
    return all(len(b) == 1 for b in self_partition(m))


def _iso_candidate_check(m1: Fsm, m2: Fsm, mapping: dict) -> bool:
    """Verify that ``mapping`` is an isomorphism witness."""
    if len(mapping) != len(m1.states) or len(set(mapping.values())) != len(m2.states):
        return False
    if m1.initial is not None and mapping[m1.initial] != m2.initial:
        return False
    for s in m1.states:
        if m1.output_map[s] != m2.output_map[mapping[s]]:
            return False
    t2 = set(m2.transitions)
    if len(m1.transitions) != len(m2.transitions):
        return False
    return all((mapping[a], u, mapping[b]) in t2 for a, u, b in m1.transitions)


def _general_iso(m1: Fsm, m2: Fsm, guard: int) -> bool:
    """Backtracking isomorphism search with output-class pruning."""
    by_out1 = {}
    by_out2 = {}
    for s in m1.states:
        by_out1.setdefault(m1.output_map[s], []).append(s)
    for s in m2.states:
        by_out2.setdefault(m2.output_map[s], []).append(s)
    if set(by_out1) != set(by_out2):
        return False
    for out, grp in by_out1.items():
        if len(grp) != len(by_out2[out]):
            return False
        if len(grp) > guard:
            raise TooLargeForGeneralIso(
                f"output class of size {len(grp)} exceeds the backtracking guard {guard}"
            )

    def degree_key(m, s):
        return tuple(sorted(_label_key(u) for u, _ in m.successors(s)))

    order = sorted(m1.states, key=lambda s: len(by_out1[m1.output_map[s]]))
    mapping = {}
    used = set()

    def feasible(s1, s2):
        # partial-map consistency: already-mapped successors must be matched
        for u, d in m1.successors(s1):
            if d in mapping and not any(
                u == u2 and mapping[d] == d2 for u2, d2 in m2.successors(s2)
            ):
                return False
        return True

    def rec(i):
        if i == len(order):
            return _iso_candidate_check(m1, m2, mapping)
        s1 = order[i]
        for s2 in by_out2[m1.output_map[s1]]:
            if s2 in used:
                continue
            if m1.initial is not None and (s1 == m1.initial) != (s2 == m2.initial):
                continue
            if degree_key(m1, s1) != degree_key(m2, s2):
                continue
            if not feasible(s1, s2):
                continue
            mapping[s1] = s2
            used.add(s2)
            if rec(i + 1):
                return True
            del mapping[s1]
            used.discard(s2)
        return False

    return rec(0)


def is_isomorphic(m1: Fsm, m2: Fsm, guard: int = 12) -> bool:
    """Decide whether a state bijection preserves initial, outputs and edges.

    When both machines are minimal (all self-bisimulation blocks are
    singletons) the check is polynomial: R*(m1, m2) must pair the states
    one-to-one, and the induced bijection is verified directly.  Otherwise
    a backtracking search with output-class pruning is used, guarded by
    ``guard`` states per output class.
    """
    if len(m1.states) != len(m2.states):
        return False
    if (m1.initial is None) != (m2.initial is None):
        return False

    if _is_minimal(m1) and _is_minimal(m2):
        rel = max_bisimulation(m1, m2)
        fwd = {}
        back = {}
        for a, b in rel:
            fwd.setdefault(a, set()).add(b)
            back.setdefault(b, set()).add(a)
        if len(fwd) != len(m1.states) or len(back) != len(m2.states):
            return False
        if any(len(v) != 1 for v in fwd.values()) or any(len(v) != 1 for v in back.values()):
            return False
        mapping = {a: next(iter(v)) for a, v in fwd.items()}
        return _iso_candidate_check(m1, m2, mapping)

    return _general_iso(m1, m2, guard)
