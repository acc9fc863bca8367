"""Shared generators for the property campaigns.

All randomness is seeded per-test via ``random.Random`` so failures are
reproducible.
"""

import itertools
import random

from afsm import validate_arena, validate_fsm

# filled by test_acceptance, printed at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_fsm(rng, fid="m", max_states=6, max_inputs=3, max_outputs=3,
               max_trans=10, with_initial=True):
    n = rng.randint(1, max_states)
    states = [f"s{i}" for i in range(n)]
    inputs = [f"a{i}" for i in range(rng.randint(0, max_inputs))]
    outputs = [f"y{i}" for i in range(rng.randint(0, max_outputs))]
    output_map = {
        s: rng.sample(outputs, rng.randint(0, len(outputs))) for s in states
    }
    trans = set()
    for _ in range(rng.randint(0, max_trans)):
        label = frozenset(rng.sample(inputs, rng.randint(0, len(inputs))))
        trans.add((rng.choice(states), label, rng.choice(states)))
    return validate_fsm(
        fid, states, inputs, outputs, output_map, trans,
        initial=states[0] if with_initial else None,
    )


def random_arena(rng, aid="a", max_vertices=4, max_states=4, edge_p=0.3,
                 with_initial=True):
    """Small arena; machines are drawn from a pool so duplicates are common."""
    nv = rng.randint(1, max_vertices)
    pool = [
        random_fsm(rng, f"m{i}", max_states=max_states, max_inputs=2,
                   max_outputs=2, max_trans=6, with_initial=with_initial)
        for i in range(rng.randint(1, nv))
    ]
    vertices = {f"v{i}": rng.choice(pool) for i in range(nv)}
    edges = [
        (a, b)
        for a, b in itertools.permutations(sorted(vertices), 2)
        if rng.random() < edge_p
    ]
    return validate_arena(aid, vertices, edges)


def renamed_copy(rng, fsm, new_id):
    """Same machine with shuffled fresh state names (an isomorphic copy)."""
    names = [f"t{i}" for i in range(len(fsm.states))]
    rng.shuffle(names)
    return fsm.renamed(new_id, dict(zip(fsm.states, names)))


def bloated_copy(rng, fsm, new_id):
    """A bisimilar but larger machine: one state is split into two clones."""
    victim = rng.choice(fsm.states)
    clone = "dup0"
    states = list(fsm.states) + [clone]
    output_map = {s: fsm.output_map[s] for s in fsm.states}
    output_map[clone] = fsm.output_map[victim]
    trans = list(fsm.transitions)
    trans += [(clone, u, d) for (s, u, d) in fsm.transitions if s == victim]
    # redirect a random subset of the victim's incoming edges to the clone
    # (the clone may end up unreachable; it is bisimilar to the victim
    # either way)
    redirected = []
    for (s, u, d) in trans:
        if d == victim and rng.random() < 0.5:
            redirected.append((s, u, clone))
        else:
            redirected.append((s, u, d))
    return validate_fsm(
        new_id, states, fsm.inputs, fsm.outputs, output_map, redirected,
        initial=fsm.initial,
    )


def random_document(rng):
    """A small in-memory model document (machines plus arenas)."""
    from afsm.formats import ModelDocument

    fsms = {}
    for i in range(rng.randint(1, 3)):
        m = random_fsm(rng, f"M{i}", max_states=4, max_trans=6,
                       with_initial=rng.random() < 0.7)
        fsms[m.id] = m
    arenas = {}
    arena_nodes = {}
    for i in range(rng.randint(0, 2)):
        nv = rng.randint(1, 3)
        names = {f"v{j}": rng.choice(sorted(fsms)) for j in range(nv)}
        vertices = {v: fsms[n] for v, n in names.items()}
        edges = [
            (a, b)
            for a, b in itertools.permutations(sorted(vertices), 2)
            if rng.random() < 0.4
        ]
        arena = validate_arena(f"A{i}", vertices, edges)
        arenas[arena.id] = arena
        arena_nodes[arena.id] = names
    return ModelDocument(fsms=fsms, arenas=arenas, arena_nodes=arena_nodes)
