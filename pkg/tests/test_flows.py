import random

from screplay.policy.flows import ENTITY, SUBJECT, derive_flows, flow_edges
from screplay.policy.state import AccessKind, PolicyState

from conftest import LOW


def _state_with_accesses(n_subjects, n_entities, accesses):
    return PolicyState(
        users=frozenset({1}),
        subjects=frozenset(range(1, n_subjects + 1)),
        subject_owner={s: 1 for s in range(1, n_subjects + 1)},
        entities=frozenset(range(1, n_entities + 1)),
        entity_is_container={e: False for e in range(1, n_entities + 1)},
        entity_parent={},
        entity_name={e: f"e{e}" for e in range(1, n_entities + 1)},
        roles=frozenset(),
        role_kind={},
        subject_int={s: 0 for s in range(1, n_subjects + 1)},
        entity_int={e: 0 for e in range(1, n_entities + 1)},
        subject_sec={s: LOW for s in range(1, n_subjects + 1)},
        entity_sec={e: LOW for e in range(1, n_entities + 1)},
        subject_accesses={
            s: frozenset(
                (e, kind) for subj, e, kind in accesses if subj == s
            )
            for s in range(1, n_subjects + 1)
        },
        role_rights={},
        user_roles={1: frozenset()},
    )


def brute_force_closure(edges, nodes):
    """Floyd-Warshall boolean closure; the independent oracle."""
    nodes = sorted(nodes)
    idx = {n: i for i, n in enumerate(nodes)}
    n = len(nodes)
    reach = [[False] * n for _ in range(n)]
    for a, b in edges:
        reach[idx[a]][idx[b]] = True
    for k in range(n):
        for i in range(n):
            if reach[i][k]:
                row_i, row_k = reach[i], reach[k]
                for j in range(n):
                    if row_k[j]:
                        row_i[j] = True
    return {
        (nodes[i], nodes[j]) for i in range(n) for j in range(n) if reach[i][j]
    }


def test_no_accesses_no_flows():
    assert derive_flows(_state_with_accesses(2, 2, [])) == set()


def test_two_step_flow():
    # Subject 1 writes entity 1; subject 2 reads entity 1.
    state = _state_with_accesses(
        2, 1, [(1, 1, AccessKind.WRITE), (2, 1, AccessKind.READ)]
    )
    flows = derive_flows(state)
    assert ((SUBJECT, 1), (ENTITY, 1)) in flows
    assert ((ENTITY, 1), (SUBJECT, 2)) in flows
    assert ((SUBJECT, 1), (SUBJECT, 2)) in flows
    assert len(flows) == 3


def test_chain_end_to_end():
    # s1 -w-> e1 -r-> s2 -w-> e2 -r-> s3
    state = _state_with_accesses(
        3,
        2,
        [
            (1, 1, AccessKind.WRITE),
            (2, 1, AccessKind.READ),
            (2, 2, AccessKind.WRITE),
            (3, 2, AccessKind.READ),
        ],
    )
    flows = derive_flows(state)
    assert ((SUBJECT, 1), (SUBJECT, 3)) in flows
    assert flows == brute_force_closure(flow_edges(state), _nodes(state))


def _nodes(state):
    return {(SUBJECT, s) for s in state.subjects} | {(ENTITY, e) for e in state.entities}


def random_flow_state(rng):
    n_subjects = rng.randint(1, 5)
    n_entities = rng.randint(1, 10 - n_subjects)
    accesses = []
    for s in range(1, n_subjects + 1):
        for e in range(1, n_entities + 1):
            if rng.random() < 0.3:
                accesses.append((s, e, AccessKind.WRITE))
            if rng.random() < 0.3:
                accesses.append((s, e, AccessKind.READ))
            if rng.random() < 0.05:
                accesses.append((s, e, AccessKind.OWN))  # no flow contribution
    return _state_with_accesses(n_subjects, n_entities, accesses)


def test_matches_brute_force_on_random_states():
    rng = random.Random(4242)
    for _ in range(300):
        state = random_flow_state(rng)
        assert derive_flows(state) == brute_force_closure(
            flow_edges(state), _nodes(state)
        )


def test_monotone_under_added_access():
    rng = random.Random(7)
    for _ in range(100):
        state = random_flow_state(rng)
        before = derive_flows(state)
        s = rng.choice(sorted(state.subjects))
        e = rng.choice(sorted(state.entities))
        kind = rng.choice([AccessKind.READ, AccessKind.WRITE])
        grown = state.evolve(
            subject_accesses={
                **state.subject_accesses,
                s: state.subject_accesses.get(s, frozenset()) | {(e, kind)},
            }
        )
        assert before <= derive_flows(grown)
