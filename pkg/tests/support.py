"""Golden queries/instances from worked examples, plus independent oracles
(two-row FD tableau, repair-intersection certainty, exhaustive id-set search)
that the fast implementations are checked against."""

from itertools import combinations

from cqa.attacks import AttackWitness, attack_graph, keycl
from cqa.classify import is_id_set
from cqa.evaluate import evaluate
from cqa.fds import FunctionalDependencySet
from cqa.instances import DatabaseInstance, Fact, enumerate_repairs
from cqa.queries import ConjunctiveQuery, parse_query


def mkdb(schema: dict[str, tuple[int, int]], rows: dict[str, list[tuple]]) -> DatabaseInstance:
    """schema maps relation name -> (arity, key_width); rows maps name -> value tuples."""
    from cqa.queries import RelationSignature

    sigs = [RelationSignature(name, arity, key) for name, (arity, key) in schema.items()]
    facts = [Fact(name, tuple(values)) for name, tuples in rows.items() for values in tuples]
    return DatabaseInstance(sigs, facts)


# --- worked-example goldens -------------------------------------------------

def employee_query() -> ConjunctiveQuery:
    return parse_query("q(z) :- E(x | 'F', y), D(y | z).")


def employee_projection_query() -> ConjunctiveQuery:
    return parse_query("q(x, z) :- E(x | 'F', y), D(y | z).")


def employee_db() -> DatabaseInstance:
    return mkdb(
        {"E": (3, 1), "D": (2, 1)},
        {
            "E": [
                ("Suzy", "F", "HR"),
                ("Anny", "F", "HR"),
                ("Anny", "F", "IT"),
                ("Dolores", "F", "IT"),
                ("Lucy", "F", "MIS"),
            ],
            "D": [("HR", "A"), ("IT", "A"), ("IT", "B"), ("MIS", "B")],
        },
    )


def chain_query() -> ConjunctiveQuery:
    return parse_query("q(z) :- R(x | y), S(y, v | z), T(y | v).")


def chain_db() -> DatabaseInstance:
    return mkdb(
        {"R": (2, 1), "S": (3, 2), "T": (2, 1)},
        {
            "R": [("a1", "b1"), ("a2", "b2"), ("a3", "b2"), ("a4", "b3")],
            "S": [("b1", "c1", "g1"), ("b2", "c2", "g1"), ("b2", "c2", "g2"), ("b3", "c3", "g2")],
            "T": [("b1", "c1"), ("b2", "c2"), ("b3", "c3")],
        },
    )


def lookup_pair_query() -> ConjunctiveQuery:
    """Counts per z cannot be read off any fixed projection of the plain
    answers here; only the exhaustive oracle serves it."""
    return parse_query("q(z) :- R(z | x), S(x, y).")


def lookup_pair_db() -> DatabaseInstance:
    return mkdb(
        {"R": (2, 1), "S": (2, 2)},
        {
            "R": [("c1", "a"), ("c2", "a"), ("c2", "b")],
            "S": [("a", "d"), ("a", "e"), ("b", "f")],
        },
    )


def twin_lookup_query() -> ConjunctiveQuery:
    return parse_query("q(z) :- R(x | z, y), S(y | x), T(y | x).")


def twin_lookup_dbs() -> list[DatabaseInstance]:
    shape = {"R": (3, 1), "S": (2, 1), "T": (2, 1)}
    first = mkdb(
        shape,
        {
            "R": [("a", "d", "e"), ("b", "d", "e"), ("c", "d", "f")],
            "S": [("e", "a"), ("e", "b"), ("f", "c")],
            "T": [("e", "a"), ("e", "b"), ("f", "c")],
        },
    )
    second = mkdb(
        shape,
        {
            "R": [("a", "d", "e"), ("a", "d", "f"), ("b", "d", "g")],
            "S": [("e", "a"), ("f", "a"), ("g", "b")],
            "T": [("e", "a"), ("f", "a"), ("g", "b")],
        },
    )
    third = mkdb(
        shape,
        {
            "R": [("a", "d", "e"), ("b", "d", "f")],
            "S": [("e", "a"), ("f", "b")],
            "T": [("e", "a"), ("f", "b")],
        },
    )
    return [first, second, third]


def two_component_query() -> ConjunctiveQuery:
    return parse_query("q(z) :- R(x | y1), S(x | y2), T(y1, y2 | y3, z), P(v | w).")


def guarded_cycle_query() -> ConjunctiveQuery:
    return parse_query("q(z) :- R(x | y), S(y | v), T(v | y), P1(z | y), P2(z | y).")


def star_share_query() -> ConjunctiveQuery:
    return parse_query("q(z1, z2) :- R(x | y, z1), S(x | y), T(y | z2).")


def bridge_query() -> ConjunctiveQuery:
    return parse_query("q(z3) :- R(x | y, z1), S(x, y | z2), T(z1, z2, z3), P(x | y).")


def widen_pair_query() -> ConjunctiveQuery:
    return parse_query("q(z) :- R(x | y), S(x | y, z).")


def matching_pairs_query() -> ConjunctiveQuery:
    return parse_query("q(z) :- Z(z), R1(x1 | y), S1(x1 | y), R2(x2 | y), S2(x2 | y).")


def mutual_attack_query() -> ConjunctiveQuery:
    return parse_query("q() :- R(x | y), S(y | x).")


def four_atom_fd_query() -> ConjunctiveQuery:
    return parse_query("q(z1, z2) :- R(u | x), S(x, z1 | y), T(y | v, z2), U(y | u).")


def square_share_query() -> ConjunctiveQuery:
    return parse_query("q(z) :- R1(x | y, z), R2(x | y), S1(y | x), S2(y | x).")


MATCHING_TRIPLES = [("a", "d", "f"), ("a", "e", "g"), ("b", "e", "g")]


# --- independent oracles -----------------------------------------------------

def brute_force_implies(fds: FunctionalDependencySet, lhs, target: str) -> bool:
    """Two-row tableau check: no model of the FD set may agree on lhs yet
    differ on the target."""
    names = sorted(fds.universe | set(lhs) | {target})
    index = {v: i for i, v in enumerate(names)}
    deps = [(frozenset(d.lhs), frozenset(d.rhs)) for d in fds.deps]
    lhs = set(lhs)
    for mask in range(1 << len(names)):
        differ = {v for v in names if mask >> index[v] & 1}
        if any(not (l & differ) and (r & differ) for l, r in deps):
            continue
        if not (lhs & differ) and target in differ:
            return False
    return True


def intersection_certain(q: ConjunctiveQuery, db: DatabaseInstance, cap: int = 1 << 14):
    """Certain answers the slow way: intersect the answers over all repairs."""
    sets = [evaluate(q, repair).tuples for repair in enumerate_repairs(db, cap)]
    return frozenset.intersection(*sets)


def exhaustive_id_set(q: ConjunctiveQuery):
    """Smallest id-set found by trying every subset of bound variables."""
    graph = attack_graph(q)
    for size in range(len(q.bound_vars) + 1):
        for subset in combinations(q.bound_vars, size):
            ok, _ = is_id_set(q, subset, graph)
            if ok:
                return subset
    return None


def witness_is_valid(w: AttackWitness, q: ConjunctiveQuery) -> bool:
    """Re-check the three witness conditions from scratch."""
    if not w.path or w.path[-1] != w.target:
        return False
    bound = set(q.bound_vars)
    if not set(w.path) <= bound:
        return False
    if w.path[0] not in w.source.nonkey_vars:
        return False
    kc = keycl(w.source, q)
    if set(w.path) & kc:
        return False
    return all(
        any({a, b} <= atom.variables for atom in q.atoms)
        for a, b in zip(w.path, w.path[1:])
    )
