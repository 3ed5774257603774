"""Membership tests for the two tractable counting classes.

The main entry point is `in_cparsimony`, which follows the quadratic
decision procedure: check the attack graph (acyclic, weak attacks only),
build the canonical candidate id-set V from the unattacked atoms, and
verify V by reachability in the query graph.  `in_cforest` implements the
older forest-shaped criterion for comparison.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .attacks import AttackGraph, attack_graph, frozen_vars
from .errors import AnalysisRefusal
from .fds import fdset
from .queries import Atom, ConjunctiveQuery, QueryError, query_graph


class CyclicAttackGraphError(AnalysisRefusal):
    pass


@dataclass(frozen=True)
class IdSetViolation:
    """Why a candidate tuple fails to be an id-set.

    `path` is a query-graph walk from notkey(atom) to a candidate variable
    that dodges key(atom) and all frozen variables; it is None when the
    failure is a component with no candidate-determined unattacked atom.
    """

    atom: str | None
    path: tuple[str, ...] | None

    def describe(self) -> str:
        if self.path is not None:
            return (
                f"path {' - '.join(self.path)} reaches an id-set variable from "
                f"notkey({self.atom}) avoiding key({self.atom}) and frozen variables"
            )
        return f"no unattacked atom in the component of {self.atom} has its key determined"


@dataclass(frozen=True)
class ClassificationReport:
    acyclic: bool
    strong_attacks: tuple[tuple[str, str], ...]
    id_set: tuple[str, ...] | None
    violation: IdSetViolation | None
    in_cparsimony: bool
    in_cforest: bool

    def to_json_dict(self) -> dict:
        return {
            "acyclic": self.acyclic,
            "strong_attacks": [list(e) for e in self.strong_attacks],
            "id_set": list(self.id_set) if self.id_set is not None else None,
            "cparsimony": self.in_cparsimony,
            "cforest": self.in_cforest,
            "violation": None
            if self.violation is None
            else {
                "atom": self.violation.atom,
                "path": list(self.violation.path) if self.violation.path else None,
            },
        }


def candidate_id_set(q: ConjunctiveQuery, graph: AttackGraph | None = None) -> frozenset[str]:
    """Bound key variables of unattacked atoms that occur at no non-key position.

    When the query has any id-set at all, this set is the unique minimal one.
    """
    g = graph if graph is not None else attack_graph(q)
    if not g.is_acyclic():
        raise CyclicAttackGraphError("attack graph is cyclic; no id-set exists")
    nonkey = set().union(*(a.nonkey_vars for a in q.atoms)) if q.atoms else set()
    bound = set(q.bound_vars)
    out: set[str] = set()
    for atom in g.unattacked_atoms():
        out |= (atom.key_vars & bound) - nonkey
    return frozenset(out)


def is_id_set(
    q: ConjunctiveQuery,
    xs: Iterable[str],
    graph: AttackGraph | None = None,
) -> tuple[bool, IdSetViolation | None]:
    """Check the two id-set conditions for the tuple xs; on failure the
    violation names the offending atom (and separating path, if any)."""
    xs = tuple(xs)
    if len(set(xs)) != len(xs):
        raise QueryError(f"duplicate variable in {xs}")
    bound = set(q.bound_vars)
    bad = [x for x in xs if x not in bound]
    if bad:
        raise QueryError(f"variable(s) {bad} are not bound in {q.name}")

    g = graph if graph is not None else attack_graph(q)
    fds = fdset(q)

    # (1) every component owns an unattacked atom whose key xs determines
    unattacked = {a.name for a in g.unattacked_atoms()}
    closure = fds.closure(xs)
    for comp in g.components():
        sources = [a for a in comp if a.name in unattacked]
        if not any(a.key_vars <= closure for a in sources):
            return False, IdSetViolation(atom=sources[0].name if sources else comp[0].name, path=None)

    # (2) no query-graph path from a non-key variable to xs may dodge both
    # the atom's key and the frozen variables
    frozen = frozen_vars(q, g).vars
    qg = query_graph(q)
    targets = set(xs)
    for atom in q.atoms:
        blocked = atom.key_vars | frozen
        allowed = qg.vertices - blocked
        starts = sorted(atom.nonkey_vars & allowed)
        parent: dict[str, str | None] = {v: None for v in starts}
        frontier = list(starts)
        hit = next((v for v in starts if v in targets), None)
        while frontier and hit is None:
            nxt: list[str] = []
            for v in frontier:
                for u in sorted(qg.neighbors(v)):
                    if u in allowed and u not in parent:
                        parent[u] = v
                        if u in targets and hit is None:
                            hit = u
                        nxt.append(u)
            frontier = nxt
        if hit is not None:
            path = [hit]
            while parent[path[-1]] is not None:
                path.append(parent[path[-1]])  # type: ignore[arg-type]
            return False, IdSetViolation(atom=atom.name, path=tuple(reversed(path)))
    return True, None


def in_cparsimony(q: ConjunctiveQuery) -> ClassificationReport:
    """Full classification report; `id_set` is the minimal one when membership holds."""
    g = attack_graph(q)
    acyclic = g.is_acyclic()
    strong = tuple((e.source.name, e.target.name) for e in g.strong_edges())
    cforest = in_cforest(q)
    if not acyclic or strong:
        return ClassificationReport(acyclic, strong, None, None, False, cforest)
    candidate = tuple(sorted(candidate_id_set(q, g)))
    ok, violation = is_id_set(q, candidate, g)
    return ClassificationReport(
        acyclic=acyclic,
        strong_attacks=strong,
        id_set=candidate if ok else None,
        violation=violation,
        in_cparsimony=ok,
        in_cforest=cforest,
    )


@dataclass(frozen=True)
class FuxmanGraph:
    atoms: tuple[Atom, ...]
    edges: frozenset[tuple[str, str]]

    def successors(self, name: str) -> tuple[str, ...]:
        return tuple(sorted(t for (s, t) in self.edges if s == name))

    def in_degree(self, name: str) -> int:
        return sum(1 for (_, t) in self.edges if t == name)

    def has_cycle(self) -> bool:
        state: dict[str, int] = {}

        def visit(name: str) -> bool:
            state[name] = 1
            for nxt in self.successors(name):
                if state.get(nxt) == 1 or (nxt not in state and visit(nxt)):
                    return True
            state[name] = 2
            return False

        return any(visit(a.name) for a in self.atoms if a.name not in state)

    def is_forest(self) -> bool:
        return not self.has_cycle() and all(self.in_degree(a.name) <= 1 for a in self.atoms)


def fuxman_graph(q: ConjunctiveQuery) -> FuxmanGraph:
    """Edge R -> S whenever a bound non-key variable of R occurs in S."""
    bound = set(q.bound_vars)
    edges: set[tuple[str, str]] = set()
    for r in q.atoms:
        carried = r.nonkey_vars & bound
        for s in q.atoms:
            if s.name != r.name and carried & s.variables:
                edges.add((r.name, s.name))
    return FuxmanGraph(q.atoms, frozenset(edges))


def in_cforest(q: ConjunctiveQuery) -> bool:
    fg = fuxman_graph(q)
    if not fg.is_forest():
        return False
    free = set(q.free_vars)
    byname = {a.name: a for a in q.atoms}
    return all(
        (byname[t].key_vars - free) <= byname[s].nonkey_vars for (s, t) in fg.edges
    )


def fuxman_graph_dot(fg: FuxmanGraph) -> str:
    lines = ["digraph fuxman_graph {"]
    for atom in sorted(fg.atoms, key=lambda a: a.name):
        lines.append(f'  "{atom.name}";')
    for src, dst in sorted(fg.edges):
        lines.append(f'  "{src}" -> "{dst}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
