"""Attack graphs over query atoms: keycl, witnesses, weak/strong labels,
components, and frozen variables."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .fds import SequentialProof, fdset, sequential_proof
from .queries import Atom, ConjunctiveQuery, QueryError, QueryGraph, query_graph


def keycl(atom: Atom, q: ConjunctiveQuery) -> frozenset[str]:
    """free(q) plus everything key(atom) determines once `atom` is removed.

    The closure runs against fdset(q minus the atom); free variables of q
    stay in the result even when they no longer occur anywhere.
    """
    if not any(a.name == atom.name for a in q.atoms):
        raise QueryError(f"atom {atom.name} is not part of {q.name}")
    rest = q.without([atom])
    return frozenset(q.free_vars) | fdset(rest).closure(atom.key_vars)


@dataclass(frozen=True)
class AttackWitness:
    """Bound-variable path from notkey(source) to the target, avoiding
    keycl(source, q) throughout."""

    source: Atom
    target: str
    path: tuple[str, ...]


@dataclass(frozen=True)
class AttackEdge:
    source: Atom
    target: Atom
    strong: bool
    witness: AttackWitness


def _reachable(start: Iterable[str], allowed: frozenset[str], qg: QueryGraph) -> dict[str, str | None]:
    """Layered BFS over allowed query-graph vertices; returns parent links."""
    parent: dict[str, str | None] = {}
    frontier: list[str] = []
    for v in sorted(start):
        if v in allowed and v not in parent:
            parent[v] = None
            frontier.append(v)
    while frontier:
        nxt: list[str] = []
        for v in frontier:
            for u in sorted(qg.neighbors(v)):
                if u in allowed and u not in parent:
                    parent[u] = v
                    nxt.append(u)
        frontier = nxt
    return parent


def _path_to(parent: Mapping[str, str | None], v: str) -> tuple[str, ...]:
    out = [v]
    while parent[out[-1]] is not None:
        out.append(parent[out[-1]])  # type: ignore[arg-type]
    return tuple(reversed(out))


def attacks_variable(atom: Atom, x: str, q: ConjunctiveQuery) -> AttackWitness | None:
    """Shortest witness that `atom` attacks variable `x`, or None."""
    qg = query_graph(q)
    kc = keycl(atom, q)
    if x not in qg.vertices or x in kc:
        return None
    parent = _reachable(atom.nonkey_vars, qg.vertices - kc, qg)
    if x not in parent:
        return None
    return AttackWitness(atom, x, _path_to(parent, x))


class AttackGraph:
    """Digraph over the atoms of one query; edges carry witnesses."""

    def __init__(
        self,
        query: ConjunctiveQuery,
        edges: Mapping[tuple[str, str], AttackEdge],
        variable_paths: Mapping[str, Mapping[str, tuple[str, ...]]],
    ):
        self.query = query
        self.edges = dict(edges)
        self._variable_paths = {k: dict(v) for k, v in variable_paths.items()}

    @property
    def atoms(self) -> tuple[Atom, ...]:
        return self.query.atoms

    def attacks(self, source: str, target: str) -> bool:
        return (source, target) in self.edges

    def attacked_variables(self, source: str) -> frozenset[str]:
        return frozenset(self._variable_paths[source])

    def attackers_of_variable(self, x: str) -> tuple[str, ...]:
        return tuple(
            sorted(name for name, paths in self._variable_paths.items() if x in paths)
        )

    def strong_edges(self) -> tuple[AttackEdge, ...]:
        return tuple(
            e for _, e in sorted(self.edges.items()) if e.strong
        )

    def successors(self, name: str) -> tuple[str, ...]:
        return tuple(sorted(t for (s, t) in self.edges if s == name))

    def predecessors(self, name: str) -> tuple[str, ...]:
        return tuple(sorted(s for (s, t) in self.edges if t == name))

    def is_acyclic(self) -> bool:
        state: dict[str, int] = {}  # 1 = on stack, 2 = done

        def visit(name: str) -> bool:
            state[name] = 1
            for nxt in self.successors(name):
                if state.get(nxt) == 1:
                    return False
                if nxt not in state and not visit(nxt):
                    return False
            state[name] = 2
            return True

        return all(visit(a.name) for a in self.atoms if a.name not in state)

    def unattacked_atoms(self) -> tuple[Atom, ...]:
        attacked = {t for (_, t) in self.edges}
        return tuple(
            sorted((a for a in self.atoms if a.name not in attacked), key=lambda a: a.name)
        )

    def components(self) -> tuple[tuple[Atom, ...], ...]:
        """Maximal weakly connected components, each sorted by relation name."""
        byname = {a.name: a for a in self.atoms}
        seen: set[str] = set()
        comps: list[tuple[Atom, ...]] = []
        for name in sorted(byname):
            if name in seen:
                continue
            todo, comp = [name], set()
            while todo:
                cur = todo.pop()
                if cur in comp:
                    continue
                comp.add(cur)
                todo.extend(self.successors(cur))
                todo.extend(self.predecessors(cur))
            seen |= comp
            comps.append(tuple(byname[n] for n in sorted(comp)))
        return tuple(comps)


def attack_graph(q: ConjunctiveQuery) -> AttackGraph:
    qg = query_graph(q)
    fds = fdset(q)
    edges: dict[tuple[str, str], AttackEdge] = {}
    variable_paths: dict[str, dict[str, tuple[str, ...]]] = {}
    for atom in q.atoms:
        kc = keycl(atom, q)
        parent = _reachable(atom.nonkey_vars, qg.vertices - kc, qg)
        paths = {v: _path_to(parent, v) for v in parent}
        variable_paths[atom.name] = paths
        for other in q.atoms:
            if other.name == atom.name:
                continue
            hit = sorted(other.variables & paths.keys(), key=lambda v: (len(paths[v]), v))
            if not hit:
                continue
            witness = AttackWitness(atom, hit[0], paths[hit[0]])
            strong = not fds.determines(atom.key_vars, other.key_vars)
            edges[(atom.name, other.name)] = AttackEdge(atom, other, strong, witness)
    return AttackGraph(q, edges, variable_paths)


@dataclass(frozen=True)
class FrozenVariables:
    """Bound variables derivable as constants using only non-attacking atoms."""

    vars: frozenset[str]
    certificates: Mapping[str, SequentialProof]


def frozen_vars(q: ConjunctiveQuery, graph: AttackGraph | None = None) -> FrozenVariables:
    """A bound x is frozen when fdset over the atoms not attacking x yields {} -> x."""
    g = graph if graph is not None else attack_graph(q)
    certs: dict[str, SequentialProof] = {}
    for x in q.bound_vars:
        attackers = g.attackers_of_variable(x)
        proof = sequential_proof(q.without(attackers), (), x)
        if proof is not None:
            certs[x] = proof
    return FrozenVariables(frozenset(certs), certs)


def attack_graph_dot(g: AttackGraph) -> str:
    """DOT rendering: solid edges are weak attacks, bold edges strong."""
    lines = ["digraph attack_graph {"]
    for atom in sorted(g.atoms, key=lambda a: a.name):
        lines.append(f'  "{atom.name}";')
    for (src, dst), edge in sorted(g.edges.items()):
        style = " [style=bold]" if edge.strong else ""
        lines.append(f'  "{src}" -> "{dst}"{style};')
    lines.append("}")
    return "\n".join(lines) + "\n"
