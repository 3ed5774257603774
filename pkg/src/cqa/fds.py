"""Functional-dependency reasoning attached to a query.

Every atom contributes key(F) -> vars(F); on top of that the head
contributes {} -> free(q), which makes free variables behave like
constants in all downstream closure tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .queries import Atom, ConjunctiveQuery


@dataclass(frozen=True)
class FunctionalDependency:
    lhs: frozenset[str]
    rhs: frozenset[str]

    def __str__(self) -> str:
        return "{%s} -> {%s}" % (" ".join(sorted(self.lhs)), " ".join(sorted(self.rhs)))


class FunctionalDependencySet:
    """The dependencies of one specific query; not reusable across queries."""

    def __init__(
        self,
        deps: Iterable[FunctionalDependency],
        universe: Iterable[str],
        free: Iterable[str],
    ):
        self.deps = tuple(deps)
        self.universe = frozenset(universe)
        self.free = frozenset(free)

    def __repr__(self) -> str:
        return f"FunctionalDependencySet({', '.join(map(str, self.deps))})"

    def closure(self, seed: Iterable[str]) -> frozenset[str]:
        """Every variable determined by `seed`; always contains seed and free."""
        closed = set(seed)
        missing = []
        by_var: dict[str, list[int]] = {}
        ready: list[int] = []
        for i, dep in enumerate(self.deps):
            wait = {v for v in dep.lhs if v not in closed}
            missing.append(len(wait))
            if wait:
                for v in wait:
                    by_var.setdefault(v, []).append(i)
            else:
                ready.append(i)
        while ready:
            dep = self.deps[ready.pop()]
            for v in dep.rhs:
                if v in closed:
                    continue
                closed.add(v)
                for j in by_var.get(v, ()):
                    missing[j] -= 1
                    if missing[j] == 0:
                        ready.append(j)
        return frozenset(closed)

    def implies(self, lhs: Iterable[str], var: str) -> bool:
        return var in self.closure(lhs)

    def determines(self, lhs: Iterable[str], rhs: Iterable[str]) -> bool:
        return set(rhs) <= self.closure(lhs)


def fdset(q: ConjunctiveQuery) -> FunctionalDependencySet:
    deps = [FunctionalDependency(frozenset(), frozenset(q.free_vars))]
    for atom in q.atoms:
        deps.append(FunctionalDependency(atom.key_vars, atom.variables))
    return FunctionalDependencySet(deps, q.variables, q.free_vars)


@dataclass(frozen=True)
class SequentialProof:
    """Atom chain certifying fdset(q) |= base -> target.

    Invariant: key(atoms[i]) is covered by free(q), the base, and the
    variables of the earlier atoms; the target is covered at the end.
    """

    atoms: tuple[Atom, ...]
    target: str
    base: frozenset[str]


def sequential_proof(
    q: ConjunctiveQuery, base: Iterable[str], target: str
) -> SequentialProof | None:
    """A tail-minimal sequential proof of base -> target, or None.

    Tail-minimal: dropping the last atom breaks the proof; earlier atoms
    may still be redundant.  Atoms are tried in query order, so the result
    is deterministic.
    """
    base = frozenset(base)
    known = set(q.free_vars) | base
    proof: list[Atom] = []
    used: set[str] = set()
    while target not in known:
        for atom in q.atoms:
            if atom.name not in used and atom.key_vars <= known:
                proof.append(atom)
                used.add(atom.name)
                known |= atom.variables
                break
        else:
            return None

    def covers(prefix: list[Atom]) -> bool:
        have = set(q.free_vars) | base
        for a in prefix:
            have |= a.variables
        return target in have

    while proof and covers(proof[:-1]):
        proof.pop()
    return SequentialProof(tuple(proof), target, base)
