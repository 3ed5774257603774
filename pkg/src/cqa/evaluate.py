"""Query evaluation and range-consistent counting.

Two routes compute the same answers on purpose: `cqacount_parsimonious`
counts distinct id-set tuples over the query and its certain answers
(two first-order passes, no repairs), while `cqacount_oracle` enumerates
every repair and aggregates min/max counts per group.  The oracle is the
ground truth the fast route is checked against.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Mapping, NamedTuple

from .attacks import attack_graph
from .classify import ClassificationReport, CyclicAttackGraphError, in_cparsimony
from .errors import AnalysisRefusal, InputError
from .instances import (
    DEFAULT_REPAIR_CAP,
    DatabaseInstance,
    Fact,
    enumerate_repairs,
    is_repair_of,
)
from .queries import Atom, ConjunctiveQuery, instantiate, make_free, substitute


class EvaluationError(InputError, ValueError):
    """Query and instance disagree on the schema."""


class NotInCparsimonyError(AnalysisRefusal):
    """Parsimonious counting refused; carries the classifier's certificate."""

    def __init__(self, report: ClassificationReport):
        self.report = report
        super().__init__(f"query not in Cparsimony: {self._detail()}")

    def _detail(self) -> str:
        if not self.report.acyclic:
            return "attack graph is cyclic"
        if self.report.strong_attacks:
            src, dst = self.report.strong_attacks[0]
            return f"strong attack {src} -> {dst}"
        if self.report.violation is not None:
            return self.report.violation.describe()
        return "no id-set"


class AnswerSet(NamedTuple):
    head: tuple[str, ...]
    tuples: frozenset[tuple[str, ...]]


class CountAnswer(NamedTuple):
    group: tuple[str, ...]
    count: int


class RangeAnswer(NamedTuple):
    group: tuple[str, ...]
    lower: int
    upper: int


def _check_schema(q: ConjunctiveQuery, db: DatabaseInstance) -> None:
    for atom in q.atoms:
        sig = db.schema.get(atom.name)
        if sig is None:
            raise EvaluationError(f"unknown relation {atom.name}")
        if sig != atom.relation:
            raise EvaluationError(
                f"relation {atom.name}: query expects arity {atom.relation.arity} "
                f"key {atom.relation.key_width}, instance declares arity {sig.arity} "
                f"key {sig.key_width}"
            )


def _unify(atom: Atom, fact: Fact, binding: Mapping[str, str]) -> dict[str, str] | None:
    out = dict(binding)
    for term, value in zip(atom.args, fact.values):
        if term.is_var:
            seen = out.get(term.symbol)
            if seen is None:
                out[term.symbol] = value
            elif seen != value:
                return None
        elif term.symbol != value:
            return None
    return out


def _candidates(atom: Atom, binding: Mapping[str, str], db: DatabaseInstance) -> tuple[Fact, ...]:
    key: list[str] = []
    for term in atom.key_args:
        value = binding.get(term.symbol) if term.is_var else term.symbol
        if value is None:
            return db.relation_facts(atom.name)
        key.append(value)
    return db.block(atom.name, tuple(key))


def evaluate(q: ConjunctiveQuery, db: DatabaseInstance) -> AnswerSet:
    """All head tuples with a satisfying valuation (naive join, key-hash lookups)."""
    _check_schema(q, db)
    rows: list[dict[str, str]] = [{}]
    for atom in q.atoms:
        rows = [
            bound
            for partial in rows
            for fact in _candidates(atom, partial, db)
            if (bound := _unify(atom, fact, partial)) is not None
        ]
        if not rows:
            break
    return AnswerSet(
        q.free_vars,
        frozenset(tuple(row[v] for v in q.free_vars) for row in rows),
    )


def _group_counts(answers: AnswerSet, width: int) -> dict[tuple[str, ...], int]:
    seen: dict[tuple[str, ...], set[tuple[str, ...]]] = {}
    for t in answers.tuples:
        seen.setdefault(t[:width], set()).add(t[width:])
    return {group: len(rest) for group, rest in seen.items()}


def count_by(
    q_full: ConjunctiveQuery, group_vars: Iterable[str], db: DatabaseInstance
) -> frozenset[CountAnswer]:
    """Distinct remaining-variable tuples per group, on the instance as-is."""
    group_vars = tuple(group_vars)
    if q_full.bound_vars:
        raise EvaluationError(f"counting requires a full query; {q_full.bound_vars} are bound")
    if len(set(group_vars)) != len(group_vars) or not set(group_vars) <= set(q_full.free_vars):
        raise EvaluationError(f"grouping variables {group_vars} must be distinct head variables")
    answers = evaluate(q_full, db)
    zpos = [answers.head.index(z) for z in group_vars]
    wpos = [i for i, v in enumerate(answers.head) if v not in set(group_vars)]
    seen: dict[tuple[str, ...], set[tuple[str, ...]]] = {}
    for t in answers.tuples:
        seen.setdefault(tuple(t[i] for i in zpos), set()).add(tuple(t[i] for i in wpos))
    return frozenset(CountAnswer(group, len(rest)) for group, rest in seen.items())


# --- certain answers --------------------------------------------------------

def certain_answers(q: ConjunctiveQuery, db: DatabaseInstance) -> AnswerSet:
    """Tuples true in every repair, by direct recursive rewriting evaluation.

    Requires an acyclic attack graph; candidates come from the plain
    answers (a sound superset), then each is checked individually.
    """
    if not attack_graph(q).is_acyclic():
        raise CyclicAttackGraphError(
            "attack graph is cyclic: no first-order certainty check; use the repair oracle"
        )
    candidates = evaluate(q, db)
    kept = frozenset(
        c for c in candidates.tuples if _certain_bool(substitute(q, q.free_vars, c), db)
    )
    return AnswerSet(q.free_vars, kept)


def _certain_bool(qb: ConjunctiveQuery, db: DatabaseInstance) -> bool:
    if not qb.atoms:
        return True
    graph = attack_graph(qb)
    roots = graph.unattacked_atoms()
    if not roots:
        raise CyclicAttackGraphError("attack graph became cyclic during rewriting")
    atom = roots[0]
    rest = qb.without([atom])
    for block in _compatible_blocks(atom, db):
        for fact in block:
            binding = _unify(atom, fact, {})
            if binding is None or not _certain_bool(instantiate(rest, binding), db):
                break
        else:
            return True
    return False


def _compatible_blocks(atom: Atom, db: DatabaseInstance) -> Iterator[tuple[Fact, ...]]:
    """Blocks of the atom's relation whose key matches the atom's key pattern."""
    width = atom.relation.key_width
    if all(not t.is_var for t in atom.key_args):
        block = db.block(atom.name, tuple(t.symbol for t in atom.key_args))
        if block:
            yield block
        return
    seen: set[tuple[str, ...]] = set()
    for fact in db.relation_facts(atom.name):
        key = fact.values[:width]
        if key in seen:
            continue
        seen.add(key)
        binding: dict[str, str] = {}
        ok = True
        for term, value in zip(atom.key_args, key):
            if term.is_var:
                prev = binding.get(term.symbol)
                if prev is None:
                    binding[term.symbol] = value
                elif prev != value:
                    ok = False
                    break
            elif term.symbol != value:
                ok = False
                break
        if ok:
            yield db.block(atom.name, key)


# --- range-consistent counting ----------------------------------------------

def cqacount_oracle(
    q_full: ConjunctiveQuery,
    group_vars: Iterable[str],
    db: DatabaseInstance,
    cap: int = DEFAULT_REPAIR_CAP,
) -> frozenset[RangeAnswer]:
    """Tight [min, max] counts per group over every repair.

    A group qualifies only when every repair produces it; the bounds are
    attained by actual repairs by construction.
    """
    group_vars = tuple(group_vars)
    stats: dict[tuple[str, ...], list[int]] = {}
    repairs = 0
    for repair in enumerate_repairs(db, cap):
        repairs += 1
        for answer in count_by(q_full, group_vars, repair):
            rec = stats.get(answer.group)
            if rec is None:
                stats[answer.group] = [1, answer.count, answer.count]
            else:
                rec[0] += 1
                rec[1] = min(rec[1], answer.count)
                rec[2] = max(rec[2], answer.count)
    return frozenset(
        RangeAnswer(group, low, high)
        for group, (hits, low, high) in stats.items()
        if hits == repairs
    )


def cqacount_parsimonious(
    q: ConjunctiveQuery, db: DatabaseInstance
) -> frozenset[RangeAnswer]:
    """Range-consistent counts without touching any repair.

    Upper bounds count distinct id-set tuples among the plain answers of
    the widened query; lower bounds count them among its certain answers.
    Raises NotInCparsimonyError (with the classifier's certificate) when
    the query is outside the class.
    """
    report = in_cparsimony(q)
    if not report.in_cparsimony:
        raise NotInCparsimonyError(report)
    widened = make_free(q, report.id_set or ())
    width = len(q.free_vars)
    upper = _group_counts(evaluate(widened, db), width)
    lower = _group_counts(certain_answers(widened, db), width)
    out = set()
    for group in certain_answers(q, db).tuples:
        m, n = lower.get(group, 0), upper.get(group, 0)
        if not 1 <= m <= n:
            raise RuntimeError(f"inconsistent parsimonious bounds [{m}, {n}] for {group}")
        out.add(RangeAnswer(group, m, n))
    return frozenset(out)


# --- repair quality checks ----------------------------------------------------

def _fix_group(query: ConjunctiveQuery, group: tuple[str, ...]) -> ConjunctiveQuery:
    """Pin the leading head variables to the group's constants."""
    return substitute(query, query.free_vars[: len(group)], group)


def is_optimistic_repair(
    repair: DatabaseInstance,
    db: DatabaseInstance,
    query: ConjunctiveQuery,
    group: tuple[str, ...],
) -> bool:
    """Does the repair preserve every answer the full instance has for this group?"""
    if not is_repair_of(repair, db):
        raise EvaluationError("candidate is not a repair of the instance")
    fixed = _fix_group(query, group)
    return evaluate(fixed, db).tuples <= evaluate(fixed, repair).tuples


def is_pessimistic_repair(
    repair: DatabaseInstance,
    db: DatabaseInstance,
    query: ConjunctiveQuery,
    group: tuple[str, ...],
) -> bool:
    """Does every answer on the repair hold in all repairs (for this group)?"""
    if not is_repair_of(repair, db):
        raise EvaluationError("candidate is not a repair of the instance")
    fixed = _fix_group(query, group)
    return evaluate(fixed, repair).tuples <= certain_answers(fixed, db).tuples


# --- result emission -----------------------------------------------------------

def range_answers_tsv(answers: Iterable[RangeAnswer]) -> str:
    lines = [
        "\t".join([*a.group, str(a.lower), str(a.upper)]) for a in sorted(answers)
    ]
    return "\n".join(lines)


def range_answers_json(answers: Iterable[RangeAnswer]) -> list[dict]:
    return [
        {"group": list(a.group), "m": a.lower, "n": a.upper} for a in sorted(answers)
    ]
