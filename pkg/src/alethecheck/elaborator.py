"""Proof transformations: strict trans elaboration and pruning."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .checker import StrictnessConfig, find_goal
from .commands import (
    Anchor,
    AssignArg,
    Assume,
    Clause,
    FunctionDefinition,
    ProofCommand,
    Step,
    TermArg,
    command_id,
    subproof_spans,
)
from .errors import NoGoal, Unelaborable
from .rules import RuleFailure, check_trans, trans_chain
from .terms import App, Const, Term, TermStore, subterms


@dataclass
class ElaborationResult:
    commands: list[ProofCommand]
    inserted: int = 0
    rewritten: int = 0
    unelaborable: list[str] = field(default_factory=list)


def elaborate_trans(
    step: Step,
    premises: Sequence[Clause],
    store: TermStore,
    taken: set[str] | None = None,
) -> list[Step]:
    """Rewrite ``step`` into symm steps plus a trans step that checks at level 1.

    ``taken`` holds every id already used in the proof; new ids are added to it.
    """
    try:
        check_trans(premises, step.clause, 1)
        return [step]
    except RuleFailure:
        pass
    try:
        chain = trans_chain(premises, step.clause, 3)
    except RuleFailure as e:
        raise Unelaborable(f"{step.id}: {e.reason}") from None
    taken = taken if taken is not None else set()
    out: list[Step] = []
    new_premises: list[str] = []
    n = 0
    for idx, flipped in chain:
        if not flipped:
            new_premises.append(step.premises[idx])
            continue
        n += 1
        ident = f"{step.id}.s{n}"
        if ident in taken:
            raise AssertionError(f"generated step id {ident} collides with an existing step")
        taken.add(ident)
        a, b = premises[idx][0].args
        out.append(Step(ident, (store.eq(b, a),), "symm", (step.premises[idx],)))
        new_premises.append(ident)
    out.append(Step(step.id, step.clause, "trans", tuple(new_premises), step.args, step.discharge))
    return out


def elaborate_proof(
    commands: Sequence[ProofCommand], target: StrictnessConfig, store: TermStore
) -> ElaborationResult:
    level = target.level("trans")
    clauses: dict[str, Clause] = {}
    taken = {i for i in map(command_id, commands) if i is not None}
    taken |= {c.step for c in commands if isinstance(c, Anchor)}
    result = ElaborationResult([])
    for cmd in commands:
        if isinstance(cmd, Step) and cmd.rule == "trans":
            premises = [clauses[p] for p in cmd.premises if p in clauses]
            if len(premises) == len(cmd.premises):
                try:
                    check_trans(premises, cmd.clause, level)
                    ok = True
                except RuleFailure:
                    ok = False
                if not ok:
                    try:
                        steps = elaborate_trans(cmd, premises, store, taken)
                    except Unelaborable:
                        result.unelaborable.append(cmd.id)
                    else:
                        result.commands.extend(steps)
                        result.inserted += len(steps) - 1
                        result.rewritten += 1
                        clauses[cmd.id] = cmd.clause
                        continue
        if isinstance(cmd, (Step, Assume)):
            clauses[cmd.id] = cmd.clause
        result.commands.append(cmd)
    return result


def _symbols(t: Term) -> set[str]:
    out = set()
    for s in subterms(t):
        if isinstance(s, Const) and isinstance(s.value, str):
            out.add(s.value)
        elif isinstance(s, App):
            out.add(s.op)
    return out


def _terms_of(cmd: ProofCommand) -> list[Term]:
    if isinstance(cmd, Assume):
        return [cmd.term]
    if isinstance(cmd, Step):
        terms = list(cmd.clause)
        for a in cmd.args:
            if isinstance(a, (AssignArg,)):
                terms.append(a.value)
            elif isinstance(a, TermArg):
                terms.append(a.term)
        return terms
    if isinstance(cmd, Anchor):
        return [a.value for a in cmd.assignments if a.value is not None]
    return [cmd.body]


def reachable_ids(commands: Sequence[ProofCommand], goal: str | None = None) -> set[str]:
    """Ids reachable from the goal through premises and subproof conclusions.

    The last step of a subproof counts as a premise of the step closing it.
    """
    goal_id = find_goal(commands, goal)
    if goal_id is None:
        raise NoGoal("proof has no steps to take as goal")
    by_id = {command_id(c): i for i, c in enumerate(commands) if command_id(c) is not None}
    spans = subproof_spans(commands)
    last_of = {}
    for start, end in spans.items():
        body = [j for j in range(start + 1, end) if isinstance(commands[j], Step) and _depth_ok(spans, start, j)]
        if body:
            last_of[end] = commands[body[-1]].id
    seen: set[str] = set()
    work = [goal_id]
    while work:
        ident = work.pop()
        if ident in seen or ident not in by_id:
            continue
        seen.add(ident)
        i = by_id[ident]
        cmd = commands[i]
        if isinstance(cmd, Step):
            work.extend(cmd.premises)
            if i in last_of:
                work.append(last_of[i])
    return seen


def _depth_ok(spans: dict[int, int], start: int, j: int) -> bool:
    """True if command ``j`` sits directly in the subproof opened at ``start``."""
    return not any(s > start and s < j <= e for s, e in spans.items())


def prune(commands: Sequence[ProofCommand], goal: str | None = None) -> list[ProofCommand]:
    """Keep what the goal depends on, in the original order."""
    goal_id = find_goal(commands, goal)
    if goal_id is None:
        raise NoGoal("proof has no steps to take as goal")
    by_id = {command_id(c): i for i, c in enumerate(commands) if command_id(c) is not None}
    spans = subproof_spans(commands)
    closing = {end: start for start, end in spans.items()}
    keep: set[int] = set()

    def grow(work: list[int]) -> None:
        while work:
            i = work.pop()
            if i in keep:
                continue
            keep.add(i)
            cmd = commands[i]
            if isinstance(cmd, Step):
                work.extend(by_id[p] for p in cmd.premises if p in by_id)
            if i in closing:
                work.extend(range(closing[i], i))

    grow([by_id[goal_id]])
    # a subproof survives whole or not at all
    changed = True
    while changed:
        changed = False
        for start, end in spans.items():
            if end not in keep and any(start < j < end for j in keep):
                grow([end])
                changed = True
    definitions = {c.name: i for i, c in enumerate(commands) if isinstance(c, FunctionDefinition)}
    needed: set[str] = set()
    pending = [t for i in keep for t in _terms_of(commands[i])]
    while pending:
        for name in _symbols(pending.pop()):
            if name in definitions and name not in needed:
                needed.add(name)
                keep.add(definitions[name])
                pending.append(commands[definitions[name]].body)
    return [c for i, c in enumerate(commands) if i in keep]
