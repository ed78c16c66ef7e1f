"""Walks a parsed proof, dispatching every step to its rule."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .commands import Anchor, Assume, Clause, FunctionDefinition, ProofCommand, Step
from .errors import NoGoal, ScopeError
from .frontend import SUBPROOF_RULES, Problem
from .rules import (
    Context,
    RuleFailure,
    check_bind,
    check_cong,
    check_equiv_pos1,
    check_forall_inst,
    check_la_generic,
    check_refl,
    check_resolution,
    check_sko_ex,
    check_symm,
    check_trans,
)
from .terms import App, Definition, TermStore

VALID = "valid"
INVALID = "invalid"
VALID_MODULO = "valid-modulo-assumptions"
ERROR = "error"

TRANS_LEVELS = (1, 2, 3)


@dataclass
class StrictnessConfig:
    """Per-rule strictness; rules without an entry use their most lenient level."""

    levels: dict[str, int] = field(default_factory=dict)
    skip_unknown: bool = False

    def level(self, rule: str) -> int:
        return self.levels.get(rule, 3 if rule == "trans" else 1)

    @classmethod
    def trans(cls, level: int, **kw) -> "StrictnessConfig":
        if level not in TRANS_LEVELS:
            raise ValueError(f"trans level must be one of {TRANS_LEVELS}")
        return cls({"trans": level}, **kw)


@dataclass
class StepResult:
    id: str
    rule: str
    ok: bool
    reason: str | None = None
    assumed: bool = False

    @property
    def verdict(self) -> str:
        if self.assumed:
            return "assumed"
        return "ok" if self.ok else "failure"


@dataclass
class CheckReport:
    verdict: str
    steps: list[StepResult]
    statistics: Counter
    goal: str | None = None
    note: str | None = None

    @property
    def per_step(self) -> dict[str, StepResult]:
        return {s.id: s for s in self.steps}

    @property
    def failures(self) -> list[StepResult]:
        return [s for s in self.steps if not s.ok and not s.assumed]

    def to_jsonl(self) -> str:
        lines = []
        for s in self.steps:
            obj = {"id": s.id, "rule": s.rule, "verdict": s.verdict}
            if s.reason is not None:
                obj["reason"] = s.reason
            lines.append(json.dumps(obj))
        summary = {"verdict": self.verdict, "steps": len(self.steps), "failures": len(self.failures)}
        if self.goal is not None:
            summary["goal"] = self.goal
        lines.append(json.dumps(summary))
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        lines = [f"{s.id}: {s.rule}: {s.reason}" for s in self.failures]
        if self.note:
            lines.append(f"note: {self.note}")
        lines.append(f"verdict: {self.verdict} ({len(self.steps)} steps, {len(self.failures)} failures)")
        return "\n".join(lines) + "\n"


@dataclass
class _Subproof:
    anchor: Anchor
    ids: list[str] = field(default_factory=list)
    clauses: list[Clause] = field(default_factory=list)


@dataclass
class RuleInput:
    step: Step
    premises: list[Clause]
    ctx: Context
    level: int
    store: TermStore
    definitions: dict[str, Definition]
    subproof: _Subproof | None


def _no_premises(inp: RuleInput, rule: str) -> None:
    if inp.premises:
        raise RuleFailure(f"{rule} takes no premises")


def _is_atomic_equality(clause: Clause) -> bool:
    if len(clause) != 1 or not (isinstance(clause[0], App) and clause[0].op == "="):
        return False
    return not any(isinstance(a, App) for a in clause[0].args)


def _rule_cong(inp: RuleInput) -> None:
    if _is_atomic_equality(inp.step.clause):
        # variable equalities labelled cong are judged as refl
        check_refl(inp.step.clause, inp.ctx)
        return
    check_cong(inp.premises, inp.step.clause, inp.ctx)


def _rule_refl(inp: RuleInput) -> None:
    _no_premises(inp, "refl")
    check_refl(inp.step.clause, inp.ctx)


def _rule_bind(inp: RuleInput) -> None:
    if inp.subproof is None:
        raise RuleFailure("bind must close a subproof")
    check_bind(inp.subproof.clauses, inp.subproof.anchor, inp.step.clause)


def _rule_equiv_pos1(inp: RuleInput) -> None:
    _no_premises(inp, "equiv_pos1")
    check_equiv_pos1(inp.step.clause)


def _rule_sko_ex(inp: RuleInput) -> None:
    _no_premises(inp, "sko_ex")
    check_sko_ex(inp.step.clause, inp.store, inp.definitions)


def _rule_forall_inst(inp: RuleInput) -> None:
    _no_premises(inp, "forall_inst")
    check_forall_inst(inp.step.clause, inp.step.args, inp.store)


def _rule_la_generic(inp: RuleInput) -> None:
    _no_premises(inp, "la_generic")
    check_la_generic(inp.step.clause, inp.step.args)


RULES: dict[str, Callable[[RuleInput], None]] = {
    "resolution": lambda inp: check_resolution(inp.premises, inp.step.clause),
    "trans": lambda inp: check_trans(inp.premises, inp.step.clause, inp.level),
    "symm": lambda inp: check_symm(inp.premises, inp.step.clause),
    "cong": _rule_cong,
    "refl": _rule_refl,
    "bind": _rule_bind,
    "equiv_pos1": _rule_equiv_pos1,
    "sko_ex": _rule_sko_ex,
    "forall_inst": _rule_forall_inst,
    "la_generic": _rule_la_generic,
}


def resolve_premise(
    ident: str, visible: dict[str, Clause], hidden: set[str]
) -> Clause:
    if ident in visible:
        return visible[ident]
    if ident in hidden:
        raise ScopeError(f"premise {ident} lies inside a closed subproof")
    raise ScopeError(f"unknown premise {ident}")


def find_goal(commands: Sequence[ProofCommand], goal: str | None = None) -> str | None:
    """Explicit goal, else the first step concluding ``(cl)``, else the last top-level step."""
    top_level: list[Step] = []
    targets: list[str] = []
    for cmd in commands:
        if isinstance(cmd, Anchor):
            targets.append(cmd.step)
        elif isinstance(cmd, (Step, Assume)):
            if targets and targets[-1] == cmd.id:
                targets.pop()
            if not targets and isinstance(cmd, Step):
                top_level.append(cmd)
    if goal is not None:
        if not any(s.id == goal for s in top_level):
            raise NoGoal(f"goal {goal} is not a top-level step of the proof")
        return goal
    for s in top_level:
        if not s.clause:
            return s.id
    return top_level[-1].id if top_level else None


def check_proof(
    problem: Problem,
    commands: Sequence[ProofCommand],
    config: StrictnessConfig | None = None,
    goal: str | None = None,
) -> CheckReport:
    config = config or StrictnessConfig()
    store = problem.store
    assertions = {t for _, t in problem.assertions}
    definitions: dict[str, Definition] = dict(problem.signature.definitions)
    ctx = Context()
    visible: dict[str, Clause] = {}
    hidden: set[str] = set()
    subproofs: list[_Subproof] = []
    results: list[StepResult] = []
    stats: Counter = Counter()

    def record(ident: str, clause: Clause) -> None:
        visible[ident] = clause
        if subproofs:
            subproofs[-1].ids.append(ident)

    for cmd in commands:
        if isinstance(cmd, Assume):
            stats["assume"] += 1
            ok = cmd.term in assertions
            results.append(StepResult(cmd.id, "assume", ok, None if ok else "not an assertion of the problem"))
            record(cmd.id, cmd.clause)
        elif isinstance(cmd, Anchor):
            ctx.push(cmd)
            subproofs.append(_Subproof(cmd))
        elif isinstance(cmd, FunctionDefinition):
            definitions[cmd.name] = Definition(cmd.name, cmd.params, cmd.codomain, cmd.body)
        else:
            closed = None
            if subproofs and subproofs[-1].anchor.step == cmd.id:
                closed = subproofs.pop()
                ctx.pop()
                for ident in closed.ids:
                    visible.pop(ident, None)
                    hidden.add(ident)
            stats[cmd.rule] += 1
            results.append(_check_step(cmd, closed, visible, hidden, ctx, config, store, definitions, stats))
            record(cmd.id, cmd.clause)
            if subproofs:
                subproofs[-1].clauses.append(cmd.clause)

    failed = [r for r in results if not r.ok and not r.assumed]
    assumed = any(r.assumed for r in results)
    if subproofs:
        failed.append(StepResult(subproofs[-1].anchor.step, "anchor", False, "subproof is never closed"))
        results.append(failed[-1])
    goal_id = find_goal(commands, goal)
    note = None
    if goal is None and goal_id is not None:
        step = next(c for c in commands if isinstance(c, Step) and c.id == goal_id)
        if step.clause:
            note = f"all steps ok, no empty clause; goal defaults to the last step {goal_id}"
    if failed:
        verdict = INVALID
    elif assumed:
        verdict = VALID_MODULO
    else:
        verdict = VALID
    return CheckReport(verdict, results, stats, goal_id, note)


def _check_step(step, closed, visible, hidden, ctx, config, store, definitions, stats) -> StepResult:
    checker = RULES.get(step.rule)
    if step.rule in SUBPROOF_RULES and closed is None and checker is not None:
        return StepResult(step.id, step.rule, False, f"{step.rule} must close a subproof")
    if checker is None:
        if config.skip_unknown:
            return StepResult(step.id, step.rule, False, "unknown rule (assumed)", assumed=True)
        return StepResult(step.id, step.rule, False, f"unknown rule {step.rule}")
    try:
        premises = [resolve_premise(p, visible, hidden) for p in step.premises]
    except ScopeError as e:
        return StepResult(step.id, step.rule, False, e.message)
    inp = RuleInput(step, premises, ctx, config.level(step.rule), store, definitions, closed)
    try:
        checker(inp)
    except RuleFailure as e:
        return StepResult(step.id, step.rule, False, e.reason)
    if step.rule == "cong" and _is_atomic_equality(step.clause):
        stats["cong (checked as refl)"] += 1
    return StepResult(step.id, step.rule, True)
