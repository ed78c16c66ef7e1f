"""Proof commands and rule arguments."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .terms import Sort, Term, Var

Clause = tuple[Term, ...]


@dataclass(frozen=True)
class TermArg:
    term: Term


@dataclass(frozen=True)
class AssignArg:
    """``(:= name value)``; ``sort`` is kept when the source wrote ``(:= (name S) value)``."""

    name: str
    value: Term
    sort: Sort | None = None


@dataclass(frozen=True)
class RationalArg:
    value: Fraction


RuleArg = TermArg | AssignArg | RationalArg


@dataclass(frozen=True)
class ContextAssignment:
    """One anchor argument: ``var := value``, or a bare fixing when ``value`` is None."""

    var: Var
    value: Term | None = None


@dataclass(frozen=True)
class Assume:
    id: str
    term: Term

    @property
    def clause(self) -> Clause:
        return (self.term,)


@dataclass(frozen=True)
class Step:
    id: str
    clause: Clause
    rule: str
    premises: tuple[str, ...] = ()
    args: tuple[RuleArg, ...] = ()
    discharge: tuple[str, ...] = ()


@dataclass(frozen=True)
class Anchor:
    step: str
    assignments: tuple[ContextAssignment, ...] = ()


@dataclass(frozen=True)
class FunctionDefinition:
    name: str
    params: tuple[Var, ...]
    codomain: Sort
    body: Term


ProofCommand = Assume | Step | Anchor | FunctionDefinition


def command_id(cmd: ProofCommand) -> str | None:
    if isinstance(cmd, (Assume, Step)):
        return cmd.id
    return None


def subproof_spans(commands: list[ProofCommand]) -> dict[int, int]:
    """Map the index of each Anchor to the index of the step closing it."""
    spans: dict[int, int] = {}
    open_: list[int] = []
    for i, cmd in enumerate(commands):
        if isinstance(cmd, Anchor):
            open_.append(i)
        elif isinstance(cmd, Step) and open_ and commands[open_[-1]].step == cmd.id:
            spans[open_.pop()] = i
    return spans
