"""Concrete Alethe syntax for terms and commands, one command per line."""

from __future__ import annotations

from fractions import Fraction

from .commands import (
    Anchor,
    AssignArg,
    Assume,
    FunctionDefinition,
    ProofCommand,
    RationalArg,
    Step,
    TermArg,
)
from .sexpr import _SYMBOL_CHARS
from .terms import INT, App, Binder, Const, Term, Var

_RESERVED = {"!", "_", "as", "let", "forall", "exists", "choice", "par", "NUMERAL", "DECIMAL", "STRING"}


def symbol(name: str) -> str:
    if name and not name[0].isdigit() and all(c in _SYMBOL_CHARS for c in name) and name not in _RESERVED:
        return name
    return f"|{name}|"


def _decimal(q: Fraction) -> str:
    """Exact decimal text for a nonnegative rational, or None if not finite."""
    d = q.denominator
    k = 0
    while d % 2 == 0 or d % 5 == 0:
        d //= 2 if d % 2 == 0 else 5
        k += 1
    if d != 1:
        return None
    digits = max(k, 1)
    scaled = q * 10**digits
    whole, frac = divmod(int(scaled), 10**digits)
    return f"{whole}.{frac:0{digits}d}"


def rational_literal(q: Fraction, real: bool) -> str:
    q = Fraction(q)
    if q < 0:
        return f"(- {rational_literal(-q, real)})"
    if not real and q.denominator == 1:
        return str(q.numerator)
    text = _decimal(q) if real else None
    if text is not None:
        return text
    return f"(/ {q.numerator} {q.denominator})"


def term_to_str(t: Term) -> str:
    parts: list[str] = []
    _emit(t, parts)
    return "".join(parts)


def _emit(t: Term, out: list[str]) -> None:
    if isinstance(t, Var):
        out.append(symbol(t.name))
    elif isinstance(t, Const):
        if isinstance(t.value, str):
            out.append(symbol(t.value))
        else:
            out.append(rational_literal(t.value, real=t.sort != INT))
    elif isinstance(t, App):
        out.append("(")
        out.append(symbol(t.op))
        for a in t.args:
            out.append(" ")
            _emit(a, out)
        out.append(")")
    elif isinstance(t, Binder):
        out.append(f"({t.quantifier} (")
        out.append(" ".join(f"({symbol(v.name)} {symbol(v.sort.name)})" for v in t.bindings))
        out.append(") ")
        _emit(t.body, out)
        out.append(")")
    else:
        raise TypeError(f"not a term: {t!r}")


def clause_to_str(clause) -> str:
    return "(cl" + "".join(" " + term_to_str(t) for t in clause) + ")"


def _arg_to_str(arg) -> str:
    if isinstance(arg, RationalArg):
        return rational_literal(arg.value, real=False)
    if isinstance(arg, AssignArg):
        lhs = symbol(arg.name) if arg.sort is None else f"({symbol(arg.name)} {symbol(arg.sort.name)})"
        return f"(:= {lhs} {term_to_str(arg.value)})"
    if isinstance(arg, TermArg):
        return term_to_str(arg.term)
    raise TypeError(f"not a rule argument: {arg!r}")


def command_to_str(cmd: ProofCommand) -> str:
    if isinstance(cmd, Assume):
        return f"(assume {symbol(cmd.id)} {term_to_str(cmd.term)})"
    if isinstance(cmd, Step):
        text = f"(step {symbol(cmd.id)} {clause_to_str(cmd.clause)} :rule {symbol(cmd.rule)}"
        if cmd.premises:
            text += " :premises (" + " ".join(symbol(p) for p in cmd.premises) + ")"
        if cmd.args:
            text += " :args (" + " ".join(_arg_to_str(a) for a in cmd.args) + ")"
        if cmd.discharge:
            text += " :discharge (" + " ".join(symbol(p) for p in cmd.discharge) + ")"
        return text + ")"
    if isinstance(cmd, Anchor):
        if not cmd.assignments:
            return f"(anchor :step {symbol(cmd.step)})"
        items = []
        for a in cmd.assignments:
            var = f"({symbol(a.var.name)} {symbol(a.var.sort.name)})"
            items.append(var if a.value is None else f"(:= {var} {term_to_str(a.value)})")
        return f"(anchor :step {symbol(cmd.step)} :args ({' '.join(items)}))"
    if isinstance(cmd, FunctionDefinition):
        params = " ".join(f"({symbol(p.name)} {symbol(p.sort.name)})" for p in cmd.params)
        return (
            f"(define-fun {symbol(cmd.name)} ({params}) {symbol(cmd.codomain.name)} "
            f"{term_to_str(cmd.body)})"
        )
    raise TypeError(f"not a proof command: {cmd!r}")


def print_proof(commands: list[ProofCommand]) -> str:
    return "".join(command_to_str(c) + "\n" for c in commands)
