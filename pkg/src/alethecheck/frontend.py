"""Parsers for the SMT-LIB problem subset and the Alethe command language."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .commands import (
    Anchor,
    AssignArg,
    Assume,
    ContextAssignment,
    FunctionDefinition,
    ProofCommand,
    RationalArg,
    RuleArg,
    Step,
    TermArg,
)
from .errors import (
    AletheError,
    DuplicateStepId,
    ParseError,
    SortError,
    UnclosedAnchor,
    UndeclaredSymbol,
    UnknownPremise,
    UnsupportedCommand,
)
from .sexpr import DECIMAL, KEYWORD, NUMERAL, SYMBOL, Atom, SExpr, SList, error_at, read_all
from .terms import BOOL, INT, QUANTIFIERS, REAL, Signature, Sort, Term, TermStore, Var

SUBPROOF_RULES = frozenset({"bind"})

_IGNORED_PROBLEM_COMMANDS = {"check-sat", "exit", "set-info", "set-option"}


@dataclass
class Problem:
    logic: str | None
    signature: Signature
    assertions: list[tuple[str | None, Term]] = field(default_factory=list)
    named_terms: dict[str, Term] = field(default_factory=dict)

    @property
    def store(self) -> TermStore:
        return self.signature.store


def _decode(text: str | bytes) -> str:
    return text.decode("utf-8") if isinstance(text, bytes) else text


def _symbol(node: SExpr, what: str = "symbol") -> str:
    if not (isinstance(node, Atom) and node.kind == SYMBOL):
        raise error_at(node, f"expected {what}")
    return node.text


def _literal_value(node: SExpr) -> tuple[Fraction, bool] | None:
    """Value and realness of a numeric literal form, including ``(- n)`` and ``(/ p q)``."""
    if isinstance(node, Atom):
        if node.kind == NUMERAL:
            return Fraction(int(node.text)), False
        if node.kind == DECIMAL:
            return Fraction(node.text), True
        return None
    head = node.head()
    if head == "-" and len(node) == 2:
        inner = _literal_value(node[1])
        if inner is not None:
            return -inner[0], inner[1]
    if head == "/" and len(node) == 3:
        p, q = _literal_value(node[1]), _literal_value(node[2])
        if p is not None and q is not None:
            if q[0] == 0:
                raise error_at(node, "division by zero in literal")
            return p[0] / q[0], True
    return None


class TermReader:
    """Builds interned terms from s-expressions against a signature."""

    def __init__(self, sig: Signature, named: dict[str, Term]):
        self.sig = sig
        self.store = sig.store
        self.named = named

    def sort(self, node: SExpr) -> Sort:
        name = _symbol(node, "sort")
        try:
            return self.sig.sort(name)
        except AletheError as e:
            raise error_at(node, e.message, type(e)) from None

    def sorted_var(self, node: SExpr) -> Var:
        if not (isinstance(node, SList) and len(node) == 2):
            raise error_at(node, "expected (name Sort)")
        return self.store.var(_symbol(node[0], "variable name"), self.sort(node[1]))

    def term(self, node: SExpr, env: dict[str, Term]) -> Term:
        try:
            return self._term(node, env)
        except AletheError as e:
            if e.line is None:
                e.line, e.col = node.line, node.col
            raise

    def _term(self, node: SExpr, env: dict[str, Term]) -> Term:
        lit = _literal_value(node)
        if lit is not None:
            value, real = lit
            return self.store.const(value, REAL if real else INT)
        if isinstance(node, Atom):
            if node.kind != SYMBOL:
                raise error_at(node, f"unexpected {node.kind} {node.text!r} in term")
            name = node.text
            if name in env:
                return env[name]
            if name in ("true", "false"):
                return self.store.const(name, BOOL)
            if name in self.named:
                return self.named[name]
            return self.sig.constant(name)
        if not node.items:
            raise error_at(node, "empty application")
        head = node.head()
        if head is None:
            raise error_at(node[0], "expected function symbol")
        if head in QUANTIFIERS:
            return self._binder(head, node, env)
        if head == "let":
            return self._let(node, env)
        if head == "!":
            return self._annotated(node, env)
        if head in ("_", "as", "par"):
            raise error_at(node, f"unsupported construct {head}", UnsupportedCommand)
        args = [self.term(a, env) for a in node.items[1:]]
        if head in env or head in self.named:
            raise error_at(node[0], f"{head} is not a function", SortError)
        try:
            return self.sig.apply(head, args)
        except UndeclaredSymbol as e:
            raise error_at(node[0], e.message, UndeclaredSymbol) from None

    def _binder(self, q: str, node: SList, env: dict[str, Term]) -> Term:
        if len(node) != 3 or not isinstance(node[1], SList):
            raise error_at(node, f"malformed {q}")
        bound = [self.sorted_var(b) for b in node[1].items]
        inner = dict(env)
        for v in bound:
            inner[v.name] = v
        body = self.term(node[2], inner)
        return self.store.binder(q, bound, body)

    def _let(self, node: SList, env: dict[str, Term]) -> Term:
        if len(node) != 3 or not isinstance(node[1], SList):
            raise error_at(node, "malformed let")
        inner = dict(env)
        for b in node[1].items:
            if not (isinstance(b, SList) and len(b) == 2):
                raise error_at(b, "malformed let binding")
            inner[_symbol(b[0])] = self.term(b[1], env)
        return self.term(node[2], inner)

    def _annotated(self, node: SList, env: dict[str, Term]) -> Term:
        if len(node) < 2:
            raise error_at(node, "malformed annotation")
        t = self.term(node[1], env)
        attrs = node.items[2:]
        for i in range(0, len(attrs), 2):
            key = attrs[i]
            if not (isinstance(key, Atom) and key.kind == KEYWORD):
                raise error_at(key, "expected attribute keyword")
            if key.text == ":named":
                if i + 1 >= len(attrs):
                    raise error_at(key, ":named needs a name")
                name = _symbol(attrs[i + 1])
                if name in self.named and self.named[name] is not t:
                    raise error_at(attrs[i + 1], f"name {name} already used", SortError)
                self.named[name] = t
        return t


def _scan_for_bound_sorts(node: SExpr, names: set[str], found: dict[str, SExpr]) -> None:
    if not isinstance(node, SList):
        return
    if node.head() in QUANTIFIERS and len(node) == 3 and isinstance(node[1], SList):
        for b in node[1].items:
            if isinstance(b, SList) and len(b) == 2 and isinstance(b[0], Atom) and b[0].text in names:
                found.setdefault(b[0].text, b[1])
    for item in node.items:
        _scan_for_bound_sorts(item, names, found)


def parse_problem(text: str | bytes) -> Problem:
    sig = Signature(TermStore())
    problem = Problem(None, sig)
    reader = TermReader(sig, problem.named_terms)
    for cmd in read_all(_decode(text)):
        if not isinstance(cmd, SList) or cmd.head() is None:
            raise error_at(cmd, "expected a command")
        head = cmd.head()
        args = cmd.items[1:]
        try:
            if head == "set-logic":
                _arity(cmd, 1)
                problem.logic = _symbol(args[0], "logic name")
            elif head == "declare-sort":
                if len(args) not in (1, 2):
                    raise error_at(cmd, "malformed declare-sort")
                arity = 0
                if len(args) == 2:
                    if not (isinstance(args[1], Atom) and args[1].kind == NUMERAL):
                        raise error_at(args[1], "expected sort arity")
                    arity = int(args[1].text)
                sig.declare_sort(_symbol(args[0]), arity)
            elif head == "declare-fun":
                _arity(cmd, 3)
                if not isinstance(args[1], SList):
                    raise error_at(args[1], "expected argument sort list")
                sig.declare_fun(
                    _symbol(args[0]), [reader.sort(s) for s in args[1].items], reader.sort(args[2])
                )
            elif head == "declare-const":
                _arity(cmd, 2)
                sig.declare_fun(_symbol(args[0]), (), reader.sort(args[1]))
            elif head == "define-fun":
                _define_fun(reader, cmd, {})
            elif head == "assert":
                _arity(cmd, 1)
                t = reader.term(args[0], {})
                if t.sort != BOOL:
                    raise error_at(args[0], f"assertion has sort {t.sort}, expected Bool", SortError)
                name = None
                if isinstance(args[0], SList) and args[0].head() == "!":
                    name = next((n for n, v in problem.named_terms.items() if v is t), None)
                problem.assertions.append((name, t))
            elif head in _IGNORED_PROBLEM_COMMANDS:
                pass
            else:
                raise error_at(cmd, f"unsupported command {head}", UnsupportedCommand)
        except AletheError as e:
            if e.line is None:
                e.line, e.col = cmd.line, cmd.col
            raise
    return problem


def _arity(cmd: SList, n: int) -> None:
    if len(cmd) != n + 1:
        raise error_at(cmd, f"{cmd.head()} expects {n} argument(s)")


def _define_fun(reader: TermReader, cmd: SList, env: dict[str, Term]) -> FunctionDefinition:
    _arity(cmd, 4)
    _, name_node, params_node, sort_node, body_node = cmd.items
    if not isinstance(params_node, SList):
        raise error_at(params_node, "expected parameter list")
    params = [reader.sorted_var(p) for p in params_node.items]
    inner = dict(env)
    for p in params:
        inner[p.name] = p
    codomain = reader.sort(sort_node)
    body = reader.term(body_node, inner)
    name = _symbol(name_node)
    reader.sig.define_fun(name, params, codomain, body)
    return FunctionDefinition(name, tuple(params), codomain, body)


def _keyword_attrs(cmd: SList, start: int) -> dict[str, SExpr]:
    attrs: dict[str, SExpr] = {}
    items = cmd.items[start:]
    if len(items) % 2:
        raise error_at(items[-1], "attribute without value")
    for key, value in zip(items[::2], items[1::2]):
        if not (isinstance(key, Atom) and key.kind == KEYWORD):
            raise error_at(key, "expected attribute keyword")
        if key.text in attrs:
            raise error_at(key, f"duplicate attribute {key.text}")
        attrs[key.text] = value
    return attrs


def _id_list(node: SExpr) -> list[Atom]:
    if not isinstance(node, SList):
        raise error_at(node, "expected a list of step identifiers")
    for n in node.items:
        _symbol(n, "step identifier")
    return list(node.items)


class _ProofParser:
    def __init__(self, problem: Problem, subproof_rules: Iterable[str]):
        self.sig = problem.signature.copy()
        self.named = dict(problem.named_terms)
        self.reader = TermReader(self.sig, self.named)
        self.subproof_rules = frozenset(subproof_rules)
        self.defined: set[str] = set()
        # (target id, env inside the subproof, anchor node)
        self.anchors: list[tuple[str, dict[str, Term], SList]] = []
        self.step_nodes: dict[str, SList] = {}

    @property
    def env(self) -> dict[str, Term]:
        return self.anchors[-1][1] if self.anchors else {}

    def parse(self, text: str) -> list[ProofCommand]:
        nodes = read_all(text)
        for node in nodes:
            if isinstance(node, SList) and node.head() == "step" and len(node) > 1:
                if isinstance(node[1], Atom):
                    self.step_nodes.setdefault(node[1].text, node)
        out: list[ProofCommand] = []
        for node in nodes:
            if not isinstance(node, SList) or node.head() is None:
                raise error_at(node, "expected a proof command")
            try:
                out.append(self.command(node))
            except AletheError as e:
                if e.line is None:
                    e.line, e.col = node.line, node.col
                raise
        if self.anchors:
            target, _, node = self.anchors[-1]
            raise error_at(node, f"anchor for {target} is never closed", UnclosedAnchor)
        return out

    def _new_id(self, node: SExpr) -> str:
        ident = _symbol(node, "step identifier")
        if ident in self.defined:
            raise error_at(node, f"duplicate step id {ident}", DuplicateStepId)
        self.defined.add(ident)
        return ident

    def command(self, node: SList) -> ProofCommand:
        head = node.head()
        if head == "assume":
            _arity(node, 2)
            ident = self._new_id(node[1])
            term = self.reader.term(node[2], self.env)
            if term.sort != BOOL:
                raise error_at(node[2], "assumption is not Boolean", SortError)
            return Assume(ident, term)
        if head == "step":
            return self.step(node)
        if head == "anchor":
            return self.anchor(node)
        if head == "define-fun":
            return _define_fun(self.reader, node, self.env)
        raise error_at(node, f"unsupported proof command {head}", UnsupportedCommand)

    def step(self, node: SList) -> Step:
        if len(node) < 3:
            raise error_at(node, "malformed step")
        ident_node = node[1]
        ident = _symbol(ident_node, "step identifier")
        attrs = _keyword_attrs(node, 3)
        if ":rule" not in attrs:
            raise error_at(node, f"step {ident} has no :rule")
        rule = _symbol(attrs[":rule"], "rule name")
        for i, (target, _, _) in enumerate(self.anchors):
            if target == ident:
                if i != len(self.anchors) - 1:
                    raise error_at(ident_node, f"step {ident} closes an outer subproof first")
                if rule not in self.subproof_rules:
                    raise error_at(attrs[":rule"], f"subproof {ident} must end with a subproof rule, not {rule}")
                self.anchors.pop()
                break
        premises = []
        for p in _id_list(attrs.get(":premises", SList([], node.line, node.col))):
            if p.text not in self.defined:
                raise error_at(p, f"unknown premise {p.text}", UnknownPremise)
            premises.append(p.text)
        discharge = [p.text for p in _id_list(attrs.get(":discharge", SList([], node.line, node.col)))]
        env = self.env
        clause = self.clause(node[2], env)
        args: list[RuleArg] = []
        if ":args" in attrs:
            if not isinstance(attrs[":args"], SList):
                raise error_at(attrs[":args"], "expected argument list")
            args = [self.rule_arg(a, env) for a in attrs[":args"].items]
        ident = self._new_id(ident_node)
        return Step(ident, clause, rule, tuple(premises), tuple(args), tuple(discharge))

    def clause(self, node: SExpr, env: dict[str, Term]) -> tuple[Term, ...]:
        if not (isinstance(node, SList) and node.head() == "cl"):
            raise error_at(node, "expected (cl ...)")
        lits = tuple(self.reader.term(t, env) for t in node.items[1:])
        for t, n in zip(lits, node.items[1:]):
            if t.sort != BOOL:
                raise error_at(n, f"clause literal has sort {t.sort}", SortError)
        return lits

    def rule_arg(self, node: SExpr, env: dict[str, Term]) -> RuleArg:
        lit = _literal_value(node)
        if lit is not None:
            return RationalArg(lit[0])
        if isinstance(node, SList) and node.head() == ":=":
            if len(node) != 3:
                raise error_at(node, "malformed assignment")
            lhs = node[1]
            if isinstance(lhs, SList):
                var = self.reader.sorted_var(lhs)
                name, sort = var.name, var.sort
            else:
                name, sort = _symbol(lhs, "variable"), None
            value = self.reader.term(node[2], env)
            return AssignArg(name, value, sort)
        return TermArg(self.reader.term(node, env))

    def anchor(self, node: SList) -> Anchor:
        attrs = _keyword_attrs(node, 1)
        if ":step" not in attrs:
            raise error_at(node, "anchor without :step")
        target = _symbol(attrs[":step"], "step identifier")
        if target in self.defined or any(t == target for t, _, _ in self.anchors):
            raise error_at(attrs[":step"], f"duplicate step id {target}", DuplicateStepId)
        env = dict(self.env)
        items: list[SExpr] = []
        if ":args" in attrs:
            args = attrs[":args"]
            if not isinstance(args, SList):
                raise error_at(args, "expected anchor argument list")
            items = [args] if args.head() == ":=" else list(args.items)
        assignments = []
        for item in items:
            assignments.append(self.context_item(item, target, env))
        self.anchors.append((target, env, node))
        return Anchor(target, tuple(assignments))

    def context_item(self, item: SExpr, target: str, env: dict[str, Term]) -> ContextAssignment:
        if isinstance(item, SList) and item.head() == ":=" and len(item) == 3:
            lhs, rhs = item[1], item[2]
            if isinstance(lhs, SList):
                var = self.reader.sorted_var(lhs)
            else:
                name = _symbol(lhs, "variable")
                var = None
                if isinstance(rhs, SList):
                    value = self.reader.term(rhs, env)
                    var = self.sig.store.var(name, value.sort)
                else:
                    sort = self._infer_sort(target, [name, _symbol(rhs, "variable")], item)
                    var = self.sig.store.var(name, sort)
            if isinstance(rhs, Atom) and rhs.kind == SYMBOL and rhs.text not in env:
                value = self.sig.store.var(rhs.text, var.sort)
            else:
                value = self.reader.term(rhs, env)
            if value.sort != var.sort:
                raise error_at(item, f"cannot assign {value.sort} term to {var.name}: {var.sort}", SortError)
            env[var.name] = var
            if isinstance(value, Var):
                env[value.name] = value
            return ContextAssignment(var, value)
        var = self.reader.sorted_var(item)
        env[var.name] = var
        return ContextAssignment(var, None)

    def _infer_sort(self, target: str, names: list[str], item: SExpr) -> Sort:
        closing = self.step_nodes.get(target)
        found: dict[str, SExpr] = {}
        if closing is not None and len(closing) > 2:
            _scan_for_bound_sorts(closing[2], set(names), found)
        for name in names:
            if name in found:
                return self.reader.sort(found[name])
        raise error_at(item, f"cannot infer the sort of {names[0]}; write (:= ({names[0]} <Sort>) ...)")


def parse_proof(
    text: str | bytes, problem: Problem, subproof_rules: Iterable[str] = SUBPROOF_RULES
) -> list[ProofCommand]:
    return _ProofParser(problem, subproof_rules).parse(_decode(text))


__all__ = [
    "Problem",
    "TermReader",
    "parse_problem",
    "parse_proof",
    "SUBPROOF_RULES",
    "ParseError",
    "UndeclaredSymbol",
]
