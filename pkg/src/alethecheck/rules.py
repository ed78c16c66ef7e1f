"""Rule semantics.

Every ``check_*`` function returns None when the step is justified and
raises :class:`RuleFailure` with a human-readable reason otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .commands import Anchor, AssignArg, Clause, RationalArg, RuleArg, TermArg
from .terms import (
    BOOL,
    App,
    Binder,
    Const,
    Definition,
    Term,
    TermStore,
    Var,
    alpha_equal,
    expand_definitions,
    is_app,
    is_neg,
    substitute,
)

RESOLUTION_SEARCH_LIMIT = 16


class RuleFailure(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


@dataclass
class Frame:
    fixed: tuple[Var, ...] = ()
    mappings: dict[Var, Term] = field(default_factory=dict)


class Context:
    """Stack of anchor frames; lookups go innermost first."""

    def __init__(self):
        self.frames: list[Frame] = []

    def __len__(self) -> int:
        return len(self.frames)

    def push(self, anchor: Anchor) -> None:
        frame = Frame()
        fixed = []
        for a in anchor.assignments:
            if a.value is None:
                fixed.append(a.var)
            else:
                frame.mappings[a.var] = a.value
        frame.fixed = tuple(fixed)
        self.frames.append(frame)

    def pop(self) -> Frame:
        return self.frames.pop()

    def lookup(self, v: Term) -> Term | None:
        if not isinstance(v, Var):
            return None
        for frame in reversed(self.frames):
            if v in frame.mappings:
                return frame.mappings[v]
        return None

    def maps(self, a: Term, b: Term) -> bool:
        return self.lookup(a) is b

    @classmethod
    def of(cls, mappings: Mapping[Var, Term]) -> "Context":
        ctx = cls()
        ctx.frames.append(Frame((), dict(mappings)))
        return ctx


def _unit_equality(clause: Clause, what: str) -> tuple[Term, Term]:
    if len(clause) != 1 or not is_app(clause[0], "=", 2):
        raise RuleFailure(f"{what} is not a unit equality")
    return clause[0].args


# resolution ---------------------------------------------------------------


def _complementary(a: Term, b: Term) -> bool:
    return (is_neg(b) and b.args[0] is a) or (is_neg(a) and a.args[0] is b)


def _pivots(left: Sequence[Term], right: Sequence[Term]):
    for lit in left:
        for other in right:
            if _complementary(lit, other):
                yield lit, other


def _resolve(left, right, pivot) -> frozenset:
    lit, other = pivot
    return (frozenset(left) - {lit}) | (frozenset(right) - {other})


def _ordered_unique(clause: Clause) -> list[Term]:
    seen: set[int] = set()
    out = []
    for t in clause:
        if t.uid not in seen:
            seen.add(t.uid)
            out.append(t)
    return out


def check_resolution(premises: Sequence[Clause], conclusion: Clause) -> None:
    """Conclusion must be the result of chaining binary resolutions over all premises.

    Clauses are compared as sets, so repeated literals merge.
    """
    if not premises:
        raise RuleFailure("resolution needs at least one premise")
    target = frozenset(conclusion)
    clauses = [_ordered_unique(c) for c in premises]
    if _greedy_chain(clauses) == target:
        return
    if len(clauses) > RESOLUTION_SEARCH_LIMIT:
        raise RuleFailure("resolution too wide for search")
    if not _search_chain(clauses, target):
        raise RuleFailure("no resolution chain found")


def _greedy_chain(clauses: list[list[Term]]) -> frozenset | None:
    current = list(clauses[0])
    for nxt in clauses[1:]:
        pivot = next(_pivots(current, nxt), None)
        if pivot is None:
            return None
        merged = _resolve(current, nxt, pivot)
        current = [t for t in (*current, *nxt) if t in merged]
        current = _ordered_unique(tuple(current))
    return frozenset(current)


def _search_chain(clauses: list[list[Term]], target: frozenset) -> bool:
    n = len(clauses)
    full = (1 << n) - 1
    sets = [frozenset(c) for c in clauses]
    universe = frozenset().union(*sets)
    if not target <= universe:
        return False
    seen: set[tuple[frozenset, int]] = set()

    def go(current: frozenset, used: int) -> bool:
        if used == full:
            return current == target
        key = (current, used)
        if key in seen:
            return False
        seen.add(key)
        for j in range(n):
            if used >> j & 1:
                continue
            for pivot in _pivots(tuple(current), clauses[j]):
                if go(_resolve(current, sets[j], pivot), used | 1 << j):
                    return True
        return False

    return any(go(sets[i], 1 << i) for i in range(n))


# transitivity -------------------------------------------------------------


def _premise_equalities(premises: Sequence[Clause]) -> list[tuple[Term, Term]]:
    if not premises:
        raise RuleFailure("trans needs at least one premise")
    out = []
    for i, c in enumerate(premises, 1):
        if len(c) != 1 or not is_app(c[0], "=", 2):
            raise RuleFailure(f"chain mismatch at premise {i}: not a unit equality")
        out.append(tuple(c[0].args))
    return out


def _walk(eqs, start, end, flips: bool) -> tuple[list[tuple[int, bool]] | None, int]:
    """Traverse ``eqs`` in order; return the chain or the 1-based index of the first mismatch."""
    cur = start
    chain = []
    for i, (a, b) in enumerate(eqs):
        if a is cur:
            chain.append((i, False))
            cur = b
        elif flips and b is cur:
            chain.append((i, True))
            cur = a
        else:
            return None, i + 1
    if cur is not end:
        return None, len(eqs)
    return chain, 0


def _euler_chain(eqs, start, end) -> list[tuple[int, bool]] | None:
    """Use every equality once, in any order and orientation, to walk start..end."""
    degree: dict[int, int] = {}
    adjacency: dict[int, list[tuple[int, Term, bool]]] = {}
    for i, (a, b) in enumerate(eqs):
        degree[a.uid] = degree.get(a.uid, 0) + 1
        degree[b.uid] = degree.get(b.uid, 0) + 1
        adjacency.setdefault(a.uid, []).append((i, b, False))
        adjacency.setdefault(b.uid, []).append((i, a, True))
    odd = {v for v, d in degree.items() if d % 2}
    want = set() if start is end else {start.uid, end.uid}
    if odd != want or start.uid not in adjacency:
        return None
    for edges in adjacency.values():
        # correctly oriented uses first, then textual order
        edges.sort(key=lambda e: (e[2], e[0]))
    cursor = {v: 0 for v in adjacency}
    used = [False] * len(eqs)
    stack: list[tuple[Term, tuple[int, bool] | None]] = [(start, None)]
    path: list[tuple[int, bool]] = []
    while stack:
        node, via = stack[-1]
        edges = adjacency[node.uid]
        k = cursor[node.uid]
        while k < len(edges) and used[edges[k][0]]:
            k += 1
        cursor[node.uid] = k
        if k < len(edges):
            idx, other, flipped = edges[k]
            used[idx] = True
            stack.append((other, (idx, flipped)))
        else:
            stack.pop()
            if via is not None:
                path.append(via)
    if len(path) != len(eqs):
        return None
    path.reverse()
    return path


def trans_chain(premises: Sequence[Clause], conclusion: Clause, level: int) -> list[tuple[int, bool]]:
    """Order the premises into a chain from the conclusion's left side to its right side.

    Returns ``(premise index, used flipped)`` pairs in chain order.
    """
    if level not in (1, 2, 3):
        raise ValueError(f"trans strictness level must be 1, 2 or 3, got {level}")
    start, end = _unit_equality(conclusion, "trans conclusion")
    eqs = _premise_equalities(premises)
    if level == 1:
        chain, bad = _walk(eqs, start, end, flips=False)
    elif level == 2:
        chain, bad = _walk(eqs, start, end, flips=True)
        if chain is None:
            backward, _ = _walk(eqs, end, start, flips=True)
            if backward is not None:
                chain = [(i, not f) for i, f in reversed(backward)]
    else:
        chain, bad = _euler_chain(eqs, start, end), 0
        if chain is None:
            raise RuleFailure("premises do not form a chain between the conclusion's sides")
    if chain is None:
        raise RuleFailure(f"chain mismatch at premise {bad}")
    return chain


def check_trans(premises: Sequence[Clause], conclusion: Clause, level: int = 3) -> None:
    trans_chain(premises, conclusion, level)


def check_symm(premises: Sequence[Clause], conclusion: Clause) -> None:
    if len(premises) != 1:
        raise RuleFailure("symm takes exactly one premise")
    a, b = _unit_equality(premises[0], "symm premise")
    c, d = _unit_equality(conclusion, "symm conclusion")
    if not (c is b and d is a):
        raise RuleFailure("conclusion is not the flipped premise")


# congruence and context ---------------------------------------------------


def check_refl(conclusion: Clause, ctx: Context | None = None) -> None:
    a, b = _unit_equality(conclusion, "refl conclusion")
    if a is b:
        return
    if ctx is not None and (ctx.maps(a, b) or ctx.maps(b, a)):
        return
    raise RuleFailure("not reflexive under context")


def check_cong(premises: Sequence[Clause], conclusion: Clause, ctx: Context | None = None) -> None:
    left, right = _unit_equality(conclusion, "cong conclusion")
    if not (isinstance(left, App) and isinstance(right, App)):
        raise RuleFailure("cong conclusion must equate two applications")
    if left.op != right.op or len(left.args) != len(right.args):
        raise RuleFailure("function symbols or arities differ")
    known = set()
    for i, p in enumerate(premises, 1):
        a, b = _unit_equality(p, f"premise {i}")
        known.add((a.uid, b.uid))
        known.add((b.uid, a.uid))
    for i, (t, s) in enumerate(zip(left.args, right.args), 1):
        if t is s or (t.uid, s.uid) in known:
            continue
        if ctx is not None and ctx.maps(t, s):
            continue
        raise RuleFailure(f"argument {i} unjustified")


def check_bind(subproof: Sequence[Clause], anchor: Anchor, conclusion: Clause) -> None:
    """``subproof`` holds the clauses of the subproof's steps; the last one is its conclusion."""
    left, right = _unit_equality(conclusion, "bind conclusion")
    if not (isinstance(left, Binder) and isinstance(right, Binder)):
        raise RuleFailure("quantifier mismatch: both sides must be quantified")
    if left.quantifier != right.quantifier or len(left.bindings) != len(right.bindings):
        raise RuleFailure("quantifier mismatch")
    mapped = {a.var: a.value for a in anchor.assignments if a.value is not None}
    fixed = {a.var for a in anchor.assignments if a.value is None}
    for x, y in zip(left.bindings, right.bindings):
        if not (mapped.get(x) is y or (x is y and x in fixed)):
            if x is y:
                raise RuleFailure(f"variable {x.name} is not in the subproof context")
            raise RuleFailure(f"context does not rename {x.name} to {y.name}")
        if y is not x and y in left.free_vars:
            raise RuleFailure(f"capture: {y.name} free in original")
    if not subproof:
        raise RuleFailure("subproof conclusion mismatch: empty subproof")
    phi, psi = _unit_equality(subproof[-1], "subproof conclusion")
    if not (phi is left.body and psi is right.body):
        raise RuleFailure("subproof conclusion mismatch")


# tautologies and quantifiers ---------------------------------------------


def check_equiv_pos1(conclusion: Clause) -> None:
    if len(conclusion) != 3:
        raise RuleFailure("shape mismatch: expected three literals")
    first, second, third = conclusion
    if not (is_neg(first) and is_app(first.args[0], "=", 2)):
        raise RuleFailure("shape mismatch: first literal must be (not (= A B))")
    a, b = first.args[0].args
    if a.sort != BOOL or not (is_neg(second) and second.args[0] is a) or third is not b:
        raise RuleFailure("shape mismatch")


def check_sko_ex(
    conclusion: Clause,
    store: TermStore,
    definitions: Mapping[str, Definition] | None = None,
) -> None:
    left, right = _unit_equality(conclusion, "sko_ex conclusion")
    if not (isinstance(left, Binder) and left.quantifier == "exists"):
        raise RuleFailure("not a skolemization instance: left side is not an existential")
    x, rest = left.bindings[0], left.bindings[1:]
    phi = store.binder("exists", rest, left.body) if rest else left.body
    witness = store.binder("choice", (x,), phi)
    expected = substitute(store, phi, {x: witness})
    defs = definitions or {}
    if alpha_equal(expand_definitions(store, right, defs), expand_definitions(store, expected, defs)):
        return
    raise RuleFailure("not a skolemization instance")


def check_forall_inst(conclusion: Clause, args: Sequence[RuleArg], store: TermStore) -> None:
    if len(conclusion) != 1 or not is_app(conclusion[0], "or", 2):
        raise RuleFailure("instance mismatch: conclusion must be (or (not (forall ...)) F)")
    negated, instance = conclusion[0].args
    if not (is_neg(negated) and isinstance(negated.args[0], Binder) and negated.args[0].quantifier == "forall"):
        raise RuleFailure("instance mismatch: first disjunct must negate a universal")
    quant = negated.args[0]
    by_name = {v.name: v for v in quant.bindings}
    sigma: dict[Var, Term] = {}
    for pos, arg in enumerate(args):
        if isinstance(arg, AssignArg):
            var = by_name.get(arg.name)
            if var is None:
                raise RuleFailure(f"instance mismatch: {arg.name} is not bound by the quantifier")
            if arg.sort is not None and arg.sort != var.sort:
                raise RuleFailure(f"sort mismatch for {arg.name}")
            value = arg.value
        elif isinstance(arg, TermArg) and pos < len(quant.bindings):
            var, value = quant.bindings[pos], arg.term
        else:
            raise RuleFailure("instance mismatch: arguments must be assignments")
        if var in sigma:
            raise RuleFailure(f"instance mismatch: {var.name} instantiated twice")
        if value.sort != var.sort:
            raise RuleFailure(f"sort mismatch: {var.name} has sort {var.sort}, got {value.sort}")
        sigma[var] = value
    for v in quant.bindings:
        if v not in sigma:
            raise RuleFailure(f"missing instantiation for variable {v.name}")
    if not alpha_equal(instance, substitute(store, quant.body, sigma)):
        raise RuleFailure("instance mismatch")


# linear arithmetic --------------------------------------------------------

LinearForm = tuple[dict[Term, Fraction], Fraction]

_NEGATED_OP = {"<": ">=", "<=": ">", ">": "<=", ">=": "<"}


def linearize(t: Term) -> LinearForm:
    """Coefficients per atom plus a constant; raises RuleFailure on nonlinear terms."""
    if isinstance(t, Const) and t.is_numeral:
        return {}, Fraction(t.value)
    if isinstance(t, App):
        op, args = t.op, t.args
        if op == "+":
            return _add([linearize(a) for a in args])
        if op == "-":
            forms = [linearize(a) for a in args]
            if len(forms) == 1:
                return _scale(forms[0], Fraction(-1))
            return _add([forms[0]] + [_scale(f, Fraction(-1)) for f in forms[1:]])
        if op == "*":
            forms = [linearize(a) for a in args]
            coeff = Fraction(1)
            variable = None
            for f in forms:
                if f[0]:
                    if variable is not None:
                        raise RuleFailure("nonlinear literal")
                    variable = f
                else:
                    coeff *= f[1]
            return _scale(variable or ({}, Fraction(1)), coeff)
        if op == "/":
            forms = [linearize(a) for a in args]
            out = forms[0]
            for f in forms[1:]:
                if f[0] or f[1] == 0:
                    raise RuleFailure("nonlinear literal")
                out = _scale(out, 1 / f[1])
            return out
        if op == "to_real":
            return linearize(args[0])
        if op in ("div", "mod", "abs", "to_int"):
            raise RuleFailure("nonlinear literal")
    if not t.sort.is_numeric:
        raise RuleFailure("nonlinear literal")
    return {t: Fraction(1)}, Fraction(0)


def _add(forms: list[LinearForm]) -> LinearForm:
    coeffs: dict[Term, Fraction] = {}
    const = Fraction(0)
    for c, k in forms:
        const += k
        for atom, q in c.items():
            coeffs[atom] = coeffs.get(atom, Fraction(0)) + q
    return {a: q for a, q in coeffs.items() if q != 0}, const


def _scale(form: LinearForm, q: Fraction) -> LinearForm:
    c, k = form
    if q == 0:
        return {}, Fraction(0)
    return {a: v * q for a, v in c.items()}, k * q


def negated_constraint(literal: Term) -> tuple[str, LinearForm]:
    """Normalize the negation of ``literal`` to ``form op 0`` with op in {<, <=, =}."""
    if is_neg(literal):
        atom, op = literal.args[0], None
    else:
        atom, op = literal, "negate"
    if not (isinstance(atom, App) and atom.op in ("<", "<=", ">", ">=", "=") and len(atom.args) == 2):
        raise RuleFailure("nonlinear literal")
    rel = atom.op
    if op == "negate":
        if rel == "=":
            raise RuleFailure("nonlinear literal: a disequality cannot take a Farkas coefficient")
        rel = _NEGATED_OP[rel]
    lhs, rhs = atom.args
    if not (lhs.sort.is_numeric and rhs.sort.is_numeric):
        raise RuleFailure("nonlinear literal")
    diff = _add([linearize(lhs), _scale(linearize(rhs), Fraction(-1))])
    if rel in (">", ">="):
        return ("<" if rel == ">" else "<="), _scale(diff, Fraction(-1))
    return rel, diff


def farkas_coefficients(args: Sequence[RuleArg]) -> list[Fraction]:
    out = []
    for a in args:
        if isinstance(a, RationalArg):
            out.append(Fraction(a.value))
        elif isinstance(a, TermArg) and isinstance(a.term, Const) and a.term.is_numeral:
            out.append(Fraction(a.term.value))
        else:
            raise RuleFailure("coefficients must be rational literals")
    return out


def check_la_generic(conclusion: Clause, args: Sequence[RuleArg]) -> None:
    coeffs = farkas_coefficients(args)
    if len(coeffs) != len(conclusion):
        raise RuleFailure("coefficient count mismatch")
    if not any(coeffs):
        raise RuleFailure("combination not absurd: all coefficients are zero")
    rel = "="
    total: list[LinearForm] = []
    for i, (q, lit) in enumerate(zip(coeffs, conclusion), 1):
        op, form = negated_constraint(lit)
        # equalities may be scaled by any rational; inequalities only by nonnegative ones
        if q < 0 and op != "=":
            raise RuleFailure(f"negative coefficient for inequality literal {i}")
        if q == 0:
            continue
        total.append(_scale(form, q))
        if op == "<":
            rel = "<"
        elif op == "<=" and rel == "=":
            rel = "<="
    atoms, const = _add(total)
    if atoms:
        raise RuleFailure("combination not absurd: variables do not cancel")
    absurd = {"<": const >= 0, "<=": const > 0, "=": const != 0}[rel]
    if not absurd:
        raise RuleFailure("combination not absurd")
