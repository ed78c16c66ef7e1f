"""Hash-consed sorts and terms for the UFLIRA fragment.

Terms are interned in a :class:`TermStore`: building a structurally
identical term twice returns the very same object, so ``t is u`` is
structural equality and the default identity hash is the sharing handle.
"""

from __future__ import annotations

import re
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import SortError, UndeclaredSymbol


@dataclass(frozen=True)
class Sort:
    name: str

    def __str__(self) -> str:
        return self.name

    @property
    def is_numeric(self) -> bool:
        return self.name in ("Int", "Real")


BOOL = Sort("Bool")
INT = Sort("Int")
REAL = Sort("Real")
BUILTIN_SORTS = {"Bool": BOOL, "Int": INT, "Real": REAL}


@dataclass(frozen=True)
class FunctionSort:
    domain: tuple[Sort, ...]
    codomain: Sort

    def __post_init__(self):
        if not self.domain:
            raise SortError("function sort needs a nonempty domain")


QUANTIFIERS = ("forall", "exists", "choice")


class Term:
    __slots__ = ("uid", "sort", "_fv", "__weakref__")

    uid: int
    sort: Sort

    @property
    def free_vars(self) -> frozenset["Var"]:
        return self._fv

    def __repr__(self) -> str:
        from .printer import term_to_str

        return f"<{type(self).__name__} {term_to_str(self)}>"


class Var(Term):
    __slots__ = ("name",)

    def __init__(self, uid: int, name: str, sort: Sort):
        self.uid, self.name, self.sort = uid, name, sort
        self._fv = frozenset((self,))


class Const(Term):
    """Declared nullary symbol (``value`` is a str) or a numeric literal."""

    __slots__ = ("value",)

    def __init__(self, uid: int, value: str | int | Fraction, sort: Sort):
        self.uid, self.value, self.sort = uid, value, sort
        self._fv = frozenset()

    @property
    def is_numeral(self) -> bool:
        return not isinstance(self.value, str)


class App(Term):
    __slots__ = ("op", "args")

    def __init__(self, uid: int, op: str, args: tuple[Term, ...], sort: Sort):
        self.uid, self.op, self.args, self.sort = uid, op, args, sort
        self._fv = frozenset().union(*(a._fv for a in args))


class Binder(Term):
    __slots__ = ("quantifier", "bindings", "body")

    def __init__(self, uid: int, quantifier: str, bindings: tuple[Var, ...], body: Term):
        self.uid, self.quantifier, self.bindings, self.body = uid, quantifier, bindings, body
        self.sort = bindings[0].sort if quantifier == "choice" else BOOL
        self._fv = body._fv - frozenset(bindings)


_SUFFIX = re.compile(r"^(.*?)(\d+)$")


class TermStore:
    """Intern table plus the set of names used so far (for fresh names).

    Interning takes a lock, so a store may be shared between threads.
    """

    def __init__(self):
        self._table: dict[tuple, Term] = {}
        self._lock = threading.Lock()
        self.names: set[str] = set()

    def __len__(self) -> int:
        return len(self._table)

    def _intern(self, key: tuple, build) -> Term:
        term = self._table.get(key)
        if term is not None:
            return term
        with self._lock:
            term = self._table.get(key)
            if term is None:
                term = build(len(self._table))
                self._table[key] = term
        return term

    def var(self, name: str, sort: Sort) -> Var:
        self.names.add(name)
        return self._intern(("var", name, sort), lambda uid: Var(uid, name, sort))

    def const(self, value: str | int | Fraction, sort: Sort) -> Const:
        if isinstance(value, str):
            self.names.add(value)
            key = ("sym", value, sort)
        elif sort == INT:
            if isinstance(value, Fraction):
                if value.denominator != 1:
                    raise SortError(f"Int literal {value} is not integral")
                value = int(value)
            key = ("int", value)
        else:
            value = Fraction(value)
            key = ("real", value)
        return self._intern(key, lambda uid: Const(uid, value, sort))

    def app(self, op: str, args: Iterable[Term], sort: Sort) -> App:
        args = tuple(args)
        key = ("app", op, tuple(a.uid for a in args), sort)
        return self._intern(key, lambda uid: App(uid, op, args, sort))

    def binder(self, quantifier: str, bindings: Iterable[Var], body: Term) -> Binder:
        bindings = tuple(bindings)
        if quantifier not in QUANTIFIERS:
            raise SortError(f"unknown binder {quantifier}")
        if not bindings:
            raise SortError(f"{quantifier} without bound variables")
        if quantifier == "choice" and len(bindings) != 1:
            raise SortError("choice binds exactly one variable")
        if body.sort != BOOL:
            raise SortError(f"{quantifier} body has sort {body.sort}, expected Bool")
        key = ("bind", quantifier, tuple(v.uid for v in bindings), body.uid)
        return self._intern(key, lambda uid: Binder(uid, quantifier, bindings, body))

    def fresh_name(self, base: str) -> str:
        m = _SUFFIX.match(base)
        stem = m.group(1) if m and m.group(1) else base
        n = 1
        while f"{stem}{n}" in self.names:
            n += 1
        name = f"{stem}{n}"
        self.names.add(name)
        return name

    # convenience constructors for built-in operators
    def true(self) -> Const:
        return self.const("true", BOOL)

    def false(self) -> Const:
        return self.const("false", BOOL)

    def not_(self, t: Term) -> App:
        return self.app("not", (t,), BOOL)

    def eq(self, a: Term, b: Term) -> App:
        return self.app("=", (a, b), BOOL)


def free_variables(t: Term) -> frozenset[Var]:
    return t.free_vars


def is_app(t: Term, op: str, arity: int | None = None) -> bool:
    return isinstance(t, App) and t.op == op and (arity is None or len(t.args) == arity)


def is_neg(t: Term) -> bool:
    return is_app(t, "not", 1)


def substitute(store: TermStore, t: Term, sigma: Mapping[Var, Term]) -> Term:
    """Simultaneous, capture-avoiding substitution."""
    for v, r in sigma.items():
        if v.sort != r.sort:
            raise SortError(f"cannot substitute {r.sort} term for {v.name}: {v.sort}")
    sigma = {v: r for v, r in sigma.items() if v is not r}
    if not sigma:
        return t
    return _subst(store, t, sigma, {})


def _subst(store: TermStore, t: Term, sigma: dict[Var, Term], cache: dict) -> Term:
    if not (t.free_vars & sigma.keys()):
        return t
    hit = cache.get(t.uid)
    if hit is not None:
        return hit
    if isinstance(t, Var):
        out = sigma[t]
    elif isinstance(t, App):
        out = store.app(t.op, (_subst(store, a, sigma, cache) for a in t.args), t.sort)
    else:
        assert isinstance(t, Binder)
        inner = {v: r for v, r in sigma.items() if v not in t.bindings and v in t.body.free_vars}
        incoming = frozenset().union(*(r.free_vars for r in inner.values()))
        bindings = []
        for b in t.bindings:
            if b in incoming:
                nb = store.var(store.fresh_name(b.name), b.sort)
                inner[b] = nb
                bindings.append(nb)
            else:
                bindings.append(b)
        out = store.binder(t.quantifier, bindings, _subst(store, t.body, inner, {}))
    cache[t.uid] = out
    return out


def alpha_equal(t: Term, u: Term) -> bool:
    return _alpha(t, u, {}, {}, 0)


def _alpha(t: Term, u: Term, lt: dict, lu: dict, depth: int) -> bool:
    if t is u and not (t.free_vars & (lt.keys() | lu.keys())):
        return True
    if type(t) is not type(u) or t.sort != u.sort:
        return False
    if isinstance(t, Var):
        if t in lt or u in lu:
            return lt.get(t) == lu.get(u)
        return t is u
    if isinstance(t, Const):
        return t is u
    if isinstance(t, App):
        return (
            t.op == u.op
            and len(t.args) == len(u.args)
            and all(_alpha(a, b, lt, lu, depth) for a, b in zip(t.args, u.args))
        )
    if t.quantifier != u.quantifier or len(t.bindings) != len(u.bindings):
        return False
    lt, lu = dict(lt), dict(lu)
    for i, (a, b) in enumerate(zip(t.bindings, u.bindings)):
        if a.sort != b.sort:
            return False
        lt[a] = lu[b] = depth + i
    return _alpha(t.body, u.body, lt, lu, depth + len(t.bindings))


def subterms(t: Term) -> Iterable[Term]:
    """Every subterm once, parents before children."""
    seen: set[int] = set()
    stack = [t]
    while stack:
        s = stack.pop()
        if s.uid in seen:
            continue
        seen.add(s.uid)
        yield s
        if isinstance(s, App):
            stack.extend(reversed(s.args))
        elif isinstance(s, Binder):
            stack.append(s.body)
            stack.extend(reversed(s.bindings))


_ARITH = {"+", "-", "*"}
_COMPARE = {"<", "<=", ">", ">="}
_BOOL_NARY = {"and", "or", "xor", "=>"}


@dataclass
class Definition:
    name: str
    params: tuple[Var, ...]
    codomain: Sort
    body: Term


@dataclass
class Signature:
    """Declared sorts, function symbols and definitions."""

    store: TermStore
    sorts: dict[str, int] = field(default_factory=dict)
    functions: dict[str, FunctionSort | Sort] = field(default_factory=dict)
    definitions: dict[str, Definition] = field(default_factory=dict)

    def copy(self) -> "Signature":
        return Signature(self.store, dict(self.sorts), dict(self.functions), dict(self.definitions))

    def sort(self, name: str) -> Sort:
        if name in BUILTIN_SORTS:
            return BUILTIN_SORTS[name]
        if name not in self.sorts:
            raise UndeclaredSymbol(f"undeclared sort {name}")
        return Sort(name)

    def declare_sort(self, name: str, arity: int = 0) -> None:
        if arity != 0:
            raise SortError(f"parametric sort {name} is not supported")
        if name in self.sorts or name in BUILTIN_SORTS:
            raise SortError(f"sort {name} already declared")
        self.sorts[name] = arity

    def declare_fun(self, name: str, domain: Iterable[Sort], codomain: Sort) -> None:
        domain = tuple(domain)
        for s in (*domain, codomain):
            self.sort(s.name)
        if name in self.functions:
            raise SortError(f"symbol {name} already declared")
        self.functions[name] = FunctionSort(domain, codomain) if domain else codomain
        self.store.names.add(name)

    def define_fun(self, name: str, params: Iterable[Var], codomain: Sort, body: Term) -> Definition:
        params = tuple(params)
        if body.sort != codomain and not (body.sort.is_numeric and codomain == REAL):
            raise SortError(f"body of {name} has sort {body.sort}, declared {codomain}")
        stray = body.free_vars - set(params)
        if stray:
            raise SortError(f"definition of {name} has free variables {sorted(v.name for v in stray)}")
        self.declare_fun(name, (p.sort for p in params), codomain)
        d = Definition(name, params, codomain, body)
        self.definitions[name] = d
        return d

    def constant(self, name: str) -> Const:
        s = self.functions.get(name)
        if s is None:
            raise UndeclaredSymbol(f"undeclared symbol {name}")
        if isinstance(s, FunctionSort):
            raise SortError(f"{name} expects {len(s.domain)} arguments, got 0")
        return self.store.const(name, s)

    def apply(self, op: str, args: Iterable[Term]) -> Term:
        """Build ``(op args...)`` after checking argument sorts."""
        args = tuple(args)
        return self.store.app(op, args, self.result_sort(op, args))

    def result_sort(self, op: str, args: tuple[Term, ...]) -> Sort:
        sorts = [a.sort for a in args]
        n = len(args)
        if op == "not":
            _expect(op, n == 1 and sorts[0] == BOOL, sorts)
            return BOOL
        if op in _BOOL_NARY:
            _expect(op, n >= 1 and all(s == BOOL for s in sorts), sorts)
            return BOOL
        if op in ("=", "distinct"):
            _expect(op, n >= 2 and (len(set(sorts)) == 1 or all(s.is_numeric for s in sorts)), sorts)
            return BOOL
        if op == "ite":
            _expect(op, n == 3 and sorts[0] == BOOL and _compatible(sorts[1], sorts[2]), sorts)
            return _join(sorts[1], sorts[2])
        if op in _ARITH:
            _expect(op, n >= 1 and all(s.is_numeric for s in sorts), sorts)
            return REAL if REAL in sorts else INT
        if op == "/":
            _expect(op, n >= 2 and all(s.is_numeric for s in sorts), sorts)
            return REAL
        if op in ("div", "mod"):
            _expect(op, n == 2 and all(s == INT for s in sorts), sorts)
            return INT
        if op == "abs":
            _expect(op, n == 1 and sorts[0] == INT, sorts)
            return INT
        if op in _COMPARE:
            _expect(op, n >= 2 and all(s.is_numeric for s in sorts), sorts)
            return BOOL
        if op == "to_real":
            _expect(op, n == 1 and sorts[0].is_numeric, sorts)
            return REAL
        if op == "to_int":
            _expect(op, n == 1 and sorts[0].is_numeric, sorts)
            return INT
        if op == "is_int":
            _expect(op, n == 1 and sorts[0].is_numeric, sorts)
            return BOOL
        s = self.functions.get(op)
        if s is None:
            raise UndeclaredSymbol(f"undeclared function {op}")
        if not isinstance(s, FunctionSort):
            raise SortError(f"{op} is a constant and takes no arguments")
        if len(s.domain) != n:
            raise SortError(f"{op} expects {len(s.domain)} arguments, got {n}")
        for i, (want, got) in enumerate(zip(s.domain, sorts)):
            if want != got:
                raise SortError(f"argument {i + 1} of {op} has sort {got}, expected {want}")
        return s.codomain


def _compatible(a: Sort, b: Sort) -> bool:
    return a == b or (a.is_numeric and b.is_numeric)


def _join(a: Sort, b: Sort) -> Sort:
    return a if a == b else REAL


def _expect(op: str, ok: bool, sorts: list[Sort]) -> None:
    if not ok:
        got = " ".join(str(s) for s in sorts) or "no arguments"
        raise SortError(f"ill-sorted application of {op} to ({got})")


def expand_definitions(store: TermStore, t: Term, definitions: Mapping[str, Definition]) -> Term:
    """Unfold every defined symbol, recursively."""
    if not definitions:
        return t
    cache: dict[int, Term] = {}

    def go(s: Term) -> Term:
        hit = cache.get(s.uid)
        if hit is not None:
            return hit
        if isinstance(s, Const) and isinstance(s.value, str) and s.value in definitions:
            out = go(definitions[s.value].body)
        elif isinstance(s, App):
            args = tuple(go(a) for a in s.args)
            d = definitions.get(s.op)
            if d is not None and d.params:
                out = go(substitute(store, d.body, dict(zip(d.params, args))))
            else:
                out = store.app(s.op, args, s.sort)
        elif isinstance(s, Binder):
            out = store.binder(s.quantifier, s.bindings, go(s.body))
        else:
            out = s
        cache[s.uid] = out
        return out

    return go(t)
