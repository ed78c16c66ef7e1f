from __future__ import annotations

import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alethecheck.commands import Anchor, AssignArg, ContextAssignment, RationalArg, TermArg
from alethecheck.frontend import TermReader, parse_problem
from alethecheck.rules import (
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
    trans_chain,
)
from alethecheck.sexpr import read_all
from alethecheck.terms import Definition, Sort

SIGNATURE = """
(declare-sort A 0)
(declare-fun a () A) (declare-fun b () A) (declare-fun c () A)
(declare-fun d () A) (declare-fun e () A) (declare-fun h () A)
(declare-fun f (A) Bool) (declare-fun q (A) Bool) (declare-fun fa (A) A)
(declare-fun g (A A) A)
(declare-fun p () Bool) (declare-fun r () Bool) (declare-fun s () Bool) (declare-fun u () Bool)
(declare-fun P (Int) Bool) (declare-fun Q (Int Int) Bool)
(declare-fun x () Int) (declare-fun y () Int) (declare-fun z () Real) (declare-fun w () Real)
"""
A = Sort("A")


class Env:
    def __init__(self):
        self.problem = parse_problem(SIGNATURE)
        self.sig = self.problem.signature
        self.store = self.sig.store
        self.reader = TermReader(self.sig, {})
        self.vars = {}

    def var(self, name, sort=A):
        v = self.store.var(name, sort)
        self.vars[name] = v
        return v

    def t(self, text):
        return self.reader.term(read_all(text)[0], dict(self.vars))

    def cl(self, *texts):
        return tuple(self.t(x) for x in texts)


@pytest.fixture
def env():
    return Env()


def ok(fn, *args):
    try:
        fn(*args)
        return True
    except RuleFailure:
        return False


# resolution ---------------------------------------------------------------


def test_resolution_unit(env):
    assert ok(check_resolution, [env.cl("p"), env.cl("(not p)", "r")], env.cl("r"))


def test_resolution_fragment_step(env):
    ex_x = "(exists ((x A)) (f x))"
    ex_vr = "(exists ((vr A)) (f vr))"
    eq = f"(= {ex_x} {ex_vr})"
    premises = [env.cl(ex_x), env.cl(eq), env.cl(f"(not {eq})", f"(not {ex_x})", ex_vr)]
    assert ok(check_resolution, premises, env.cl(ex_vr))
    assert not ok(check_resolution, premises, env.cl(ex_x))
    assert not ok(check_resolution, premises[:2], env.cl(ex_vr))


def test_resolution_requires_every_premise(env):
    assert not ok(check_resolution, [env.cl("p"), env.cl("(not p)", "r"), env.cl("s")], env.cl("r"))


def test_resolution_set_semantics(env):
    assert ok(check_resolution, [env.cl("p", "r"), env.cl("(not p)", "r")], env.cl("r"))
    assert ok(check_resolution, [env.cl("p", "r"), env.cl("(not p)", "r")], env.cl("r", "r"))


def test_resolution_order_free(env):
    # the first two premises share no pivot
    premises = [env.cl("p"), env.cl("r"), env.cl("(not p)", "(not r)", "s")]
    assert ok(check_resolution, premises, env.cl("s"))


def test_resolution_rejects_tautology_merging(env):
    # resolving two pivots at once is unsound
    assert not ok(check_resolution, [env.cl("p", "r"), env.cl("(not p)", "(not r)")], env.cl())


def test_resolution_needs_premises(env):
    assert not ok(check_resolution, [], env.cl())


def test_resolution_too_wide(env):
    premises = [env.cl("p")] * 17
    with pytest.raises(RuleFailure, match="too wide"):
        check_resolution(premises + [env.cl("r")], env.cl("s"))


# trans --------------------------------------------------------------------

INSTANCES = [
    (["(= a b)", "(= b c)", "(= c d)"], "(= a d)", 1),
    (["(= b a)", "(= c b)", "(= d c)"], "(= d a)", 2),
    (["(= c b)", "(= b a)", "(= d c)"], "(= d a)", 3),
]


@pytest.mark.parametrize("premises, conclusion, minimal", INSTANCES)
@pytest.mark.parametrize("level", [1, 2, 3])
def test_trans_strictness_levels(env, premises, conclusion, minimal, level):
    verdict = ok(check_trans, [env.cl(p) for p in premises], env.cl(conclusion), level)
    assert verdict == (level >= minimal)


def test_trans_failure_names_premise(env):
    with pytest.raises(RuleFailure, match="premise 2"):
        check_trans([env.cl("(= a b)"), env.cl("(= c d)")], env.cl("(= a d)"), 1)


def test_trans_rejects_unused_premise(env):
    premises = [env.cl("(= a b)"), env.cl("(= b c)"), env.cl("(= d e)")]
    for level in (1, 2, 3):
        assert not ok(check_trans, premises, env.cl("(= a c)"), level)


def test_trans_rejects_non_equality(env):
    assert not ok(check_trans, [env.cl("p")], env.cl("(= a a)"), 3)


CONSTS = ["a", "b", "c", "d", "e", "h"]


def cc_entails(eqs, goal):
    parent = {k: k for k in CONSTS}

    def find(k):
        while parent[k] != k:
            k = parent[k]
        return k

    for l, r in eqs:
        parent[find(l)] = find(r)
    return find(goal[0]) == find(goal[1])


eq_pairs = st.tuples(st.sampled_from(CONSTS), st.sampled_from(CONSTS))


@settings(max_examples=400, deadline=None)
@given(st.lists(eq_pairs, min_size=1, max_size=5), eq_pairs)
def test_trans_sound_and_monotone(eqs, goal):
    env = Env()
    premises = [env.cl(f"(= {l} {r})") for l, r in eqs]
    conclusion = env.cl(f"(= {goal[0]} {goal[1]})")
    verdicts = [ok(check_trans, premises, conclusion, k) for k in (1, 2, 3)]
    # ok at level k implies ok at every higher level
    assert verdicts == sorted(verdicts)
    if verdicts[2]:
        assert cc_entails(eqs, goal)
        chain = trans_chain(premises, conclusion, 3)
        assert sorted(i for i, _ in chain) == list(range(len(eqs)))


@settings(max_examples=200, deadline=None)
@given(st.permutations(CONSTS), st.integers(2, 5), st.randoms(use_true_random=False))
def test_trans_level3_complete_on_chains(order, n, rng):
    env = Env()
    path = order[: n + 1]
    eqs = [(path[i], path[i + 1]) for i in range(n)]
    eqs = [(r, l) if rng.random() < 0.5 else (l, r) for l, r in eqs]
    rng.shuffle(eqs)
    premises = [env.cl(f"(= {l} {r})") for l, r in eqs]
    assert ok(check_trans, premises, env.cl(f"(= {path[0]} {path[-1]})"), 3)


# symm ---------------------------------------------------------------------


def test_symm(env):
    assert ok(check_symm, [env.cl("(= a b)")], env.cl("(= b a)"))
    assert not ok(check_symm, [env.cl("(= a b)")], env.cl("(= a b)"))
    assert not ok(check_symm, [env.cl("(= a b)"), env.cl("(= a b)")], env.cl("(= b a)"))
    assert not ok(check_symm, [], env.cl("(= b a)"))


# refl and cong ------------------------------------------------------------


def test_refl_under_context(env):
    x, vr = env.var("x"), env.var("vr")
    ctx = Context.of({x: vr})
    assert ok(check_refl, env.cl("(= x vr)"), ctx)
    assert ok(check_refl, env.cl("(= a a)"), Context())
    assert not ok(check_refl, env.cl("(= x vr)"), Context())
    assert not ok(check_refl, env.cl("(= a b)"), ctx)


def test_cong_with_context(env):
    x, vr = env.var("x"), env.var("vr")
    assert ok(check_cong, [], env.cl("(= (f x) (f vr))"), Context.of({x: vr}))
    assert not ok(check_cong, [], env.cl("(= (f x) (f vr))"), Context())


def test_cong_examples(env):
    assert ok(check_cong, [], env.cl("(= (fa a) (fa a))"), Context())
    prem = [env.cl("(= a b)"), env.cl("(= c d)")]
    assert ok(check_cong, prem, env.cl("(= (g a c) (g b d))"), Context())
    with pytest.raises(RuleFailure, match="argument 1"):
        check_cong(prem, env.cl("(= (g a c) (g d b))"), Context())


def test_cong_rejects_different_heads(env):
    assert not ok(check_cong, [env.cl("(= a b)")], env.cl("(= (fa a) (g a b))"), Context())
    assert not ok(check_cong, [env.cl("(= a b)")], env.cl("(= a b)"), Context())


PAIR_CONSTS = ["a", "b", "c", "d"]


def test_cong_against_congruence_closure():
    # every premise subset over {a=b, c=d, a=c, b=d} and every orientation of both argument pairs
    env = Env()
    pool = [("a", "b"), ("c", "d"), ("a", "c"), ("b", "d")]
    checked = accepted = 0
    for k in range(len(pool) + 1):
        for subset in itertools.combinations(pool, k):
            for flips in itertools.product([False, True], repeat=k):
                eqs = [(r, l) if fl else (l, r) for (l, r), fl in zip(subset, flips)]
                premises = [env.cl(f"(= {l} {r})") for l, r in eqs]
                for s1, s2, t1, t2 in itertools.product(PAIR_CONSTS, repeat=4):
                    concl = env.cl(f"(= (g {s1} {s2}) (g {t1} {t2}))")
                    verdict = ok(check_cong, premises, concl, Context())
                    direct = all(
                        s == t or (s, t) in eqs or (t, s) in eqs for s, t in ((s1, t1), (s2, t2))
                    )
                    entailed = cc_entails(eqs, (s1, t1)) and cc_entails(eqs, (s2, t2))
                    assert verdict == direct
                    assert not verdict or entailed
                    checked += 1
                    accepted += verdict
    assert checked > 5000 and accepted > 0


# bind ---------------------------------------------------------------------


def _anchor(*pairs):
    return Anchor("t1", tuple(ContextAssignment(v, w) for v, w in pairs))


def test_bind_fragment(env):
    x, vr = env.var("x"), env.var("vr")
    concl = env.cl("(= (exists ((x A)) (f x)) (exists ((vr A)) (f vr)))")
    sub = [env.cl("(= x vr)"), env.cl("(= (f x) (f vr))")]
    assert ok(check_bind, sub, _anchor((x, vr)), concl)


def test_bind_identity(env):
    x = env.var("x")
    concl = env.cl("(= (forall ((x A)) (f x)) (forall ((x A)) (f x)))")
    assert ok(check_bind, [env.cl("(= (f x) (f x))")], _anchor((x, x)), concl)
    assert ok(check_bind, [env.cl("(= (f x) (f x))")], _anchor((x, None)), concl)


def test_bind_failures(env):
    x, vr = env.var("x"), env.var("vr")
    sub = [env.cl("(= (f x) (f vr))")]
    mixed = env.cl("(= (exists ((x A)) (f x)) (forall ((vr A)) (f vr)))")
    with pytest.raises(RuleFailure, match="quantifier mismatch"):
        check_bind(sub, _anchor((x, vr)), mixed)
    wrong_body = env.cl("(= (exists ((x A)) (f x)) (exists ((vr A)) (q vr)))")
    with pytest.raises(RuleFailure, match="subproof conclusion mismatch"):
        check_bind(sub, _anchor((x, vr)), wrong_body)
    captured = env.cl("(= (exists ((x A)) (= x vr)) (exists ((vr A)) (= vr vr)))")
    with pytest.raises(RuleFailure, match="capture"):
        check_bind([env.cl("(= (= x vr) (= vr vr))")], _anchor((x, vr)), captured)
    assert not ok(check_bind, sub, _anchor(), env.cl("(= (exists ((x A)) (f x)) (exists ((vr A)) (f vr)))"))


# equiv_pos1 ---------------------------------------------------------------


def test_equiv_pos1(env):
    env.var("x")
    # x occurs free under the binder on the left, as in the original sample proof
    lhs = "(exists ((vr A)) (f x))"
    rhs = "(exists ((vr A)) (f vr))"
    assert ok(check_equiv_pos1, env.cl(f"(not (= {lhs} {rhs}))", f"(not {lhs})", rhs))
    assert ok(check_equiv_pos1, env.cl("(not (= p p))", "(not p)", "p"))
    assert not ok(check_equiv_pos1, env.cl("(not (= p r))", "(not r)", "p"))
    assert not ok(check_equiv_pos1, env.cl("(not (= p r))", "(not p)"))
    assert not ok(check_equiv_pos1, env.cl("(not (= a b))", "(not p)", "p"))


def _truth_table_valid(clause_fn):
    return all(clause_fn(pv, rv) for pv, rv in itertools.product([False, True], repeat=2))


def test_equiv_pos1_shapes_match_truth_tables(env):
    # every arrangement of three literals from {not (= A B), A, not A, B, not B}
    lits = {
        "(not (= p r))": lambda p, r: p != r,
        "p": lambda p, r: p,
        "(not p)": lambda p, r: not p,
        "r": lambda p, r: r,
        "(not r)": lambda p, r: not r,
    }
    for combo in itertools.permutations(lits, 3):
        valid = _truth_table_valid(lambda p, r: any(lits[l](p, r) for l in combo))
        if ok(check_equiv_pos1, env.cl(*combo)):
            assert valid
            assert combo == ("(not (= p r))", "(not p)", "r")


# sko_ex -------------------------------------------------------------------


def test_sko_ex_with_definition(env):
    vr = env.var("vr")
    X = env.store.binder("choice", [vr], env.t("(f vr)"))
    env.sig.define_fun("X", [], A, X)
    defs = {"X": Definition("X", (), A, X)}
    assert ok(check_sko_ex, env.cl("(= (exists ((vr A)) (f vr)) (f X))"), env.store, defs)
    # the same instance with the choice term written inline, under a renamed binder
    assert ok(check_sko_ex, env.cl("(= (exists ((vr A)) (f vr)) (f (choice ((y A)) (f y))))"), env.store, {})


def test_sko_ex_vacuous(env):
    assert ok(check_sko_ex, env.cl("(= (exists ((x A)) p) p)"), env.store, {})


def test_sko_ex_failures(env):
    assert not ok(check_sko_ex, env.cl("(= (exists ((x A)) (f x)) (f (choice ((x A)) (q x))))"), env.store, {})
    assert not ok(check_sko_ex, env.cl("(= (forall ((x A)) (f x)) (f (choice ((x A)) (f x))))"), env.store, {})
    assert not ok(check_sko_ex, env.cl("(= (exists ((x A)) (f x)) (f a))"), env.store, {})


# forall_inst --------------------------------------------------------------


def test_forall_inst(env):
    seven = env.t("7")
    concl = env.cl("(or (not (forall ((n Int)) (P n))) (P 7))")
    assert ok(check_forall_inst, concl, [AssignArg("n", seven)], env.store)
    assert not ok(check_forall_inst, concl, [AssignArg("n", env.t("8"))], env.store)
    assert not ok(check_forall_inst, concl, [], env.store)
    assert not ok(check_forall_inst, concl, [AssignArg("n", env.t("a"))], env.store)
    assert not ok(check_forall_inst, concl, [AssignArg("m", seven)], env.store)


def test_forall_inst_identity(env):
    n = env.var("n", Sort("Int"))
    concl = env.cl("(or (not (forall ((n Int)) (P n))) (P n))")
    assert ok(check_forall_inst, concl, [AssignArg("n", n)], env.store)


def test_forall_inst_capture_avoiding(env):
    concl_text = "(or (not (forall ((n Int)) (exists ((m Int)) (Q n m)))) (exists ((k Int)) (Q m k)))"
    m = env.var("m", Sort("Int"))
    assert ok(check_forall_inst, env.cl(concl_text), [AssignArg("n", m)], env.store)
    captured = "(or (not (forall ((n Int)) (exists ((m Int)) (Q n m)))) (exists ((m Int)) (Q m m)))"
    assert not ok(check_forall_inst, env.cl(captured), [AssignArg("n", m)], env.store)


def test_forall_inst_positional_terms(env):
    concl = env.cl("(or (not (forall ((n Int) (k Int)) (Q n k))) (Q 1 2))")
    assert ok(check_forall_inst, concl, [TermArg(env.t("1")), TermArg(env.t("2"))], env.store)
    assert not ok(check_forall_inst, concl, [TermArg(env.t("2")), TermArg(env.t("1"))], env.store)


# la_generic ---------------------------------------------------------------


def coeffs(*vals):
    return [RationalArg(Fraction(v)) for v in vals]


def test_la_generic_examples(env):
    assert ok(check_la_generic, env.cl("(not (<= x 1))", "(not (>= x 2))"), coeffs(1, 1))
    assert ok(check_la_generic, env.cl("(not (< x x))"), coeffs(1))
    assert ok(check_la_generic, env.cl("(not (<= (* 2 x) 1))", "(not (>= x 1))"), coeffs(1, 2))


def test_la_generic_rationals(env):
    clause = env.cl("(not (<= (* (/ 1 3) z) 1))", "(not (> z 3))")
    assert ok(check_la_generic, clause, [RationalArg(Fraction(3)), RationalArg(Fraction(1))])
    assert not ok(check_la_generic, clause, [RationalArg(Fraction(1)), RationalArg(Fraction(1))])


def test_la_generic_positive_literals(env):
    assert ok(check_la_generic, env.cl("(< z 1)", "(>= z 1)"), coeffs(1, 1))
    assert ok(check_la_generic, env.cl("(< z 1)", "(> z 0)"), coeffs(1, 1))
    # z = 1/2 falsifies both literals, so no certificate exists
    for c1, c2 in itertools.product(range(4), repeat=2):
        assert not ok(check_la_generic, env.cl("(< z 0)", "(> z 1)"), coeffs(c1, c2))


def test_la_generic_equalities(env):
    assert ok(check_la_generic, env.cl("(not (= z 1))", "(not (= z 2))"), coeffs(1, -1))
    assert not ok(check_la_generic, env.cl("(not (= z 1))", "(not (= z 2))"), coeffs(1, 1))
    # an equality can be used in either direction against an inequality
    assert ok(check_la_generic, env.cl("(not (= z 1))", "(not (> z 1))"), coeffs(1, 1))
    assert ok(check_la_generic, env.cl("(not (= z 1))", "(not (< z 1))"), coeffs(-1, 1))
    with pytest.raises(RuleFailure, match="nonlinear literal"):
        check_la_generic(env.cl("(= z 1)"), coeffs(1))


def test_la_generic_failures(env):
    with pytest.raises(RuleFailure, match="coefficient count mismatch"):
        check_la_generic(env.cl("(not (<= x 1))", "(not (>= x 2))"), coeffs(1))
    with pytest.raises(RuleFailure, match="combination not absurd"):
        check_la_generic(env.cl("(not (<= x 1))", "(not (>= x 2))"), coeffs(1, 0))
    with pytest.raises(RuleFailure, match="nonlinear literal"):
        check_la_generic(env.cl("(not (<= (* x y) 1))"), coeffs(1))
    with pytest.raises(RuleFailure, match="negative coefficient"):
        check_la_generic(env.cl("(not (<= x 1))", "(not (>= x 2))"), coeffs(-1, 1))
    assert not ok(check_la_generic, env.cl("p"), coeffs(1))
