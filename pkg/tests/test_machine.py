from collections import Counter

import pytest
from hypothesis import given, settings

from conftest import terms
from needful import beta
from needful.harness import CorpusSpec, enumerate_terms
from needful.machine import (LAM_BOT, LAM_TOP, BoundTerm, Closure, Machine, Result,
                             StoreInvariantError, StructKind, Timeout, adjust_indices,
                             machine_struct, run)
from needful.terms import App, ESub, Var, alpha_eq, parse, to_text, unfold

MIXING = r"(\f. c1 (f c2) (f c3)) (\y. (c4 x)[x\y])"


def test_identity_application():
    r = run(parse(r"(\x. x) (\y. y)"), fuel=100)
    assert isinstance(r, Result)
    assert to_text(r.term) == r"(\y. y)[x\\y. y]"
    assert to_text(unfold(r.term)) == r"\y. y"
    assert r.stats == Counter({"app": 1, "abs-cons": 1, "es": 1, "abs-nil": 2,
                               "var-λ-NonFrozen": 1, "s-omega": 1, "var-abs": 1,
                               "var-λ-Frozen": 1, "s-phi": 1})


def test_free_head_normalizes_arguments():
    r = run(parse(r"x (\z. z)"))
    assert to_text(r.term) == r"x (\z. z)"
    r = run(parse(r"x ((\z. z) y)"))
    assert alpha_eq(unfold(r.term), parse("x y"))


def test_mixing_example_keeps_values_apart():
    t = parse(MIXING)
    r = run(t)
    assert isinstance(r, Result)
    assert to_text(unfold(r.term)) == "c1 (c4 c2) (c4 c3)"
    assert alpha_eq(unfold(r.term), beta.normalize_normal_order(unfold(t)).term)
    assert not r.diagnostics


def test_omega_runs_out_of_fuel():
    r = run(parse(r"(\x. x x) (\x. x x)"), fuel=100)
    assert isinstance(r, Timeout)
    assert sum(r.stats.values()) == 101


def test_divergent_argument_never_forced():
    r = run(parse(r"(\x y. y) ((\x. x x) (\x. x x))"))
    assert to_text(unfold(r.term)) == r"\y. y"


def test_shared_argument_evaluated_once():
    # the argument is needed several times but every application node of
    # the input, its redex included, is visited once
    for uses in (1, 2, 3):
        body = " ".join(["x"] * uses)
        r = run(parse(rf"(\x. {body}) ((\z. z) (\y. y))"))
        assert alpha_eq(unfold(r.term), parse(r"\y. y"))
        assert r.stats["app"] == uses + 1


def test_optimized_rules_agree_on_results():
    for text in (r"(\x. x) (\y. y)", MIXING, r"(\w. w w) (\y. (\x. x) y)"):
        t = parse(text)
        plain, opt = run(t), run(t, optimize=True)
        assert alpha_eq(unfold(plain.term), unfold(opt.term))
        assert sum(opt.stats.values()) <= sum(plain.stats.values())


def test_adjust_indices():
    assert adjust_indices(Closure(Var(0), 3), 3) == Var(0)
    assert adjust_indices(Closure(Var(0), 3), 5) == Var(2)
    closed = parse(r"\x. x")
    assert adjust_indices(Closure(closed, 0), 4) == closed
    assert Closure(Var(0), 3).shift_pending(5)
    with pytest.raises(ValueError):
        adjust_indices(Closure(Var(0), 3), 2)


def test_machine_struct():
    assert machine_struct([LAM_TOP], Var(0)) is StructKind.PHI
    assert machine_struct([LAM_BOT], Var(0)) is StructKind.OMEGA
    # x t where x is bound to a term headed by a frozen variable
    env = [LAM_TOP, BoundTerm(Closure(Var(0), 1)), LAM_TOP]
    assert machine_struct(env, App(Var(1), Var(0))) is StructKind.PHI
    env = [LAM_BOT, BoundTerm(Closure(Var(0), 1))]
    assert machine_struct(env, ESub(App(Var(1), Var(0)), Var(0))) is StructKind.OMEGA
    assert machine_struct([], parse(r"\x. x")) is StructKind.NOT_STRUCT


def test_store_is_balanced():
    m = Machine()
    m.run(parse(MIXING))
    assert m.store == [LAM_TOP] * 4 and m.stack == []


def test_unbalanced_store_is_reported():
    m = Machine()
    m.store = [LAM_TOP]
    with pytest.raises(StoreInvariantError):
        m.pop_binding(5)


def test_status_cache_is_stable():
    m = Machine()
    t = parse(r"(\x. x x x) ((\z. z) (\y. y))")
    r = m.run(t)
    assert r.stats["var-abs"] >= 3
    # forcing the same binding again keeps the stored value
    assert alpha_eq(unfold(r.term), parse(r"\y. y"))


def test_closed_corpus_depth_three():
    for t in enumerate_terms(CorpusSpec(max_depth=3)):
        r = run(t)
        o = beta.normalize_normal_order(t)
        assert alpha_eq(unfold(r.term), o.term)


@settings(max_examples=150, deadline=None)
@given(terms(es=False, max_leaves=8))
def test_agrees_with_oracle(t):
    o = beta.normalize_normal_order(t, 300)
    r = run(t, fuel=2000)
    if isinstance(o, beta.NormalForm) and isinstance(r, Result):
        assert alpha_eq(unfold(r.term), o.term)
        assert not r.diagnostics


@settings(max_examples=80, deadline=None)
@given(terms(max_leaves=8))
def test_substitutions_in_input_are_handled(t):
    o = beta.normalize_normal_order(unfold(t), 300)
    r = run(t, fuel=2000)
    if isinstance(o, beta.NormalForm) and isinstance(r, Result):
        assert alpha_eq(unfold(r.term), o.term)
