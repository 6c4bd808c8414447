import pytest

from needful import beta
from needful.terms import parse, to_text


def texts(ts):
    return [to_text(t) for t in ts]


def test_single_step():
    assert texts(beta.beta_step_all(parse(r"(\x. x) y"))) == ["y"]
    assert beta.beta_step_all(parse(r"\x. x")) == []


def test_both_redexes_outermost_first():
    got = beta.beta_step_all(parse(r"(\x. x x) ((\y.y) z)"))
    assert got == [parse(r"((\y.y) z) ((\y.y) z)"), parse(r"(\x. x x) z")]


def test_duplicate_reducts_are_merged():
    # both redexes contract to the same term
    t = parse(r"(\x. x) ((\y. y) z)")
    assert beta.beta_step_all(t) == [parse(r"(\y. y) z")]


def test_normal_order():
    r = beta.normalize_normal_order(parse(r"(\x. x) (\y. y)"), 10)
    assert isinstance(r, beta.NormalForm)
    assert to_text(r.term) == r"\y. y" and r.steps == 1


def test_normal_order_skips_divergent_argument():
    r = beta.normalize_normal_order(parse(r"(\x y. x (x x)) (\z. z)"), 100)
    assert to_text(r.term) == r"\y. \z. z"
    r = beta.normalize_normal_order(parse(r"(\x. \q. q) ((\x. x x) (\x. x x))"), 100)
    assert to_text(r.term) == r"\q. q"


def test_omega_times_out_after_all_fuel():
    r = beta.normalize_normal_order(parse(r"(\x. x x) (\x. x x)"), 1500)
    assert isinstance(r, beta.Timeout)
    assert r.steps == 1500


def test_zero_fuel():
    assert isinstance(beta.normalize_normal_order(parse(r"(\x. x) y"), 0), beta.Timeout)
    assert isinstance(beta.normalize_normal_order(parse("y"), 0), beta.NormalForm)


def test_is_beta_nf():
    assert beta.is_beta_nf(parse(r"\x. x x"))
    assert not beta.is_beta_nf(parse(r"(\x.x) y"))
    assert beta.is_beta_nf(parse(r"x (\y. y) z"))


def test_rejects_substitutions():
    with pytest.raises(beta.ImpureTermError):
        beta.beta_step_all(parse(r"x[x\y]"))
    with pytest.raises(beta.ImpureTermError):
        beta.is_beta_nf(parse(r"x[x\y]"))


def test_normal_form_is_fixpoint_and_unique():
    from needful.harness import CorpusSpec, enumerate_terms
    for t in enumerate_terms(CorpusSpec(max_size=7, free_var_count=1)):
        r = beta.normalize_normal_order(t, 200)
        if isinstance(r, beta.NormalForm):
            assert beta.beta_step_all(r.term) == []
            # every normal form found by exhaustive search is the same one
            seen, todo = {t}, [t]
            while todo:
                u = todo.pop()
                succ = beta.beta_step_all(u)
                if not succ:
                    assert u == r.term
                for s in succ:
                    if s not in seen and len(seen) < 10_000:
                        seen.add(s)
                        todo.append(s)


def test_reachable():
    t = parse(r"(\x. x x) ((\y.y) z)")
    assert beta.beta_reachable(t, parse("z z"), 2)
    assert not beta.beta_reachable(t, parse("z z"), 1)
