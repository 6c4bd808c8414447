from hypothesis import given

from conftest import terms
from needful import weak
from needful.strong import DB_LABEL, LSV_LABEL, Id, Sub
from needful.terms import Abs, Var, count_occurrences, free_count, parse, to_text

V = r"(\q. q)"
NESTED = rf"(x t)[x\(y u)[y\{V}[z\w]]]"
NESTED_AFTER = r"(x t)[x\((\q. q) u)[y\\q. q][z\w]]"


def texts(ts):
    return [to_text(t) for t in ts]


def test_db_at_root():
    [(path, frames, _, rule, _)] = weak.wn_decompose(parse(r"(\x. t) u"))
    assert (path, frames, rule) == ((), (), "dB")


def test_lsv_at_root():
    t = parse(rf"(y u)[y\{V}[z\w]]")
    found = weak.wn_decompose(t)
    assert [(p, rule) for p, _, _, rule, _ in found] == [((), "lsv")]


def test_lsv_inside_substitution_context():
    t = parse(NESTED)
    [(path, frames, _, rule, occ)] = weak.wn_decompose(t)
    assert rule == "lsv" and path == (1,)
    assert isinstance(frames[0], weak.ESRightAt)
    assert frames[0].occurrence == (0,)


def test_decomposition_replugs():
    t = parse(NESTED)
    for path, _, redex, _, _ in weak.wn_decompose(t):
        assert weak.replace_at(t, path, redex) == t


def test_step_ctx_examples():
    assert texts(weak.wn_step_ctx(parse(r"(\x.t)[y\w] u"))) == [r"t[x\u][y\w]"]
    assert texts(weak.wn_step_ctx(parse(NESTED))) == [NESTED_AFTER]
    assert weak.wn_step_ctx(parse(r"\x. (\y.y) z")) == []


def test_step_ind_examples():
    t = parse("x t")
    assert weak.wn_step_ind(t, Id(0)) == [t]
    assert weak.wn_step_ind(t, Id(1)) == []
    t = parse("y u")
    assert texts(weak.wn_step_ind(t, Sub(0, parse(V)))) == [r"(\q. q) u"]
    assert texts(weak.wn_step_ind(parse(NESTED), LSV_LABEL)) == [NESTED_AFTER]
    assert weak.wn_step_ind(parse(NESTED), DB_LABEL) == []


def test_auxiliary_relations():
    assert texts(weak.aux_db_wn(parse(r"(\x. t) u"))) == [r"t[x\u]"]
    assert texts(weak.aux_db_wn(parse(r"(\x. t)[z\w] u"))) == [r"t[x\u][z\w]"]
    got = weak.aux_lsv_wn(parse(rf"(y u)[y\{V}[z\w]]"))
    assert texts(got) == [r"((\q. q) u)[y\\q. q][z\w]"]


def test_no_reduction_under_abstraction_or_in_arguments():
    assert weak.wn_reducts(parse(r"\x. (\y. y) x")) == []
    assert weak.wn_reducts(parse(r"f ((\y. y) x)")) == []


def test_unneeded_substitution_is_not_evaluated():
    # x is not needed, so its argument stays put
    assert weak.wn_reducts(parse(r"y[x\(\z. z) w]")) == []
    assert texts(weak.wn_reducts(parse(r"x[x\(\z. z) w]"))) == [r"x[x\z[z\w]]"]


@given(terms())
def test_presentations_agree(t):
    for rule, label in (("dB", DB_LABEL), ("lsv", LSV_LABEL)):
        assert set(weak.wn_step_ctx(t, rule)) == set(weak.wn_step_ind(t, label))


@given(terms())
def test_probe_and_substitution_track_evaluation_positions(t):
    v = Abs(Var(0))
    for k in range(free_count(t)):
        occ = weak.eval_occurrences(t, k)
        assert weak.wn_step_ind(t, Id(k)) == ([t] if occ else [])
        subs = weak.wn_step_ind(t, Sub(k, v))
        assert len(subs) == len(occ)
        for r in subs:
            assert count_occurrences(r, k) == count_occurrences(t, k) - 1
