"""Homeomorphic embedding, coupling, and most specific generalisation."""

from hypothesis import given, settings
from hypothesis import strategies as st

from loopinv.embedding import FreshSupply, coupled, embeds, generalise, msg, msg_list
from loopinv.parser import parse_expression
from loopinv.terms import TRUE, Num, Op, Var, free_vars, substitute


def e(text):
    return parse_expression(text)


# --- embedding rules ----------------------------------------------------------


def test_variables_embed_into_variables():
    assert embeds(Var("x"), Var("y"))


def test_diving_reaches_inside():
    assert embeds(e("x"), e("x + 1"))
    assert embeds(e("y * k"), e("y * (k * k)"))


def test_coupling_matches_same_operator():
    assert embeds(e("x + 1"), e("(x + 1) + 1"))
    assert not embeds(e("x + 1"), e("x * 1"))  # no diving target fits either


def test_embedding_orders_numerals():
    # Numbers embed as Zero/Succ towers: smaller into larger.
    assert embeds(Num(1), Num(2))
    assert embeds(Num(0), Num(3))
    assert not embeds(Num(2), Num(1))


def test_coupled_requires_equal_top_functor():
    assert coupled(e("y * k = k ^ n"), e("y * (k * k) = k ^ n"))
    assert not coupled(e("x + 1"), e("x * 2"))
    assert not coupled(e("x + 1 = n"), e("x + 1 <= n"))


def test_coupled_numbers_follow_tower_view():
    assert coupled(Num(1), Num(2))       # Succ vs Succ
    assert not coupled(Num(0), Num(2))   # Zero vs Succ


def test_coupled_rejects_bare_variables():
    assert not coupled(Var("x"), Var("y"))
    assert not coupled(Var("x"), e("x + 1"))


def test_growth_detected_along_derivation():
    eq2 = e("x + 1 = n /\\ y * k = k ^ n")
    eq3 = e("x + (1 + 1) = n /\\ y * (k * k) = k ^ n")
    assert embeds(eq2, eq3)
    assert coupled(eq2, eq3)
    assert not embeds(eq3, eq2)


# --- generalisation -----------------------------------------------------------


def fresh():
    return FreshSupply(avoid=frozenset({"x", "y", "z", "n", "k"}))


def test_generalise_extracts_common_shape():
    f = fresh()
    out = generalise(e("x + 1"), e("x + (1 + 1)"), f)
    assert out.generalised == e("x + g1")
    assert out.theta_left == {"g1": Num(1)}
    assert out.theta_right == {"g1": e("1 + 1")}


def test_generalise_equal_terms_without_variables():
    f = fresh()
    out = generalise(e("y * k"), e("y * k"), f)
    assert out.generalised == e("y * k")
    assert out.theta_left == {} and out.theta_right == {}


def test_msg_merges_duplicate_extractions():
    # x+x vs y+y: plain generalisation would make two variables, but
    # both carry identical substitutions and must merge.
    f = fresh()
    out = msg(e("x + x"), e("y + y"), f)
    assert out.generalised == e("g1 + g1")
    assert out.theta_left == {"g1": Var("x")}
    assert out.theta_right == {"g1": Var("y")}


def test_msg_keeps_distinct_extractions_apart():
    f = fresh()
    out = msg(e("x + y"), e("y + x"), f)
    assert out.generalised == e("g1 + g2")


def test_substitutions_reproduce_inputs():
    a, b = e("x + (1 + 1) = n"), e("x + g0 = n")
    out = msg(a, b, FreshSupply(avoid=frozenset({"x", "n", "g0"})))
    assert substitute(out.generalised, out.theta_left) == a
    assert substitute(out.generalised, out.theta_right) == b


def test_msg_list_folds_and_filters_true():
    f = fresh()
    out = msg_list([e("x + 1 = n"), e("x + (1 + 1) = n")], f)
    assert out == e("x + g1 = n")
    assert msg_list([], f) == TRUE
    assert msg_list([TRUE, e("x = 1")], f) == e("x = 1")


def test_fresh_supply_avoids_and_records():
    f = FreshSupply(avoid=frozenset({"g1", "g3"}))
    names = [f.fresh(), f.fresh(), f.fresh()]
    assert names == ["g2", "g4", "g5"]
    assert f.created == ["g2", "g4", "g5"]


# --- law checks over random terms ----------------------------------------------


_leaf = st.one_of(
    st.sampled_from(["x", "y", "z", "n", "k"]).map(Var),
    st.integers(0, 5).map(Num),
)


def terms(max_leaves=2**5):
    return st.recursive(
        _leaf,
        lambda kids: st.tuples(
            st.sampled_from(["+", "-", "*", "/", "%", "^", "=", "<", "∧"]), kids, kids
        ).map(lambda t: Op(t[0], (t[1], t[2]))),
        max_leaves=max_leaves,
    )


@settings(max_examples=150)
@given(terms())
def test_embedding_reflexive(t):
    assert embeds(t, t)


@settings(max_examples=150)
@given(terms(), terms())
def test_msg_substitutions_always_reproduce(a, b):
    f = FreshSupply(avoid=frozenset(free_vars(a) | free_vars(b)))
    out = msg(a, b, f)
    assert substitute(out.generalised, out.theta_left) == a
    assert substitute(out.generalised, out.theta_right) == b


@settings(max_examples=150)
@given(terms())
def test_msg_of_term_with_itself_introduces_nothing(t):
    f = FreshSupply(avoid=frozenset(free_vars(t)))
    out = msg(t, t, f)
    assert out.generalised == t
    assert not f.created


@settings(max_examples=100)
@given(terms(), terms())
def test_generalised_term_embeds_into_neither_strictly(a, b):
    # The generalisation is a common shape: both inputs embed it back
    # through the variable/diving/coupling rules once its variables are
    # instantiated — sanity-check via substitution instead of ⊴ here.
    f = FreshSupply(avoid=frozenset(free_vars(a) | free_vars(b)))
    out = msg(a, b, f)
    for g in out.theta_left:
        assert g in free_vars(out.generalised)
