import pytest
from hypothesis import given, settings, strategies as st

from decdiag.rewriting import NoMatch, NotParallel, RedexPattern, apply_parallel, orthogonality, rewrite_at, successors
from decdiag.terms import (
    Fun,
    InvalidPosition,
    Var,
    fun_positions,
    is_variant,
    match,
    parallel,
    pos_key,
    positions,
    replace_at,
    substitute,
    subterm_at,
    unify,
    var_positions,
)
from decdiag.trs import parse_rules, parse_term

x, y = Var("x"), Var("y")
a, b, c = Fun("a"), Fun("b"), Fun("c")


def f(*args):
    return Fun("f", tuple(args))


def g(*args):
    return Fun("g", tuple(args))


def test_positions_split_into_function_and_variable():
    t = f(g(x, a))
    assert set(fun_positions(t)) == {(), (1,), (1, 2)}
    assert var_positions(t) == [(1, 1)]
    assert set(positions(t)) == {(), (1,), (1, 1), (1, 2)}


def test_positions_are_length_lex_ordered():
    t = f(g(x, a), b)
    ps = list(positions(t))
    assert ps == sorted(ps, key=pos_key)
    assert ps[0] == ()


def test_replace_at_invalid_position():
    with pytest.raises(InvalidPosition):
        replace_at(f(a, b), (3,), c)


def test_replace_and_subterm():
    t = f(a, b)
    assert replace_at(t, (2,), c) == f(a, c)
    assert subterm_at(f(g(x, a)), (1, 2)) == a


def test_unify_occurs_check():
    assert unify(x, f(x)) is None


def test_unify_mgu_is_a_unifier():
    s, t = f(x, g(y, y)), f(b, g(x, y))
    mu = unify(s, t)
    assert mu is not None
    assert substitute(s, mu) == substitute(t, mu)


def test_match_nonlinear_fails():
    assert match(f(x, x), f(a, b)) is None
    assert match(f(x, x), f(a, a)) == {"x": a}


def test_rewrite_at_no_match():
    trs = parse_rules("a -> b  b -> a  f(g(x,a)) -> g(f(x),f(x))", "x")
    with pytest.raises(NoMatch):
        rewrite_at(f(g(x, b)), RedexPattern((), trs.rule(3)))


def test_successors_of_both_arguments():
    trs = parse_rules("a -> b")
    succ = successors(f(a, a), trs)
    assert [t for _, t in succ] == [f(b, a), f(a, b)]


def test_apply_parallel_rejects_nested():
    trs = parse_rules("f(x) -> x  a -> b", "x")
    t = Fun("f", (a,))
    with pytest.raises(NotParallel):
        apply_parallel(t, [RedexPattern((), trs.rule(1)), RedexPattern((1,), trs.rule(2))])


def test_apply_parallel_contracts_all():
    trs = parse_rules("a -> b")
    ps = apply_parallel(f(a, a), [RedexPattern((1,), trs.rule(1)), RedexPattern((2,), trs.rule(1))])
    assert ps.target == f(b, b)


def test_orthogonality_classes():
    trs = parse_rules("f(g(x,a)) -> x  g(x,y) -> x  a -> b", "xy")
    r1, r2, r3 = trs.rules
    assert orthogonality(RedexPattern((1,), r3), RedexPattern((2,), r3)) == "parallel"
    assert orthogonality(RedexPattern((), r1), RedexPattern((1,), r2)) == "critical"
    assert orthogonality(RedexPattern((), r2), RedexPattern((1,), r3)) == "orthogonal_nested"


def test_variant():
    assert is_variant(f(x, y), f(y, x))
    assert not is_variant(f(x, x), f(x, y))


def test_parse_term_roundtrip():
    t = parse_term("f(g(x,a),b)", {"x"})
    assert t == f(g(x, a), b)
    assert str(t) == "f(g(x,a),b)"


# ------------------------------------------------------------ properties

_leaf = st.sampled_from([x, y, a, b])
terms = st.recursive(
    _leaf,
    lambda kids: st.one_of(
        st.builds(lambda s: Fun("g", (s,)), kids),
        st.builds(lambda s, t: f(s, t), kids, kids),
    ),
    max_leaves=8,
)


@settings(max_examples=200, deadline=None)
@given(terms, terms)
def test_unifier_equalizes(s, t):
    mu = unify(s, t)
    if mu is not None:
        assert substitute(s, mu) == substitute(t, mu)


@settings(max_examples=200, deadline=None)
@given(terms, terms)
def test_match_instantiates(s, t):
    sigma = match(s, t)
    if sigma is not None:
        assert substitute(s, sigma) == t


@settings(max_examples=200, deadline=None)
@given(terms, terms, st.data())
def test_replace_then_read(s, t, data):
    p = data.draw(st.sampled_from(list(positions(s))))
    assert subterm_at(replace_at(s, p, t), p) == t


@settings(max_examples=200, deadline=None)
@given(terms, st.data())
def test_parallel_positions_commute(s, data):
    ps = list(positions(s))
    p = data.draw(st.sampled_from(ps))
    q = data.draw(st.sampled_from(ps))
    if parallel(p, q):
        one = replace_at(replace_at(s, p, a), q, b)
        two = replace_at(replace_at(s, q, b), p, a)
        assert one == two
