import random

import pytest
from hypothesis import given, settings, strategies as st

from decdiag.labeling import star_signature
from decdiag.ordering import (
    LPO,
    OrderingConfig,
    PolyInterpretation,
    Rel,
    pair_from_json,
    relative_termination,
    replay_proof,
    search_reduction_pair,
)
from decdiag.terms import Fun, Var
from decdiag.trs import RelativeTRS, TRS, parse_rules, parse_term, star_transform
from fixtures import load
from gen import random_term

x, y = Var("x"), Var("y")
GT, GE, UNK = Rel.GT, Rel.GE, Rel.UNK


def T(text):
    return parse_term(text, {"x", "y", "z"})


def test_poly_incomparable_linear_functions():
    pair = PolyInterpretation.of({"f": ((1,), 2), "g": ((2,), 1)})
    assert pair.compare(T("f(x)"), T("g(x)")) is UNK


def test_poly_strict_and_weak():
    pair = PolyInterpretation.of({"f": ((2,), 1), "a": ((), 0)})
    assert pair.compare(T("f(x)"), T("x")) is GT
    assert pair.compare(T("f(a)"), T("f(a)")) is GE


def test_lpo_examples():
    lpo = LPO.of({"f": 1, "g": 0, "a": 0, "b": 0})
    assert lpo.compare(T("f(g(x,a))"), T("g(f(x),f(x))")) is GT
    assert lpo.compare(T("a"), T("b")) is GE
    assert lpo.compare(T("x"), T("y")) is UNK


def test_strict_subterm_found():
    pair = search_reduction_pair([(T("f(x)"), x)], [])
    assert pair.describe() == "[f] = x1 + 1"


def test_growing_rule_not_oriented():
    assert search_reduction_pair([(x, T("f(x)"))], []) is None


def test_relative_termination_empty_strict():
    rel = RelativeTRS(TRS(()), load("mot"))
    proof = relative_termination(rel)
    assert proof.complete and proof.stages == ()


def test_cops60_star_residual():
    trs = load("cops60")
    proof = relative_termination(star_transform(trs), signature=star_signature(trs))
    assert not proof.complete
    assert {r.origin for r in proof.residual.strict.rules} == {(9, "x", 1), (10, "y", 1)}


def test_removal_proof_replays():
    rel = RelativeTRS(parse_rules("f(x) -> x  g(x) -> f(x)", "x"), TRS(()))
    proof = relative_termination(rel)
    assert proof.complete
    data = proof.to_json()
    assert replay_proof(rel, data)
    data["stages"][0]["removed_strict"] = data["stages"][0]["removed_strict"][:-1] + [99]
    assert not replay_proof(rel, data)


def test_pair_json_roundtrip():
    for pair in (PolyInterpretation.of({"f": ((1, 2), 3)}), LPO.of({"f": 2, "g": 1})):
        assert pair_from_json(pair.to_json()) == pair
    with pytest.raises(ValueError):
        pair_from_json({"kind": "kbo"})


def test_node_budget_makes_search_give_up():
    cfg = OrderingConfig(max_nodes=1)
    constraints = [(T("f(g(x))"), T("g(f(x))"))]
    assert search_reduction_pair(constraints, [], cfg) is None
    assert search_reduction_pair(constraints, []) is not None


def test_found_pair_satisfies_request():
    rng = random.Random(3)
    sig = [("f", 2), ("g", 1), ("a", 0)]
    for _ in range(100):
        s = random_term(rng, sig, 3, ["x", "y"])
        t = random_term(rng, sig, 3, ["x", "y"])
        if isinstance(s, Var):
            continue
        pair = search_reduction_pair([(s, t)], [], OrderingConfig(max_nodes=2000))
        if pair is not None:
            assert pair.compare(s, t) is GT


_sig = [("f", 2), ("g", 1), ("a", 0), ("b", 0)]
_pairs = st.one_of(
    st.builds(lambda r: LPO.of(dict(zip("fgab", r))), st.lists(st.integers(0, 3), min_size=4, max_size=4)),
    st.builds(
        lambda c: PolyInterpretation.of({"f": ((c[0], c[1]), c[2]), "g": ((c[3],), c[4]), "a": ((), c[5]), "b": ((), c[6])}),
        st.tuples(*[st.integers(1, 2)] * 2, st.integers(0, 3), st.integers(1, 2), *[st.integers(0, 3)] * 3),
    ),
)


@settings(max_examples=150, deadline=None)
@given(_pairs, st.integers(0, 10**6))
def test_pairs_are_closed_under_contexts_and_substitutions(pair, seed):
    rng = random.Random(seed)
    s, t = (random_term(rng, _sig, 3, ["x", "y"]) for _ in range(2))
    rel = pair.compare(s, t)
    if rel is UNK:
        return
    u = random_term(rng, _sig, 2, [])
    assert pair.compare(Fun("g", (s,)), Fun("g", (t,))) in ((rel, GT) if rel is GT else (GE, GT))
    from decdiag.terms import substitute
    assert pair.compare(substitute(s, {"x": u}), substitute(t, {"x": u})) in ((GT,) if rel is GT else (GE, GT))
