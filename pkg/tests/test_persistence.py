import random
from itertools import product

from hypothesis import given, settings, strategies as st

from decdiag.persistence import (
    SortAssignment,
    can_nest,
    infer_sorts,
    is_compatible,
    nestings,
    pll_constraints,
    theorem_pl_applicable,
)
from decdiag.terms import var_positions
from decdiag.trs import parse_rules
from fixtures import load
from gen import random_trs


def slots(S: SortAssignment):
    """Every sort variable with its sort."""
    out = {("res", f): s for f, s in S.result}
    for f, args in S.arguments:
        out.update({("arg", f, i): s for i, s in enumerate(args, 1)})
    out.update({("var",) + k: s for k, s in S.variables})
    return out


def assignment(template: SortAssignment, values: dict, order) -> SortAssignment:
    """Build an assignment over the slots of ``template`` from ``values``."""
    sorts = tuple(sorted(set(values.values()) | {0}))
    leq = frozenset({(s, s) for s in sorts} | set(order))
    result = tuple((f, values[("res", f)]) for f, _ in template.result)
    arguments = tuple(
        (f, tuple(values[("arg", f, i)] for i in range(1, len(a) + 1))) for f, a in template.arguments
    )
    variables = tuple((k, values[("var",) + k]) for k, _ in template.variables)
    return SortAssignment(sorts, leq, result, arguments, variables)


def coarsens(fine: SortAssignment, coarse: SortAssignment) -> bool:
    """``coarse`` identifies at least what ``fine`` identifies and keeps its order."""
    f, c = slots(fine), slots(coarse)
    image = {}
    for k, s in f.items():
        if image.setdefault(s, c[k]) != c[k]:
            return False
    return all(coarse.le(image[a], image[b]) for a, b in fine.leq if a in image and b in image)


def test_pl_refines_two_sort_assignment():
    trs = load("pl")
    S = infer_sorts(trs)
    assert is_compatible(trs, S)
    two = {("var", 2, "x"): 0, ("res", "a"): 0, ("res", "b"): 0, ("arg", "f", 1): 0,
           ("res", "f"): 1, ("arg", "g", 1): 1, ("arg", "g", 2): 1, ("res", "g"): 1}
    T = assignment(S, two, [])
    assert is_compatible(trs, T)
    assert coarsens(S, T)
    assert infer_sorts(trs, many_sorted=True).declarations() == ["a : 0", "b : 0", "f : 0 -> 1", "g : 1 x 1 -> 1"]


def test_pl_no_nesting_below_duplicating_rule():
    trs = load("pl")
    S = infer_sorts(trs)
    dup = trs.rule(2)
    assert not any(can_nest(S, dup, (1,), r) for r in trs.rules if r.lhs.name == "f")
    assert theorem_pl_applicable(trs, S)
    assert pll_constraints(trs, S) == []


def test_pll_needs_constraint():
    trs = load("pll")
    S = infer_sorts(trs)
    assert not theorem_pl_applicable(trs, S)
    assert pll_constraints(trs, S) == [(1, 3)]


def test_fail_per_self_nesting():
    trs = load("fail_per")
    assert (1, 1) in pll_constraints(trs, infer_sorts(trs))


def test_order_sorted_beats_many_sorted():
    trs = load("hfa")
    assert theorem_pl_applicable(trs, infer_sorts(trs))
    many = infer_sorts(trs, many_sorted=True)
    assert is_compatible(trs, many)
    assert not theorem_pl_applicable(trs, many)


def test_ground_rule_keeps_sorts_apart():
    S = infer_sorts(parse_rules("a -> b"))
    assert S.res("a") != S.res("b")
    assert S.le(S.res("b"), S.res("a"))


def test_one_sort_nests_everything():
    trs = parse_rules("f(x) -> g(x,x)  g(x,y) -> f(x)", "xy")
    S = infer_sorts(trs)
    one = assignment(S, {k: 0 for k in slots(S)}, [])
    assert is_compatible(trs, one)
    rules = trs.rules
    assert all(can_nest(one, o, p, i) for o in rules for p in var_positions(o.lhs) for i in rules)


def _two_sort_candidates(S):
    keys = list(slots(S))
    for values in product((0, 1), repeat=len(keys)):
        for order in ((), ((0, 1),), ((1, 0),)):
            yield assignment(S, dict(zip(keys, values)), order)


def test_inferred_sorts_are_most_general_on_small_systems():
    """Brute force: every compatible two-sort assignment coarsens the inferred one."""
    rng = random.Random(11)
    done = 0
    while done < 40:
        trs = random_trs(rng, max_rules=2, depth=2)
        if not trs.rules:
            continue
        S = infer_sorts(trs)
        if len(slots(S)) > 9:
            continue
        done += 1
        assert is_compatible(trs, S)
        for cand in _two_sort_candidates(S):
            if is_compatible(trs, cand):
                assert coarsens(S, cand)


def test_single_collapsing_rule():
    trs = parse_rules("f(x) -> x", "x")
    S = infer_sorts(trs)
    for cand in _two_sort_candidates(S):
        if is_compatible(trs, cand):
            assert coarsens(S, cand)
    assert S.var(1, "x") == S.arg("f", 1)
    assert S.le(S.arg("f", 1), S.res("f"))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_inferred_sorts_are_compatible(seed):
    trs = random_trs(random.Random(seed))
    S = infer_sorts(trs)
    assert is_compatible(trs, S)
    assert is_compatible(trs, infer_sorts(trs, many_sorted=True))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.data())
def test_collapsing_two_sorts_stays_compatible(seed, data):
    trs = random_trs(random.Random(seed))
    S = infer_sorts(trs)
    if len(S.sorts) < 2:
        return
    a, b = data.draw(st.lists(st.sampled_from(S.sorts), min_size=2, max_size=2, unique=True))
    merged = {k: (a if s == b else s) for k, s in slots(S).items()}
    order = {(a if x == b else x, a if y == b else y) for x, y in S.leq}
    # close the merged order transitively
    changed = True
    while changed:
        extra = {(x, w) for x, y in order for z, w in order if y == z} - order
        order |= extra
        changed = bool(extra)
    assert is_compatible(trs, assignment(S, merged, order))


def test_nestings_only_between_reachable_sorts():
    trs = load("hfa")
    S = infer_sorts(trs)
    dup = trs.rule(3)
    assert not [n for n in nestings(trs, S) if n[0] == dup]
