"""Order-sorted signature inference and the persistence-based criteria.

Every symbol result, symbol argument and rule variable starts with its own
sort.  Equalities forced by variable positions of left-hand sides merge
sorts (union-find); subterm and root constraints add ``<=`` edges, whose
strongly connected components are collapsed.  The result relates sorts only
when a rule forces it, so as few rules as possible nest inside each other.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, Hashable, List, Optional, Set, Tuple

import networkx as nx

from .terms import Fun, Pos, Term, Var, subterm_at, var_count, var_positions
from .trs import TRS, Rule

SortVar = Tuple  # ("res", f) | ("arg", f, i) | ("var", rule index, x)


class _UnionFind:
    def __init__(self):
        self.parent: Dict[Hashable, Hashable] = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb, key=repr)] = min(ra, rb, key=repr)


@dataclass(frozen=True)
class SortAssignment:
    """Sorts are integers; ``leq`` is the reflexive-transitive order on them."""

    sorts: Tuple[int, ...]
    leq: FrozenSet[Tuple[int, int]]
    result: Tuple[Tuple[str, int], ...]
    arguments: Tuple[Tuple[str, Tuple[int, ...]], ...]
    variables: Tuple[Tuple[Tuple[int, str], int], ...]

    def res(self, f: str) -> int:
        return dict(self.result)[f]

    def arg(self, f: str, i: int) -> int:
        return dict(self.arguments)[f][i - 1]

    def var(self, rule: int, x: str) -> int:
        return dict(self.variables)[(rule, x)]

    def le(self, a: int, b: int) -> bool:
        return (a, b) in self.leq

    def sort_of(self, t: Term, rule: int) -> int:
        return self.var(rule, t.name) if type(t) is Var else self.res(t.name)

    def sort_at(self, t: Term, p: Pos) -> int:
        """The sort demanded by the context of ``t`` at the non-root ``p``."""
        parent = subterm_at(t, p[:-1])
        return self.arg(parent.name, p[-1])

    def declarations(self) -> List[str]:
        out = []
        args = dict(self.arguments)
        for f, s in self.result:
            if args[f]:
                out.append(f"{f} : {' x '.join(map(str, args[f]))} -> {s}")
            else:
                out.append(f"{f} : {s}")
        return out

    def to_json(self) -> dict:
        return {
            "sorts": list(self.sorts),
            "leq": sorted([a, b] for a, b in self.leq if a != b),
            "symbols": {f: {"args": list(a), "result": dict(self.result)[f]} for f, a in self.arguments},
            "variables": [[r, x, s] for (r, x), s in self.variables],
        }


def _constraints(trs: TRS):
    eqs: List[Tuple[SortVar, SortVar]] = []
    les: List[Tuple[SortVar, SortVar]] = []

    def node(t: Term, rule: Rule) -> SortVar:
        return ("var", rule.index, t.name) if type(t) is Var else ("res", t.name)

    def walk(t: Term, rule: Rule, lhs: bool):
        if type(t) is Var:
            return
        for i, a in enumerate(t.args, 1):
            slot = ("arg", t.name, i)
            if lhs and type(a) is Var:
                eqs.append((node(a, rule), slot))
            else:
                les.append((node(a, rule), slot))
            walk(a, rule, lhs)

    for rule in trs.rules:
        walk(rule.lhs, rule, True)
        walk(rule.rhs, rule, False)
        les.append((node(rule.rhs, rule), node(rule.lhs, rule)))
    return eqs, les


def _all_sort_vars(trs: TRS) -> List[SortVar]:
    out: List[SortVar] = []
    for f, n in sorted(trs.signature.items()):
        out.append(("res", f))
        out += [("arg", f, i) for i in range(1, n + 1)]
    for rule in trs.rules:
        for p in var_positions(rule.lhs):
            out.append(("var", rule.index, subterm_at(rule.lhs, p).name))
    return out


def infer_sorts(trs: TRS, many_sorted: bool = False) -> SortAssignment:
    """Most general order-sorted assignment making ``trs`` compatible.

    With ``many_sorted`` every ``<=`` constraint is treated as an equality.
    """
    eqs, les = _constraints(trs)
    uf = _UnionFind()
    universe = _all_sort_vars(trs)
    for v in universe:
        uf.find(v)
    for a, b in eqs + (les if many_sorted else []):
        uf.union(a, b)
    graph = nx.DiGraph()
    graph.add_nodes_from({uf.find(v) for v in universe})
    if not many_sorted:
        graph.add_edges_from((uf.find(a), uf.find(b)) for a, b in les)
    cond = nx.condensation(graph)
    # number components by their first sort variable in universe order
    first: Dict[int, int] = {}
    for rank, v in enumerate(universe):
        first.setdefault(cond.graph["mapping"][uf.find(v)], rank)
    numbering = {c: n for n, c in enumerate(sorted(first, key=first.get))}

    def sort(v: SortVar) -> int:
        return numbering[cond.graph["mapping"][uf.find(v)]]

    closure = nx.transitive_closure_dag(cond)
    leq = {(numbering[a], numbering[b]) for a, b in closure.edges()}
    leq |= {(s, s) for s in numbering.values()}
    result = tuple((f, sort(("res", f))) for f in sorted(trs.signature))
    arguments = tuple(
        (f, tuple(sort(("arg", f, i)) for i in range(1, n + 1))) for f, n in sorted(trs.signature.items())
    )
    variables = tuple(
        sorted({((v[1], v[2]), sort(v)) for v in universe if v[0] == "var"})
    )
    return SortAssignment(tuple(sorted(numbering.values())), frozenset(leq), result, arguments, variables)


def _sorted_term(S: SortAssignment, t: Term, rule: int) -> bool:
    if type(t) is Var:
        return True
    return all(
        S.le(S.sort_of(a, rule), S.arg(t.name, i)) and _sorted_term(S, a, rule)
        for i, a in enumerate(t.args, 1)
    )


def is_compatible(trs: TRS, S: SortAssignment) -> bool:
    """Direct check of compatibility of ``trs`` with ``S``."""
    try:
        for rule in trs.rules:
            alpha = S.sort_of(rule.lhs, rule.index)
            if not _sorted_term(S, rule.lhs, rule.index) or not _sorted_term(S, rule.rhs, rule.index):
                return False
            if not S.le(S.sort_of(rule.rhs, rule.index), alpha):
                return False
            for p in var_positions(rule.lhs):
                if S.sort_at(rule.lhs, p) != S.sort_of(subterm_at(rule.lhs, p), rule.index):
                    return False
    except KeyError:
        return False
    return True


def _nest_graph(S: SortAssignment) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(S.sorts)
    g.add_edges_from((a, b) for a, b in S.leq if a != b)
    res = dict(S.result)
    for f, args in S.arguments:
        g.add_edges_from((a, res[f]) for a in args)
    return g


def can_nest(S: SortAssignment, outer: Rule, p: Pos, inner: Rule) -> bool:
    """Whether ``inner.lhs`` may occur below the variable of ``outer.lhs`` at ``p``."""
    alpha = S.sort_at(outer.lhs, p)
    beta = S.res(inner.lhs.name)
    return beta == alpha or nx.has_path(_nest_graph(S), beta, alpha)


def nestings(trs: TRS, S: SortAssignment):
    """Yield ``(outer, p, inner)`` for every possible nesting."""
    g = _nest_graph(S)
    for outer in trs.rules:
        for p in var_positions(outer.lhs):
            alpha = S.sort_at(outer.lhs, p)
            for inner in trs.rules:
                beta = S.res(inner.lhs.name)
                if beta == alpha or nx.has_path(g, beta, alpha):
                    yield outer, p, inner


def theorem_pl_applicable(trs: TRS, S: SortAssignment) -> bool:
    if not trs.left_linear or not is_compatible(trs, S):
        return False
    return all(
        var_count(outer.rhs, subterm_at(outer.lhs, p).name) <= 1 for outer, p, _ in nestings(trs, S)
    )


def pll_constraints(trs: TRS, S: SortAssignment) -> List[Tuple[int, int]]:
    """Pairs ``(outer, inner)`` of rule indices that need ``i(outer) > i(inner)``."""
    out: List[Tuple[int, int]] = []
    for outer, p, inner in nestings(trs, S):
        if var_count(outer.rhs, subterm_at(outer.lhs, p).name) > 1:
            pair = (outer.index, inner.index)
            if pair not in out:
                out.append(pair)
    return out
