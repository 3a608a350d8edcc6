"""Critical peaks, parallel critical peaks and bounded join search."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from typing import Dict, Iterator, List, Optional, Sequence, Set, Tuple

from .rewriting import ParallelStep, RedexPattern, Step, apply_parallel, successors
from .terms import (
    ROOT,
    Fun,
    Pos,
    Subst,
    Term,
    Var,
    fun_positions,
    is_variant,
    parallel,
    pos_key,
    replace_at,
    subterm_at,
    substitute,
    unify_all,
    variables,
)
from .trs import TRS, Rule, TRSInputError

DEFAULT_JOIN_CAP = 64


@dataclass(frozen=True)
class CriticalPeak:
    source: Term
    left: Term
    right: Term
    inner: RedexPattern
    outer: RedexPattern
    mgu: Tuple[Tuple[str, Term], ...]

    @property
    def left_step(self) -> Step:
        return Step(self.source, self.inner, self.left)

    @property
    def right_step(self) -> Step:
        return Step(self.source, self.outer, self.right)

    @property
    def trivial(self) -> bool:
        return self.left == self.right


@dataclass(frozen=True)
class ParallelCriticalPeak:
    source: Term
    left: ParallelStep
    right: RedexPattern
    right_target: Term
    mgu: Tuple[Tuple[str, Term], ...]

    @property
    def right_step(self) -> Step:
        return Step(self.source, self.right, self.right_target)

    @property
    def positions(self) -> Tuple[Pos, ...]:
        return tuple(pi.position for pi in self.left.patterns)

    @property
    def trivial(self) -> bool:
        return self.left.target == self.right_target


@dataclass(frozen=True)
class JoinSequence:
    left_steps: Tuple[Step, ...]
    right_steps: Tuple[Step, ...]
    meet: Term

    @property
    def length(self) -> int:
        return max(len(self.left_steps), len(self.right_steps))


@dataclass(frozen=True)
class JoinResult:
    """Outcome of a join search: ``n`` is None when unjoinable within the bound."""

    n: Optional[int]
    joins: Tuple[JoinSequence, ...]
    max_n: int

    @property
    def joinable(self) -> bool:
        return self.n is not None


def _rule_key(rule: Rule):
    return (rule.lhs, rule.rhs)


def rules_are_variants(a: Rule, b: Rule) -> bool:
    return is_variant(Fun("->", (a.lhs, a.rhs)), Fun("->", (b.lhs, b.rhs)))


def _fresh_renaming(rule: Rule, taken: Set[str]) -> Dict[str, str]:
    mapping = {}
    for x in variables(rule.lhs):
        y = x
        while y in taken:
            y += "'"
        mapping[x] = y
        taken.add(y)
    return mapping


def _renamed(rule: Rule, taken: Set[str]) -> Tuple[Term, Term]:
    mapping = _fresh_renaming(rule, taken)
    sub = {x: Var(y) for x, y in mapping.items()}
    return substitute(rule.lhs, sub), substitute(rule.rhs, sub)


def critical_peaks(trs: TRS) -> List[CriticalPeak]:
    """One peak per critical overlap, both orientations of root overlaps.

    Order: outer rule, inner rule, position (length-lexicographic).
    """
    peaks = []
    for outer in trs.rules:
        l2, r2 = outer.lhs, outer.rhs
        fpos = fun_positions(l2)
        for inner in trs.rules:
            taken = set(variables(l2))
            l1, r1 = _renamed(inner, taken)
            for p in fpos:
                if p == ROOT and rules_are_variants(inner, outer):
                    continue
                mu = unify_all([(l1, subterm_at(l2, p))])
                if mu is None:
                    continue
                source = substitute(l2, mu)
                left = replace_at(source, p, substitute(r1, mu))
                right = substitute(r2, mu)
                peaks.append(
                    CriticalPeak(
                        source,
                        left,
                        right,
                        RedexPattern(p, inner),
                        RedexPattern(ROOT, outer),
                        tuple(sorted(mu.items())),
                    )
                )
    return peaks


def _parallel_subsets(fpos: Sequence[Pos]) -> Iterator[Tuple[Pos, ...]]:
    for k in range(1, len(fpos) + 1):
        for combo in combinations(fpos, k):
            if all(parallel(a, b) for a, b in combinations(combo, 2)):
                yield combo


def parallel_critical_peaks(trs: TRS) -> List[ParallelCriticalPeak]:
    """Parallel critical peaks ``l_P <=P= l sigma -> r sigma`` of a left-linear TRS."""
    if not trs.left_linear:
        raise TRSInputError("not-left-linear", "parallel critical peaks need a left-linear TRS")
    peaks = []
    for outer in trs.rules:
        l, r = outer.lhs, outer.rhs
        fpos = fun_positions(l)
        candidates: Dict[Pos, List[Rule]] = {}
        for p in fpos:
            ok = []
            for inner in trs.rules:
                if p == ROOT and rules_are_variants(inner, outer):
                    continue
                l1, _ = _renamed(inner, set(variables(l)))
                if unify_all([(l1, subterm_at(l, p))]) is not None:
                    ok.append(inner)
            candidates[p] = ok
        for combo in _parallel_subsets(fpos):
            if any(not candidates[p] for p in combo):
                continue
            for rules in product(*(candidates[p] for p in combo)):
                taken = set(variables(l))
                eqs = []
                for p, inner in zip(combo, rules):
                    l1, _ = _renamed(inner, taken)
                    eqs.append((l1, subterm_at(l, p)))
                sigma = unify_all(eqs)
                if sigma is None:
                    continue
                source = substitute(l, sigma)
                pats = [RedexPattern(p, inner) for p, inner in zip(combo, rules)]
                left = apply_parallel(source, pats)
                peaks.append(
                    ParallelCriticalPeak(
                        source,
                        left,
                        RedexPattern(ROOT, outer),
                        substitute(r, sigma),
                        tuple(sorted(sigma.items())),
                    )
                )
    return peaks


# -------------------------------------------------------------- join search


class _Frontier:
    """Breadth-first reachability with recorded one-step edges."""

    def __init__(self, start: Term, trs: TRS):
        self.trs = trs
        self.dist: Dict[Term, int] = {start: 0}
        self.order: List[Term] = [start]
        self.edges: Dict[Term, List[Tuple[RedexPattern, Term]]] = {}
        self.layer = [start]
        self.depth = 0

    def expand(self, deadline=None):
        nxt = []
        for t in self.layer:
            if deadline is not None:
                deadline.check()
            succ = successors(t, self.trs)
            self.edges[t] = succ
            for _, v in succ:
                if v not in self.dist:
                    self.dist[v] = self.depth + 1
                    self.order.append(v)
                    nxt.append(v)
        self.layer = nxt
        self.depth += 1

    def paths_to(self, target: Term, budget: int) -> List[Tuple[Step, ...]]:
        """All repetition-free paths from the start to ``target`` of length <= budget."""
        preds: Dict[Term, List[Tuple[Term, RedexPattern]]] = {}
        for src, succ in self.edges.items():
            for pi, v in succ:
                preds.setdefault(v, []).append((src, pi))
        out: List[Tuple[Step, ...]] = []

        def back(node: Term, suffix: Tuple[Step, ...], seen: frozenset):
            if self.dist.get(node, budget + 1) > budget - len(suffix):
                return
            if node == self.order[0]:
                out.append(suffix)
            if len(suffix) == budget:
                return
            for src, pi in preds.get(node, ()):
                if src in seen:
                    continue
                back(src, (Step(src, pi, node),) + suffix, seen | {src})

        back(target, (), frozenset([target]))
        out.sort(key=lambda path: (len(path), [(pos_key(s.position), s.rule.index) for s in path]))
        return out


def join_search(
    t: Term, u: Term, trs: TRS, max_n: int, cap: int = DEFAULT_JOIN_CAP, deadline=None
) -> JoinResult:
    """Minimal n <= max_n with t ->^{<=n} . <-^{<=n} u and all joins at that n."""
    if t == u:
        return JoinResult(0, (JoinSequence((), (), t),), max_n)
    left, right = _Frontier(t, trs), _Frontier(u, trs)
    for n in range(1, max_n + 1):
        left.expand(deadline)
        right.expand(deadline)
        common = [v for v in left.order if v in right.dist]
        if not common:
            continue
        common.sort(key=lambda v: (max(left.dist[v], right.dist[v]), left.dist[v] + right.dist[v]))
        joins: List[JoinSequence] = []
        for v in common:
            lpaths = left.paths_to(v, n)
            rpaths = right.paths_to(v, n)
            for lp, rp in product(lpaths, rpaths):
                joins.append(JoinSequence(lp, rp, v))
                if len(joins) >= cap:
                    break
            if len(joins) >= cap:
                break
        joins.sort(key=lambda j: (j.length, len(j.left_steps) + len(j.right_steps)))
        return JoinResult(n, tuple(joins), max_n)
    return JoinResult(None, (), max_n)


def reachable(t: Term, trs: TRS, limit: int, deadline=None) -> Optional[Set[Term]]:
    """All reducts of ``t``; None when more than ``limit`` terms are found."""
    seen = {t}
    todo = [t]
    while todo:
        if deadline is not None:
            deadline.check()
        s = todo.pop()
        for _, v in successors(s, trs):
            if v not in seen:
                seen.add(v)
                if len(seen) > limit:
                    return None
                todo.append(v)
    return seen
