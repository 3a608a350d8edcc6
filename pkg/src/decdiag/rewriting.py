"""Single and parallel rewrite steps."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Tuple

from .terms import (
    Fun,
    Pos,
    Term,
    Var,
    is_prefix,
    match,
    parallel,
    pos_key,
    pos_minus,
    positions,
    replace_at,
    subterm_at,
    subterms,
    substitute,
)
from .trs import TRS, Rule


class NoMatch(ValueError):
    pass


class NotParallel(ValueError):
    pass


@dataclass(frozen=True)
class RedexPattern:
    position: Pos
    rule: Rule

    def matches(self, t: Term) -> bool:
        try:
            return match(self.rule.lhs, subterm_at(t, self.position)) is not None
        except ValueError:
            return False


@dataclass(frozen=True)
class Step:
    """A concrete rewrite step ``source -> target`` by ``pattern``."""

    source: Term
    pattern: RedexPattern
    target: Term

    @property
    def position(self) -> Pos:
        return self.pattern.position

    @property
    def rule(self) -> Rule:
        return self.pattern.rule

    @property
    def redex(self) -> Term:
        return subterm_at(self.source, self.pattern.position)


@dataclass(frozen=True)
class ParallelStep:
    source: Term
    patterns: Tuple[RedexPattern, ...]
    target: Term

    def single_steps(self) -> List[Step]:
        """Each constituent step, taken from the common source."""
        return [Step(self.source, pi, rewrite_at(self.source, pi)) for pi in self.patterns]


def rewrite_at(t: Term, pi: RedexPattern) -> Term:
    try:
        redex = subterm_at(t, pi.position)
    except ValueError:
        raise NoMatch(f"no subterm at {pi.position}") from None
    sigma = match(pi.rule.lhs, redex)
    if sigma is None:
        raise NoMatch(f"rule {pi.rule.index} does not match at {pi.position}")
    return replace_at(t, pi.position, substitute(pi.rule.rhs, sigma))


def step(t: Term, pi: RedexPattern) -> Step:
    return Step(t, pi, rewrite_at(t, pi))


@lru_cache(maxsize=256)
def _rules_by_root(trs: TRS) -> Dict[Tuple[str, int], Tuple[Rule, ...]]:
    index: Dict[Tuple[str, int], List[Rule]] = {}
    for rule in trs.rules:
        index.setdefault((rule.lhs.name, len(rule.lhs.args)), []).append(rule)
    return {k: tuple(v) for k, v in index.items()}


def successors(t: Term, trs: TRS) -> List[Tuple[RedexPattern, Term]]:
    """Every one-step reduct of ``t``, ordered by position then rule index."""
    by_root = _rules_by_root(trs)
    out = []
    for p, s in subterms(t):
        if type(s) is Var:
            continue
        for rule in by_root.get((s.name, len(s.args)), ()):
            sigma = match(rule.lhs, s)
            if sigma is not None:
                out.append((RedexPattern(p, rule), replace_at(t, p, substitute(rule.rhs, sigma))))
    return out


def is_normal_form(t: Term, trs: TRS) -> bool:
    by_root = _rules_by_root(trs)
    for _, s in subterms(t):
        if type(s) is Fun:
            for rule in by_root.get((s.name, len(s.args)), ()):
                if match(rule.lhs, s) is not None:
                    return False
    return True


def apply_parallel(t: Term, patterns: Iterable[RedexPattern]) -> ParallelStep:
    pats = tuple(sorted(patterns, key=lambda pi: (pos_key(pi.position), pi.rule.index)))
    for a, b in combinations(pats, 2):
        if not parallel(a.position, b.position):
            raise NotParallel(f"positions {a.position} and {b.position} are not parallel")
    target = t
    for pi in pats:
        target = rewrite_at(target, pi)
    return ParallelStep(t, pats, target)


def orthogonality(pi1: RedexPattern, pi2: RedexPattern) -> str:
    """Classify two redex patterns as parallel, orthogonal_nested or critical."""
    p1, p2 = pi1.position, pi2.position
    if parallel(p1, p2):
        return "parallel"
    if is_prefix(p2, p1):
        outer, inner_pos = pi2, pos_minus(p1, p2)
    else:
        outer, inner_pos = pi1, pos_minus(p2, p1)
    kinds = positions(outer.rule.lhs)
    if kinds.get(inner_pos) == "function":
        return "critical"
    return "orthogonal_nested"
