"""Labelings of rewrite steps and decreasingness of critical diagrams.

Labels are never materialized.  For a peak ``t <-alpha- s -beta-> u`` every
joining step only records how its label relates to ``alpha`` and to
``beta`` (a :class:`ComparisonPair`); lexicographic products of labelings are
evaluated on these symbols directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from .budget import NO_DEADLINE, Deadline
from .ordering import (
    DEFAULT_ORDERING,
    OrderingConfig,
    ReductionPair,
    Rel,
    RelTerminationProof,
    relative_termination,
    search_reduction_pair,
)
from .overlap import CriticalPeak, JoinSequence
from .rewriting import Step
from .terms import Term, show, subterm_at
from .trs import TRS, RelativeTRS, Rule, star, star_rules, star_symbol, star_transform, triangle_transform

GT, GE, UNK = Rel.GT, Rel.GE, Rel.UNK


@dataclass(frozen=True)
class ComparisonPair:
    alpha: Rel
    beta: Rel

    def __str__(self):
        return f"({self.alpha.value},{self.beta.value})"

    @classmethod
    def parse(cls, text: str) -> "ComparisonPair":
        a, b = text.strip("()").split(",")
        return cls(Rel(a), Rel(b))


def _lex(rels: Iterable[Rel]) -> Rel:
    for r in rels:
        if r is not GE:
            return r
    return GE


def lex_combine(pairs: Sequence[ComparisonPair]) -> ComparisonPair:
    """Lexicographic product, evaluated separately against alpha and beta."""
    if not pairs:
        raise ValueError("lex_combine needs at least one comparison")
    return ComparisonPair(_lex(p.alpha for p in pairs), _lex(p.beta for p in pairs))


def _at_least(r: Rel, bound: Rel) -> bool:
    return r is GT or (bound is GE and r is GE)


def _side_ok(steps: Sequence[ComparisonPair], swap: bool) -> bool:
    # on the right-hand side the roles of alpha and beta are exchanged
    def own(c):
        return c.beta if swap else c.alpha

    def other(c):
        return c.alpha if swap else c.beta

    n = len(steps)
    i = 0
    while i < n and own(steps[i]) is GT:
        i += 1
    # the prefix is taken maximal; a shorter prefix never helps because the
    # tail condition is weaker than the prefix condition
    tail_from = i
    if i < n and _at_least(other(steps[i]), GE):
        tail_from = i + 1
    return all(own(c) is GT or other(c) is GT for c in steps[tail_from:])


def check_decreasing(left: Sequence[ComparisonPair], right: Sequence[ComparisonPair]) -> bool:
    """Whether a join fits the decreasing pattern.

    ``left`` annotates the steps from the alpha-side target, ``right`` those
    from the beta-side target, both in order away from the peak.
    """
    return _side_ok(left, swap=False) and _side_ok(right, swap=True)


# ------------------------------------------------------------------ peaks


@dataclass(frozen=True)
class Peak:
    """``left.target <- source -> right.target``; ``left`` carries alpha."""

    left: Step
    right: Step

    @property
    def source(self) -> Term:
        return self.left.source

    @classmethod
    def of(cls, cp: CriticalPeak) -> "Peak":
        return cls(cp.left_step, cp.right_step)


@dataclass(frozen=True)
class Diagram:
    peak: Peak
    joins: Tuple[JoinSequence, ...]


Annotation = Tuple[Tuple[ComparisonPair, ...], Tuple[ComparisonPair, ...]]


# ------------------------------------------------------- atomic labelings

# LL-labelings are weak LL-labelings; plain L-labelings are neither
L, WEAK_LL, LL = "L", "weak-LL", "LL"


class Labeling:
    """An atomic labeling, seen only through comparisons of steps.

    ``rel(label_step, step, seen)`` relates the label of a peak step to the
    label of a joining step.  ``seen`` is the per-step flag computed by
    :meth:`flags`; only labelings by source terms depend on it.
    """

    name = "labeling"
    klass = WEAK_LL

    def flags(self, source: Term, first: Sequence[Step], first_target: Term, steps: Sequence[Step]) -> List[bool]:
        return [False] * len(steps)

    def rel(self, label_step: Step, step: Step, seen: bool) -> Rel:
        raise NotImplementedError

    def annotate(self, peak: "Peak", join: JoinSequence) -> Annotation:
        return Composite((self,)).annotate(peak, join)

    def to_json(self) -> dict:
        raise NotImplementedError


def _nat_rel(a: int, b: int) -> Rel:
    if a > b:
        return GT
    return GE if a == b else UNK


@dataclass(frozen=True)
class RuleLabeling(Labeling):
    """Label a step by a natural attached to its rule."""

    labels: Tuple[Tuple[int, int], ...]
    name = "rule"
    klass = WEAK_LL

    @classmethod
    def of(cls, mapping: Mapping[int, int]) -> "RuleLabeling":
        return cls(tuple(sorted(mapping.items())))

    def label(self, rule: Rule) -> int:
        return dict(self.labels).get(rule.index, 0)

    def compare(self, peak_step: Step, join_step: Step) -> Rel:
        return _nat_rel(self.label(peak_step.rule), self.label(join_step.rule))

    def rel(self, label_step, step, seen):
        return self.compare(label_step, step)

    def to_json(self):
        return {"kind": "rule", "labels": [v for _, v in self.labels]}


class _SymbolicRule(Labeling):
    """Rule labeling whose comparisons come from a callback on rule indices."""

    def __init__(self, callback):
        self.callback = callback

    def rel(self, label_step, step, seen):
        return self.callback(label_step.rule.index, step.rule.index)


class _Cached(Labeling):
    def __init__(self, inner: Labeling):
        self.inner = inner
        self.klass = inner.klass
        self.memo: Dict = {}
        self.flag_memo: Dict = {}

    def flags(self, source, first, first_target, steps):
        key = (source, tuple(first), first_target, tuple(steps))
        if key not in self.flag_memo:
            self.flag_memo[key] = self.inner.flags(source, first, first_target, steps)
        return self.flag_memo[key]

    def rel(self, label_step, step, seen):
        key = (label_step, step, seen)
        if key not in self.memo:
            self.memo[key] = self.inner.rel(label_step, step, seen)
        return self.memo[key]


@dataclass(frozen=True)
class SourceLabeling(Labeling):
    """Label a step by its source, ordered by a relative TRS ``S/R``.

    ``removed`` holds the ``s -> v`` pairs of ``S`` proved strictly
    decreasing.  A join step from ``v_i`` is strictly below the peak source
    when one of the terms ``v_2 .. v_i`` along the way was reached by such a
    pair, and weakly below otherwise.
    """

    choice: str
    rules: Tuple[Rule, ...]
    removed: FrozenSet[Tuple[Term, Term]]
    proof: Optional[RelTerminationProof]
    name = "source"
    klass = WEAK_LL

    def flags(self, source, first, first_target, steps):
        seen = (source, first_target) in self.removed
        out = []
        for st in steps:
            out.append(seen)
            seen = seen or (source, st.target) in self.removed
        return out

    def rel(self, label_step, step, seen):
        return GT if seen else GE

    def to_json(self):
        return {
            "kind": "source",
            "choice": self.choice,
            "rules": [str(r) for r in self.rules],
            "removed": sorted(f"{show(l)} -> {show(r)}" for l, r in self.removed),
            "proof": self.proof.to_json() if self.proof else None,
        }


@dataclass(frozen=True)
class DuplicatingSourceLabeling(Labeling):
    """Source labeling ordered by rewriting that uses a duplicating rule."""

    dup: FrozenSet[int]
    proof: Optional[RelTerminationProof]
    name = "source-dup"
    klass = LL

    def flags(self, source, first, first_target, steps):
        seen = any(st.rule.index in self.dup for st in first)
        out = []
        for st in steps:
            out.append(seen)
            seen = seen or st.rule.index in self.dup
        return out

    def rel(self, label_step, step, seen):
        return GT if seen else GE

    def to_json(self):
        return {"kind": "source-dup", "duplicating": sorted(self.dup), "proof": self.proof.to_json()}


@dataclass(frozen=True)
class StarLabeling(Labeling):
    """Label a step by the chain of symbols above its redex, see :func:`star`."""

    pair: ReductionPair
    primed: bool
    demoted: Tuple[Tuple[int, str, int], ...] = ()
    name = "star"
    klass = LL

    def rel(self, label_step, step, seen):
        return self.pair.compare(star(label_step.source, label_step.position), star(step.source, step.position))

    def to_json(self):
        return {
            "kind": "star",
            "primed": self.primed,
            "demoted": [list(d) for d in self.demoted],
            "pair": self.pair.to_json(),
        }


@dataclass(frozen=True)
class RedexLabeling(Labeling):
    """Label a step by its contracted redex; must be the leftmost factor."""

    pair: ReductionPair
    name = "redex"
    klass = WEAK_LL

    def rel(self, label_step, step, seen):
        return self.pair.compare(label_step.redex, step.redex)

    def to_json(self):
        return {"kind": "redex", "pair": self.pair.to_json()}


def combine_class(a: str, b: str) -> str:
    """Class of a lexicographic product of two labelings."""
    if L in (a, b):
        return L
    return LL if LL in (a, b) else WEAK_LL


@dataclass(frozen=True)
class Composite:
    """Lexicographic product of atomic labelings, leftmost most significant."""

    parts: Tuple[Labeling, ...]

    @property
    def klass(self) -> str:
        k = WEAK_LL
        for p in self.parts:
            k = combine_class(k, p.klass)
        return k

    def side_flags(self, source, first, first_target, steps) -> List[List[bool]]:
        return [p.flags(source, first, first_target, steps) for p in self.parts]

    def rel(self, label_step: Step, step: Step, seen: Sequence[bool]) -> Rel:
        return _lex(p.rel(label_step, step, f) for p, f in zip(self.parts, seen))

    def side(self, source, first, first_target, steps, label_steps) -> List[List[Rel]]:
        """For every join step, its relation to each of ``label_steps``."""
        flags = self.side_flags(source, first, first_target, steps)
        return [
            [self.rel(ls, st, [f[k] for f in flags]) for ls in label_steps]
            for k, st in enumerate(steps)
        ]

    def annotate(self, peak: "Peak", join: JoinSequence) -> Annotation:
        labels = (peak.left, peak.right)
        out = []
        for first, steps in ((peak.left, join.left_steps), (peak.right, join.right_steps)):
            rows = self.side(peak.source, (first,), first.target, steps, labels)
            out.append(tuple(ComparisonPair(a, b) for a, b in rows))
        return out[0], out[1]

    def first_decreasing(self, diagram: "Diagram") -> Optional[Tuple[int, Annotation]]:
        for i, join in enumerate(diagram.joins):
            ann = self.annotate(diagram.peak, join)
            if check_decreasing(*ann):
                return i, ann
        return None


# --------------------------------------------------------------- builders


def _rules_from_pairs(pairs: Iterable[Tuple[Term, Term]]) -> List[Rule]:
    out, seen = [], set()
    for s, v in pairs:
        if s == v or (s, v) in seen:
            continue
        seen.add((s, v))
        out.append(Rule(len(out) + 1, s, v))
    return out


def source_pairs(choice: str, diagrams: Sequence[Diagram], parallel_peaks=()) -> List[Tuple[Term, Term]]:
    """The step set ``S`` for a source labeling.

    ``CPS'`` and ``PCPS'`` use the nontrivial (parallel) critical pairs, ``CDS``
    every term reached from a peak source inside its diagram.
    """
    pairs: List[Tuple[Term, Term]] = []
    if choice == "CPS'":
        for d in diagrams:
            if d.peak.left.target != d.peak.right.target:
                pairs += [(d.peak.source, d.peak.left.target), (d.peak.source, d.peak.right.target)]
    elif choice == "PCPS'":
        for pp in parallel_peaks:
            if not pp.trivial:
                pairs += [(pp.source, pp.left.target), (pp.source, pp.right_target)]
    elif choice == "CDS":
        for d in diagrams:
            s = d.peak.source
            pairs += [(s, d.peak.left.target), (s, d.peak.right.target)]
            for j in d.joins:
                pairs += [(s, st.target) for st in j.left_steps + j.right_steps]
    else:
        raise ValueError(f"unknown source choice {choice!r}")
    return pairs


def build_source_labeling(
    trs: TRS,
    choice: str,
    diagrams: Sequence[Diagram] = (),
    parallel_peaks=(),
    config: OrderingConfig = DEFAULT_ORDERING,
    deadline: Deadline = NO_DEADLINE,
) -> SourceLabeling:
    rules = _rules_from_pairs(source_pairs(choice, diagrams, parallel_peaks))
    if not rules:
        return SourceLabeling(choice, (), frozenset(), None)
    proof = relative_termination(RelativeTRS(TRS(tuple(rules)), trs), config, deadline=deadline)
    removed = frozenset((r.lhs, r.rhs) for r in proof.removed_strict())
    return SourceLabeling(choice, tuple(rules), removed, proof)


def build_duplicating_source_labeling(
    trs: TRS, config: OrderingConfig = DEFAULT_ORDERING, deadline: Deadline = NO_DEADLINE
) -> Optional[DuplicatingSourceLabeling]:
    """Source labeling for duplicating steps; needs termination of R_d/R_nd."""
    from .trs import split_duplicating

    dup, nondup = split_duplicating(trs)
    proof = relative_termination(RelativeTRS(dup, nondup), config, deadline=deadline)
    if not proof.complete:
        return None
    return DuplicatingSourceLabeling(frozenset(r.index for r in dup.rules), proof)


def star_signature(trs: TRS) -> Dict[str, int]:
    return {star_symbol(f, i): 1 for f, n in trs.signature.items() for i in range(1, n + 1)}


def _constraints(rules: Iterable[Rule]):
    return [(r.lhs, r.rhs) for r in rules]


def build_star_labeling(
    trs: TRS,
    config: OrderingConfig = DEFAULT_ORDERING,
    deadline: Deadline = NO_DEADLINE,
    allow_demotion: bool = True,
) -> Optional[StarLabeling]:
    """Star labeling for a left-linear TRS, using the primed variant if allowed.

    The residual of the rule-removal loop on the plain transformation decides
    which rules to demote; at most one per (rule, variable).  The labeling
    itself needs a single pair orienting the final system.
    """
    sig = star_signature(trs)
    rel = star_transform(trs)
    proof = relative_termination(rel, config, signature=sig, deadline=deadline)
    demote: Dict[Tuple[int, str], int] = {}
    if not proof.complete:
        if not allow_demotion:
            return None
        origins = [r.origin for r in proof.residual.strict.rules]
        keys = [(o[0], o[1]) for o in origins]
        if len(set(keys)) != len(keys):
            return None
        demote = {(i, x): k for i, x, k in origins}
        rel = star_transform(trs, demote)
    pair = search_reduction_pair(
        _constraints(rel.strict.rules), _constraints(rel.weak.rules), config, sig, deadline
    )
    if pair is None:
        return None
    demoted = tuple(sorted((i, x, k) for (i, x), k in demote.items()))
    return StarLabeling(pair, bool(demote), demoted)


def build_redex_labeling(
    trs: TRS, config: OrderingConfig = DEFAULT_ORDERING, deadline: Deadline = NO_DEADLINE
) -> Optional[RedexLabeling]:
    """Redex labeling from one simple pair with R^tri strict and R weak."""
    rel = triangle_transform(trs)
    pair = search_reduction_pair(
        _constraints(rel.strict.rules), _constraints(rel.weak.rules), config, trs.signature, deadline
    )
    if pair is None or not pair.simple:
        return None
    return RedexLabeling(pair)


# ------------------------------------------------ rule labeling synthesis


def _optimistic(peak_rule: int, step_rule: int, assign: Dict[int, int], k: int) -> Rel:
    """Best relation still possible under a partial assignment."""
    a, b = assign.get(peak_rule), assign.get(step_rule)
    if a is not None and b is not None:
        return _nat_rel(a, b)
    if peak_rule == step_rule:
        return GE
    if a is None and b is None:
        return GT
    if a is None:
        return GT if b < k else GE
    return GT if a > 0 else GE


class Obligation:
    """Something a rule labeling must satisfy, tested through a composite."""

    rules: Set[int]

    def holds(self, labeling: Composite) -> bool:
        raise NotImplementedError


class DiagramObligation(Obligation):
    def __init__(self, diagram: Diagram):
        self.diagram = diagram
        peak = diagram.peak
        self.rules = {peak.left.rule.index, peak.right.rule.index}
        for j in diagram.joins:
            self.rules.update(s.rule.index for s in j.left_steps + j.right_steps)

    def holds(self, labeling: Composite) -> bool:
        return labeling.first_decreasing(self.diagram) is not None


def synthesize_rule_labeling(
    obligations: Sequence,
    rule_indices: Sequence[int],
    k: int = 3,
    before: Sequence[Labeling] = (),
    after: Sequence[Labeling] = (),
    extra_constraints: Sequence[Tuple[int, int]] = (),
    deadline: Deadline = NO_DEADLINE,
) -> Optional[RuleLabeling]:
    """Lexicographically least ``i: rules -> {0..k}`` meeting every obligation.

    Obligations are :class:`Diagram` values or other :class:`Obligation`
    objects.  The rule labeling sits between the fixed labelings ``before``
    and ``after`` in the lexicographic product.  ``extra_constraints`` lists
    pairs ``(a, b)`` demanding ``i(a) > i(b)``.  Partial assignments are
    pruned by evaluating the obligations with the most favourable relation
    for every undecided comparison; all checks are monotone in the
    relations, so this never discards a solution.
    """
    obs = [DiagramObligation(o) if isinstance(o, Diagram) else o for o in obligations]
    if any(a == b for a, b in extra_constraints):
        return None
    assign: Dict[int, int] = {}
    symbolic = _SymbolicRule(lambda a, b: _optimistic(a, b, assign, k))
    composite = Composite(
        tuple(_Cached(l) for l in before) + (symbolic,) + tuple(_Cached(l) for l in after)
    )
    involved: Set[int] = set()
    for o in obs:
        involved |= o.rules
    for a, b in extra_constraints:
        involved |= {a, b}
    order = [r for r in sorted(rule_indices) if r in involved]
    watch: Dict[int, List[Obligation]] = {r: [] for r in order}
    for o in obs:
        for r in o.rules:
            if r in watch:
                watch[r].append(o)

    def extra_ok() -> bool:
        return all(
            assign[a] > assign[b]
            for a, b in extra_constraints
            if a in assign and b in assign
        )

    def dfs(i: int) -> bool:
        deadline.check()
        if i == len(order):
            return True
        r = order[i]
        for v in range(k + 1):
            assign[r] = v
            if extra_ok() and all(o.holds(composite) for o in watch[r]) and dfs(i + 1):
                return True
        del assign[r]
        return False

    if not all(o.holds(composite) for o in obs) or not dfs(0):
        return None
    return RuleLabeling.of({r: assign.get(r, 0) for r in rule_indices})
