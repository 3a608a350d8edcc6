"""Label sets of parallel steps and decreasing joins of parallel critical peaks.

A parallel step is labeled by the set of labels of its single steps, all
taken from the common source.  Sets are compared in the Hoare preorder.
Labels stay symbolic: a label is represented by the single step carrying it
together with the positional flags of its labeling.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Iterator, List, Optional, Sequence, Set, Tuple

from .labeling import LL, WEAK_LL, Composite, Labeling, Obligation
from .ordering import Rel
from .overlap import JoinSequence, ParallelCriticalPeak
from .rewriting import ParallelStep, Step, rewrite_at
from .terms import Pos, Term, parallel, show, subterm_at, variables

GT, GE, UNK = Rel.GT, Rel.GE, Rel.UNK


class NotWeakLL(ValueError):
    kind = "labeling-not-weak-LL"


def _natural(a, b) -> Rel:
    if a > b:
        return GT
    return GE if a == b else UNK


def hoare_ge(gamma: Sequence, delta: Sequence, rel: Callable = _natural) -> bool:
    """Every element of ``delta`` is weakly below some element of ``gamma``."""
    return all(any(rel(a, b) in (GT, GE) for a in gamma) for b in delta)


def hoare_gt(gamma: Sequence, delta: Sequence, rel: Callable = _natural) -> bool:
    """``gamma`` is nonempty and strictly dominates every element of ``delta``."""
    return bool(gamma) and all(any(rel(a, b) is GT for a in gamma) for b in delta)


def _as_composite(labeling) -> Composite:
    comp = labeling if isinstance(labeling, Composite) else Composite((labeling,))
    if any(p.klass not in (WEAK_LL, LL) for p in comp.parts):
        raise NotWeakLL("parallel steps need a weak LL-labeling")
    return comp


@dataclass(frozen=True)
class LabelHandle:
    """The label of ``step``; ``seen`` carries the positional flag per factor."""

    step: Step
    seen: Tuple[bool, ...]


def label_parallel(labeling, pstep: ParallelStep, seen: Optional[Sequence[bool]] = None) -> List[LabelHandle]:
    """The label set of a parallel step, with equal labels collapsed."""
    comp = _as_composite(labeling)
    flags = tuple(seen) if seen is not None else (False,) * len(comp.parts)
    out: List[LabelHandle] = []
    for st in pstep.single_steps():
        h = LabelHandle(st, flags)
        same = lambda o: comp.rel(o.step, h.step, flags) is GE and comp.rel(h.step, o.step, flags) is GE
        if not any(same(o) for o in out):
            out.append(h)
    return out


@dataclass(frozen=True)
class SideSplit:
    """``prefix`` single steps, then steps ``prefix..block_end`` as one parallel step."""

    prefix: int
    block_end: int

    def to_json(self):
        return [self.prefix, self.block_end]


@dataclass(frozen=True)
class ParallelWitness:
    join_index: int
    join: JoinSequence
    left: SideSplit
    right: SideSplit

    @property
    def q_positions(self) -> Tuple[Pos, ...]:
        steps = self.join.right_steps[self.right.prefix : self.right.block_end]
        return tuple(st.position for st in steps)

    @property
    def v(self) -> Term:
        steps = self.join.right_steps
        return steps[self.right.block_end - 1].target if self.right.block_end else _right_start(self)

    def to_json(self) -> dict:
        return {
            "join": self.join_index,
            "left_split": self.left.to_json(),
            "right_split": self.right.to_json(),
            "Q": [list(q) for q in self.q_positions],
        }


def _right_start(w: ParallelWitness) -> Term:
    steps = w.join.right_steps
    return steps[0].source if steps else w.join.meet


def _pairwise_parallel(steps: Sequence[Step]) -> bool:
    return all(parallel(a.position, b.position) for a, b in combinations(steps, 2))


def _resourced(block: Sequence[Step]) -> List[Step]:
    w = block[0].source
    return [Step(w, st.pattern, rewrite_at(w, st.pattern)) for st in block]


class _Side:
    """Relations of one joining side against the peak labels Gamma and Delta."""

    def __init__(self, comp: Composite, source, first, first_target, steps, gamma, delta):
        self.comp = comp
        self.steps = tuple(steps)
        self.labels = list(gamma) + list(delta)
        self.n_gamma = len(gamma)
        self.flags = comp.side_flags(source, first, first_target, self.steps)
        self.rows = [self._row(st, k) for k, st in enumerate(self.steps)]

    def _row(self, st: Step, k: int) -> List[Rel]:
        seen = [f[k] for f in self.flags]
        return [self.comp.rel(ls, st, seen) for ls in self.labels]

    def below_gamma(self, row) -> bool:
        return any(r is GT for r in row[: self.n_gamma])

    def below_delta(self, row) -> bool:
        return any(r is GT for r in row[self.n_gamma :])

    def below_all(self, row) -> bool:
        return any(r is GT for r in row)

    def block_rows(self, i: int, j: int) -> Optional[List[List[Rel]]]:
        if i == j:
            return []
        block = self.steps[i:j]
        if not _pairwise_parallel(block):
            return None
        return [self._row(st, i) for st in _resourced(block)]


def _splits(n: int) -> Iterator[Tuple[int, int]]:
    # longest block ending as late as possible first
    for j in range(n, -1, -1):
        for i in range(0, j + 1):
            yield i, j


def _left_split(side: _Side) -> Optional[SideSplit]:
    n = len(side.steps)
    for i, j in _splits(n):
        if not all(side.below_gamma(side.rows[k]) for k in range(i)):
            continue
        if not all(side.below_all(side.rows[k]) for k in range(j, n)):
            continue
        rows = side.block_rows(i, j)
        if rows is None or not all(any(r in (GT, GE) for r in row[side.n_gamma :]) for row in rows):
            continue
        return SideSplit(i, j)
    return None


def _right_split(side: _Side, allowed: Set[str], start: Term) -> Optional[SideSplit]:
    n = len(side.steps)
    for i, j in _splits(n):
        if not all(side.below_delta(side.rows[k]) for k in range(i)):
            continue
        if not all(side.below_all(side.rows[k]) for k in range(j, n)):
            continue
        rows = side.block_rows(i, j)
        if rows is None or not all(any(r in (GT, GE) for r in row[: side.n_gamma]) for row in rows):
            continue
        v = side.steps[j - 1].target if j else start
        if not _variables_ok(v, [st.position for st in side.steps[i:j]], allowed):
            continue
        return SideSplit(i, j)
    return None


def _variables_ok(v: Term, qs: Sequence[Pos], allowed: Set[str]) -> bool:
    return all(set(variables(subterm_at(v, q))) <= allowed for q in qs)


def peak_variables(peak: ParallelCriticalPeak) -> Set[str]:
    """``Var(s|_P)``: variables below the positions of the parallel step."""
    out: Set[str] = set()
    for p in peak.positions:
        out |= set(variables(subterm_at(peak.source, p)))
    return out


def check_parallel_decreasing(
    peak: ParallelCriticalPeak, joins: Sequence[JoinSequence], labeling
) -> Optional[ParallelWitness]:
    """First join (in order) with a decreasing decomposition, or None.

    From ``t``: steps below Gamma, one parallel step weakly below Delta, steps
    below Gamma or Delta.  From ``u``: steps below Delta, one parallel step at
    ``Q`` weakly below Gamma reaching ``v`` with ``Var(v|_Q)`` inside
    ``Var(s|_P)``, then steps below Gamma or Delta.
    """
    comp = _as_composite(labeling)
    gamma = peak.left.single_steps()
    delta = [peak.right_step]
    allowed = peak_variables(peak)
    for idx, join in enumerate(joins):
        left = _Side(comp, peak.source, gamma, peak.left.target, join.left_steps, gamma, delta)
        lsplit = _left_split(left)
        if lsplit is None:
            continue
        right = _Side(comp, peak.source, delta, peak.right_target, join.right_steps, gamma, delta)
        start = join.right_steps[0].source if join.right_steps else join.meet
        rsplit = _right_split(right, allowed, start)
        if rsplit is None:
            continue
        return ParallelWitness(idx, join, lsplit, rsplit)
    return None


class ParallelObligation(Obligation):
    """A parallel critical peak that must close decreasingly; for synthesis."""

    def __init__(self, peak: ParallelCriticalPeak, joins: Sequence[JoinSequence]):
        self.peak = peak
        self.joins = tuple(joins)
        self.rules = {st.rule.index for st in peak.left.single_steps()} | {peak.right.rule.index}
        for j in self.joins:
            self.rules.update(st.rule.index for st in j.left_steps + j.right_steps)

    def holds(self, labeling: Composite) -> bool:
        return check_parallel_decreasing(self.peak, self.joins, labeling) is not None


def describe_peak(peak: ParallelCriticalPeak) -> str:
    rules = ",".join(str(pi.rule.index) for pi in peak.left.patterns)
    ps = ",".join(".".join(map(str, p)) or "e" for p in peak.positions)
    return (
        f"{show(peak.left.target)} <={{{ps}}}= {show(peak.source)} "
        f"-> {show(peak.right_target)}  [rules {rules} | {peak.right.rule.index}]"
    )
