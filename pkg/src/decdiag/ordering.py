"""Reduction pairs and the rule-removal loop for relative termination.

Two families are supported: linear polynomial interpretations over the
naturals, compared coefficientwise, and the lexicographic path order over a
quasi-precedence given as integer ranks.  Searches enumerate parameter
vectors in lexicographic order, so the first pair found is also the
lexicographically least one; certificate checking relies on that.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from itertools import product
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .budget import NO_DEADLINE, Deadline
from .terms import Fun, Term, Var, function_symbols, variables
from .trs import TRS, RelativeTRS, Rule


class Rel(str, Enum):
    GT = "GT"
    GE = "GE"
    UNK = "UNK"
    INCOMPARABLE = "UNK"


class UnknownSymbol(KeyError):
    pass


class _Exhausted(Exception):
    pass


class _Budget:
    def __init__(self, nodes: int, deadline: Deadline):
        self.left = nodes
        self.deadline = deadline
        self.used = 0

    def tick(self):
        self.deadline.check()
        self.used += 1
        if self.used > self.left:
            raise _Exhausted()


@dataclass(frozen=True)
class OrderingConfig:
    min_coeff: int = 1
    max_coeff: int = 2
    max_const: int = 3
    use_poly: bool = True
    use_lpo: bool = True
    # search nodes per pair search; a deterministic cut-off keeps results reproducible
    max_nodes: int = 20000


DEFAULT_ORDERING = OrderingConfig()

Constraint = Tuple[Term, Term]


# ------------------------------------------------------------ polynomials

PolyParams = Tuple[Tuple[int, ...], int]
LinPoly = Tuple[int, Dict[str, int]]


def _interpret(t: Term, params: Mapping[str, PolyParams], memo=None) -> LinPoly:
    if type(t) is Var:
        return 0, {t.name: 1}
    if memo is not None and t in memo:
        return memo[t]
    try:
        coeffs, const = params[t.name]
    except KeyError:
        raise UnknownSymbol(t.name) from None
    total = const
    lin: Dict[str, int] = {}
    for c, a in zip(coeffs, t.args):
        k, sub = _interpret(a, params, memo)
        total += c * k
        for x, d in sub.items():
            lin[x] = lin.get(x, 0) + c * d
    out = (total, lin)
    if memo is not None:
        memo[t] = out
    return out


def _poly_rel(ps: LinPoly, pt: LinPoly) -> Rel:
    (cs, ls), (ct, lt) = ps, pt
    if any(ls.get(x, 0) < d for x, d in lt.items()):
        return Rel.UNK
    if cs > ct:
        return Rel.GT
    return Rel.GE if cs == ct else Rel.UNK


@dataclass(frozen=True)
class PolyInterpretation:
    """``[f](x1..xn) = c1*x1 + ... + cn*xn + c0`` for every symbol ``f``."""

    params: Tuple[Tuple[str, PolyParams], ...]
    kind: str = field(default="linear_poly", init=False)

    @classmethod
    def of(cls, mapping: Mapping[str, PolyParams]) -> "PolyInterpretation":
        return cls(tuple(sorted((f, (tuple(c), k)) for f, (c, k) in mapping.items())))

    @property
    def table(self) -> Dict[str, PolyParams]:
        return dict(self.params)

    @property
    def simple(self) -> bool:
        return all(c >= 1 for _, (cs, _) in self.params for c in cs)

    def interpret(self, t: Term) -> LinPoly:
        return _interpret(t, self.table)

    def compare(self, s: Term, t: Term) -> Rel:
        table = self.table
        return _poly_rel(_interpret(s, table), _interpret(t, table))

    def describe(self) -> str:
        parts = []
        for f, (cs, k) in self.params:
            terms = [f"{c}*x{i}" if c != 1 else f"x{i}" for i, c in enumerate(cs, 1) if c]
            if k or not terms:
                terms.append(str(k))
            parts.append(f"[{f}] = " + " + ".join(terms))
        return "; ".join(parts)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "symbols": [{"symbol": f, "coeffs": list(cs), "const": k} for f, (cs, k) in self.params],
        }


def poly_compare(pair: PolyInterpretation, s: Term, t: Term) -> Rel:
    return pair.compare(s, t)


# -------------------------------------------------------------------- LPO

# Kleene three-valued logic: None stands for "not yet determined" while the
# search has only fixed part of the precedence.

def _k_and(values) -> Optional[bool]:
    unknown = False
    for v in values:
        if v is False:
            return False
        if v is None:
            unknown = True
    return None if unknown else True


def _k_or(values) -> Optional[bool]:
    unknown = False
    for v in values:
        if v is True:
            return True
        if v is None:
            unknown = True
    return None if unknown else False


class _Lpo:
    """LPO decision procedure over a (possibly partial) rank assignment.

    Symbols of equal rank are equivalent only when their arities agree;
    otherwise they are incomparable, which keeps the precedence a preorder.
    """

    def __init__(self, ranks: Mapping[str, int], partial: bool = False):
        self.ranks = ranks
        self.partial = partial
        self.memo: Dict[Tuple[int, Term, Term], Optional[bool]] = {}

    def prec(self, f: Fun, g: Fun) -> Tuple[Optional[bool], Optional[bool]]:
        same_arity = len(f.args) == len(g.args)
        if f.name == g.name and same_arity:
            return False, True
        rf, rg = self.ranks.get(f.name), self.ranks.get(g.name)
        if rf is None or rg is None:
            if self.partial:
                return None, (None if same_arity else False)
            return False, False
        return rf > rg, (rf == rg and same_arity)

    def gt(self, s: Term, t: Term) -> Optional[bool]:
        if type(t) is Var:
            return type(s) is Fun and t.name in variables(s)
        if type(s) is Var:
            return False
        key = (0, s, t)
        if key in self.memo:
            return self.memo[key]
        res = self._gt(s, t)
        self.memo[key] = res
        return res

    def _gt(self, s: Fun, t: Fun) -> Optional[bool]:
        sub: Optional[bool] = False
        for si in s.args:
            r = self.ge(si, t)
            if r is True:
                return True
            if r is None:
                sub = None
        pg, pe = self.prec(s, t)
        if pg is False and pe is False:
            return sub
        dominates = _k_and(self.gt(s, tj) for tj in t.args)
        if dominates is False:
            return sub
        by_prec = _k_and((pg, dominates))
        by_lex = False if pe is False else _k_and((pe, dominates, self.lex(s.args, t.args)))
        return _k_or((sub, by_prec, by_lex))

    def lex(self, ss: Sequence[Term], ts: Sequence[Term]) -> Optional[bool]:
        for i, (a, b) in enumerate(zip(ss, ts)):
            e = self.eq(a, b)
            if e is True:
                continue
            g = self.gt(a, b)
            if e is False:
                return g
            rest = self.lex(ss[i + 1:], ts[i + 1:])
            return False if (g is False and rest is False) else None
        return False

    def eq(self, s: Term, t: Term) -> Optional[bool]:
        if type(s) is Var or type(t) is Var:
            return s == t
        if s == t:
            return True
        if len(s.args) != len(t.args):
            return False
        key = (1, s, t)
        if key in self.memo:
            return self.memo[key]
        _, pe = self.prec(s, t)
        res = False if pe is False else _k_and([pe] + [self.eq(a, b) for a, b in zip(s.args, t.args)])
        self.memo[key] = res
        return res

    def ge(self, s: Term, t: Term) -> Optional[bool]:
        e = self.eq(s, t)
        if e is True:
            return True
        return _k_or((e, self.gt(s, t)))


@dataclass(frozen=True)
class LPO:
    """Lexicographic path order; higher rank means bigger in the precedence."""

    ranks: Tuple[Tuple[str, int], ...]
    kind: str = field(default="lpo", init=False)

    @classmethod
    def of(cls, mapping: Mapping[str, int]) -> "LPO":
        return cls(tuple(sorted(mapping.items())))

    @property
    def table(self) -> Dict[str, int]:
        return dict(self.ranks)

    @property
    def simple(self) -> bool:
        return True

    def compare(self, s: Term, t: Term) -> Rel:
        lpo = _Lpo(self.table)
        if lpo.gt(s, t):
            return Rel.GT
        return Rel.GE if lpo.eq(s, t) else Rel.UNK

    def describe(self) -> str:
        groups: Dict[int, List[str]] = {}
        for f, r in self.ranks:
            groups.setdefault(r, []).append(f)
        return " > ".join(" ~ ".join(groups[r]) for r in sorted(groups, reverse=True))

    def to_json(self) -> dict:
        return {"kind": self.kind, "ranks": [{"symbol": f, "rank": r} for f, r in self.ranks]}


def lpo_compare(pair: LPO, s: Term, t: Term) -> Rel:
    return pair.compare(s, t)


ReductionPair = Union[PolyInterpretation, LPO]


def pair_from_json(data: Mapping) -> ReductionPair:
    if data["kind"] == "linear_poly":
        return PolyInterpretation(
            tuple((e["symbol"], (tuple(e["coeffs"]), e["const"])) for e in data["symbols"])
        )
    if data["kind"] == "lpo":
        return LPO(tuple((e["symbol"], e["rank"]) for e in data["ranks"]))
    raise ValueError(f"unknown reduction pair kind {data['kind']!r}")


# ----------------------------------------------------------------- search


@dataclass
class _Problem:
    """All ``ge`` pairs weakly, all ``gt`` pairs strictly, and if ``some_gt``
    is nonempty at least one of those strictly."""

    ge: List[Constraint]
    gt: List[Constraint]
    some_gt: List[Constraint]
    signature: Dict[str, int]

    def all_pairs(self) -> List[Constraint]:
        return self.ge + self.gt + self.some_gt


def _signature(pairs: Iterable[Constraint], extra: Mapping[str, int]) -> Dict[str, int]:
    sig = dict(extra)
    for s, t in pairs:
        sig.update(function_symbols(s))
        sig.update(function_symbols(t))
    return sig


def _constrained(problem: _Problem) -> List[str]:
    syms = set()
    for s, t in problem.all_pairs():
        syms.update(function_symbols(s))
        syms.update(function_symbols(t))
    return sorted(syms)


def _index_by_last(constraints: Sequence[Constraint], order: Sequence[str]):
    """Group constraint indices by every symbol they mention."""
    pos = {f: i for i, f in enumerate(order)}
    by_sym: List[List[int]] = [[] for _ in order]
    for ci, (s, t) in enumerate(constraints):
        for f in set(function_symbols(s)) | set(function_symbols(t)):
            by_sym[pos[f]].append(ci)
    return by_sym


def _poly_choices(arity: int, cfg: OrderingConfig) -> List[PolyParams]:
    coeff_range = range(cfg.min_coeff, cfg.max_coeff + 1)
    return [
        (tuple(cs), k)
        for cs in product(coeff_range, repeat=arity)
        for k in range(cfg.max_const + 1)
    ]


def _search_poly(problem: _Problem, cfg: OrderingConfig, budget: _Budget) -> Optional[PolyInterpretation]:
    order = _constrained(problem)
    sig = problem.signature
    lo_default = {f: ((cfg.min_coeff,) * a, 0) for f, a in sig.items()}
    hi_default = {f: ((cfg.max_coeff,) * a, cfg.max_const) for f, a in sig.items()}
    cons = problem.ge + problem.gt + problem.some_gt
    n_ge, n_gt = len(problem.ge), len(problem.gt)
    by_sym = _index_by_last(cons, order)
    lo, hi = dict(lo_default), dict(hi_default)

    def possible(ci: int) -> Tuple[bool, bool]:
        s, t = cons[ci]
        cs, ls = _interpret(s, hi)
        ct, lt = _interpret(t, lo)
        if any(ls.get(x, 0) < d for x, d in lt.items()):
            return False, False
        return cs >= ct, cs > ct

    def ok(ci: int) -> bool:
        may_ge, may_gt = possible(ci)
        return may_gt if n_ge <= ci < n_ge + n_gt else may_ge

    def some_possible() -> bool:
        if not problem.some_gt:
            return True
        return any(possible(ci)[1] for ci in range(n_ge + n_gt, len(cons)))

    choices = [_poly_choices(sig[f], cfg) for f in order]

    def dfs(i: int) -> bool:
        budget.tick()
        if i == len(order):
            return True
        f = order[i]
        for choice in choices[i]:
            lo[f] = hi[f] = choice
            if all(ok(ci) for ci in by_sym[i]) and some_possible() and dfs(i + 1):
                return True
        lo[f], hi[f] = lo_default[f], hi_default[f]
        return False

    if not dfs(0):
        return None
    return PolyInterpretation.of(lo)


def _search_lpo(problem: _Problem, budget: _Budget) -> Optional[LPO]:
    order = _constrained(problem)
    cons = problem.ge + problem.gt + problem.some_gt
    n_ge, n_gt = len(problem.ge), len(problem.gt)
    by_sym = _index_by_last(cons, order)
    ranks: Dict[str, int] = {}
    m = max(len(order), 1)

    def status(lpo: _Lpo, ci: int) -> Optional[bool]:
        s, t = cons[ci]
        if n_ge <= ci < n_ge + n_gt:
            return lpo.gt(s, t)
        if ci >= n_ge + n_gt:
            return lpo.ge(s, t)
        return lpo.ge(s, t)

    def some_possible(lpo: _Lpo) -> bool:
        if not problem.some_gt:
            return True
        return any(lpo.gt(s, t) is not False for s, t in problem.some_gt)

    def dfs(i: int) -> bool:
        budget.tick()
        if i == len(order):
            return True
        f = order[i]
        for r in range(m):
            ranks[f] = r
            lpo = _Lpo(ranks, partial=True)
            if all(status(lpo, ci) is not False for ci in by_sym[i]) and some_possible(lpo):
                if dfs(i + 1):
                    return True
        del ranks[f]
        return False

    if not dfs(0):
        return None
    full = {f: 0 for f in problem.signature}
    full.update(ranks)
    return LPO.of(full)


def _satisfies(pair: ReductionPair, problem: _Problem) -> bool:
    if any(pair.compare(s, t) == Rel.UNK for s, t in problem.ge + problem.some_gt):
        return False
    if any(pair.compare(s, t) != Rel.GT for s, t in problem.gt):
        return False
    return not problem.some_gt or any(pair.compare(s, t) == Rel.GT for s, t in problem.some_gt)


def _solve(problem: _Problem, cfg: OrderingConfig, deadline: Deadline) -> Optional[ReductionPair]:
    searches = []
    if cfg.use_poly:
        searches.append(lambda budget: _search_poly(problem, cfg, budget))
    if cfg.use_lpo:
        searches.append(lambda budget: _search_lpo(problem, budget))
    for search in searches:
        try:
            pair = search(_Budget(cfg.max_nodes, deadline))
        except _Exhausted:
            continue
        if pair is not None:
            assert _satisfies(pair, problem)
            return pair
    return None


def search_reduction_pair(
    strict_req: Sequence[Constraint],
    weak_req: Sequence[Constraint],
    config: OrderingConfig = DEFAULT_ORDERING,
    signature: Optional[Mapping[str, int]] = None,
    deadline: Deadline = NO_DEADLINE,
) -> Optional[ReductionPair]:
    """First pair (polynomials before LPO) with strict pairs GT and weak pairs GE."""
    sig = _signature(list(strict_req) + list(weak_req), signature or {})
    return _solve(_Problem(list(weak_req), list(strict_req), [], sig), config, deadline)


def search_removal_pair(
    strict: Sequence[Constraint],
    weak: Sequence[Constraint],
    config: OrderingConfig = DEFAULT_ORDERING,
    signature: Optional[Mapping[str, int]] = None,
    deadline: Deadline = NO_DEADLINE,
) -> Optional[ReductionPair]:
    """First pair orienting everything weakly and some strict pair strictly."""
    if not strict:
        return None
    sig = _signature(list(strict) + list(weak), signature or {})
    return _solve(_Problem(list(weak), [], list(strict), sig), config, deadline)


# ------------------------------------------------------ relative termination


@dataclass(frozen=True)
class Stage:
    pair: ReductionPair
    removed_strict: Tuple[Rule, ...]
    removed_weak: Tuple[Rule, ...]

    def to_json(self) -> dict:
        return {
            "pair": self.pair.to_json(),
            "removed_strict": [r.index for r in self.removed_strict],
            "removed_weak": [r.index for r in self.removed_weak],
        }


@dataclass(frozen=True)
class RelTerminationProof:
    stages: Tuple[Stage, ...]
    residual: RelativeTRS

    @property
    def complete(self) -> bool:
        return not self.residual.strict.rules

    def removed_strict(self) -> List[Rule]:
        return [r for st in self.stages for r in st.removed_strict]

    def to_json(self) -> dict:
        return {"stages": [st.to_json() for st in self.stages], "complete": self.complete}


def replay_proof(rel: RelativeTRS, data: Mapping) -> bool:
    """Re-validate a serialized removal proof against ``rel``.

    Every stage must orient all remaining rules weakly and remove exactly
    the strictly oriented ones, at least one of them strict.
    """
    strict = {r.index: r for r in rel.strict.rules}
    weak = {r.index: r for r in rel.weak.rules}
    for st in data["stages"]:
        pair = pair_from_json(st["pair"])
        try:
            gt_s = [i for i, r in strict.items() if _oriented(pair, r) is Rel.GT]
            gt_w = [i for i, r in weak.items() if _oriented(pair, r) is Rel.GT]
            if any(_oriented(pair, r) is Rel.UNK for r in list(strict.values()) + list(weak.values())):
                return False
        except UnknownSymbol:
            return False
        if not gt_s or gt_s != list(st["removed_strict"]) or gt_w != list(st["removed_weak"]):
            return False
        for i in gt_s:
            del strict[i]
        for i in gt_w:
            del weak[i]
    return data["complete"] is (not strict)


def _oriented(pair: "ReductionPair", rule: Rule) -> Rel:
    return pair.compare(rule.lhs, rule.rhs)


def _as_pairs(rules: Iterable[Rule]) -> List[Constraint]:
    return [(r.lhs, r.rhs) for r in rules]


def relative_termination(
    rel: RelativeTRS,
    config: OrderingConfig = DEFAULT_ORDERING,
    signature: Optional[Mapping[str, int]] = None,
    deadline: Deadline = NO_DEADLINE,
) -> RelTerminationProof:
    """Repeatedly remove strictly oriented rules until none are left or the search fails."""
    strict = list(rel.strict.rules)
    weak = list(rel.weak.rules)
    sig = dict(signature or {})
    sig.update(rel.strict.signature)
    sig.update(rel.weak.signature)
    stages: List[Stage] = []
    while strict:
        pair = search_removal_pair(_as_pairs(strict), _as_pairs(weak), config, sig, deadline)
        if pair is None:
            break
        gone_s = tuple(r for r in strict if pair.compare(r.lhs, r.rhs) == Rel.GT)
        gone_w = tuple(r for r in weak if pair.compare(r.lhs, r.rhs) == Rel.GT)
        stages.append(Stage(pair, gone_s, gone_w))
        strict = [r for r in strict if r not in gone_s]
        weak = [r for r in weak if r not in gone_w]
    residual = RelativeTRS(TRS(tuple(strict), rel.strict.extra_symbols), TRS(tuple(weak), rel.weak.extra_symbols))
    return RelTerminationProof(tuple(stages), residual)
