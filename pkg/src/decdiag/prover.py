"""Criterion selection, verdicts and checkable certificates.

Certificates are plain JSON-compatible dictionaries.  Every part of a
certificate is canonical: the checker re-derives each piece of evidence,
re-validates it independently and then demands that the certificate be
exactly the one that evidence renders to.  A certificate for a TRS is
therefore unique for a given configuration, and any edit invalidates it.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .budget import Deadline, Timeout
from .labeling import (
    Composite,
    Diagram,
    DuplicatingSourceLabeling,
    Labeling,
    Peak,
    RedexLabeling,
    RuleLabeling,
    SourceLabeling,
    StarLabeling,
    build_duplicating_source_labeling,
    build_redex_labeling,
    build_source_labeling,
    build_star_labeling,
    star_signature,
    synthesize_rule_labeling,
)
from .ordering import (
    DEFAULT_ORDERING,
    OrderingConfig,
    Rel,
    pair_from_json,
    relative_termination,
    replay_proof,
)
from .overlap import (
    DEFAULT_JOIN_CAP,
    CriticalPeak,
    JoinSequence,
    ParallelCriticalPeak,
    critical_peaks,
    join_search,
    parallel_critical_peaks,
    reachable,
)
from .parallel import ParallelObligation, check_parallel_decreasing, describe_peak
from .persistence import infer_sorts, is_compatible, pll_constraints, theorem_pl_applicable
from .rewriting import Step, is_normal_form
from .terms import show
from .trs import TRS, RelativeTRS, split_duplicating, star_transform, triangle_transform

CERTIFICATE_VERSION = 1
CRITERIA = ("kb", "linear", "rtd", "rt", "rt_star2", "red", "persist_pl", "persist_pll", "parallel")
REACH_LIMIT = 5000


class MalformedCertificate(ValueError):
    pass


@dataclass(frozen=True)
class ProverConfig:
    max_join: int = 4
    label_bound: int = 3
    join_cap: int = DEFAULT_JOIN_CAP
    ordering: OrderingConfig = DEFAULT_ORDERING
    criteria: Tuple[str, ...] = CRITERIA
    timeout_ms: Optional[int] = None
    format: str = "text"

    def __post_init__(self):
        if min(self.max_join, self.label_bound, self.join_cap) < 0:
            raise ValueError("bounds must be non-negative")
        if not self.criteria:
            raise ValueError("at least one criterion must be enabled")
        unknown = set(self.criteria) - set(CRITERIA)
        if unknown:
            raise ValueError(f"unknown criteria: {', '.join(sorted(unknown))}")
        if self.format not in ("text", "json"):
            raise ValueError(f"unknown format {self.format!r}")

    def without(self, *names: str) -> "ProverConfig":
        return replace(self, criteria=tuple(c for c in self.criteria if c not in names))

    def only(self, *names: str) -> "ProverConfig":
        return replace(self, criteria=tuple(c for c in CRITERIA if c in names))


@dataclass
class Certificate:
    verdict: str
    criterion: Optional[str]
    data: dict
    trace: List[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return self.data

    def to_text(self) -> str:
        return render_text(self)


# ---------------------------------------------------------------- rendering


def _pos(p) -> str:
    return ".".join(map(str, p)) or "e"


def render_step(st: Step) -> str:
    return f"{show(st.source)} -[{st.rule.index}@{_pos(st.position)}]-> {show(st.target)}"


def render_peak(peak: Peak) -> str:
    l, r = peak.left, peak.right
    return (
        f"{show(l.target)} <-[{l.rule.index}@{_pos(l.position)}]- {show(peak.source)}"
        f" -[{r.rule.index}@{_pos(r.position)}]-> {show(r.target)}"
    )


class Analysis:
    """Critical peaks and their joins, computed once per run."""

    def __init__(self, trs: TRS, config: ProverConfig, deadline: Deadline):
        self.trs = trs
        self.config = config
        self.deadline = deadline
        self.peaks: List[CriticalPeak] = critical_peaks(trs)
        self.results = [
            join_search(cp.left, cp.right, trs, config.max_join, config.join_cap, deadline) for cp in self.peaks
        ]
        self.diagrams = [Diagram(Peak.of(cp), r.joins) for cp, r in zip(self.peaks, self.results)]
        self._parallel = None

    @property
    def joinable(self) -> bool:
        return all(r.joinable for r in self.results)

    def parallel(self) -> List[Tuple[ParallelCriticalPeak, Tuple[JoinSequence, ...]]]:
        if self._parallel is None:
            out = []
            for pp in parallel_critical_peaks(self.trs):
                r = join_search(pp.left.target, pp.right_target, self.trs, self.config.max_join,
                                self.config.join_cap, self.deadline)
                out.append((pp, r.joins))
            self._parallel = out
        return self._parallel


def _render_diagrams(an: Analysis, comp: Composite) -> Optional[list]:
    out = []
    for d in an.diagrams:
        found = comp.first_decreasing(d)
        if found is None:
            return None
        idx, (la, ra) = found
        join = d.joins[idx]
        out.append({
            "peak": render_peak(d.peak),
            "join": idx,
            "left": [render_step(s) for s in join.left_steps],
            "right": [render_step(s) for s in join.right_steps],
            "annotation": [[str(c) for c in la], [str(c) for c in ra]],
        })
    return out


def _render_parallel(an: Analysis, comp: Composite) -> Optional[list]:
    out = []
    for pp, joins in an.parallel():
        w = check_parallel_decreasing(pp, joins, comp)
        if w is None:
            return None
        entry = {"peak": describe_peak(pp)}
        entry.update(w.to_json())
        entry["left"] = [render_step(s) for s in w.join.left_steps]
        entry["right"] = [render_step(s) for s in w.join.right_steps]
        out.append(entry)
    return out


def _yes(an: Analysis, criterion: str, comp: Composite, evidence: dict) -> Optional[dict]:
    data = {
        "version": CERTIFICATE_VERSION,
        "verdict": "YES",
        "criterion": criterion,
        "trs": [str(r) for r in an.trs.rules],
        "critical_pairs": len(an.peaks),
        "labeling": [p.to_json() for p in comp.parts],
        "evidence": evidence,
    }
    if criterion != "parallel" or evidence.get("obligations") == "combined":
        diagrams = _render_diagrams(an, comp)
        if diagrams is None:
            return None
        data["diagrams"] = diagrams
    if criterion == "parallel":
        par = _render_parallel(an, comp)
        if par is None:
            return None
        data["parallel_peaks"] = par
    return data


# ----------------------------------------------------------------- criteria

Shape = Tuple[Tuple[Labeling, ...], Tuple[Labeling, ...]]


class _Attempt:
    """Result of one criterion: a composite labeling plus its evidence."""

    def __init__(self, comp: Composite, evidence: dict):
        self.comp = comp
        self.evidence = evidence


def _synth(an: Analysis, obligations, shape: Shape, extra=()) -> Optional[Composite]:
    before, after = shape
    rl = synthesize_rule_labeling(
        obligations, an.trs.indices(), an.config.label_bound, before, after, extra, an.deadline
    )
    if rl is None:
        return None
    return Composite(tuple(before) + (rl,) + tuple(after))


def _first(an: Analysis, shapes: Sequence[Callable[[], Optional[Shape]]], extra=()) -> Optional[Composite]:
    for make in shapes:
        shape = make()
        if shape is None:
            continue
        comp = _synth(an, an.diagrams, shape, extra)
        if comp is not None:
            return comp
    return None


def _source(an: Analysis, choice: str, parallel_peaks=()) -> SourceLabeling:
    return build_source_labeling(
        an.trs, choice, an.diagrams, parallel_peaks, an.config.ordering, an.deadline
    )


def _try_linear(an: Analysis, trace: List[str]) -> Optional[_Attempt]:
    if not an.trs.linear:
        trace.append("linear: skipped, TRS is not linear")
        return None
    cache: Dict[str, SourceLabeling] = {}

    def sn(choice):
        if choice not in cache:
            cache[choice] = _source(an, choice)
        return cache[choice]

    shapes = [
        lambda: ((), ()),
        lambda: ((sn("CPS'"),), ()),
        lambda: ((), (sn("CPS'"),)),
        lambda: ((sn("CDS"),), ()),
        lambda: ((), (sn("CDS"),)),
    ]
    comp = _first(an, shapes)
    return _Attempt(comp, {}) if comp else None


def _try_rtd(an: Analysis, trace: List[str]) -> Optional[_Attempt]:
    dup = build_duplicating_source_labeling(an.trs, an.config.ordering, an.deadline)
    if dup is None:
        trace.append("rtd: relative termination of duplicating over non-duplicating rules not shown")
        return None
    comp = _first(an, [lambda: ((dup,), ())])
    return _Attempt(comp, {}) if comp else None


def _try_star(an: Analysis, trace: List[str], primed: bool) -> Optional[_Attempt]:
    name = "rt_star2" if primed else "rt"
    star = build_star_labeling(an.trs, an.config.ordering, an.deadline, allow_demotion=primed)
    if star is None:
        trace.append(f"{name}: termination of the star transformation not shown")
        return None
    comp = _first(an, [lambda: ((star,), ()), lambda: ((), (star,))])
    return _Attempt(comp, {}) if comp else None


def _try_red(an: Analysis, trace: List[str]) -> Optional[_Attempt]:
    red = build_redex_labeling(an.trs, an.config.ordering, an.deadline)
    if red is None:
        trace.append("red: no simple pair for the collapsed duplicating rules")
        return None
    comp = _first(an, [lambda: ((red,), ())])
    return _Attempt(comp, {}) if comp else None


def _try_pl(an: Analysis, trace: List[str]) -> Optional[_Attempt]:
    S = infer_sorts(an.trs)
    if not theorem_pl_applicable(an.trs, S):
        trace.append("persist_pl: duplicated variables admit nestings")
        return None
    comp = _first(an, [lambda: ((), ()), lambda: ((_source(an, "CPS'"),), ())])
    return _Attempt(comp, {"sorts": S.to_json()}) if comp else None


def _try_pll(an: Analysis, trace: List[str]) -> Optional[_Attempt]:
    S = infer_sorts(an.trs)
    if not is_compatible(an.trs, S):
        trace.append("persist_pll: no compatible sort assignment")
        return None
    cons = pll_constraints(an.trs, S)
    comp = _first(an, [lambda: ((), ())], extra=cons)
    if comp is None:
        return None
    return _Attempt(comp, {"sorts": S.to_json(), "constraints": [list(c) for c in cons]})


def _try_parallel(an: Analysis, trace: List[str]) -> Optional[_Attempt]:
    def shapes():
        yield ()
        yield (_source(an, "PCPS'", [pp for pp, _ in an.parallel()]),)

    for before in shapes():
        # first fix the labeling on ordinary diagrams, only then look at
        # parallel peaks; fall back to solving both together
        comp = _synth(an, an.diagrams, (before, ()))
        if comp is not None and _render_parallel(an, comp) is not None:
            return _Attempt(comp, {"obligations": "combined"})
        par = [ParallelObligation(pp, joins) for pp, joins in an.parallel()]
        comp = _synth(an, list(an.diagrams) + par, (before, ()))
        if comp is not None:
            return _Attempt(comp, {"obligations": "combined"})
        comp = _synth(an, par, (before, ()))
        if comp is not None:
            return _Attempt(comp, {"obligations": "parallel"})
    return None


_LEFT_LINEAR_ONLY = {"rtd", "rt", "rt_star2", "red", "persist_pl", "persist_pll", "parallel"}

_RUNNERS = {
    "linear": _try_linear,
    "rtd": _try_rtd,
    "rt": lambda an, tr: _try_star(an, tr, primed=False),
    "rt_star2": lambda an, tr: _try_star(an, tr, primed=True),
    "red": _try_red,
    "persist_pl": _try_pl,
    "persist_pll": _try_pll,
    "parallel": _try_parallel,
}


# ---------------------------------------------------------------------- NO


def _kb_evidence(an: Analysis) -> Optional[dict]:
    """Non-confluence of a terminating TRS from an unjoinable critical pair."""
    trs = an.trs
    proof = relative_termination(RelativeTRS(trs, TRS(())), an.config.ordering, deadline=an.deadline)
    if not proof.complete:
        return None
    for cp, res in zip(an.peaks, an.results):
        if res.joinable:
            continue
        left = reachable(cp.left, trs, REACH_LIMIT, an.deadline)
        right = reachable(cp.right, trs, REACH_LIMIT, an.deadline)
        if left is None or right is None or left & right:
            continue
        nfs = []
        for reach in (left, right):
            nfs.append(min((show(t) for t in reach if is_normal_form(t, trs)), key=lambda s: (len(s), s)))
        return {
            "peak": render_peak(Peak.of(cp)),
            "normal_forms": nfs,
            "reachable": [len(left), len(right)],
            "termination": proof.to_json(),
        }
    return None


def _no(an: Analysis, evidence: dict) -> dict:
    return {
        "version": CERTIFICATE_VERSION,
        "verdict": "NO",
        "criterion": "kb",
        "trs": [str(r) for r in an.trs.rules],
        "critical_pairs": len(an.peaks),
        "evidence": evidence,
    }


def _maybe(trs: TRS, trace: List[str]) -> dict:
    return {
        "version": CERTIFICATE_VERSION,
        "verdict": "MAYBE",
        "criterion": None,
        "trs": [str(r) for r in trs.rules],
        "trace": list(trace),
    }


# ------------------------------------------------------------------- prove


def prove(trs: TRS, config: ProverConfig = ProverConfig()) -> Certificate:
    """Try the enabled criteria in a fixed order; the first success wins."""
    trace: List[str] = []
    seconds = None if config.timeout_ms is None else config.timeout_ms / 1000
    deadline = Deadline(seconds)
    try:
        an = Analysis(trs, config, deadline)
        trace.append(f"{len(an.peaks)} critical pairs")
        if not an.joinable:
            trace.append(f"some critical pair is not joinable within {config.max_join} steps")
            if "kb" in config.criteria:
                ev = _kb_evidence(an)
                if ev is not None:
                    return Certificate("NO", "kb", _no(an, ev), trace)
                trace.append("kb: termination or distinct normal forms not shown")
            return Certificate("MAYBE", None, _maybe(trs, trace), trace)
        for name in CRITERIA[1:]:
            if name not in config.criteria:
                continue
            if name in _LEFT_LINEAR_ONLY and not trs.left_linear:
                trace.append(f"{name}: skipped, TRS is not left-linear")
                continue
            before = len(trace)
            attempt = _RUNNERS[name](an, trace)
            if attempt is None:
                if len(trace) == before:
                    trace.append(f"{name}: no decreasing labeling found")
                continue
            data = _yes(an, name, attempt.comp, attempt.evidence)
            if data is None:
                trace.append(f"{name}: labeling does not render")
                continue
            trace.append(f"{name}: success")
            return Certificate("YES", name, data, trace)
    except Timeout:
        trace.append("timeout")
    return Certificate("MAYBE", None, _maybe(trs, trace), trace)


# ------------------------------------------------------------------ checker

_SHAPES = {
    "linear": [("rule",), ("source:CPS'", "rule"), ("rule", "source:CPS'"), ("source:CDS", "rule"), ("rule", "source:CDS")],
    "rtd": [("source-dup", "rule")],
    "rt": [("star", "rule"), ("rule", "star")],
    "rt_star2": [("star", "rule"), ("rule", "star")],
    "red": [("redex", "rule")],
    "persist_pl": [("rule",), ("source:CPS'", "rule")],
    "persist_pll": [("rule",)],
    "parallel": [("rule",), ("source:PCPS'", "rule")],
}


def _shape_of(parts: Sequence[dict]) -> Tuple[str, ...]:
    return tuple(f"source:{p['choice']}" if p["kind"] == "source" else p["kind"] for p in parts)


def _orients(pair, strict, weak) -> bool:
    return all(pair.compare(r.lhs, r.rhs) is Rel.GT for r in strict) and all(
        pair.compare(r.lhs, r.rhs) in (Rel.GT, Rel.GE) for r in weak
    )


def _rebuild(an: Analysis, criterion: str, data: dict) -> Optional[Labeling]:
    """Re-derive a fixed labeling and validate its evidence independently."""
    trs, cfg = an.trs, an.config.ordering
    kind = data["kind"]
    if kind == "source":
        pps = [pp for pp, _ in an.parallel()] if data["choice"] == "PCPS'" else ()
        lab = _source(an, data["choice"], pps)
        if lab.proof is not None and not replay_proof(RelativeTRS(TRS(lab.rules), trs), data["proof"]):
            return None
    elif kind == "source-dup":
        lab = build_duplicating_source_labeling(trs, cfg)
        dup, nondup = split_duplicating(trs)
        if lab is None or not replay_proof(RelativeTRS(dup, nondup), data["proof"]):
            return None
        if not data["proof"]["complete"]:
            return None
    elif kind == "star":
        lab = build_star_labeling(trs, cfg, allow_demotion=criterion == "rt_star2")
        pair = pair_from_json(data["pair"])
        demote = {(i, x): k for i, x, k in data["demoted"]}
        rel = star_transform(trs, demote)
        if lab is None or not _orients(pair, rel.strict.rules, rel.weak.rules):
            return None
    elif kind == "redex":
        lab = build_redex_labeling(trs, cfg)
        pair = pair_from_json(data["pair"])
        rel = triangle_transform(trs)
        if lab is None or not pair.simple or not _orients(pair, rel.strict.rules, rel.weak.rules):
            return None
    else:
        raise MalformedCertificate(f"unexpected labeling kind {kind!r}")
    return lab if lab.to_json() == data else None


def _obligations(an: Analysis, criterion: str, evidence: dict) -> list:
    if criterion != "parallel":
        return list(an.diagrams)
    par = [ParallelObligation(pp, joins) for pp, joins in an.parallel()]
    return list(an.diagrams) + par if evidence.get("obligations") == "combined" else par


def _locally_minimal(parts, slot: int, rl: RuleLabeling, obligations, extra) -> bool:
    labels = dict(rl.labels)
    for r, v in labels.items():
        if v == 0:
            continue
        lowered = RuleLabeling.of({**labels, r: v - 1})
        comp = Composite(tuple(parts[:slot]) + (lowered,) + tuple(parts[slot + 1:]))
        if all(lowered.label(an_rule) > lowered.label(b) for an_rule, b in extra) and all(
            o.holds(comp) if hasattr(o, "holds") else comp.first_decreasing(o) is not None for o in obligations
        ):
            return False
    return True


def _check_yes(an: Analysis, cert: dict) -> bool:
    trs = an.trs
    criterion = cert["criterion"]
    if criterion not in _SHAPES:
        return False
    if criterion in _LEFT_LINEAR_ONLY and not trs.left_linear:
        return False
    if criterion == "linear" and not trs.linear:
        return False
    parts_json = cert["labeling"]
    if _shape_of(parts_json) not in _SHAPES[criterion]:
        return False
    evidence = cert["evidence"]
    extra: List[Tuple[int, int]] = []
    if criterion in ("persist_pl", "persist_pll"):
        S = infer_sorts(trs)
        if evidence.get("sorts") != S.to_json() or not is_compatible(trs, S):
            return False
        if criterion == "persist_pl" and not theorem_pl_applicable(trs, S):
            return False
        if criterion == "persist_pll":
            extra = [tuple(c) for c in evidence["constraints"]]
            if extra != pll_constraints(trs, S):
                return False
    parts: List[Labeling] = []
    slot = -1
    for i, pj in enumerate(parts_json):
        if pj["kind"] == "rule":
            labels = pj["labels"]
            if len(labels) != len(trs.rules) or any(type(v) is not int or v < 0 for v in labels):
                return False
            if max(labels, default=0) > an.config.label_bound:
                return False
            rl = RuleLabeling.of(dict(zip(trs.indices(), labels)))
            parts.append(rl)
            slot = i
        else:
            lab = _rebuild(an, criterion, pj)
            if lab is None:
                return False
            parts.append(lab)
    rl = parts[slot]
    if not all(rl.label(trs.rule(a)) > rl.label(trs.rule(b)) for a, b in extra):
        return False
    comp = Composite(tuple(parts))
    if _yes(an, criterion, comp, evidence) != cert:
        return False
    obligations = _obligations(an, criterion, evidence)
    extra_rules = [(trs.rule(a), trs.rule(b)) for a, b in extra]
    return _locally_minimal(parts, slot, rl, obligations, extra_rules)


def _check_no(an: Analysis, cert: dict) -> bool:
    ev = cert["evidence"]
    if not replay_proof(RelativeTRS(an.trs, TRS(())), ev["termination"]) or not ev["termination"]["complete"]:
        return False
    expected = _kb_evidence(an)
    return expected is not None and _no(an, expected) == cert


def check_certificate(trs: TRS, cert, config: ProverConfig = ProverConfig()) -> bool:
    """Replay a certificate for ``trs``; False on any mismatch or malformation."""
    if isinstance(cert, Certificate):
        cert = cert.to_json()
    try:
        if not isinstance(cert, dict) or cert.get("version") != CERTIFICATE_VERSION:
            return False
        if cert["trs"] != [str(r) for r in trs.rules]:
            return False
        verdict = cert["verdict"]
        if verdict == "MAYBE":
            return cert["criterion"] is None and set(cert) == {"version", "verdict", "criterion", "trs", "trace"}
        an = Analysis(trs, replace(config, timeout_ms=None), Deadline(None))
        if cert["critical_pairs"] != len(an.peaks):
            return False
        if verdict == "NO":
            return cert["criterion"] == "kb" and _check_no(an, cert)
        if verdict == "YES":
            return an.joinable and _check_yes(an, cert)
        return False
    except (MalformedCertificate, KeyError, TypeError, ValueError, AttributeError, IndexError):
        return False


# --------------------------------------------------------------------- text


def render_text(cert: Certificate) -> str:
    data = cert.data
    lines = [cert.verdict]
    if cert.verdict == "MAYBE":
        lines += [f"  {t}" for t in cert.trace]
        return "\n".join(lines) + "\n"
    lines.append(f"criterion: {cert.criterion}")
    lines.append(f"critical pairs: {data['critical_pairs']}")
    if cert.verdict == "NO":
        ev = data["evidence"]
        lines.append(f"peak: {ev['peak']}")
        lines.append(f"distinct normal forms: {ev['normal_forms'][0]}  /  {ev['normal_forms'][1]}")
        return "\n".join(lines) + "\n"
    for part in data["labeling"]:
        lines.append(f"labeling: {_describe_part(part)}")
    for key, value in data["evidence"].items():
        lines.append(f"{key}: {value}")
    for d in data.get("diagrams", []):
        lines.append(f"peak {d['peak']}")
        for side, steps, ann in (("t", d["left"], d["annotation"][0]), ("u", d["right"], d["annotation"][1])):
            for st, c in zip(steps, ann):
                lines.append(f"    {side}: {st}  {c}")
    for p in data.get("parallel_peaks", []):
        lines.append(f"parallel peak {p['peak']}  splits {p['left_split']} {p['right_split']}")
    return "\n".join(lines) + "\n"


def _describe_part(part: dict) -> str:
    kind = part["kind"]
    if kind == "rule":
        return "rule " + " ".join(f"{i}:{v}" for i, v in enumerate(part["labels"], 1))
    if kind in ("star", "redex"):
        return f"{kind} {pair_from_json(part['pair']).describe()}"
    if kind == "source":
        return f"source {part['choice']} ({len(part['removed'])} of {len(part['rules'])} steps strict)"
    return f"source-dup on rules {part['duplicating']}"
