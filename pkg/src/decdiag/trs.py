"""Rewrite rules, rewrite systems, the COPS ``.trs`` format, and the
rule transformations used by the relative-termination based labelings.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .terms import (
    Fun,
    Term,
    Var,
    function_symbols,
    is_linear,
    pos_key,
    show,
    subterm_at,
    var_occurrences,
    var_positions,
    variables,
)

STAR_VAR = "x"


class TRSInputError(ValueError):
    """Malformed input. ``kind`` is one of parse-error, inconsistent-arity,
    variable-lhs, extra-rhs-variable, not-left-linear."""

    def __init__(self, kind: str, message: str, line: int = 0, column: int = 0):
        where = f" at line {line}, column {column}" if line else ""
        super().__init__(f"{kind}: {message}{where}")
        self.kind = kind
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Rule:
    index: int
    lhs: Term
    rhs: Term
    # provenance for derived rules, e.g. (rule index, variable, occurrence)
    origin: Optional[tuple] = None

    def __post_init__(self):
        if isinstance(self.lhs, Var):
            raise TRSInputError("variable-lhs", f"left-hand side of rule {self.index} is a variable")
        extra = set(variables(self.rhs)) - set(variables(self.lhs))
        if extra:
            raise TRSInputError(
                "extra-rhs-variable",
                f"rule {self.index} has right-hand side variables {sorted(extra)} not in the left-hand side",
            )

    @property
    def is_left_linear(self) -> bool:
        return is_linear(self.lhs)

    @property
    def is_linear(self) -> bool:
        return is_linear(self.lhs) and is_linear(self.rhs)

    @property
    def is_duplicating(self) -> bool:
        left = var_occurrences(self.lhs)
        return any(n > left.get(x, 0) for x, n in var_occurrences(self.rhs).items())

    def __str__(self):
        return f"{show(self.lhs)} -> {show(self.rhs)}"


def _signature(rules: Iterable[Rule]) -> Dict[str, int]:
    sig: Dict[str, int] = {}
    for rule in rules:
        for side in (rule.lhs, rule.rhs):
            for name, arity in function_symbols(side).items():
                if sig.setdefault(name, arity) != arity:
                    raise TRSInputError(
                        "inconsistent-arity",
                        f"symbol {name} used with arities {sig[name]} and {arity}",
                    )
    return sig


@dataclass(frozen=True)
class TRS:
    rules: Tuple[Rule, ...]
    extra_symbols: Tuple[Tuple[str, int], ...] = ()
    signature: Dict[str, int] = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        sig = _signature(self.rules)
        for name, arity in self.extra_symbols:
            if sig.setdefault(name, arity) != arity:
                raise TRSInputError("inconsistent-arity", f"symbol {name} used with two arities")
        object.__setattr__(self, "signature", sig)

    def __iter__(self):
        return iter(self.rules)

    def __len__(self):
        return len(self.rules)

    @property
    def linear(self) -> bool:
        return all(r.is_linear for r in self.rules)

    @property
    def left_linear(self) -> bool:
        return all(r.is_left_linear for r in self.rules)

    def rule(self, index: int) -> Rule:
        for r in self.rules:
            if r.index == index:
                return r
        raise KeyError(index)

    def indices(self) -> List[int]:
        return [r.index for r in self.rules]


@dataclass(frozen=True)
class RelativeTRS:
    strict: TRS
    weak: TRS

    @property
    def signature(self) -> Dict[str, int]:
        sig = dict(self.weak.signature)
        sig.update(self.strict.signature)
        return sig


def make_trs(pairs: Sequence[Tuple[Term, Term]]) -> TRS:
    return TRS(tuple(Rule(i, l, r) for i, (l, r) in enumerate(pairs, 1)))


# ------------------------------------------------------------------ parsing


class _Reader:
    def __init__(self, text: str):
        self.text = text
        self.i = 0
        self.line = 1
        self.col = 1

    def _advance(self, n: int = 1):
        for _ in range(n):
            if self.text[self.i] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.i += 1

    def skip_ws(self):
        while self.i < len(self.text) and self.text[self.i].isspace():
            self._advance()

    def error(self, message: str):
        return TRSInputError("parse-error", message, self.line, self.col)

    def peek(self) -> Optional[str]:
        """Next token without consuming it; None at end of input."""
        self.skip_ws()
        if self.i >= len(self.text):
            return None
        c = self.text[self.i]
        if c in "(),":
            return c
        if self.text.startswith("->", self.i):
            return "->"
        j = self.i
        while j < len(self.text) and not self.text[j].isspace() and self.text[j] not in "(),":
            if self.text.startswith("->", j):
                break
            j += 1
        return self.text[self.i:j]

    def next(self) -> str:
        tok = self.peek()
        if tok is None:
            raise self.error("unexpected end of input")
        self._advance(len(tok))
        return tok

    def expect(self, tok: str):
        got = self.peek()
        if got != tok:
            raise self.error(f"expected {tok!r}, found {got!r}")
        self.next()

    def skip_balanced(self):
        """Skip raw text up to and including the ``)`` closing the current group."""
        level = 1
        while self.i < len(self.text):
            c = self.text[self.i]
            self._advance()
            if c == "(":
                level += 1
            elif c == ")":
                level -= 1
                if level == 0:
                    return
        raise self.error("unterminated group")


def _ident(reader: _Reader) -> str:
    tok = reader.peek()
    if tok is None or tok in ("(", ")", ",", "->"):
        raise reader.error(f"expected an identifier, found {tok!r}")
    return reader.next()


def _parse_term(reader: _Reader, var_names: Set[str]) -> Term:
    line, col = reader.line, reader.col
    name = _ident(reader)
    if reader.peek() == "(":
        if name in var_names:
            raise TRSInputError("parse-error", f"variable {name} applied to arguments", line, col)
        reader.next()
        args: List[Term] = []
        if reader.peek() != ")":
            args.append(_parse_term(reader, var_names))
            while reader.peek() == ",":
                reader.next()
                args.append(_parse_term(reader, var_names))
        reader.expect(")")
        return Fun(name, args)
    if name in var_names:
        return Var(name)
    return Fun(name, ())


def parse_term(text: str, var_names: Iterable[str] = ()) -> Term:
    """Parse a prefix term; identifiers in ``var_names`` are variables.

    >>> show(parse_term("f(x, g(a))", {"x"}))
    'f(x,g(a))'
    """
    reader = _Reader(text)
    t = _parse_term(reader, set(var_names))
    if reader.peek() is not None:
        raise reader.error(f"trailing input {reader.peek()!r}")
    return t


def parse_rules(text: str, var_names: Iterable[str] = ()) -> TRS:
    """Parse whitespace-separated ``l -> r`` rules without COPS headers."""
    reader = _Reader(text)
    names = set(var_names)
    pairs = []
    while reader.peek() is not None:
        line, col = reader.line, reader.col
        lhs = _parse_term(reader, names)
        reader.expect("->")
        rhs = _parse_term(reader, names)
        pairs.append((lhs, rhs, line, col))
    return _build(pairs)


def _build(pairs) -> TRS:
    rules = []
    for i, (lhs, rhs, line, col) in enumerate(pairs, 1):
        try:
            rules.append(Rule(i, lhs, rhs))
        except TRSInputError as e:
            raise TRSInputError(e.kind, str(e).split(": ", 1)[1], line, col) from None
    return TRS(tuple(rules))


def parse_cops(text) -> TRS:
    """Parse a COPS ``.trs`` problem (VAR, RULES and COMMENT sections)."""
    if isinstance(text, (bytes, bytearray)):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as e:
            raise TRSInputError("parse-error", f"input is not UTF-8: {e}") from None
    reader = _Reader(text)
    var_names: Set[str] = set()
    pairs = []
    seen_rules = False
    while reader.peek() is not None:
        reader.expect("(")
        section = reader.peek()
        if section == "VAR":
            reader.next()
            while reader.peek() not in (")", None):
                var_names.add(_ident(reader))
            reader.expect(")")
        elif section == "RULES":
            if seen_rules:
                raise reader.error("duplicate RULES section")
            seen_rules = True
            reader.next()
            while reader.peek() not in (")", None):
                line, col = reader.line, reader.col
                lhs = _parse_term(reader, var_names)
                reader.expect("->")
                rhs = _parse_term(reader, var_names)
                pairs.append((lhs, rhs, line, col))
            reader.expect(")")
        elif section == "COMMENT":
            reader.next()
            reader.skip_balanced()
        else:
            raise reader.error(f"unsupported section {section!r}")
    if not seen_rules:
        raise TRSInputError("parse-error", "missing RULES section")
    return _build(pairs)


def format_cops(trs: TRS) -> str:
    names: List[str] = []
    for rule in trs.rules:
        for x in variables(rule.lhs):
            if x not in names:
                names.append(x)
    lines = []
    if names:
        lines.append("(VAR " + " ".join(names) + ")")
    lines.append("(RULES")
    lines.extend(f"  {rule}" for rule in trs.rules)
    lines.append(")")
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------- transformations


def split_duplicating(trs: TRS) -> Tuple[TRS, TRS]:
    dup = tuple(r for r in trs.rules if r.is_duplicating)
    nondup = tuple(r for r in trs.rules if not r.is_duplicating)
    return TRS(dup), TRS(nondup)


def star_symbol(name: str, i: int) -> str:
    return f"{name}_{i}"


def star(t: Term, p) -> Term:
    """The chain of unary symbols f_i along the path to ``p``, ending in a
    fixed variable."""
    result: Term = Var(STAR_VAR)
    path = []
    for i in p:
        if isinstance(t, Var) or not 1 <= i <= len(t.args):
            raise ValueError(f"position {p} not in term")
        path.append(star_symbol(t.name, i))
        t = t.args[i - 1]
    for name in reversed(path):
        result = Fun(name, (result,))
    return result


def star_rules(trs: TRS) -> List[Tuple[Rule, bool]]:
    """All rules of the star transformation paired with a strictness flag.

    Each rule carries ``origin = (rule index, variable, k)`` where ``k`` is
    the 0-based rank of the right-hand side occurrence.
    """
    if not trs.left_linear:
        raise TRSInputError("not-left-linear", "star transformation needs a left-linear TRS")
    out: List[Tuple[Rule, bool]] = []
    n = 0
    for rule in trs.rules:
        lpos = {x: [] for x in variables(rule.lhs)}
        for p in var_positions(rule.lhs):
            lpos[subterm_at(rule.lhs, p).name].append(p)
        rpos: Dict[str, list] = {}
        for p in sorted(var_positions(rule.rhs), key=pos_key):
            rpos.setdefault(subterm_at(rule.rhs, p).name, []).append(p)
        for x, (q,) in lpos.items():
            occ = rpos.get(x, [])
            for k, qk in enumerate(occ):
                n += 1
                star_rule = Rule(n, star(rule.lhs, q), star(rule.rhs, qk), origin=(rule.index, x, k))
                out.append((star_rule, len(occ) > 1))
    return out


def star_transform(trs: TRS, demote: Optional[Dict[Tuple[int, str], int]] = None) -> RelativeTRS:
    """The relative TRS of star rules.

    ``demote`` maps (rule index, variable) of a duplicated variable to the
    occurrence rank whose rule moves from the strict to the weak part; this
    yields the primed variant.
    """
    demote = demote or {}
    strict, weak = [], []
    for rule, is_strict in star_rules(trs):
        idx, x, k = rule.origin
        if is_strict and demote.get((idx, x)) != k:
            strict.append(rule)
        else:
            weak.append(rule)
    return RelativeTRS(TRS(tuple(strict)), TRS(tuple(weak)))


def triangle_transform(trs: TRS) -> RelativeTRS:
    strict = []
    for rule in trs.rules:
        for x, n in var_occurrences(rule.rhs).items():
            if n > 1:
                strict.append(Rule(len(strict) + 1, rule.lhs, Var(x), origin=(rule.index, x)))
    return RelativeTRS(TRS(tuple(strict)), trs)
