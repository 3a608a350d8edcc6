"""First-order terms, positions, substitutions, matching and unification.

Terms are immutable. ``Var`` and ``Fun`` compare structurally and cache
their hash, so they can be used freely as dict keys and set members.
Positions are tuples of 1-based argument indices; ``()`` is the root.
"""

from __future__ import annotations

from typing import Dict, Iterator, List, Mapping, Optional, Tuple, Union

Pos = Tuple[int, ...]
ROOT: Pos = ()


class InvalidPosition(ValueError):
    """Raised when a position does not address a subterm."""


class Var:
    __slots__ = ("name", "_hash")

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "_hash", hash(("var", name)))

    def __setattr__(self, key, value):
        raise AttributeError("terms are immutable")

    def __eq__(self, other):
        return self is other or (type(other) is Var and other.name == self.name)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Var({self.name!r})"

    def __str__(self):
        return self.name

    def __reduce__(self):
        return (Var, (self.name,))


class Fun:
    __slots__ = ("name", "args", "_hash", "_size")

    def __init__(self, name: str, args=()):
        args = tuple(args)
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "args", args)
        object.__setattr__(self, "_hash", hash((name, args)))
        object.__setattr__(self, "_size", 1 + sum(size(a) for a in args))

    def __setattr__(self, key, value):
        raise AttributeError("terms are immutable")

    def __eq__(self, other):
        if self is other:
            return True
        return (
            type(other) is Fun
            and self._hash == other._hash
            and self.name == other.name
            and self.args == other.args
        )

    def __hash__(self):
        return self._hash

    @property
    def arity(self) -> int:
        return len(self.args)

    def __repr__(self):
        return f"Fun({self.name!r}, {list(self.args)!r})"

    def __str__(self):
        return show(self)

    def __reduce__(self):
        return (Fun, (self.name, self.args))


Term = Union[Var, Fun]
Subst = Dict[str, Term]


def show(t: Term) -> str:
    """Prefix notation, ``f(x,a)``; constants print without parentheses."""
    if isinstance(t, Var):
        return t.name
    if not t.args:
        return t.name
    return t.name + "(" + ",".join(show(a) for a in t.args) + ")"


def is_var(t: Term) -> bool:
    return type(t) is Var


def size(t: Term) -> int:
    return 1 if type(t) is Var else t._size


def depth(t: Term) -> int:
    if type(t) is Var or not t.args:
        return 0
    return 1 + max(depth(a) for a in t.args)


# ---------------------------------------------------------------- positions


def pos_key(p: Pos):
    """Length-lexicographic sort key used wherever positions are ordered."""
    return (len(p), p)


def _walk(t: Term, prefix: Pos) -> Iterator[Tuple[Pos, Term]]:
    yield prefix, t
    if type(t) is Fun:
        for i, a in enumerate(t.args, 1):
            yield from _walk(a, prefix + (i,))


def subterms(t: Term) -> List[Tuple[Pos, Term]]:
    """All (position, subterm) pairs in length-lexicographic position order."""
    return sorted(_walk(t, ROOT), key=lambda pt: pos_key(pt[0]))


def positions(t: Term) -> Dict[Pos, str]:
    """Map every position of ``t`` to ``"function"`` or ``"variable"``.

    >>> positions(Fun("f", [Var("x"), Var("x")]))
    {(): 'function', (1,): 'variable', (2,): 'variable'}
    """
    return {
        p: ("variable" if type(s) is Var else "function") for p, s in subterms(t)
    }


def fun_positions(t: Term) -> List[Pos]:
    return [p for p, s in subterms(t) if type(s) is Fun]


def var_positions(t: Term) -> List[Pos]:
    return [p for p, s in subterms(t) if type(s) is Var]


def subterm_at(t: Term, p: Pos) -> Term:
    for i in p:
        if type(t) is Var or not 1 <= i <= len(t.args):
            raise InvalidPosition(f"position {p} not in term {show(t)}")
        t = t.args[i - 1]
    return t


def replace_at(s: Term, p: Pos, t: Term) -> Term:
    if not p:
        return t
    i = p[0]
    if type(s) is Var or not 1 <= i <= len(s.args):
        raise InvalidPosition(f"position {p} not in term {show(s)}")
    args = list(s.args)
    args[i - 1] = replace_at(args[i - 1], p[1:], t)
    return Fun(s.name, args)


def is_prefix(p: Pos, q: Pos) -> bool:
    """p <= q: p is above or equal to q."""
    return len(p) <= len(q) and q[: len(p)] == p


def is_strict_prefix(p: Pos, q: Pos) -> bool:
    return len(p) < len(q) and q[: len(p)] == p


def parallel(p: Pos, q: Pos) -> bool:
    return not is_prefix(p, q) and not is_prefix(q, p)


def pos_minus(q: Pos, p: Pos) -> Pos:
    """q \\ p, defined when p <= q."""
    if not is_prefix(p, q):
        raise InvalidPosition(f"{p} is not a prefix of {q}")
    return q[len(p):]


# ---------------------------------------------------------------- variables


def variables(t: Term) -> List[str]:
    """Variable names in order of first occurrence."""
    seen: Dict[str, None] = {}
    stack = [t]
    while stack:
        s = stack.pop()
        if type(s) is Var:
            seen.setdefault(s.name)
        else:
            stack.extend(reversed(s.args))
    return list(seen)


def var_count(t: Term, x: str) -> int:
    if type(t) is Var:
        return int(t.name == x)
    return sum(var_count(a, x) for a in t.args)


def var_occurrences(t: Term) -> Dict[str, int]:
    counts: Dict[str, int] = {}
    for _, s in _walk(t, ROOT):
        if type(s) is Var:
            counts[s.name] = counts.get(s.name, 0) + 1
    return counts


def is_linear(t: Term) -> bool:
    return all(n == 1 for n in var_occurrences(t).values())


def is_ground(t: Term) -> bool:
    return not variables(t)


def function_symbols(t: Term) -> Dict[str, int]:
    out: Dict[str, int] = {}
    for _, s in _walk(t, ROOT):
        if type(s) is Fun:
            out.setdefault(s.name, len(s.args))
    return out


# ------------------------------------------------------------ substitutions


def substitute(t: Term, sigma: Mapping[str, Term]) -> Term:
    if type(t) is Var:
        return sigma.get(t.name, t)
    if not t.args:
        return t
    return Fun(t.name, [substitute(a, sigma) for a in t.args])


def compose(sigma: Mapping[str, Term], tau: Mapping[str, Term]) -> Subst:
    """The substitution x -> (x sigma) tau."""
    out = {x: substitute(s, tau) for x, s in sigma.items()}
    for x, s in tau.items():
        out.setdefault(x, s)
    return {x: s for x, s in out.items() if s != Var(x)}


def rename(t: Term, mapping: Mapping[str, str]) -> Term:
    return substitute(t, {x: Var(y) for x, y in mapping.items()})


def match(pattern: Term, subject: Term) -> Optional[Subst]:
    """A substitution sigma with pattern sigma = subject, or None.

    >>> match(Fun("f", [Var("x"), Var("x")]), Fun("f", [Fun("a"), Fun("b")])) is None
    True
    """
    sigma: Subst = {}
    stack = [(pattern, subject)]
    while stack:
        p, s = stack.pop()
        if type(p) is Var:
            bound = sigma.get(p.name)
            if bound is None:
                sigma[p.name] = s
            elif bound != s:
                return None
        elif type(s) is Var or p.name != s.name or len(p.args) != len(s.args):
            return None
        else:
            stack.extend(zip(p.args, s.args))
    return sigma


def _occurs(x: str, t: Term, sigma: Subst) -> bool:
    stack = [t]
    while stack:
        s = stack.pop()
        if type(s) is Var:
            if s.name == x:
                return True
            if s.name in sigma:
                stack.append(sigma[s.name])
        else:
            stack.extend(s.args)
    return False


def _resolve(t: Term, sigma: Subst) -> Term:
    while type(t) is Var and t.name in sigma:
        t = sigma[t.name]
    return t


def unify_all(pairs) -> Optional[Subst]:
    """Most general unifier of a list of equations, idempotent, or None.

    Variable-variable equations bind the left-hand variable, which lets
    callers decide whose names survive.
    """
    sigma: Subst = {}
    stack = list(reversed(list(pairs)))
    while stack:
        s, t = stack.pop()
        s = _resolve(s, sigma)
        t = _resolve(t, sigma)
        if s == t:
            continue
        if type(s) is Var:
            if _occurs(s.name, t, sigma):
                return None
            sigma[s.name] = t
        elif type(t) is Var:
            if _occurs(t.name, s, sigma):
                return None
            sigma[t.name] = s
        elif s.name != t.name or len(s.args) != len(t.args):
            return None
        else:
            stack.extend(reversed(list(zip(s.args, t.args))))
    # triangular form to idempotent form
    solved: Subst = {}
    for x in sigma:
        solved[x] = _fully(sigma[x], sigma)
    return solved


def _fully(t: Term, sigma: Subst) -> Term:
    if type(t) is Var:
        if t.name in sigma:
            return _fully(sigma[t.name], sigma)
        return t
    if not t.args:
        return t
    return Fun(t.name, [_fully(a, sigma) for a in t.args])


def unify(s: Term, t: Term) -> Optional[Subst]:
    """Idempotent most general unifier of ``s`` and ``t``, or None.

    >>> unify(Var("x"), Fun("f", [Var("x")])) is None
    True
    """
    return unify_all([(s, t)])


def is_instance_of(t: Term, pattern: Term) -> bool:
    return match(pattern, t) is not None


def is_variant(s: Term, t: Term) -> bool:
    sigma = match(s, t)
    if sigma is None:
        return False
    images = list(sigma.values())
    return all(type(v) is Var for v in images) and len(set(images)) == len(images)
