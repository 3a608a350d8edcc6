"""Seeded generators of small random rewrite systems and terms."""

import random
from typing import List, Optional, Sequence, Tuple

from decdiag.terms import Fun, Term, Var, variables
from decdiag.trs import TRS, Rule, TRSInputError

SYMBOL_POOL = [("f", 2), ("g", 1), ("h", 1), ("k", 2), ("a", 0), ("b", 0), ("c", 0)]
VARS = ["x", "y"]


def random_signature(rng: random.Random, max_symbols: int = 3) -> List[Tuple[str, int]]:
    constants = [s for s in SYMBOL_POOL if s[1] == 0]
    others = [s for s in SYMBOL_POOL if s[1] > 0]
    sig = [rng.choice(constants)]
    sig += rng.sample(others, rng.randint(1, max_symbols - 1))
    return sig


def random_term(rng: random.Random, sig, depth: int, var_names: Sequence[str], var_prob=0.3) -> Term:
    if depth <= 1 or (var_names and rng.random() < var_prob):
        leaves = [Var(v) for v in var_names] + [Fun(n) for n, a in sig if a == 0]
        return rng.choice(leaves)
    name, arity = rng.choice(sig)
    return Fun(name, [random_term(rng, sig, depth - 1, var_names, var_prob) for _ in range(arity)])


def random_trs(rng: random.Random, max_rules: int = 4, depth: int = 3, max_symbols: int = 3,
               left_linear: Optional[bool] = None) -> TRS:
    sig = random_signature(rng, max_symbols)
    rules = []
    attempts = 0
    target = rng.randint(1, max_rules)
    while len(rules) < target and attempts < 100:
        attempts += 1
        lhs = random_term(rng, sig, rng.randint(1, depth), VARS, 0.4)
        if isinstance(lhs, Var):
            continue
        if left_linear and len(variables(lhs)) != _occurrences(lhs):
            continue
        rhs = random_term(rng, sig, rng.randint(1, depth), variables(lhs), 0.4)
        try:
            rules.append(Rule(len(rules) + 1, lhs, rhs))
        except TRSInputError:
            continue
    return TRS(tuple(rules))


def _occurrences(t: Term) -> int:
    if isinstance(t, Var):
        return 1
    return sum(_occurrences(a) for a in t.args)


def ground_term(rng: random.Random, trs: TRS, depth: int) -> Term:
    sig = sorted(trs.signature.items())
    if not any(a == 0 for _, a in sig):
        sig.append(("a", 0))
    return random_term(rng, sig, depth, (), 0.0)
