"""Example rewrite systems used across the test suite, in COPS syntax."""

from decdiag.trs import parse_cops

SOURCES = {
    "cops60": """(VAR x y z)
(RULES
 +(x,+(y,z)) -> +(+(x,y),z)
 +(+(x,y),z) -> +(x,+(y,z))
 sq(x) -> *(x,x)
 sq(s(x)) -> +(*(x,x),s(+(x,x)))
 +(x,y) -> +(y,x)
 *(x,y) -> *(y,x)
 +(s(x),y) -> +(x,s(y))
 +(x,s(y)) -> +(s(x),y)
 *(x,s(y)) -> +(x,*(x,y))
 *(s(x),y) -> +(*(x,y),y)
)""",
    "mot": """(VAR x)
(RULES
 b -> a
 a -> b
 f(g(x,a)) -> g(f(x),f(x))
)""",
    "mot2": """(VAR x)
(RULES
 f(h(x)) -> h(g(f(x),x,f(h(a))))
 f(x) -> a
 a -> b
 h(x) -> c
 b -> bot
 c -> bot
)""",
    "fail_rtd": """(VAR x)
(RULES
 f(h(x)) -> k(g(f(x),x,f(h(a))))
 f(x) -> a
 a -> b
 k(x) -> c
 b -> bot
 c -> bot
)""",
    "mot4": """(VAR x)
(RULES
 b -> a
 a -> b
 f(g(x,a)) -> g(f(x),f(g(x,c)))
)""",
    "mot5": """(VAR x)
(RULES
 a(a(c)) -> a(b(a(c)))
 b(x) -> h(x,x)
)""",
    "pl": """(VAR x)
(RULES
 f(a) -> f(b)
 f(x) -> g(f(x),f(x))
)""",
    "pll": """(VAR x)
(RULES
 f(x) -> g(f(x),f(x))
 f(a) -> f(b)
 a -> b
)""",
    "hfa": """(VAR x)
(RULES
 h(a,a) -> f(a)
 f(a) -> a
 f(x) -> h(x,x)
)""",
    "ex1": """(VAR x)
(RULES
 a -> b
 b -> a
 f(a,a) -> c
 f(b,b) -> c
 h(x) -> h(f(x,x))
)""",
    "cops62": """(VAR x y)
(RULES
 -(x,0) -> x
 -(0,x) -> 0
 -(s(x),s(y)) -> -(x,y)
 <(0,s(x)) -> true
 <(x,0) -> false
 <(s(x),s(y)) -> <(x,y)
 gcd(x,0) -> x
 gcd(0,x) -> x
 gcd(x,y) -> gcd(y,mod(x,y))
 if(true,x,y) -> x
 if(false,x,y) -> y
 mod(x,0) -> x
 mod(0,x) -> 0
 mod(x,s(y)) -> if(<(x,s(y)),x,mod(-(x,s(y)),s(y)))
)""",
    "mot7": """(VAR x y z)
(RULES
 +(+(x,y),z) -> +(+(z,y),x)
)""",
    "fail_per": """(VAR x y z)
(RULES
 f(x,y,a) -> f(x,x,b)
 f(f(x,y,b),z,c) -> x
)""",
    "imp": """(VAR x)
(RULES
 I(x) -> I(J(x))
 J(x) -> J(K(J(x)))
 H(I(x)) -> K(J(x))
 J(x) -> K(J(x))
)""",
    "kb_no": """(RULES
 a -> b
 a -> c
)""",
}


def load(name: str):
    return parse_cops(SOURCES[name])
