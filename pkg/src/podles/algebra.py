"""Symbolic layer for A(S^2_q): words in a, a*, b and their normal form.

Words are tuples over the letters ``"a"``, ``"A"`` (standing for a*) and
``"b"``. The normal form puts every power of b on the left, followed by a
pure power of a or of a*:

    a b  -> q^-2 b a
    a* b -> q^2  b a*
    a* a -> 1 - b^2
    a a* -> 1 - q^-4 b^2
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping

A, ASTAR, B = "a", "A", "b"
LETTERS = (A, ASTAR, B)
Word = tuple

# k-weight exponent of each generator: k |> x = q^w x.
WEIGHT = {A: 1, ASTAR: -1, B: 0}
HOPF_GENERATORS = ("k", "k_inv", "e", "f")
COPRODUCTS = ("A", "B")
DEFAULT_COPRODUCT = "A"


def _clean(terms: Mapping[Word, complex], tol: float = 0.0) -> dict[Word, complex]:
    return {w: complex(c) for w, c in terms.items() if abs(c) > tol}


@dataclass(frozen=True)
class AlgebraElement:
    """A finite complex combination of words, at a fixed numeric q."""

    terms: Mapping[Word, complex]
    q: float

    def __post_init__(self):
        object.__setattr__(self, "terms", _clean(self.terms))

    # -- constructors
    @classmethod
    def scalar(cls, c: complex, q: float) -> AlgebraElement:
        return cls({(): c}, q)

    @classmethod
    def word(cls, letters: Iterable[str], q: float, coeff: complex = 1.0) -> AlgebraElement:
        w = tuple(letters)
        bad = set(w) - set(LETTERS)
        if bad:
            raise ValueError(f"unknown letters {bad}")
        return cls({w: coeff}, q)

    @classmethod
    def generator(cls, name: str, q: float) -> AlgebraElement:
        return cls.word(_GEN_ALIASES[name], q)

    # -- arithmetic
    def _same_q(self, other: AlgebraElement) -> None:
        if self.q != other.q:
            raise ValueError(f"mismatched q: {self.q} vs {other.q}")

    def _coerce(self, other) -> AlgebraElement:
        if isinstance(other, AlgebraElement):
            self._same_q(other)
            return other
        if isinstance(other, (int, float, complex)):
            return AlgebraElement.scalar(other, self.q)
        raise TypeError(f"cannot combine AlgebraElement with {type(other).__name__}")

    def __add__(self, other) -> AlgebraElement:
        other = self._coerce(other)
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out.get(w, 0) + c
        return AlgebraElement(out, self.q)

    __radd__ = __add__

    def __neg__(self) -> AlgebraElement:
        return AlgebraElement({w: -c for w, c in self.terms.items()}, self.q)

    def __sub__(self, other) -> AlgebraElement:
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> AlgebraElement:
        return self._coerce(other) - self

    def __mul__(self, other) -> AlgebraElement:
        if isinstance(other, (int, float, complex)):
            return AlgebraElement({w: c * other for w, c in self.terms.items()}, self.q)
        return multiply(self, other)

    def __rmul__(self, other) -> AlgebraElement:
        if isinstance(other, (int, float, complex)):
            return self * other
        return NotImplemented

    def __pow__(self, n: int) -> AlgebraElement:
        out = AlgebraElement.scalar(1, self.q)
        for _ in range(n):
            out = out * self
        return out

    # -- inspection
    @property
    def max_length(self) -> int:
        return max((len(w) for w in self.terms), default=0)

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(abs(c) <= tol for c in self.terms.values())

    def close_to(self, other: AlgebraElement, tol: float = 1e-12) -> bool:
        diff = normal_form(self - other)
        return diff.is_zero(tol)

    def coefficient(self, letters: Iterable[str]) -> complex:
        return self.terms.get(tuple(letters), 0j)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for w in sorted(self.terms, key=lambda w: (len(w), w)):
            c = self.terms[w]
            coeff = _fmt_complex(c)
            if not w:
                parts.append(coeff)
            else:
                parts.append(coeff + "*" + "*".join(_LETTER_TEXT[x] for x in w))
        return " + ".join(parts)


_GEN_ALIASES = {"a": (A,), "a*": (ASTAR,), "a^*": (ASTAR,), "as": (ASTAR,), "A": (ASTAR,), "b": (B,)}
_LETTER_TEXT = {A: "a", ASTAR: "a^*", B: "b"}


def _fmt_complex(c: complex) -> str:
    return f"({c.real!r}{c.imag:+}j)"


# -- normal form -----------------------------------------------------------------


@lru_cache(maxsize=None)
def _reduce_word(word: Word, q: float) -> tuple[tuple[Word, complex], ...]:
    for i in range(len(word) - 1):
        pair = word[i] + word[i + 1]
        head, tail = word[:i], word[i + 2 :]
        if pair == "ab":
            replacements = [((B, A), q**-2)]
        elif pair == "Ab":
            replacements = [((B, ASTAR), q**2)]
        elif pair == "Aa":
            replacements = [((), 1.0), ((B, B), -1.0)]
        elif pair == "aA":
            replacements = [((), 1.0), ((B, B), -(q**-4))]
        else:
            continue
        acc: dict[Word, complex] = {}
        for mid, c in replacements:
            for w, c2 in _reduce_word(head + mid + tail, q):
                acc[w] = acc.get(w, 0) + c * c2
        return tuple(acc.items())
    return ((word, 1.0),)


def is_normal_word(word: Word) -> bool:
    k = 0
    while k < len(word) and word[k] == B:
        k += 1
    rest = word[k:]
    return len(set(rest)) <= 1 and B not in rest


def normal_form(x: AlgebraElement) -> AlgebraElement:
    acc: dict[Word, complex] = {}
    for w, c in x.terms.items():
        for w2, c2 in _reduce_word(w, x.q):
            acc[w2] = acc.get(w2, 0) + c * c2
    return AlgebraElement(acc, x.q)


def multiply(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    x._same_q(y)
    acc: dict[Word, complex] = {}
    for w1, c1 in x.terms.items():
        for w2, c2 in y.terms.items():
            acc[w1 + w2] = acc.get(w1 + w2, 0) + c1 * c2
    return normal_form(AlgebraElement(acc, x.q))


def concat(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    """Formal product without reduction."""
    x._same_q(y)
    acc: dict[Word, complex] = {}
    for w1, c1 in x.terms.items():
        for w2, c2 in y.terms.items():
            acc[w1 + w2] = acc.get(w1 + w2, 0) + c1 * c2
    return AlgebraElement(acc, x.q)


_STAR_LETTER = {A: ASTAR, ASTAR: A, B: B}


def star(x: AlgebraElement) -> AlgebraElement:
    terms: dict[Word, complex] = {}
    for w, c in x.terms.items():
        w2 = tuple(_STAR_LETTER[l] for l in reversed(w))
        terms[w2] = terms.get(w2, 0) + complex(c).conjugate()
    return normal_form(AlgebraElement(terms, x.q))


def relations(q: float) -> dict[str, AlgebraElement]:
    """The four defining relations written as LHS - RHS (each should vanish)."""
    a, a_s, b = (AlgebraElement.word(w, q) for w in ((A,), (ASTAR,), (B,)))
    return {
        "ba=q2ab": concat(b, a) - q**2 * concat(a, b),
        "a*b=q2ba*": concat(a_s, b) - q**2 * concat(b, a_s),
        "a*a+b2=1": concat(a_s, a) + concat(b, b) - 1,
        "q2aa*+q-2b2=q2": q**2 * concat(a, a_s) + q**-2 * concat(b, b) - q**2,
    }


# -- classical points ------------------------------------------------------------


def classical_point_eval(x: AlgebraElement, lam: complex, tol: float = 1e-12) -> complex:
    """Evaluate at the character a -> lam, a* -> conj(lam), b -> 0 (|lam| = 1)."""
    if abs(abs(lam) - 1.0) > tol:
        raise ValueError(f"classical points need |lambda| = 1, got {abs(lam)}")
    values = {A: complex(lam), ASTAR: complex(lam).conjugate(), B: 0j}
    total = 0j
    for w, c in normal_form(x).terms.items():
        term = complex(c)
        for letter in w:
            term *= values[letter]
        total += term
    return total


# -- U_q(su(2)) module action ----------------------------------------------------


def _generator_action(h: str, letter: str, q: float) -> AlgebraElement:
    if h == "k":
        return AlgebraElement.word((letter,), q, q ** WEIGHT[letter])
    if h == "k_inv":
        return AlgebraElement.word((letter,), q, q ** -WEIGHT[letter])
    r = math.sqrt(q)
    table = {
        ("e", A): ((B,), -(1 + q**2) * r**-5),
        ("e", ASTAR): None,
        ("e", B): ((ASTAR,), r),
        ("f", A): None,
        ("f", ASTAR): ((B,), (1 + q**2) * r**-3),
        ("f", B): ((A,), -(r**3)),
    }
    entry = table[(h, letter)]
    if entry is None:
        return AlgebraElement({}, q)
    return AlgebraElement.word(entry[0], q, entry[1])


def _act_word(h: str, word: Word, q: float, coproduct: str) -> AlgebraElement:
    if not word:
        # counit
        return AlgebraElement.scalar(1.0 if h in ("k", "k_inv") else 0.0, q)
    if h in ("k", "k_inv"):
        sign = 1 if h == "k" else -1
        return AlgebraElement.word(word, q, q ** (sign * sum(WEIGHT[x] for x in word)))
    if len(word) == 1:
        return _generator_action(h, word[0], q)
    first, rest = word[:1], word[1:]
    left_k, right_k = ("k_inv", "k") if coproduct == "A" else ("k", "k_inv")
    # h |> (x y) = (h |> x)(right_k |> y) + (left_k |> x)(h |> y)
    return concat(_generator_action(h, first[0], q), _act_word(right_k, rest, q, coproduct)) + concat(
        _act_word(left_k, first, q, coproduct), _act_word(h, rest, q, coproduct)
    )


def module_action(h: str, x: AlgebraElement, coproduct: str = DEFAULT_COPRODUCT) -> AlgebraElement:
    """h |> x for h in {k, k_inv, e, f}, extended to products through the coproduct.

    ``coproduct="A"``: Delta(h) = h (x) k + k^-1 (x) h for h = e, f.
    ``coproduct="B"``: Delta(h) = h (x) k^-1 + k (x) h.
    """
    if h not in HOPF_GENERATORS:
        raise ValueError(f"unknown Hopf generator {h!r}")
    if coproduct not in COPRODUCTS:
        raise ValueError(f"unknown coproduct {coproduct!r}")
    acc = AlgebraElement({}, x.q)
    for w, c in x.terms.items():
        acc = acc + c * _act_word(h, w, x.q, coproduct)
    return normal_form(acc)


# -- parser ----------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?j?|j)"
    r"|(?P<astar>a\^\*)|(?P<gen>[ab])|(?P<pow>\^\d+)|(?P<op>[*+()\-]))"
)


def _tokenize(text: str) -> list[tuple[str, str]]:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"unexpected input at {pos}: {text[pos:pos + 10]!r}")
        kind = m.lastgroup
        out.append((kind, m.group(kind)))
        pos = m.end()
    return out


def parse(text: str, q: float) -> AlgebraElement:
    """Parse expressions such as ``"2*a^* * b + (1+0.5j)*a*a - b^2"``.

    The result is in normal form.
    """
    tokens = _tokenize(text)
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else (None, None)

    def take():
        nonlocal pos
        tok = peek()
        pos += 1
        return tok

    def expr():
        val = term()
        while peek() in (("op", "+"), ("op", "-")):
            _, op = take()
            rhs = term()
            val = val + rhs if op == "+" else val - rhs
        return val

    def term():
        # juxtaposition ("a^* a") multiplies like an explicit "*"
        val = factor()
        while peek() == ("op", "*") or peek()[0] in ("num", "astar", "gen") or peek() == ("op", "("):
            if peek() == ("op", "*"):
                take()
            val = concat(val, factor())
        return val

    def factor():
        if peek() == ("op", "-"):
            take()
            return -factor()
        val = atom()
        while peek()[0] == "pow":
            n = int(take()[1][1:])
            base, val = val, AlgebraElement.scalar(1, q)
            for _ in range(n):
                val = concat(val, base)
        return val

    def atom():
        kind, text_ = take()
        if kind == "num":
            return AlgebraElement.scalar(complex(text_ if text_ != "j" else "1j"), q)
        if kind == "astar":
            return AlgebraElement.word((ASTAR,), q)
        if kind == "gen":
            return AlgebraElement.word((text_,), q)
        if (kind, text_) == ("op", "("):
            val = expr()
            if take() != ("op", ")"):
                raise ValueError("unbalanced parenthesis")
            return val
        raise ValueError(f"unexpected token {text_!r}")

    if not tokens:
        raise ValueError("empty expression")
    result = expr()
    if pos != len(tokens):
        raise ValueError(f"trailing input starting at token {tokens[pos][1]!r}")
    return normal_form(result)

