"""Trace words and trace polynomials.

A letter is a string ``"A"`` or ``"A*"``; the star is the adjoint of the
context: transpose for real matrices (``"O"`` context) and conjugate
transpose for complex ones (``"U"`` context).  Words are canonical up to
cyclic rotation, and in the real context also up to reversal with every star
toggled (``Tr W = Tr W^t``).  ``Tr W`` and ``Tr W^dagger`` are distinct
symbols in the complex context.
"""

from __future__ import annotations

import re
from collections import Counter
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .algebra import RationalFunctionN

Letter = str
Word = tuple[Letter, ...]
Monomial = tuple[Word, ...]

CONTEXTS = ("O", "U")


class UnsupportedLetter(ValueError):
    pass


def adjoint_letter(letter: Letter) -> Letter:
    return letter[:-1] if letter.endswith("*") else letter + "*"


def base(letter: Letter) -> str:
    return letter.rstrip("*")


def adjoint_word(word: Sequence[Letter]) -> Word:
    return tuple(adjoint_letter(x) for x in reversed(word))


def canonical_word(word: Sequence[Letter], context: str) -> Word:
    w = tuple(word)
    if not w:
        return w
    cands = [w[k:] + w[:k] for k in range(len(w))]
    if context == "O":
        r = adjoint_word(w)
        cands += [r[k:] + r[:k] for k in range(len(r))]
    return min(cands)


def canonical_monomial(words: Iterable[Sequence[Letter]], context: str) -> Monomial:
    return tuple(sorted(canonical_word(w, context) for w in words))


def format_word(word: Word, context: str, normalized: bool = False) -> str:
    suffix = "t" if context == "O" else "d"
    toks = []
    k = 0
    while k < len(word):
        j = k
        while j < len(word) and word[j] == word[k]:
            j += 1
        x = word[k]
        name = base(x) + (suffix if x.endswith("*") else "")
        toks.append(name if j - k == 1 else f"{name}^{j - k}")
        k = j
    return ("tr(" if normalized else "Tr(") + " ".join(toks) + ")"


def format_monomial(mono: Monomial, context: str, normalized: bool = False) -> str:
    if not mono:
        return "1"
    parts = []
    for w, m in sorted(Counter(mono).items()):
        s = format_word(w, context, normalized)
        parts.append(s if m == 1 else f"{s}^{m}")
    return " ".join(parts)


_LETTER = re.compile(r"([A-Z])(\^t|\^d|\^T|t|d|\*|')?(?:\^(\d+))?")


def parse_word(text: str, context: str | None = None) -> Word:
    """Parse the inside of a trace, e.g. ``"A O B O^t"``, ``"J Jt"`` or ``"AOBOt"``."""
    body = text.replace(".", " ").replace("·", " ")
    out: list[Letter] = []
    pos = 0
    body = body.strip()
    while pos < len(body):
        if body[pos].isspace():
            pos += 1
            continue
        m = _LETTER.match(body, pos)
        if not m:
            raise UnsupportedLetter(f"cannot parse letter at {body[pos:]!r}")
        name, suf, power = m.group(1), m.group(2), m.group(3)
        if suf in ("t", "^t", "^T") and context == "U":
            raise UnsupportedLetter(f"transpose {name}{suf} in a unitary expression")
        letter = name + ("*" if suf else "")
        out += [letter] * int(power or 1)
        pos = m.end()
    return tuple(out)


_TRACE = re.compile(r"(Tr|tr)\s*\(([^()]*)\)\s*(?:\^\s*(\d+))?")


def parse_trace_product(text: str, context: str | None = None) -> list[Word]:
    """Parse ``"Tr(J O) Tr(J O)"`` or ``"Tr(A O B Ot)^2"`` into a list of words."""
    words: list[Word] = []
    rest = text.strip()
    pos = 0
    while pos < len(rest):
        if rest[pos].isspace() or rest[pos] == "*":
            pos += 1
            continue
        m = _TRACE.match(rest, pos)
        if not m:
            raise UnsupportedLetter(f"cannot parse trace product at {rest[pos:]!r}")
        w = parse_word(m.group(2), context)
        words += [w] * int(m.group(3) or 1)
        pos = m.end()
    if not words:
        raise ValueError("empty trace product")
    return words


def _zero_like(c):
    return RationalFunctionN.const(0) if isinstance(c, RationalFunctionN) else Fraction(0)


class TracePolynomial:
    """Finite linear combination of products of canonical trace words.

    ``normalized`` marks whether words stand for ``Tr`` or ``tr = Tr / N``.
    Coefficients are Fractions or :class:`RationalFunctionN`.
    """

    __slots__ = ("context", "normalized", "terms")

    def __init__(self, context: str, terms: Mapping[Monomial, object] | None = None, normalized: bool = False):
        if context not in CONTEXTS:
            raise ValueError(f"context must be one of {CONTEXTS}")
        self.context = context
        self.normalized = normalized
        self.terms: dict[Monomial, object] = {}
        for mono, c in (terms or {}).items():
            self._add_term(canonical_monomial(mono, context), c)

    def _add_term(self, mono: Monomial, c):
        if not c:
            return
        v = self.terms.get(mono)
        v = c if v is None else v + c
        if v:
            self.terms[mono] = v
        else:
            self.terms.pop(mono, None)

    @classmethod
    def constant(cls, context: str, c, normalized: bool = False) -> "TracePolynomial":
        return cls(context, {(): c}, normalized)

    @classmethod
    def word(cls, context: str, word: Sequence[Letter], normalized: bool = False, coeff=1) -> "TracePolynomial":
        return cls(context, {(tuple(word),): Fraction(coeff)}, normalized)

    def like(self, terms=None) -> "TracePolynomial":
        out = TracePolynomial(self.context, normalized=self.normalized)
        if terms:
            out.terms = dict(terms)
        return out

    def copy(self) -> "TracePolynomial":
        return self.like(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def items(self):
        return self.terms.items()

    def coefficient(self, words: Iterable[Sequence[Letter]]):
        mono = canonical_monomial(words, self.context)
        return self.terms.get(mono, Fraction(0))

    def _compatible(self, other: "TracePolynomial"):
        if other.context != self.context or other.normalized != self.normalized:
            raise ValueError("trace polynomials live in different contexts/normalizations")

    def __eq__(self, other):
        if not isinstance(other, TracePolynomial):
            return NotImplemented
        return self.context == other.context and self.normalized == other.normalized and self.terms == other.terms

    def __add__(self, other):
        if not isinstance(other, TracePolynomial):
            if other == 0:
                return self.copy()
            other = TracePolynomial.constant(self.context, other, self.normalized)
        self._compatible(other)
        out = self.copy()
        for mono, c in other.terms.items():
            out._add_term(mono, c)
        return out

    __radd__ = __add__

    def __neg__(self):
        return self.like({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, TracePolynomial):
            if not other:
                return self.like()
            return self.like({m: c * other for m, c in self.terms.items()})
        self._compatible(other)
        out = self.like()
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                out._add_term(tuple(sorted(m1 + m2)), c1 * c2)
        return out

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = TracePolynomial.constant(self.context, Fraction(1), self.normalized)
        for _ in range(k):
            out = out * self
        return out

    def map_coefficients(self, fn: Callable) -> "TracePolynomial":
        out = self.like()
        for m, c in self.terms.items():
            out._add_term(m, fn(m, c))
        return out

    def substitute(self, fn: Callable[[Word], Word], context: str | None = None) -> "TracePolynomial":
        """Rewrite every word through ``fn`` (letter renaming) and re-canonicalize in ``context``."""
        ctx = context or self.context
        out = TracePolynomial(ctx, normalized=self.normalized)
        for m, c in self.terms.items():
            out._add_term(canonical_monomial((fn(w) for w in m), ctx), c)
        return out

    def rename_letters(self, mapping: Mapping[Letter, Letter], context: str | None = None) -> "TracePolynomial":
        return self.substitute(lambda w: tuple(mapping.get(x, x) for x in w), context)

    def to_normalized(self, N=None) -> "TracePolynomial":
        """``Tr W = N tr W``: multiply each coefficient by ``N^{#traces}``."""
        if self.normalized:
            return self.copy()
        out = TracePolynomial(self.context, normalized=True)
        Nsym = RationalFunctionN.N() if N is None else N
        for m, c in self.terms.items():
            out._add_term(m, c * Nsym ** len(m))
        return out

    def degree_in(self, names: Iterable[str]) -> set[int]:
        names = set(names)
        return {sum(1 for w in m for x in w if base(x) in names) for m in self.terms}

    def homogeneous_part(self, names: Iterable[str], degree: int) -> "TracePolynomial":
        names = set(names)
        return self.like(
            {m: c for m, c in self.terms.items() if sum(1 for w in m for x in w if base(x) in names) == degree}
        )

    def evaluate(self, fn: Callable[[Word], object]):
        """Numeric value given ``fn(word)`` for each trace word."""
        acc = 0
        for m, c in self.terms.items():
            t = c
            for w in m:
                t = t * fn(w)
            acc = acc + t
        return acc

    def sorted_items(self):
        return sorted(self.terms.items(), key=lambda kv: (sum(len(w) for w in kv[0]), kv[0]))

    def __repr__(self):
        return f"TracePolynomial({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.sorted_items():
            parts.append(f"({c})*{format_monomial(m, self.context, self.normalized)}" if m else f"({c})")
        return " + ".join(parts)

    def to_json(self) -> list[dict]:
        return [
            {"monomial": format_monomial(m, self.context, self.normalized), "coefficient": str(c)}
            for m, c in self.sorted_items()
        ]


def _letter_from_name(name: str, context: str) -> Letter:
    if len(name) == 1:
        return name
    if len(name) == 2 and name[1] in "td":
        if name[1] == "t" and context == "U":
            raise UnsupportedLetter(f"transpose {name} in a unitary expression")
        return name[0] + "*"
    raise UnsupportedLetter(name)


def parse_trace_polynomial(text: str, context: str = "U", normalized: bool = True) -> TracePolynomial:
    """Parse e.g. ``"tr(A**2*Ad) - 2*tr(A)*tr(A*Ad) + 2*tr(A)**2*tr(Ad)"``.

    Inside ``tr(...)``/``Tr(...)`` a word is a ``*``-product of letters with
    optional integer powers; ``Xd`` is the dagger and ``Xt`` the transpose.
    Coefficients may be integers or quotients of integers.
    """
    import ast

    def word(node) -> Word:
        if isinstance(node, ast.Name):
            return (_letter_from_name(node.id, context),)
        if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Mult):
            return word(node.left) + word(node.right)
        if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Pow):
            return word(node.left) * node.right.value
        raise ValueError(f"bad trace argument in {text!r}")

    def ev(node) -> TracePolynomial:
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return TracePolynomial.constant(context, Fraction(node.value), normalized)
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in ("tr", "Tr"):
            if len(node.args) != 1:
                raise ValueError("tr takes one argument")
            return TracePolynomial.word(context, word(node.args[0]), normalized)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                return ev(node.left) ** node.right.value
            if isinstance(node.op, ast.Div):
                den = ev(node.right)
                if set(den.terms) != {()}:
                    raise ValueError("can only divide by a number")
                return ev(node.left) * (1 / Fraction(den.terms[()]))
            a, b = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Add):
                return a + b
            if isinstance(node.op, ast.Sub):
                return a - b
            if isinstance(node.op, ast.Mult):
                return a * b
        raise ValueError(f"unsupported syntax in {text!r}")

    return ev(ast.parse(text.replace("^", "**"), mode="eval"))
