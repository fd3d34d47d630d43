"""Exact arithmetic: polynomials and rational functions in ``N``, multivariate polynomials.

Rationals are :class:`fractions.Fraction` throughout.  Univariate objects are
stored expanded and reduced so that structural equality is mathematical
equality; :meth:`RationalFunctionN.factored` re-factors over small integer
roots for display.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import zip_longest
from typing import Iterable, Mapping, Sequence, Union

Scalar = Union[int, Fraction]


class PoleAtN(ZeroDivisionError):
    """Raised when a rational function is evaluated at a root of its denominator."""


class ZeroFunction(ValueError):
    pass


class UnknownSymbol(KeyError):
    pass


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


class Poly:
    """Univariate polynomial in ``N`` with rational coefficients (lowest degree first)."""

    __slots__ = ("coeffs", "_hash")

    def __init__(self, coeffs: Iterable[Scalar] = ()):
        c = [_frac(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(c)
        self._hash = None

    @classmethod
    def const(cls, c: Scalar) -> "Poly":
        return cls((c,))

    @classmethod
    def monomial(cls, k: int, c: Scalar = 1) -> "Poly":
        return cls([0] * k + [c])

    @classmethod
    def linear(cls, root_shift: Scalar) -> "Poly":
        """``N + root_shift``."""
        return cls((root_shift, 1))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def lc(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.coeffs == Poly.const(other).coeffs
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.coeffs)
        return self._hash

    def __neg__(self):
        return Poly(-c for c in self.coeffs)

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Poly.const(other)
        elif not isinstance(other, Poly):
            return NotImplemented
        return Poly(a + b for a, b in zip_longest(self.coeffs, other.coeffs, fillvalue=0))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Poly.const(other)
        elif not isinstance(other, Poly):
            return NotImplemented
        return Poly(a - b for a, b in zip_longest(self.coeffs, other.coeffs, fillvalue=0))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Poly(c * other for c in self.coeffs)
        if not isinstance(other, Poly):
            return NotImplemented
        if not self.coeffs or not other.coeffs:
            return Poly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = Poly.const(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def divmod(self, other: "Poly") -> tuple["Poly", "Poly"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = other.degree
        if len(rem) - 1 < dq:
            return Poly(), self
        q = [Fraction(0)] * (len(rem) - dq)
        inv_lc = 1 / other.lc
        oc = other.coeffs
        for k in range(len(rem) - 1 - dq, -1, -1):
            c = rem[k + dq] * inv_lc
            q[k] = c
            if c:
                for j in range(dq + 1):
                    rem[k + j] -= c * oc[j]
        return Poly(q), Poly(rem[:dq])

    def __floordiv__(self, other):
        return self.divmod(other)[0]

    def __mod__(self, other):
        return self.divmod(other)[1]

    def exact_div(self, other: "Poly") -> "Poly":
        q, r = self.divmod(other)
        if r:
            raise ArithmeticError(f"{other} does not divide {self}")
        return q

    def monic(self) -> "Poly":
        if not self.coeffs:
            return self
        lc = self.lc
        if lc == 1:
            return self
        return Poly(c / lc for c in self.coeffs)

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self) -> "Poly":
        return Poly(k * c for k, c in enumerate(self.coeffs) if k)

    def __repr__(self):
        return f"Poly({self})"

    def __str__(self):
        return format_poly(self)


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Monic gcd (Euclid over the rationals)."""
    while b:
        a, b = b, a % b
    return a.monic()


def format_poly(p: Poly, var: str = "N") -> str:
    if p.is_zero():
        return "0"
    parts = []
    for k in range(p.degree, -1, -1):
        c = p.coeffs[k]
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        if k == 0:
            body = str(mag)
        else:
            mono = var if k == 1 else f"{var}^{k}"
            body = mono if mag == 1 else f"{mag}{mono}" if mag.denominator == 1 else f"({mag}){mono}"
        parts.append((sign, body))
    s = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, body in parts[1:]:
        s += sign + body
    return s


class RationalFunctionN:
    """Reduced ratio ``num/den`` of polynomials in ``N``; ``den`` is monic."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: Union[Poly, Scalar], den: Union[Poly, Scalar] = 1, *, _reduced: bool = False):
        if not isinstance(num, Poly):
            num = Poly.const(num)
        if not isinstance(den, Poly):
            den = Poly.const(den)
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if not _reduced:
            if num.is_zero():
                den = Poly.const(1)
            else:
                g = poly_gcd(num, den)
                if g.degree > 0:
                    num = num.exact_div(g)
                    den = den.exact_div(g)
                lc = den.lc
                if lc != 1:
                    num = num * (1 / lc)
                    den = den * (1 / lc)
        self.num = num
        self.den = den
        self._hash = None

    @classmethod
    def N(cls) -> "RationalFunctionN":
        return cls(Poly.monomial(1), _reduced=True)

    @classmethod
    def const(cls, c: Scalar) -> "RationalFunctionN":
        return cls(Poly.const(c), _reduced=True)

    @staticmethod
    def coerce(x) -> "RationalFunctionN":
        if isinstance(x, RationalFunctionN):
            return x
        if isinstance(x, Poly):
            return RationalFunctionN(x, _reduced=True)
        if isinstance(x, (int, Fraction)):
            return RationalFunctionN.const(x)
        raise TypeError(f"cannot coerce {type(x).__name__} to RationalFunctionN")

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self):
        return not self.num.is_zero()

    def is_polynomial(self) -> bool:
        return self.den.degree == 0

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, Poly)):
            other = RationalFunctionN.coerce(other)
        if not isinstance(other, RationalFunctionN):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def __neg__(self):
        return RationalFunctionN(-self.num, self.den, _reduced=True)

    def __add__(self, other):
        try:
            other = RationalFunctionN.coerce(other)
        except TypeError:
            return NotImplemented
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        if self.den == other.den:
            return RationalFunctionN(self.num + other.num, self.den)
        g = poly_gcd(self.den, other.den)
        if g.degree == 0:
            return RationalFunctionN(self.num * other.den + other.num * self.den, self.den * other.den)
        a = self.den.exact_div(g)
        b = other.den.exact_div(g)
        return RationalFunctionN(self.num * b + other.num * a, a * other.den)

    __radd__ = __add__

    def __sub__(self, other):
        try:
            other = RationalFunctionN.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return RationalFunctionN.const(0)
            return RationalFunctionN(self.num * other, self.den, _reduced=True)
        try:
            other = RationalFunctionN.coerce(other)
        except TypeError:
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return RationalFunctionN.const(0)
        # cross-cancel before multiplying keeps operands small
        g1 = poly_gcd(self.num, other.den)
        g2 = poly_gcd(other.num, self.den)
        n1, d2 = (self.num.exact_div(g1), other.den.exact_div(g1)) if g1.degree > 0 else (self.num, other.den)
        n2, d1 = (other.num.exact_div(g2), self.den.exact_div(g2)) if g2.degree > 0 else (other.num, self.den)
        num, den = n1 * n2, d1 * d2
        lc = den.lc
        if lc != 1:
            num, den = num * (1 / lc), den * (1 / lc)
        return RationalFunctionN(num, den, _reduced=True)

    __rmul__ = __mul__

    def inverse(self) -> "RationalFunctionN":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero rational function")
        return RationalFunctionN(self.den, self.num)

    def __truediv__(self, other):
        try:
            other = RationalFunctionN.coerce(other)
        except TypeError:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return RationalFunctionN.coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        return RationalFunctionN(self.num**k, self.den**k, _reduced=True)

    def __call__(self, n):
        return ratfn_eval(self, n)

    def __repr__(self):
        return f"RationalFunctionN({self})"

    def __str__(self):
        if self.den.degree == 0:
            return f"({self.num})"
        return f"({self.num})/({self.den})"

    def factored(self) -> str:
        """Display form with linear factors ``(N+c)`` pulled out over small integer roots."""
        return f"{_factor_str(self.num)}/{_factor_str(self.den)}" if self.den.degree > 0 else _factor_str(self.num)


def _factor_str(p: Poly, bound: int = 12) -> str:
    if p.is_zero():
        return "0"
    factors = []
    rest = p
    for r in range(-bound, bound + 1):
        lin = Poly.linear(-r)
        while rest.degree > 0 and rest(r) == 0:
            rest = rest.exact_div(lin)
            factors.append("N" if r == 0 else f"(N{'+' if r < 0 else '-'}{abs(r)})")
    if rest.degree == 0:
        c = rest.lc
        head = "" if c == 1 else "-" if c == -1 else str(c)
    else:
        head = f"({rest})"
    body = "".join(factors)
    if not body:
        return head if head not in ("", "-") else head + "1"
    return head + body


def ratfn_eval(f: RationalFunctionN, n) -> Fraction:
    """Exact value of ``f`` at ``N = n``; raises :class:`PoleAtN` on a root of the denominator."""
    d = f.den(n)
    if d == 0:
        raise PoleAtN(f"{f} has a pole at N={n}")
    return _frac(f.num(n)) / d


def ratfn_asymptotic(f: RationalFunctionN) -> tuple[int, Fraction]:
    """``(degree, leading)`` with ``f(N) ~ leading * N**degree`` as ``N -> oo``."""
    if f.is_zero():
        raise ZeroFunction("asymptotics of the zero function")
    return f.num.degree - f.den.degree, f.num.lc / f.den.lc


def large_n_limit(f: RationalFunctionN) -> Fraction:
    """Finite limit of ``f`` as ``N -> oo``; ``ValueError`` if it diverges."""
    if f.is_zero():
        return Fraction(0)
    deg, lead = ratfn_asymptotic(f)
    if deg > 0:
        raise ValueError(f"{f} diverges as N -> oo (degree {deg})")
    return lead if deg == 0 else Fraction(0)


# ---------------------------------------------------------------------------
# multivariate polynomials


class MultiPoly:
    """Sparse polynomial over a fixed tuple of symbol names with rational coefficients."""

    __slots__ = ("symbols", "terms", "_index")

    def __init__(self, symbols: Sequence[str], terms: Mapping[tuple[int, ...], Scalar] | None = None):
        self.symbols = tuple(symbols)
        self._index = {s: k for k, s in enumerate(self.symbols)}
        out = {}
        for exps, c in (terms or {}).items():
            if c:
                if len(exps) != len(self.symbols):
                    raise ValueError("exponent vector length does not match symbol list")
                out[tuple(exps)] = _frac(c)
        self.terms: dict[tuple[int, ...], Fraction] = out

    @classmethod
    def const(cls, symbols: Sequence[str], c: Scalar) -> "MultiPoly":
        return cls(symbols, {(0,) * len(symbols): c})

    @classmethod
    def var(cls, symbols: Sequence[str], name: str) -> "MultiPoly":
        symbols = tuple(symbols)
        if name not in symbols:
            raise UnknownSymbol(name)
        e = [0] * len(symbols)
        e[symbols.index(name)] = 1
        return cls(symbols, {tuple(e): 1})

    def zero(self) -> "MultiPoly":
        return MultiPoly(self.symbols)

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def _check(self, other: "MultiPoly"):
        if other.symbols != self.symbols:
            raise ValueError("symbol lists differ")

    def _lift(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return MultiPoly.const(self.symbols, other)
        raise TypeError(type(other).__name__)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = MultiPoly.const(self.symbols, other)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.symbols == other.symbols and self.terms == other.terms

    def __hash__(self):
        return hash((self.symbols, frozenset(self.terms.items())))

    def __neg__(self):
        return MultiPoly(self.symbols, {e: -c for e, c in self.terms.items()})

    def __add__(self, other):
        try:
            other = self._lift(other)
        except TypeError:
            return NotImplemented
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e, 0) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        res = MultiPoly(self.symbols)
        res.terms = out
        return res

    __radd__ = __add__

    def __sub__(self, other):
        try:
            other = self._lift(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return self.zero()
            return MultiPoly(self.symbols, {e: c * other for e, c in self.terms.items()})
        try:
            other = self._lift(other)
        except TypeError:
            return NotImplemented
        out: dict[tuple[int, ...], Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return MultiPoly(self.symbols, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = MultiPoly.const(self.symbols, 1)
        for _ in range(k):
            out = out * self
        return out

    def partial(self, symbol: str) -> "MultiPoly":
        return multipoly_partial(self, symbol)

    def degree_in(self, symbol: str) -> int:
        k = self._index[symbol]
        return max((e[k] for e in self.terms), default=-1)

    def coefficient(self, symbol: str, power: int) -> "MultiPoly":
        """Coefficient of ``symbol**power`` (the symbol is kept in the list with exponent 0)."""
        k = self._index[symbol]
        out = {}
        for e, c in self.terms.items():
            if e[k] == power:
                out[e[:k] + (0,) + e[k + 1 :]] = c
        return MultiPoly(self.symbols, out)

    def truncate(self, symbol: str, max_power: int) -> "MultiPoly":
        k = self._index[symbol]
        return MultiPoly(self.symbols, {e: c for e, c in self.terms.items() if e[k] <= max_power})

    def evaluate(self, values: Mapping[str, object]):
        acc = 0
        for e, c in self.terms.items():
            t = c
            for s, p in zip(self.symbols, e):
                if p:
                    t = t * values[s] ** p
            acc = acc + t
        return acc

    def __repr__(self):
        return f"MultiPoly({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, reverse=True):
            c = self.terms[e]
            mono = "*".join(s if p == 1 else f"{s}^{p}" for s, p in zip(self.symbols, e) if p)
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")


def multipoly_partial(p: MultiPoly, symbol: str) -> MultiPoly:
    """Formal partial derivative with respect to ``symbol``."""
    if symbol not in p._index:
        raise UnknownSymbol(symbol)
    k = p._index[symbol]
    out = {}
    for e, c in p.terms.items():
        if e[k]:
            out[e[:k] + (e[k] - 1,) + e[k + 1 :]] = c * e[k]
    return MultiPoly(p.symbols, out)


def parse_ratfn(text: str) -> RationalFunctionN:
    """Parse an arithmetic expression in ``N`` such as ``"-(5*N+6)/((N-3)*N)"``.

    ``^`` is accepted as a synonym of ``**``, and a coefficient written
    directly before ``N`` (``2N``) is read as a product, so the printed form
    of a :class:`RationalFunctionN` parses back to itself.
    """
    import ast
    import re

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return RationalFunctionN.const(node.value)
        if isinstance(node, ast.Name):
            if node.id != "N":
                raise UnknownSymbol(node.id)
            return RationalFunctionN.N()
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                if not (isinstance(node.right, ast.Constant) and isinstance(node.right.value, int)):
                    raise ValueError("exponents must be integer literals")
                return ev(node.left) ** node.right.value
            a, b = ev(node.left), ev(node.right)
            ops = {ast.Add: a.__add__, ast.Sub: a.__sub__, ast.Mult: a.__mul__, ast.Div: a.__truediv__}
            for op, fn in ops.items():
                if isinstance(node.op, op):
                    return fn(b)
        raise ValueError(f"unsupported syntax in {text!r}")

    src = re.sub(r"(\d)\s*N", r"\1*N", text.replace("^", "**"))
    src = re.sub(r"\)\s*([N(])", r")*\1", src)
    return ev(ast.parse(src, mode="eval"))
