"""Large-N free energies as exact series, and the orthogonal = half unitary checks.

Every partition function here is expanded as ``Z = 1 + sum_n Z_n`` with
``Z_n`` an exact trace polynomial (coefficients rational in ``N``), the log is
taken formally, and the large-N free energy ``lim N^-2 log Z`` is read off
coefficient by coefficient once traces are normalized.

Integrals covered:

* external field  ``E_O[exp(N Tr J O)]`` and ``E_U[exp(N Tr(J U + J* U*))]``;
* HCIZ            ``E_O[exp(N Tr A O B O^t)]`` and
  ``E_U[exp(N Tr(A U B U* + A* U B* U*))]`` (generic A, B), with the
  symmetric/Hermitian variant obtained by setting ``A* = A``, ``B* = B``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial, prod
from typing import Callable

from .algebra import RationalFunctionN, ratfn_asymptotic
from .combinatorics import Partition, partitions_of
from .cumulants import cumulant_by_name, psi
from .goldens import F_UNITARY_PRINTED, W_ORTHOGONAL_PRINTED
from .moments import OrderTooLarge, haar_expectation
from .traces import TracePolynomial, Word, base, format_monomial
from .weingarten import normalize_group

MAX_EXTERNAL_ORDER = 5
MAX_HCIZ_ORDER = 5

KINDS = ("external", "hciz-generic", "hciz-symmetric")


def w_alpha(alpha: Partition) -> Fraction:
    """``W_alpha = (-1)^n (2n + l(alpha) - 3)! / (2n)! prod_p (-(2p)! / (p! (p-1)!))^{alpha_p}``."""
    n = sum(alpha)
    if n < 1:
        raise ValueError("alpha must be a nonempty partition")
    k = len(alpha)
    c = Fraction((-1) ** n * factorial(2 * n + k - 3), factorial(2 * n))
    for p in alpha:
        c *= Fraction(-factorial(2 * p), factorial(p) * factorial(p - 1))
    return c


def w_unitary_from_formula(order: int, letter_word: Word = ("J", "J*")) -> TracePolynomial:
    """``sum_{alpha |- n} W_alpha tr_alpha(X) / prod(alpha_p! p^alpha_p)`` with ``X = J J*``."""
    out = TracePolynomial("U", normalized=True)
    for alpha in partitions_of(order):
        mult = {p: alpha.count(p) for p in set(alpha)}
        weight = prod(factorial(a) * p**a for p, a in mult.items())
        words = [letter_word * p for p in alpha]
        out = out + TracePolynomial("U", {tuple(words): w_alpha(alpha) / weight}, normalized=True)
    return out


# ---------------------------------------------------------------------------
# formal power series in trace polynomials


def _zero(context: str, normalized: bool = False) -> TracePolynomial:
    return TracePolynomial(context, normalized=normalized)


def series_log(parts: dict[int, TracePolynomial], max_order: int) -> dict[int, TracePolynomial]:
    """Graded ``log(1 + sum_n parts[n])`` through ``max_order``."""
    ctx = next(iter(parts.values())).context
    out = {n: _zero(ctx) for n in range(1, max_order + 1)}
    power = {n: parts.get(n, _zero(ctx)) for n in range(1, max_order + 1)}  # X^1
    for k in range(1, max_order + 1):
        c = Fraction((-1) ** (k + 1), k)
        for n, t in power.items():
            if t:
                out[n] = out[n] + t * c
        nxt = {n: _zero(ctx) for n in range(1, max_order + 1)}
        for n1, t1 in power.items():
            for n2 in range(1, max_order + 1 - n1):
                t2 = parts.get(n2)
                if t1 and t2:
                    nxt[n1 + n2] = nxt[n1 + n2] + t1 * t2
        power = nxt
    return out


def series_exp(parts: dict[int, TracePolynomial], max_order: int) -> dict[int, TracePolynomial]:
    """Graded ``exp(sum_n parts[n]) - 1`` through ``max_order``."""
    ctx = next(iter(parts.values())).context
    out = {n: _zero(ctx) for n in range(1, max_order + 1)}
    power = {n: parts.get(n, _zero(ctx)) for n in range(1, max_order + 1)}
    for k in range(1, max_order + 1):
        c = Fraction(1, factorial(k))
        for n, t in power.items():
            if t:
                out[n] = out[n] + t * c
        nxt = {n: _zero(ctx) for n in range(1, max_order + 1)}
        for n1, t1 in power.items():
            for n2 in range(1, max_order + 1 - n1):
                t2 = parts.get(n2)
                if t1 and t2:
                    nxt[n1 + n2] = nxt[n1 + n2] + t1 * t2
        power = nxt
    return out


def _scaled_normalized(term: TracePolynomial) -> TracePolynomial:
    """``N^-2 * term`` rewritten in ``tr = Tr / N``."""
    N = RationalFunctionN.N()
    out = TracePolynomial(term.context, normalized=True)
    for mono, c in term.items():
        out._add_term(mono, RationalFunctionN.coerce(c) * N ** len(mono) / N**2)
    return out


class DivergentCoefficient(ArithmeticError):
    """A coefficient of ``N^-2 log Z`` grows with ``N``."""


def _limit(term: TracePolynomial) -> TracePolynomial:
    out = TracePolynomial(term.context, normalized=True)
    for mono, c in term.items():
        deg, lead = ratfn_asymptotic(c)
        if deg > 0:
            raise DivergentCoefficient(
                f"coefficient of {format_monomial(mono, term.context, True)} grows like N^{deg}"
            )
        if deg == 0:
            out._add_term(mono, lead)
    return out


@dataclass
class FreeEnergySeries:
    """Order-by-order ``log Z`` with its large-N limit.

    ``raw[n]`` is the order-n part of ``log Z`` in unnormalized traces,
    ``finite[n]`` is ``N^-2 raw[n]`` in normalized traces and ``limit[n]``
    its ``N -> oo`` limit.  ``moments[n]`` is the order-n part of ``Z`` itself.
    """

    group: str
    kind: str
    max_order: int
    moments: dict[int, TracePolynomial] = field(default_factory=dict)
    raw: dict[int, TracePolynomial] = field(default_factory=dict)
    finite: dict[int, TracePolynomial] = field(default_factory=dict)
    limit: dict[int, TracePolynomial] = field(default_factory=dict)

    @classmethod
    def from_moments(cls, group, kind, max_order, moments) -> "FreeEnergySeries":
        raw = series_log(moments, max_order)
        finite = {n: _scaled_normalized(t) for n, t in raw.items()}
        limit = {n: _limit(t) for n, t in finite.items()}
        return cls(group, kind, max_order, moments, raw, finite, limit)

    def map(self, fn: Callable[[TracePolynomial], TracePolynomial], kind: str) -> "FreeEnergySeries":
        out = FreeEnergySeries(self.group, kind, self.max_order)
        for name in ("moments", "raw", "finite", "limit"):
            setattr(out, name, {n: fn(t) for n, t in getattr(self, name).items()})
        return out

    def total_limit(self) -> TracePolynomial:
        acc = TracePolynomial(self.group, normalized=True)
        for n in sorted(self.limit):
            acc = acc + self.limit[n]
        return acc

    def to_json(self) -> dict:
        return {
            "group": self.group,
            "kind": self.kind,
            "max_order": self.max_order,
            "provenance": "exact",
            "orders": [
                {
                    "order": n,
                    "large_N": self.limit[n].to_json(),
                    "finite_N": self.finite[n].to_json(),
                }
                for n in sorted(self.limit)
            ],
        }


def _check_order(max_order: int, cap: int):
    if max_order < 1:
        raise ValueError("max_order must be positive")
    if max_order > cap:
        raise OrderTooLarge(f"order {max_order} exceeds cap {cap}")


def external_field_moments(group: str, max_order: int) -> dict[int, TracePolynomial]:
    """Order-n part of ``Z`` (2n source letters), unnormalized traces."""
    group = normalize_group(group)
    N = RationalFunctionN.N()
    out = {}
    for n in range(1, max_order + 1):
        if group == "O":
            words = [("J", "O")] * (2 * n)
            c = N ** (2 * n) * Fraction(1, factorial(2 * n))
        else:
            words = [("J", "U")] * n + [("J*", "U*")] * n
            c = N ** (2 * n) * Fraction(comb(2 * n, n), factorial(2 * n))
        out[n] = haar_expectation(group, words) * c
    return out


def expand_external_field(group: str, max_order: int) -> FreeEnergySeries:
    """``log E[exp(N Tr J G)]`` (plus the conjugate term for U(N)), order n in ``J J*``."""
    group = normalize_group(group)
    _check_order(max_order, MAX_EXTERNAL_ORDER)
    return FreeEnergySeries.from_moments(group, "external", max_order, external_field_moments(group, max_order))


def hciz_moments(group: str, max_order: int) -> dict[int, TracePolynomial]:
    group = normalize_group(group)
    N = RationalFunctionN.N()
    out = {}
    for n in range(1, max_order + 1):
        c = N**n * Fraction(1, factorial(n))
        if group == "O":
            out[n] = haar_expectation("O", [("A", "O", "B", "O*")] * n) * c
        else:
            acc = TracePolynomial("U")
            for k in range(n + 1):
                words = [("A", "U", "B", "U*")] * k + [("A*", "U", "B*", "U*")] * (n - k)
                acc = acc + haar_expectation("U", words) * comb(n, k)
            out[n] = acc * c
    return out


def hermitian_specialization(t: TracePolynomial) -> TracePolynomial:
    """``A* = A`` and ``B* = B`` (symmetric real, resp. Hermitian, sources)."""
    return t.substitute(lambda w: tuple(base(x) for x in w))


def expand_hciz(group: str, variant: str, max_order: int) -> FreeEnergySeries:
    """HCIZ free energy series.

    ``variant="generic"`` keeps ``A, A*, B, B*`` independent; ``"symmetric"``
    sets ``A* = A``, ``B* = B`` so that every word is a power ``Tr A^k``
    (for diagonal sources, the power sum ``p_k(a)``).  The unitary exponent is
    ``N Tr(A U B U* + A* U B* U*)``, i.e. ``2 N Tr A U B U*`` when Hermitian.
    """
    group = normalize_group(group)
    variant = {"sym": "symmetric", "symmetric-diagonal": "symmetric"}.get(variant, variant)
    if variant not in ("generic", "symmetric"):
        raise ValueError(f"unknown HCIZ variant {variant!r}")
    _check_order(max_order, MAX_HCIZ_ORDER)
    generic = _hciz_generic(group, max_order)
    if variant == "generic":
        return generic
    return generic.map(hermitian_specialization, "hciz-symmetric")


_HCIZ_CACHE: dict = {}


def _hciz_generic(group: str, max_order: int) -> FreeEnergySeries:
    key = (group, max_order)
    if key not in _HCIZ_CACHE:
        _HCIZ_CACHE[key] = FreeEnergySeries.from_moments(group, "hciz-generic", max_order, hciz_moments(group, max_order))
    return _HCIZ_CACHE[key]


# ---------------------------------------------------------------------------
# the claims


@dataclass
class ClaimRow:
    order: int
    monomial: str
    orthogonal: Fraction
    unitary: Fraction
    passed: bool
    note: str = ""

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "monomial": self.monomial,
            "orthogonal": str(self.orthogonal),
            "unitary": str(self.unitary),
            "pass": self.passed,
            **({"note": self.note} if self.note else {}),
        }


@dataclass
class ClaimReport:
    claim: str
    max_order: int
    rows: list[ClaimRow] = field(default_factory=list)
    checks: list[tuple[str, bool, str]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows) and all(ok for _, ok, _ in self.checks)

    def __bool__(self):
        return self.passed

    def to_json(self) -> dict:
        return {
            "claim": self.claim,
            "max_order": self.max_order,
            "pass": self.passed,
            "provenance": "exact",
            "rows": [r.to_json() for r in self.rows],
            "checks": [{"name": n, "pass": ok, "detail": d} for n, ok, d in self.checks],
        }

    def table(self) -> str:
        lines = [f"claim {self.claim} through order {self.max_order}: {'PASS' if self.passed else 'FAIL'}"]
        for r in self.rows:
            lines.append(
                f"  [{r.order}] {r.monomial:<40} O: {str(r.orthogonal):>10}  U/2: {str(r.unitary / 2):>10}"
                f"  {'ok' if r.passed else 'MISMATCH'}{('  ' + r.note) if r.note else ''}"
            )
        for name, ok, detail in self.checks:
            lines.append(f"  {name}: {'ok' if ok else 'FAIL'}{('  ' + detail) if detail else ''}")
        return "\n".join(lines)


def _compare_half(order: int, o_part: TracePolynomial, u_part: TracePolynomial) -> list[ClaimRow]:
    rows = []
    for mono in sorted(set(o_part.terms) | set(u_part.terms)):
        co = Fraction(o_part.terms.get(mono, 0))
        cu = Fraction(u_part.terms.get(mono, 0))
        rows.append(ClaimRow(order, format_monomial(mono, "O", True), co, cu, co * 2 == cu))
    return rows


def _to_orthogonal_words(t: TracePolynomial) -> TracePolynomial:
    """Read ``X*`` as the transpose: re-canonicalize unitary words in the real context."""
    return t.substitute(lambda w: w, context="O")


def check_claim_half_external(max_order: int = 3) -> ClaimReport:
    """Large-N ``W_O = W_U / 2`` for every monomial, plus ``W_U`` against the ``W_alpha`` formula."""
    so = expand_external_field("O", max_order)
    su = expand_external_field("U", max_order)
    rep = ClaimReport("1", max_order)
    for n in range(1, max_order + 1):
        rep.rows += _compare_half(n, so.limit[n], _to_orthogonal_words(su.limit[n]))
        formula = w_unitary_from_formula(n)
        ok = formula == su.limit[n]
        rep.checks.append((f"W_U order {n} = sum_alpha W_alpha formula", ok, "" if ok else f"got {su.limit[n]}"))
    for n in range(1, max_order + 1):
        rep.checks.append(_degree_bound_check(f"N-degree bound order {n} (O)", so.raw[n]))
    return rep


def _degree_bound_check(name: str, raw: TracePolynomial) -> tuple[str, bool, str]:
    """Every coefficient of ``log Z`` in normalized traces has N-degree <= 2."""
    N = RationalFunctionN.N()
    worst = None
    for mono, c in raw.items():
        deg, _ = ratfn_asymptotic(RationalFunctionN.coerce(c) * N ** len(mono))
        worst = deg if worst is None else max(worst, deg)
    ok = worst is None or worst <= 2
    return name, ok, f"max degree {worst}"


def printed_w_orthogonal(max_order: int = 4) -> TracePolynomial:
    """The displayed ``W_O`` expansion in cumulants of ``X = J J^t`` as a trace polynomial."""
    acc = TracePolynomial("U", normalized=True)
    for c, orders in W_ORTHOGONAL_PRINTED:
        if sum(orders) > max_order:
            continue
        term = TracePolynomial.constant("U", Fraction(c), normalized=True)
        for q in orders:
            term = term * psi(q, "X")
        acc = acc + term
    return _expand_x(acc)


def _expand_x(t: TracePolynomial) -> TracePolynomial:
    return t.substitute(lambda w: tuple(y for x in w for y in (("J", "J*") if x == "X" else (x,))))


def check_w_orthogonal_printed(max_order: int = 4) -> tuple[bool, TracePolynomial, TracePolynomial]:
    so = expand_external_field("O", max_order)
    computed = so.total_limit()
    printed = _to_orthogonal_words(printed_w_orthogonal(max_order))
    return computed == printed, computed, printed


def _swap_adjoint(t: TracePolynomial) -> TracePolynomial:
    return t.substitute(lambda w: tuple(x[:-1] if x.endswith("*") else x + "*" for x in w))


def printed_f_unitary(order: int, double_swap_invariant: bool = True) -> TracePolynomial:
    """Displayed ``F^(U)_order`` as a trace polynomial in normalized traces of A, A*, B, B*.

    With ``double_swap_invariant`` the closing ``+ (A -> A*, B -> B*)`` adds the
    image of every listed term, swap-invariant ones included (the literal
    reading); otherwise invariant terms are kept once.
    """
    spec = F_UNITARY_PRINTED[order]
    acc = TracePolynomial("U", normalized=True)

    def factor(name, conj, letter):
        t = cumulant_by_name(name, letter)
        return _swap_adjoint(t) if conj else t

    for c, afac, bfac in spec["terms"]:
        term = TracePolynomial.constant("U", Fraction(c), normalized=True)
        for name, conj in afac:
            term = term * factor(name, conj, "A")
        for name, conj in bfac:
            term = term * factor(name, conj, "B")
        if spec["swap"]:
            image = _swap_adjoint(term)
            if image != term or double_swap_invariant:
                term = term + image
        acc = acc + term
    return acc * Fraction(spec["prefactor"])


@dataclass
class PrintedComparison:
    order: int
    matches: bool
    reading: str
    difference: TracePolynomial

    def to_json(self):
        return {"order": self.order, "pass": self.matches, "reading": self.reading, "difference": self.difference.to_json()}


def compare_printed_f_unitary(order: int) -> PrintedComparison:
    """Computed large-N ``F^(U)_order`` against the displayed formula (both swap readings)."""
    computed = expand_hciz("U", "generic", order).limit[order]
    first = printed_f_unitary(order, True)
    if first == computed:
        return PrintedComparison(order, True, "literal", first - computed)
    second = printed_f_unitary(order, False)
    if second == computed:
        return PrintedComparison(order, True, "swap-invariant terms once", second - computed)
    return PrintedComparison(order, False, "none", first - computed)


def check_claim2_and_claim3(max_order: int = 4) -> ClaimReport:
    """(a) symmetric sources, (b) generic real sources, (c) displayed F^(U) formulas."""
    rep = ClaimReport("2+3", max_order)
    so = expand_hciz("O", "generic", max_order)
    su = expand_hciz("U", "generic", max_order)
    for n in range(1, max_order + 1):
        sym_o = hermitian_specialization(so.limit[n])
        sym_u = _to_orthogonal_words(hermitian_specialization(su.limit[n]))
        for row in _compare_half(n, sym_o, sym_u):
            row.note = "symmetric"
            rep.rows.append(row)
        for row in _compare_half(n, so.limit[n], _to_orthogonal_words(su.limit[n])):
            row.note = "generic"
            rep.rows.append(row)
        inv = _swap_adjoint(su.limit[n]) == su.limit[n]
        rep.checks.append((f"F^U order {n} dagger-swap invariant", inv, ""))
        for g, s in (("O", so), ("U", su)):
            rep.checks.append(_degree_bound_check(f"N-degree bound order {n} ({g})", s.raw[n]))
    for n in range(1, min(max_order, 4) + 1):
        cmp = compare_printed_f_unitary(n)
        detail = f"reading: {cmp.reading}" if cmp.matches else f"residual {cmp.difference}"
        rep.checks.append((f"F^U order {n} = displayed formula", cmp.matches, detail))
    return rep


def connectedness_check(series: FreeEnergySeries) -> bool:
    """``exp(log Z)`` reproduces the raw moments exactly."""
    back = series_exp(series.raw, series.max_order)
    return all(back[n] == series.moments[n] for n in range(1, series.max_order + 1))
