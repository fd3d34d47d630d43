"""Free (non-crossing) cumulants as exact trace polynomials.

Two independent constructions are provided.  :func:`psi` uses the closed
formula in the normalized moments ``phi_p = tr X^p``.  :func:`free_cumulant`
inverts the moment-cumulant relation ``phi(x_1..x_n) = sum_{pi in NC(n)}
kappa_pi`` for an arbitrary sequence of letters; the polarized cumulants are
the instances with ``A`` and ``A*`` mixed.  All expressions use normalized
traces ``tr = Tr / N``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import factorial, prod
from typing import Mapping, Sequence

from .combinatorics import partitions_of
from .traces import Letter, TracePolynomial, Word, adjoint_letter

POLARIZED_TAGS = {
    "2t": (False, True),
    "3t": (False, False, True),
    "4t": (False, False, False, True),
    "4tt": (False, False, True, True),
    "4t|t": (False, True, False, True),
}
TAG_ALIASES = {"4t-t": "4t|t", "4tlt": "4t|t"}


class UnknownTag(KeyError):
    pass


class MissingMoment(KeyError):
    pass


def normalize_tag(tag: str) -> str:
    t = str(tag).strip()
    t = TAG_ALIASES.get(t, t)
    if t not in POLARIZED_TAGS:
        raise UnknownTag(f"unknown polarized cumulant {tag!r}; expected one of {sorted(POLARIZED_TAGS)}")
    return t


def _phi(letter: Letter, p: int, context: str) -> TracePolynomial:
    return TracePolynomial.word(context, (letter,) * p, normalized=True)


def psi(q: int, letter: Letter = "X", context: str = "U") -> TracePolynomial:
    """``psi_q`` from the closed formula

        psi_q = - sum_{sum i a_i = q} (q + sum a_i - 2)! / (q-1)! prod_i (-phi_i)^{a_i} / a_i!
    """
    if q < 1:
        raise ValueError("q must be positive")
    out = TracePolynomial(context, normalized=True)
    for lam in partitions_of(q):
        mult = {i: lam.count(i) for i in set(lam)}
        k = sum(mult.values())
        c = -Fraction(factorial(q + k - 2), factorial(q - 1) * prod(factorial(a) for a in mult.values()))
        c *= (-1) ** k
        term = TracePolynomial.constant(context, c, normalized=True)
        for i, a in mult.items():
            term = term * _phi(letter, i, context) ** a
        out = out + term
    return out


# ---------------------------------------------------------------------------
# non-crossing partitions and multivariate free cumulants


@lru_cache(maxsize=None)
def noncrossing_partitions(n: int) -> tuple[tuple[tuple[int, ...], ...], ...]:
    """All non-crossing set partitions of ``{0..n-1}``, blocks sorted."""

    def setparts(items):
        if not items:
            yield ()
            return
        first, rest = items[0], items[1:]
        for sub in setparts(rest):
            yield ((first,),) + sub
            for k in range(len(sub)):
                yield sub[:k] + ((first,) + sub[k],) + sub[k + 1 :]

    def crossing(p):
        for x in p:
            for y in p:
                if x is y:
                    continue
                for a in x:
                    for b in x:
                        if a < b and any(a < c < b for c in y) and any(c < a or c > b for c in y):
                            return True
        return False

    out = []
    for p in setparts(tuple(range(n))):
        p = tuple(sorted(tuple(sorted(b)) for b in p))
        if not crossing(p):
            out.append(p)
    return tuple(sorted(set(out)))


def catalan(n: int) -> int:
    return factorial(2 * n) // (factorial(n) * factorial(n + 1))


@lru_cache(maxsize=None)
def _free_cumulant_terms(seq: tuple[Letter, ...], context: str) -> tuple:
    n = len(seq)
    res = TracePolynomial.word(context, seq, normalized=True)
    for pi in noncrossing_partitions(n):
        if len(pi) == 1:
            continue
        term = TracePolynomial.constant(context, Fraction(1), normalized=True)
        for block in pi:
            term = term * free_cumulant(tuple(seq[i] for i in block), context)
        res = res - term
    return tuple(res.terms.items())


def free_cumulant(seq: Sequence[Letter], context: str = "U") -> TracePolynomial:
    """Multivariate free cumulant ``kappa_n(x_1, ..., x_n)`` in normalized traces."""
    seq = tuple(seq)
    if not seq:
        raise ValueError("empty cumulant")
    out = TracePolynomial(context, normalized=True)
    out.terms = dict(_free_cumulant_terms(seq, context))
    return out


def psi_polarized(tag: str, letter: Letter = "A", context: str = "U") -> TracePolynomial:
    """Polarized cumulant ``psi_tag(A, A*)`` as a free cumulant of the tagged sequence."""
    pattern = POLARIZED_TAGS[normalize_tag(tag)]
    return free_cumulant(tuple(adjoint_letter(letter) if s else letter for s in pattern), context)


def cumulant_by_name(name: str, letter: Letter = "A", context: str = "U") -> TracePolynomial:
    """``"2"`` -> psi_2, ``"3t"`` -> psi_3t, ... for the given base letter."""
    if name.isdigit():
        return psi(int(name), letter, context)
    return psi_polarized(name, letter, context)


def moments_from_cumulants(kappas: Mapping[int, object], q: int) -> dict[int, object]:
    """``phi_p = sum_{pi in NC(p)} prod_V kappa_{|V|}`` for p = 1..q (single variable)."""
    out = {}
    for p in range(1, q + 1):
        acc = 0
        for pi in noncrossing_partitions(p):
            t = 1
            for block in pi:
                t = t * kappas[len(block)]
            acc = acc + t
        out[p] = acc
    return out


# ---------------------------------------------------------------------------
# numeric evaluation


@dataclass
class MomentVector:
    """Normalized moments ``phi_p = tr X^p`` (p = 1..q) with optional mixed words.

    ``mixed`` maps words over ``("X", "X*")`` (any rotation) to ``tr`` of the word.
    """

    phi: dict[int, object]
    mixed: dict[Word, object] = field(default_factory=dict)

    def __post_init__(self):
        keys = sorted(self.phi)
        if not keys or keys != list(range(1, len(keys) + 1)):
            raise ValueError("phi must be indexed consecutively from 1")

    @property
    def q(self) -> int:
        return len(self.phi)

    @classmethod
    def from_matrix(cls, X, q: int, mixed_up_to: int = 0) -> "MomentVector":
        import numpy as np
        from itertools import product

        X = np.asarray(X)
        n = X.shape[0]
        Xs = X.conj().T
        phi = {}
        P = np.eye(n, dtype=X.dtype)
        for p in range(1, q + 1):
            P = P @ X
            phi[p] = np.trace(P) / n
        mixed: dict[Word, object] = {}
        for L in range(1, mixed_up_to + 1):
            for pattern in product((False, True), repeat=L):
                M = np.eye(n, dtype=X.dtype)
                for s in pattern:
                    M = M @ (Xs if s else X)
                mixed[tuple("X*" if s else "X" for s in pattern)] = np.trace(M) / n
        return cls(phi, mixed)

    def tr(self, word: Word):
        letters = {x.rstrip("*") for x in word}
        if len(letters) != 1:
            raise MissingMoment(f"word {word!r} mixes matrices")
        root = next(iter(letters))
        std = tuple("X*" if x.endswith("*") else "X" for x in word)
        if not any(x.endswith("*") for x in std):
            p = len(std)
            if p not in self.phi:
                raise MissingMoment(f"phi_{p} not provided")
            return self.phi[p]
        for k in range(len(std)):
            rot = std[k:] + std[:k]
            if rot in self.mixed:
                return self.mixed[rot]
        raise MissingMoment(f"mixed moment tr{word!r} not provided (matrix {root})")


def evaluate_normalized(expr: TracePolynomial, m: MomentVector):
    if not expr.normalized:
        raise ValueError("expected an expression in normalized traces")
    return expr.evaluate(m.tr)


def psi_eval(q: int, m: MomentVector):
    """Numeric ``psi_q`` from the moments ``phi_1..phi_q``."""
    if q > m.q:
        raise MissingMoment(f"psi_{q} needs phi_1..phi_{q}, have {m.q}")
    return evaluate_normalized(psi(q, "X"), m)


def psi_polarized_eval(tag: str, m: MomentVector):
    return evaluate_normalized(psi_polarized(tag, "X"), m)


def specialize_hermitian(expr: TracePolynomial) -> TracePolynomial:
    """Set ``X* = X`` for every letter."""
    return expr.substitute(lambda w: tuple(x.rstrip("*") for x in w))
