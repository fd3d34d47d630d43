"""Haar moments: entrywise integrals and the trace contraction engine.

Entrywise moments sum Weingarten coefficients over the index patterns that
survive the deltas.  :func:`contract_traces` does the same for products of
traces in which Haar letters are interleaved with constant matrices: each
Weingarten pattern glues the index slots of the Haar letters into closed
loops, and every loop is a trace of a product of the constant runs it visits.
"""

from __future__ import annotations

from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from typing import Iterable, Sequence

from .algebra import Poly, RationalFunctionN
from .combinatorics import (
    Partition,
    compose,
    coset_type,
    cycle_type,
    inverse,
    pairing_to_involution,
    pairings_of,
)
from .traces import (
    TracePolynomial,
    UnsupportedLetter,
    Word,
    adjoint_word,
    base,
    canonical_monomial,
    canonical_word,
    parse_trace_product,
)
from .weingarten import normalize_group, weingarten_values, wg_table

#: Hard caps on the order n (number of Haar pairs) the engine accepts.
MAX_SYMBOLIC_ORDER = 5
MAX_NUMERIC_ORDER = 6


class ParityViolation(ValueError):
    pass


class OrderTooLarge(ValueError):
    pass


class MixedPrecision(TypeError):
    """Raised when symbolic and numeric N would be mixed in one computation."""


def _check_N(N):
    if N is None:
        return None
    if isinstance(N, bool) or not isinstance(N, int):
        raise MixedPrecision(f"N must be None (symbolic) or a positive int, got {N!r}")
    if N < 1:
        raise ValueError("N must be positive")
    return N


def _check_order(n: int, N):
    cap = MAX_SYMBOLIC_ORDER if N is None else MAX_NUMERIC_ORDER
    if n > cap:
        raise OrderTooLarge(f"order {n} exceeds the engine cap {cap} for {'symbolic' if N is None else 'fixed'} N")


def _combine(group: str, n: int, class_counts: dict[Partition, int], N):
    """``sum_mu count_mu C_mu`` as a RationalFunctionN (symbolic N) or Fraction."""
    if n == 0:
        return RationalFunctionN.const(1) if N is None else Fraction(1)
    if N is None:
        table = wg_table(group, n)
        acc = RationalFunctionN.const(0)
        for mu, c in sorted(class_counts.items()):
            acc = acc + table[mu] * c
        return acc
    vals = weingarten_values(group, n, N)
    return sum((vals[mu] * c for mu, c in sorted(class_counts.items())), Fraction(0))


# ---------------------------------------------------------------------------
# entrywise moments


@dataclass(frozen=True)
class MomentQuery:
    """``E[prod_a G_{i_a j_a}]`` for O(N); for U(N) additionally ``prod_b (U^dagger)_{k_b l_b}``.

    Indices are 1-based.
    """

    group: str
    i: tuple[int, ...]
    j: tuple[int, ...]
    k: tuple[int, ...] = ()
    l: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "group", normalize_group(self.group))
        for name in ("i", "j", "k", "l"):
            object.__setattr__(self, name, tuple(int(x) for x in getattr(self, name)))
        if len(self.i) != len(self.j) or len(self.k) != len(self.l):
            raise ValueError("index tuples i/j (and k/l) must have equal length")
        if self.group == "O" and (self.k or self.l):
            raise ValueError("orthogonal queries take only i and j")
        if any(x < 1 for t in (self.i, self.j, self.k, self.l) for x in t):
            raise ValueError("indices are 1-based")

    def max_index(self) -> int:
        return max((x for t in (self.i, self.j, self.k, self.l) for x in t), default=0)

    def describe(self) -> str:
        if self.group == "O":
            fac = [f"O[{a},{b}]" for a, b in zip(self.i, self.j)]
        else:
            fac = [f"U[{a},{b}]" for a, b in zip(self.i, self.j)]
            fac += [f"Ud[{a},{b}]" for a, b in zip(self.k, self.l)]
        return " ".join(fac) or "1"


def _matching_pairings(idx: Sequence[int]) -> list[tuple[int, ...]]:
    """Involutions of the pairings ``p`` with ``idx[a] == idx[b]`` on every pair."""
    return [
        pairing_to_involution(p) for p in pairings_of(len(idx)) if all(idx[a] == idx[b] for a, b in p)
    ]


def orthogonal_moment(q: MomentQuery, N: int | None = None):
    """``E[O_{i_1 j_1} ... O_{i_2n j_2n}]``; exactly 0 for odd length."""
    N = _check_N(N)
    if q.group != "O":
        raise ValueError("orthogonal_moment needs an orthogonal query")
    zero = RationalFunctionN.const(0) if N is None else Fraction(0)
    m = len(q.i)
    if m % 2:
        return zero
    if N is not None and q.max_index() > N:
        raise ValueError(f"index {q.max_index()} out of range for N = {N}")
    n = m // 2
    _check_order(n, N)
    rows, cols = _matching_pairings(q.i), _matching_pairings(q.j)
    counts: dict[Partition, int] = defaultdict(int)
    for r in rows:
        for c in cols:
            counts[coset_type(r, c)] += 1
    if not counts:
        return zero
    return _combine("O", n, counts, N)


def unitary_moment(q: MomentQuery, N: int | None = None):
    """``E[prod U_{i_a j_a} prod (U^dagger)_{k_b l_b}]``; 0 unless the two counts agree."""
    N = _check_N(N)
    if q.group != "U":
        raise ValueError("unitary_moment needs a unitary query")
    zero = RationalFunctionN.const(0) if N is None else Fraction(0)
    n = len(q.i)
    if n != len(q.k):
        return zero
    if N is not None and q.max_index() > N:
        raise ValueError(f"index {q.max_index()} out of range for N = {N}")
    _check_order(n, N)
    perms = list(permutations(range(n)))
    taus = [t for t in perms if all(q.i[a] == q.l[t[a]] for a in range(n))]
    rhos = [r for r in perms if all(q.j[a] == q.k[r[a]] for a in range(n))]
    counts: dict[Partition, int] = defaultdict(int)
    for t in taus:
        ti = inverse(t)
        for r in rhos:
            counts[cycle_type(compose(ti, r))] += 1
    if not counts:
        return zero
    return _combine("U", n, counts, N)


def moment(q: MomentQuery, N: int | None = None):
    return orthogonal_moment(q, N) if q.group == "O" else unitary_moment(q, N)


# ---------------------------------------------------------------------------
# trace contraction engine


@dataclass
class _Layout:
    """Haar letters of an integrand with the constant runs between them.

    Slot ``2h`` is the left index of Haar letter ``h`` and ``2h + 1`` its right
    index.  ``run_from[2h+1]`` is the constant word read from the right slot
    of ``h`` to the left slot ``run_to[2h+1]`` of the next Haar letter.
    """

    starred: list[bool] = field(default_factory=list)
    run_from: dict[int, Word] = field(default_factory=dict)
    run_to: dict[int, int] = field(default_factory=dict)
    run_back: dict[int, int] = field(default_factory=dict)
    constant_words: list[Word] = field(default_factory=list)


def _layout(group: str, words: Sequence[Word]) -> _Layout:
    haar = {group, group + "*"}
    lay = _Layout()
    for w in words:
        for x in w:
            b = base(x)
            if b in ("O", "U") and b != group:
                raise UnsupportedLetter(f"Haar letter {x!r} in a {group}(N) integrand")
        pos = [k for k, x in enumerate(w) if x in haar]
        if not pos:
            lay.constant_words.append(tuple(w))
            continue
        ids = []
        for k in pos:
            ids.append(len(lay.starred))
            lay.starred.append(w[k].endswith("*"))
        for t, k in enumerate(pos):
            k_next = pos[(t + 1) % len(pos)]
            run = w[k + 1 : k_next] if k_next > k else w[k + 1 :] + w[:k_next]
            src, dst = 2 * ids[t] + 1, 2 * ids[(t + 1) % len(pos)]
            lay.run_from[src] = tuple(run)
            lay.run_to[src] = dst
            lay.run_back[dst] = src
    return lay


def _loops(lay: _Layout, partner: list[int], oriented: bool) -> tuple[tuple[Word, ...], int]:
    """Follow runs and delta edges; return (nonempty loop words, number of empty loops).

    ``partner[s]`` is the slot glued to ``s`` by a delta.  With ``oriented``
    every delta goes from a left slot to a right slot, so runs are always read
    forward.
    """
    nslots = 2 * len(lay.starred)
    seen = [False] * nslots
    words = []
    empty = 0
    for start in range(1, nslots, 2):
        if seen[start]:
            continue
        letters: list[str] = []
        s = start
        forward = True
        while not seen[s]:
            if forward:
                seen[s] = True
                t = lay.run_to[s]
                letters.extend(lay.run_from[s])
            else:
                seen[s] = True
                t = lay.run_back[s]
                letters.extend(adjoint_word(lay.run_from[t]))
            seen[t] = True
            s = partner[t]
            forward = s % 2 == 1
            if oriented and not forward:
                raise AssertionError("unitary delta joined two left slots")
        if letters:
            words.append(tuple(letters))
        else:
            empty += 1
    # every loop contains a right slot, because each run ends on one
    return tuple(words), empty


def _haar_slots(lay: _Layout) -> tuple[list[int], list[int]]:
    """Row and column slot of each Haar letter in the entry ``O_{row,col}``."""
    rows, cols = [], []
    for h, st in enumerate(lay.starred):
        left, right = 2 * h, 2 * h + 1
        rows.append(right if st else left)
        cols.append(left if st else right)
    return rows, cols


def _accumulate_orthogonal(lay: _Layout, context: str, threads: int = 1):
    m = len(lay.starred)
    if m % 2:
        raise ParityViolation(f"odd number ({m}) of orthogonal Haar letters")
    rows, cols = _haar_slots(lay)
    invs = [pairing_to_involution(p) for p in pairings_of(m)] if m else [()]
    nslots = 2 * m

    def gluing(inv_r, inv_c):
        partner = [0] * nslots
        for a in range(m):
            partner[rows[a]] = rows[inv_r[a]]
            partner[cols[a]] = cols[inv_c[a]]
        return partner

    def chunk(idx: range):
        acc: dict = defaultdict(lambda: defaultdict(int))
        for a in idx:
            r = invs[a]
            for c in invs:
                words, empty = _loops(lay, gluing(r, c), oriented=False)
                key = (canonical_monomial(words, context), coset_type(r, c) if m else ())
                acc[key][empty] += 1
        return acc

    return _run_chunks(chunk, len(invs), threads)


def _accumulate_unitary(lay: _Layout, context: str, threads: int = 1):
    plain = [h for h, st in enumerate(lay.starred) if not st]
    star = [h for h, st in enumerate(lay.starred) if st]
    if len(plain) != len(star):
        raise ParityViolation(f"{len(plain)} U letters but {len(star)} U* letters")
    n = len(plain)
    perms = list(permutations(range(n)))
    nslots = 2 * len(lay.starred)

    def chunk(idx: range):
        acc: dict = defaultdict(lambda: defaultdict(int))
        for a in idx:
            tau = perms[a]
            tinv = inverse(tau)
            for rho in perms:
                partner = [0] * nslots
                for x in range(n):
                    u, v1, v2 = plain[x], star[tau[x]], star[rho[x]]
                    partner[2 * u] = 2 * v1 + 1
                    partner[2 * v1 + 1] = 2 * u
                    partner[2 * u + 1] = 2 * v2
                    partner[2 * v2] = 2 * u + 1
                words, empty = _loops(lay, partner, oriented=True)
                key = (canonical_monomial(words, context), cycle_type(compose(tinv, rho)) if n else ())
                acc[key][empty] += 1
        return acc

    return _run_chunks(chunk, len(perms), threads)


def _run_chunks(fn, total: int, threads: int):
    """Split ``range(total)`` into contiguous chunks and merge in index order.

    Counts are integers, so the merged result is identical for every thread count.
    """
    threads = max(1, int(threads or 1))
    if threads == 1 or total < 2:
        return fn(range(total))
    step = -(-total // threads)
    ranges = [range(s, min(total, s + step)) for s in range(0, total, step)]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        parts = list(ex.map(fn, ranges))
    merged: dict = defaultdict(lambda: defaultdict(int))
    for part in parts:
        for key, hist in part.items():
            for k, c in hist.items():
                merged[key][k] += c
    return merged


def contract_traces(
    group: str,
    integrand: str | Sequence[Sequence[str]],
    N: int | None = None,
    threads: int = 1,
) -> TracePolynomial:
    """``E[prod_w Tr(w)]`` over Haar ``O(N)`` or ``U(N)`` as an exact trace polynomial.

    ``integrand`` is a list of words (letters like ``"A"``, ``"O*"``) or a
    string such as ``"Tr(A O B Ot)"``.  The result lives in the constant
    letters, in unnormalized traces, with RationalFunctionN coefficients for
    symbolic ``N`` and Fractions for integer ``N``.
    """
    group = normalize_group(group)
    N = _check_N(N)
    if isinstance(integrand, str):
        words = parse_trace_product(integrand, group)
    else:
        words = [tuple(w) for w in integrand]
    lay = _layout(group, words)
    n_haar = len(lay.starred)
    n = n_haar // 2 if group == "O" else sum(1 for s in lay.starred if not s)
    _check_order(n, N)
    if group == "O":
        acc = _accumulate_orthogonal(lay, group, threads)
    else:
        acc = _accumulate_unitary(lay, group, threads)
    const = canonical_monomial([w for w in lay.constant_words if w], group)
    n_identity = sum(1 for w in lay.constant_words if not w)
    return _assemble(group, n, acc, const, n_identity, N)


def _assemble(group, n, acc, const, n_identity, N) -> TracePolynomial:
    by_mono: dict = defaultdict(dict)
    for (mono, mu), hist in acc.items():
        by_mono[mono][mu] = hist
    out = TracePolynomial(group)
    for mono, per_class in sorted(by_mono.items()):
        if N is None:
            table = wg_table(group, n) if n else None
            coeff = RationalFunctionN.const(0)
            for mu, hist in sorted(per_class.items()):
                poly = sum((Poly.monomial(k, c) for k, c in hist.items()), Poly.const(0))
                w = table[mu] if n else RationalFunctionN.const(1)
                coeff = coeff + w * RationalFunctionN(poly)
            if n_identity:
                coeff = coeff * RationalFunctionN(Poly.monomial(n_identity))
        else:
            vals = weingarten_values(group, n, N) if n else {(): Fraction(1)}
            coeff = Fraction(0)
            for mu, hist in sorted(per_class.items()):
                coeff += vals[mu] * sum(c * Fraction(N) ** k for k, c in hist.items())
            coeff *= Fraction(N) ** n_identity
        if coeff:
            out._add_term(tuple(sorted(mono + const)), coeff)
    return out


@lru_cache(maxsize=4096)
def _contract_cached(group: str, words: tuple[Word, ...], N):
    return contract_traces(group, words, N)


def haar_expectation(group: str, words: Iterable[Sequence[str]], N: int | None = None) -> TracePolynomial:
    """Memoized :func:`contract_traces` keyed on the canonical form of the integrand."""
    group = normalize_group(group)
    canon = tuple(sorted(canonical_word(tuple(w), "U") for w in words))
    return _contract_cached(group, canon, N).copy()
