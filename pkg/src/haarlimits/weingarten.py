"""Weingarten coefficients ``C([sigma])`` for O(N) and U(N).

Unitary tables use the character expansion

    C([sigma]) = sum_{lam |- n} chi^lam(1)^2 chi^lam(sigma) / (n!^2 s_lam(1^N)).

Orthogonal tables solve ``W G = 1`` for the pairing Gram matrix
``G(p1, p2) = N^{#loops(p1, p2)}``.  Both ``G`` and ``W`` are constant on the
orbits of ``S_2n`` acting diagonally on pairs of pairings, so the system is
solved on one row (``p1 = {(1,2),(3,4),...}``) grouped by class, a
``p(n) x p(n)`` polynomial system handled by fraction-free elimination.

Closed forms are valid for ``N >= n``.  Below that the Gram matrix is
singular and :func:`weingarten_values` switches to its exact Moore-Penrose
inverse, which still reproduces every Haar moment.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from math import factorial
from typing import Iterable, Sequence

from .algebra import Poly, RationalFunctionN, ratfn_eval
from .combinatorics import (
    Partition,
    character,
    compose,
    coset_type,
    cycle_type,
    dim_sn,
    format_partition,
    hook_lengths,
    inverse,
    num_cycles,
    pairing_to_involution,
    pairings_of,
    partitions_of,
)

GROUPS = ("O", "U")
SYMBOLIC_MAX_N = 5


class TableOrderMismatch(ValueError):
    pass


def normalize_group(group: str) -> str:
    g = str(group).strip().upper()
    aliases = {"O": "O", "ORTHOGONAL": "O", "U": "U", "UNITARY": "U"}
    if g not in aliases:
        raise ValueError(f"unknown group {group!r}; expected 'O' or 'U'")
    return aliases[g]


@dataclass(frozen=True)
class WeingartenTable:
    group: str
    n: int
    entries: dict = field(hash=False)

    def __getitem__(self, mu: Partition) -> RationalFunctionN:
        return self.entries[tuple(mu)]

    def classes(self) -> tuple[Partition, ...]:
        return partitions_of(self.n)

    def at(self, N: int) -> dict[Partition, Fraction]:
        return {mu: ratfn_eval(f, N) for mu, f in self.entries.items()}

    def to_json(self, N: int | None = None) -> dict:
        vals = self.entries if N is None else weingarten_values(self.group, self.n, N)
        return {
            "group": self.group,
            "n": self.n,
            "N": N,
            "provenance": "exact",
            "entries": [{"class": format_partition(mu), "value": str(vals[mu])} for mu in self.classes()],
        }


# ---------------------------------------------------------------------------
# unitary


@lru_cache(maxsize=None)
def wg_unitary(n: int) -> WeingartenTable:
    if n < 1:
        raise ValueError("n must be positive")
    nf2 = factorial(n) ** 2
    terms = []
    for lam in partitions_of(n):
        # 1 / s_lam(1^N) = prod(hooks) / prod(N + content)
        den = Poly.const(1)
        for i, row in enumerate(lam):
            for j in range(row):
                den = den * Poly.linear(j - i)
        hooks = 1
        for h in hook_lengths(lam):
            hooks *= h
        terms.append((lam, RationalFunctionN(Poly.const(hooks), den)))
    entries = {}
    for mu in partitions_of(n):
        acc = RationalFunctionN.const(0)
        for lam, inv_dim in terms:
            c = Fraction(dim_sn(lam) ** 2 * character(lam, mu), nf2)
            if c:
                acc = acc + inv_dim * c
        entries[mu] = acc
    return WeingartenTable("U", n, entries)


def _wg_unitary_at(n: int, N: int) -> dict[Partition, Fraction]:
    """Character sum restricted to ``len(lam) <= N`` (the pseudo-inverse for small ``N``)."""
    nf2 = factorial(n) ** 2
    out = {}
    for mu in partitions_of(n):
        acc = Fraction(0)
        for lam in partitions_of(n):
            if len(lam) > N:
                continue
            s = Fraction(1)
            for i, row in enumerate(lam):
                for j in range(row):
                    s *= N + j - i
            hooks = 1
            for h in hook_lengths(lam):
                hooks *= h
            acc += Fraction(dim_sn(lam) ** 2 * character(lam, mu) * hooks, nf2) / s
        out[mu] = acc
    return out


# ---------------------------------------------------------------------------
# orthogonal


@lru_cache(maxsize=None)
def _pairing_data(n: int):
    pairs = pairings_of(2 * n)
    invs = [pairing_to_involution(p) for p in pairs]
    return pairs, invs


@lru_cache(maxsize=None)
def reduced_gram_system(n: int) -> tuple[tuple[Partition, ...], list[list[Poly]]]:
    """Class-reduced Gram matrix ``K[nu][mu] = sum_{p: [p0,p]=mu} N^{loops(p, q_nu)}``."""
    classes = partitions_of(n)
    _, invs = _pairing_data(n)
    p0 = invs[0]
    cls_of = [coset_type(p0, q) for q in invs]
    reps = {}
    for k, c in enumerate(cls_of):
        reps.setdefault(c, k)
    col = {mu: a for a, mu in enumerate(classes)}
    K = []
    for nu in classes:
        q = invs[reps[nu]]
        counts = [[0] * (n + 1) for _ in classes]
        for p, c in zip(invs, cls_of):
            counts[col[c]][len(coset_type(p, q))] += 1
        K.append([Poly(row) for row in counts])
    return classes, K


def bareiss_det(M: list[list]) -> object:
    """Fraction-free determinant over an integral domain with exact division."""
    A = [list(r) for r in M]
    m = len(A)
    if m == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(m - 1):
        if not A[k][k]:
            piv = next((r for r in range(k + 1, m) if A[r][k]), None)
            if piv is None:
                return A[0][0] * 0
            A[k], A[piv] = A[piv], A[k]
            sign = -sign
        for i in range(k + 1, m):
            for j in range(k + 1, m):
                num = A[i][j] * A[k][k] - A[i][k] * A[k][j]
                if isinstance(num, Poly):
                    A[i][j] = num.exact_div(prev if isinstance(prev, Poly) else Poly.const(prev))
                else:
                    A[i][j] = num / prev
        prev = A[k][k]
    return A[m - 1][m - 1] * sign


def _solve_cramer(K: list[list[Poly]], rhs_col: int) -> list[RationalFunctionN]:
    m = len(K)
    det = bareiss_det(K)
    if isinstance(det, Poly) and det.is_zero():
        raise ZeroDivisionError("singular reduced Gram system")
    e = [Poly.const(1 if r == rhs_col else 0) for r in range(m)]
    sol = []
    for c in range(m):
        Kc = [[e[r] if j == c else K[r][j] for j in range(m)] for r in range(m)]
        sol.append(RationalFunctionN(bareiss_det(Kc), det))
    return sol


@lru_cache(maxsize=None)
def wg_orthogonal(n: int) -> WeingartenTable:
    if n < 1:
        raise ValueError("n must be positive")
    if n > SYMBOLIC_MAX_N:
        raise ValueError(f"symbolic orthogonal tables are supported for n <= {SYMBOLIC_MAX_N}")
    classes, K = reduced_gram_system(n)
    sol = _solve_cramer(K, classes.index((1,) * n))
    return WeingartenTable("O", n, dict(zip(classes, sol)))


def wg_table(group: str, n: int) -> WeingartenTable:
    return wg_orthogonal(n) if normalize_group(group) == "O" else wg_unitary(n)


def _solve_fractions(A: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    m = len(A)
    M = [list(map(Fraction, row)) + [Fraction(v)] for row, v in zip(A, b)]
    for k in range(m):
        piv = next((r for r in range(k, m) if M[r][k]), None)
        if piv is None:
            raise ZeroDivisionError("singular system")
        M[k], M[piv] = M[piv], M[k]
        inv = 1 / M[k][k]
        M[k] = [x * inv for x in M[k]]
        for r in range(m):
            if r != k and M[r][k]:
                f = M[r][k]
                M[r] = [x - f * y for x, y in zip(M[r], M[k])]
    return [M[r][m] for r in range(m)]


def _wg_orthogonal_reduced_at(n: int, N: int) -> dict[Partition, Fraction]:
    classes, K = reduced_gram_system(n)
    A = [[Fraction(p(N)) for p in row] for row in K]
    b = [Fraction(1 if nu == (1,) * n else 0) for nu in classes]
    return dict(zip(classes, _solve_fractions(A, b)))


@lru_cache(maxsize=None)
def weingarten_values(group: str, n: int, N: int) -> dict[Partition, Fraction]:
    """Exact ``C([sigma])`` at integer ``N``, valid for every ``N >= 1``."""
    group = normalize_group(group)
    if N < 1:
        raise ValueError("N must be a positive integer")
    return dict(_weingarten_values(group, n, N))


@lru_cache(maxsize=256)
def _weingarten_values(group: str, n: int, N: int) -> dict[Partition, Fraction]:
    if N >= n:
        if group == "U":
            return wg_unitary(n).at(N)
        if n <= SYMBOLIC_MAX_N:
            return wg_orthogonal(n).at(N)
        return _wg_orthogonal_reduced_at(n, N)
    if group == "U":
        return _wg_unitary_at(n, N)
    return gram_inverse_class_values("O", n, N, pseudo=True)


# ---------------------------------------------------------------------------
# full Gram matrices, used for the small-N regime and for verification


def orthogonal_gram_matrix(n: int, N: int) -> list[list[int]]:
    _, invs = _pairing_data(n)
    return [[N ** len(coset_type(p, q)) for q in invs] for p in invs]


def unitary_gram_matrix(n: int, N: int) -> list[list[int]]:
    perms = list(permutations(range(n)))
    return [[N ** num_cycles(compose(inverse(s), t)) for t in perms] for s in perms]


def exact_inverse(M: list[list]) -> list[list[Fraction]]:
    m = len(M)
    A = [list(map(Fraction, row)) + [Fraction(int(i == j)) for j in range(m)] for i, row in enumerate(M)]
    for k in range(m):
        piv = next((r for r in range(k, m) if A[r][k]), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        A[k], A[piv] = A[piv], A[k]
        inv = 1 / A[k][k]
        A[k] = [x * inv for x in A[k]]
        for r in range(m):
            if r != k and A[r][k]:
                f = A[r][k]
                rk = A[k]
                A[r] = [x - f * y for x, y in zip(A[r], rk)]
    return [row[m:] for row in A]


def _matmul(A, B):
    Bt = list(zip(*B))
    return [[sum(a * b for a, b in zip(row, col)) for col in Bt] for row in A]


def _pivot_columns(M: list[list]) -> list[int]:
    A = [list(map(Fraction, r)) for r in M]
    rows, cols = len(A), len(A[0]) if A else 0
    pivots, r = [], 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if A[i][c]), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        for i in range(r + 1, rows):
            if A[i][c]:
                f = A[i][c] / A[r][c]
                A[i] = [x - f * y for x, y in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return pivots


def pseudo_inverse_symmetric(G: list[list], rows: Sequence[int] | None = None) -> list[list[Fraction]]:
    """Exact Moore-Penrose inverse of a symmetric positive semidefinite matrix.

    With ``B`` a maximal set of independent columns, ``C = G[:, B]`` and
    ``M = G[B, B]``: ``G = C M^-1 C^T`` and ``G^+ = C (C^T C)^-1 M (C^T C)^-1 C^T``.
    ``rows`` restricts the output to those rows of ``G^+``.
    """
    B = _pivot_columns(G)
    C = [[Fraction(row[b]) for b in B] for row in G]
    Ct = [list(r) for r in zip(*C)]
    M = [[Fraction(G[i][j]) for j in B] for i in B]
    S = exact_inverse(_matmul(Ct, C))
    left = C if rows is None else [C[r] for r in rows]
    for X in (S, M, S, Ct):
        left = _matmul(left, X)
    return left


class ClassFunctionViolation(AssertionError):
    pass


def gram_inverse_class_values(
    group: str, n: int, N: int, pseudo: bool = False, full: bool = False
) -> dict[Partition, Fraction]:
    """Invert the full Gram matrix at integer ``N`` and read off one value per class.

    Raises :class:`ClassFunctionViolation` if two entries of the same class differ.
    The pseudo-inverse computes only its first row unless ``full`` is set; the
    first row already meets every class.
    """
    group = normalize_group(group)
    if group == "O":
        G = orthogonal_gram_matrix(n, N)
        _, invs = _pairing_data(n)
        labels = [[coset_type(p, q) for q in invs] for p in invs]
    else:
        G = unitary_gram_matrix(n, N)
        perms = list(permutations(range(n)))
        labels = [[cycle_type(compose(inverse(s), t)) for t in perms] for s in perms]
    if pseudo and not full:
        W = pseudo_inverse_symmetric(G, rows=[0])
    else:
        W = pseudo_inverse_symmetric(G) if pseudo else exact_inverse(G)
    out: dict[Partition, Fraction] = {}
    for i, row in enumerate(W):
        for j, w in enumerate(row):
            mu = labels[i][j]
            if mu in out and out[mu] != w:
                raise ClassFunctionViolation(f"class {format_partition(mu)}: {out[mu]} != {w}")
            out.setdefault(mu, w)
    return out


# ---------------------------------------------------------------------------
# contraction recursion


@dataclass
class ContractionReport:
    group: str
    n: int
    relations: int
    distinct: int
    passed: bool
    violation: str | None = None

    def __bool__(self):
        return self.passed


def _lift_pairing(pp: tuple, n: int) -> Iterable[tuple[tuple, int]]:
    """Pairings of ``{0..2n-1}`` that contract to ``pp`` when the last two points are joined."""
    a, b = 2 * n - 2, 2 * n - 1
    yield tuple(sorted(pp + ((a, b),))), 1
    for k, (x, y) in enumerate(pp):
        rest = pp[:k] + pp[k + 1 :]
        yield tuple(sorted(rest + ((x, a), (y, b)))), 0
        yield tuple(sorted(rest + ((x, b), (y, a)))), 0


def _orthogonal_relations(n: int) -> set:
    big = pairings_of(2 * n)
    small = pairings_of(2 * n - 2)
    last = (2 * n - 2, 2 * n - 1)
    rels = set()
    for p1 in big:
        i1 = pairing_to_involution(p1)
        has_last = last in p1
        p1_small = tuple(pr for pr in p1 if pr != last)
        for p2s in small:
            lhs = tuple(sorted((coset_type(i1, pairing_to_involution(p2)), w) for p2, w in _lift_pairing(p2s, n)))
            rhs = coset_type(pairing_to_involution(p1_small), pairing_to_involution(p2s)) if has_last else None
            if n == 1:
                rhs = () if has_last else None
            rels.add((lhs, rhs))
    return rels


def _unitary_relations(n: int) -> set:
    rels = set()
    last = n - 1
    for tau in permutations(range(n)):
        tinv = inverse(tau)
        fixed = tau[last] == last
        tau_s = tau[:last]
        for rho_s in permutations(range(n - 1)):
            lifts = [(rho_s + (last,), 1)]
            for b in range(n - 1):
                r = list(rho_s) + [rho_s[b]]
                r[b] = last
                lifts.append((tuple(r), 0))
            lhs = tuple(sorted((cycle_type(compose(tinv, rho)), w) for rho, w in lifts))
            if fixed:
                rhs = cycle_type(compose(inverse(tau_s), rho_s)) if n > 1 else ()
            else:
                rhs = None
            rels.add((lhs, rhs))
    return rels


def contraction_check(n: int, table_n: WeingartenTable, table_prev: WeingartenTable | None) -> ContractionReport:
    """Verify every contraction relation between orders ``n`` and ``n - 1`` symbolically.

    Joining the last two column indices of an order-``n`` moment and summing
    must reproduce ``delta`` on the last two row indices times the order
    ``n - 1`` moment; coefficient-wise this is one rational-function identity
    per (row pattern, contracted column pattern).
    """
    if table_prev is not None and (table_prev.group != table_n.group or table_prev.n != n - 1):
        raise TableOrderMismatch("tables must be consecutive orders of the same group")
    if table_n.n != n:
        raise TableOrderMismatch(f"table has order {table_n.n}, expected {n}")
    if n >= 2 and table_prev is None:
        raise TableOrderMismatch("order n-1 table required for n >= 2")
    group = table_n.group
    rels = _orthogonal_relations(n) if group == "O" else _unitary_relations(n)
    Nsym = RationalFunctionN.N()
    total = (len(pairings_of(2 * n)) * len(pairings_of(2 * n - 2))) if group == "O" else factorial(n) * factorial(n - 1)
    for lhs, rhs in sorted(rels, key=repr):
        acc = RationalFunctionN.const(0)
        for mu, w in lhs:
            term = table_n[mu]
            acc = acc + (term * Nsym if w else term)
        if rhs is None:
            expected = RationalFunctionN.const(0)
        elif rhs == ():
            expected = RationalFunctionN.const(1)
        else:
            expected = table_prev[rhs]
        if acc != expected:
            desc = " + ".join(("N*" if w else "") + f"C{format_partition(mu)}" for mu, w in lhs)
            want = "0" if rhs is None else "1" if rhs == () else f"C'{format_partition(rhs)}"
            return ContractionReport(group, n, total, len(rels), False, f"{desc} = {want}: got {acc}, expected {expected}")
    return ContractionReport(group, n, total, len(rels), True)
