"""Partitions, permutations, pairings and symmetric-group characters.

Conventions: a partition is a weakly decreasing tuple of positive ints; a
permutation is a tuple of 0-based images; a pairing of ``{0..2n-1}`` is a
sorted tuple of ``(i, j)`` pairs with ``i < j``.  Text forms are 1-based.
"""

from __future__ import annotations

import re
from collections import Counter
from fractions import Fraction
from functools import lru_cache
from math import factorial, prod
from typing import Iterator, Sequence

from .algebra import Poly, RationalFunctionN

Partition = tuple[int, ...]
Permutation = tuple[int, ...]
Pairing = tuple[tuple[int, int], ...]


class OddSize(ValueError):
    pass


class SizeMismatch(ValueError):
    pass


class WeightMismatch(ValueError):
    pass


def is_partition(parts: Sequence[int]) -> bool:
    return all(p >= 1 for p in parts) and all(a >= b for a, b in zip(parts, parts[1:]))


def as_partition(parts: Sequence[int]) -> Partition:
    """Sort and validate."""
    out = tuple(sorted((int(p) for p in parts), reverse=True))
    if any(p < 1 for p in out):
        raise ValueError(f"partition parts must be positive: {parts!r}")
    return out


@lru_cache(maxsize=None)
def partitions_of(n: int) -> tuple[Partition, ...]:
    """All partitions of ``n`` in reverse lexicographic order, ``(n,)`` first and ``(1,)*n`` last."""
    if n < 1:
        raise ValueError("n must be positive")

    def gen(rest: int, cap: int) -> Iterator[Partition]:
        if rest == 0:
            yield ()
            return
        for first in range(min(rest, cap), 0, -1):
            for tail in gen(rest - first, first):
                yield (first,) + tail

    return tuple(gen(n, n))


def format_partition(p: Partition) -> str:
    return "[" + ",".join(map(str, p)) + "]"


def parse_partition(text: str) -> Partition:
    """Parse ``[2,1,1]``, ``2,1,1`` or exponent form ``1^2 2``."""
    s = text.strip()
    if "^" in s or (" " in s and "," not in s):
        parts: list[int] = []
        for tok in s.replace("[", "").replace("]", "").split():
            m = re.fullmatch(r"(\d+)(?:\^(\d+))?", tok)
            if not m:
                raise ValueError(f"bad partition token {tok!r}")
            parts += [int(m.group(1))] * int(m.group(2) or 1)
        return as_partition(parts)
    s = s.strip("[]() ")
    if not s:
        raise ValueError("empty partition")
    return as_partition(int(x) for x in s.split(","))


def multiplicities(p: Partition) -> Counter:
    return Counter(p)


def centralizer_size(mu: Partition) -> int:
    """``prod_k k^{m_k} m_k!`` -- order of the centralizer of a permutation of type ``mu``."""
    return prod(k**m * factorial(m) for k, m in Counter(mu).items())


def class_size(mu: Partition) -> int:
    return factorial(sum(mu)) // centralizer_size(mu)


# ---------------------------------------------------------------------------
# permutations


def cycles(perm: Permutation) -> list[tuple[int, ...]]:
    seen = [False] * len(perm)
    out = []
    for start in range(len(perm)):
        if seen[start]:
            continue
        cyc = []
        k = start
        while not seen[k]:
            seen[k] = True
            cyc.append(k)
            k = perm[k]
        out.append(tuple(cyc))
    return out


def cycle_type(perm: Permutation) -> Partition:
    if sorted(perm) != list(range(len(perm))):
        raise ValueError(f"not a permutation: {perm!r}")
    return as_partition(len(c) for c in cycles(perm))


def compose(p: Permutation, q: Permutation) -> Permutation:
    """``(p . q)(a) = p(q(a))``."""
    return tuple(p[q[a]] for a in range(len(q)))


def inverse(p: Permutation) -> Permutation:
    out = [0] * len(p)
    for a, b in enumerate(p):
        out[b] = a
    return tuple(out)


def num_cycles(perm: Permutation) -> int:
    return len(cycles(perm))


# ---------------------------------------------------------------------------
# pairings


def pairings_of(two_n: int) -> list[Pairing]:
    """All perfect matchings of ``{0..two_n-1}``.

    The smallest unmatched element is paired with each larger element in
    increasing order, recursively; the resulting list order is the canonical
    index order used for Gram matrices.
    """
    if two_n % 2 or two_n < 0:
        raise OddSize(f"cannot pair an odd number of elements ({two_n})")
    return list(_pairings(tuple(range(two_n))))


def _pairings(items: tuple[int, ...]) -> Iterator[Pairing]:
    if not items:
        yield ()
        return
    first, rest = items[0], items[1:]
    for k, partner in enumerate(rest):
        for tail in _pairings(rest[:k] + rest[k + 1 :]):
            yield ((first, partner),) + tail


def pairing_to_involution(p: Pairing) -> Permutation:
    inv = [0] * (2 * len(p))
    for a, b in p:
        inv[a], inv[b] = b, a
    return tuple(inv)


def involution_to_pairing(inv: Sequence[int]) -> Pairing:
    return tuple(sorted((a, b) for a, b in enumerate(inv) if a < b))


def relabel_pairing(p: Pairing, pi: Permutation) -> Pairing:
    """Image of ``p`` under the relabeling ``a -> pi(a)``."""
    return tuple(sorted(tuple(sorted((pi[a], pi[b]))) for a, b in p))


def coset_type(inv1: Sequence[int], inv2: Sequence[int]) -> Partition:
    """Half cycle type of the product of two fixed-point-free involutions."""
    m = len(inv1)
    seen = [False] * m
    lengths = []
    for start in range(m):
        if seen[start]:
            continue
        length = 0
        k = start
        while not seen[k]:
            seen[k] = True
            k = inv1[inv2[k]]
            length += 1
        lengths.append(length)
    lengths.sort(reverse=True)
    # cycles come in equal-length pairs {c, p1(c)}
    return tuple(lengths[::2])


def pairing_product_class(p1: Pairing, p2: Pairing) -> Partition:
    """Class ``[sigma]`` of ``n`` with ``p1 . p2 = sigma . sigma'`` on disjoint supports."""
    if len(p1) != len(p2):
        raise SizeMismatch("pairings on different ground sets")
    for p in (p1, p2):
        if sorted(x for pr in p for x in pr) != list(range(2 * len(p))):
            raise ValueError(f"not a perfect matching of 0..{2 * len(p) - 1}: {p!r}")
    return coset_type(pairing_to_involution(p1), pairing_to_involution(p2))


def format_pairing(p: Pairing) -> str:
    return "{" + ",".join(f"({a + 1},{b + 1})" for a, b in p) + "}"


# ---------------------------------------------------------------------------
# characters and dimensions


def _beta_set(lam: Partition, length: int) -> tuple[int, ...]:
    return tuple(lam[i] + (length - 1 - i) if i < len(lam) else (length - 1 - i) for i in range(length))


@lru_cache(maxsize=None)
def character(lam: Partition, mu: Partition) -> int:
    """Irreducible character ``chi^lam`` at the class ``mu`` (Murnaghan-Nakayama).

    Border strips of ``lam`` are removed through its beta-set: removing a strip
    of length ``k`` moves one bead from ``x`` to the empty position ``x - k``
    with sign ``(-1)^{beads strictly between}``.
    """
    lam, mu = tuple(lam), tuple(mu)
    if sum(lam) != sum(mu):
        raise WeightMismatch(f"|{lam}| != |{mu}|")
    if not mu:
        return 1
    k, rest = mu[0], mu[1:]
    beta = _beta_set(lam, len(lam))
    beads = set(beta)
    total = 0
    for x in beta:
        y = x - k
        if y < 0 or y in beads:
            continue
        between = sum(1 for z in beta if y < z < x)
        new = sorted((beads - {x}) | {y}, reverse=True)
        length = len(new)
        shape = tuple(b - (length - 1 - i) for i, b in enumerate(new))
        shape = tuple(p for p in shape if p > 0)
        total += (-1) ** between * character(shape, rest)
    return total


def hook_lengths(lam: Partition) -> list[int]:
    conj = conjugate(lam)
    return [lam[i] - j + conj[j] - i - 1 for i in range(len(lam)) for j in range(lam[i])]


def conjugate(lam: Partition) -> Partition:
    return tuple(sum(1 for p in lam if p > j) for j in range(lam[0])) if lam else ()


def dim_sn(lam: Partition) -> int:
    """Dimension of the irreducible ``S_n``-module ``lam`` (hook length formula)."""
    return factorial(sum(lam)) // prod(hook_lengths(lam))


def dim_gl(lam: Partition) -> RationalFunctionN:
    """``s_lam(1^N)`` as a polynomial in ``N``: product over cells of ``(N + j - i) / hook``."""
    num = Poly.const(1)
    for i, row in enumerate(lam):
        for j in range(row):
            num = num * Poly.linear(j - i)
    return RationalFunctionN(num * Fraction(1, prod(hook_lengths(lam))))
