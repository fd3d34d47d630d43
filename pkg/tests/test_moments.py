import itertools
import random
from fractions import Fraction
from functools import lru_cache

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from haarlimits.algebra import RationalFunctionN, parse_ratfn, ratfn_eval
from haarlimits.moments import (
    MixedPrecision,
    MomentQuery,
    OrderTooLarge,
    contract_traces,
    haar_expectation,
    moment,
    orthogonal_moment,
    unitary_moment,
)

N = RationalFunctionN.N()


def test_documented_orthogonal_values():
    assert orthogonal_moment(MomentQuery("O", (1, 1), (1, 1))) == RationalFunctionN.const(1) / N
    q = MomentQuery("O", (1, 1, 2, 2), (1, 1, 2, 2))
    assert orthogonal_moment(q) == parse_ratfn("(N+1)/(N^3+N^2-2*N)")
    assert orthogonal_moment(q, 5) == Fraction(3, 70)
    assert orthogonal_moment(MomentQuery("O", (1,), (1,))) == 0
    assert orthogonal_moment(MomentQuery("O", (1, 1, 1), (1, 1, 1))) == 0


def test_documented_unitary_values():
    q4 = MomentQuery("U", (1, 1), (1, 1), (1, 1), (1, 1))
    assert unitary_moment(q4) == parse_ratfn("2/(N^2+N)")
    q = MomentQuery("U", (1, 2), (1, 2), (1, 2), (1, 2))
    assert unitary_moment(q) == parse_ratfn("1/(N^2-1)")
    # unequal numbers of U and U* vanish
    assert unitary_moment(MomentQuery("U", (1, 1), (1, 1), (1,), (1,))) == 0


def test_errors():
    with pytest.raises(MixedPrecision):
        moment(MomentQuery("O", (1, 1), (1, 1)), 2.5)
    with pytest.raises(ValueError):
        moment(MomentQuery("O", (1, 3), (1, 3)), 2)
    with pytest.raises(OrderTooLarge):
        contract_traces("O", [("J", "O")] * 14)


def test_orthogonality_of_columns():
    # sum_i E[O_i1^2] = 1 and sum_i E[O_i1^2 O_i2^2] = E[(O^t O)_12 ...] consistency at N = 4
    assert sum(moment(MomentQuery("O", (i, i), (1, 1)), 4) for i in range(1, 5)) == 1
    tot = sum(moment(MomentQuery("O", (i, i, j, j), (1, 1, 1, 1)), 4) for i in range(1, 5) for j in range(1, 5))
    assert tot == 1


# ---------------------------------------------------------------------------
# brute-force oracle: expand traces into entries and use the entrywise moments


def _brute(group, words, mats, Nval):
    """E[prod Tr(word)] by summing over all index assignments (real constant matrices)."""
    slots = [(w, k) for w in range(len(words)) for k in range(len(words[w]))]
    haar = "O" if group == "O" else "U"

    @lru_cache(maxsize=None)
    def emom(key):
        i, j, k, l = key
        return moment(MomentQuery(group, i, j, k, l), Nval)

    pos = {s: p for p, s in enumerate(slots)}
    total = Fraction(0)
    # one row index per letter; its column index is the row index of the next letter in the trace
    for rows in itertools.product(range(Nval), repeat=len(slots)):
        idx = []
        for w, word in enumerate(words):
            for k in range(len(word)):
                idx += [rows[pos[(w, k)]], rows[pos[(w, (k + 1) % len(word))]]]
        c = Fraction(1)
        hi, hj, hk, hl = [], [], [], []
        for (w, k) in slots:
            x = words[w][k]
            a, b = idx[2 * pos[(w, k)]], idx[2 * pos[(w, k)] + 1]
            if x == haar:
                hi.append(a + 1)
                hj.append(b + 1)
            elif x == haar + "*":
                if group == "O":  # (O^t)_ab = O_ba
                    hi.append(b + 1)
                    hj.append(a + 1)
                else:  # (U^dagger)_ab
                    hk.append(a + 1)
                    hl.append(b + 1)
            else:
                M = mats[x.rstrip("*")]
                c *= M[b][a] if x.endswith("*") else M[a][b]
            if c == 0:
                break
        if c:
            total += c * emom((tuple(hi), tuple(hj), tuple(hk), tuple(hl)))
    return total


def _eval_traces(poly, mats, Nval):
    def tr(word):
        M = [[Fraction(int(i == j)) for j in range(Nval)] for i in range(Nval)]
        for x in word:
            X = mats[x.rstrip("*")]
            if x.endswith("*"):
                X = [list(r) for r in zip(*X)]
            M = [[sum(M[i][k] * X[k][j] for k in range(Nval)) for j in range(Nval)] for i in range(Nval)]
        return sum(M[i][i] for i in range(Nval))

    p = poly.map_coefficients(lambda m, c: ratfn_eval(c, Nval) if isinstance(c, RationalFunctionN) else c)
    return p.evaluate(tr)


def _rand_mats(names, Nval, seed):
    rng = random.Random(seed)
    return {x: [[Fraction(rng.randint(-3, 3)) for _ in range(Nval)] for _ in range(Nval)] for x in names}


CASES = [
    ("O", [("J", "O"), ("J", "O")], 3),
    ("O", [("A", "O", "B", "O*")], 3),
    ("O", [("A", "O", "B", "O*"), ("A", "O", "B", "O*")], 2),
    ("O", [("J", "O")] * 4, 2),
    ("O", [("A", "O", "O*", "B")], 2),
    ("U", [("A", "U", "B", "U*")], 3),
    ("U", [("A", "U", "B", "U*"), ("A*", "U", "B*", "U*")], 2),
    ("U", [("J", "U"), ("J*", "U*")], 3),
    ("U", [("J", "U"), ("J", "U"), ("J*", "U*"), ("J*", "U*")], 2),
]


@pytest.mark.parametrize("group,words,Nval", CASES)
def test_contraction_engine_matches_brute_force(group, words, Nval):
    names = {x.rstrip("*") for w in words for x in w} - {"O", "U"}
    mats = _rand_mats(sorted(names), Nval, seed=hash((group, len(words))) % 1000)
    ref = _brute(group, words, mats, Nval)
    assert _eval_traces(contract_traces(group, words), mats, Nval) == ref  # symbolic N
    assert _eval_traces(contract_traces(group, words, Nval), mats, Nval) == ref  # integer N


def test_small_N_below_order_matches_brute_force():
    # n = 3 Haar pairs at N = 2 goes through the pseudo-inverse
    words = [("J", "O")] * 6
    mats = _rand_mats(["J"], 2, seed=5)
    assert _eval_traces(contract_traces("O", words, 2), mats, 2) == _brute("O", words, mats, 2)


def test_documented_trace_integrals():
    r = contract_traces("O", "Tr(J O) Tr(J O)")
    assert r.coefficient([("J", "J*")]) == RationalFunctionN.const(1) / N
    r = contract_traces("U", "Tr(J U) Tr(Jd Ud)")
    assert r.coefficient([("J", "J*")]) == RationalFunctionN.const(1) / N
    r = contract_traces("O", "Tr(A O B Ot)")
    assert r.coefficient([("A",), ("B",)]) == RationalFunctionN.const(1) / N
    r = contract_traces("O", "Tr(J O)^4")
    assert r.coefficient([("J", "J*"), ("J", "J*")]) == parse_ratfn("(3*N+3)/(N^3+N^2-2*N)")
    assert r.coefficient([("J", "J*", "J", "J*")]) == parse_ratfn("-6/(N^3+N^2-2*N)")


def test_threads_do_not_change_results():
    words = [("A", "O", "B", "O*")] * 3
    assert contract_traces("O", words, threads=1) == contract_traces("O", words, threads=3)


def test_cache_returns_copies():
    a = haar_expectation("O", [("J", "O"), ("J", "O")])
    a.terms.clear()
    assert haar_expectation("O", [("J", "O"), ("J", "O")])


@settings(max_examples=25)
@given(st.lists(st.integers(1, 3), min_size=2, max_size=4), st.data())
def test_orthogonal_moment_symmetries(i, data):
    # invariance under permuting factors and transposing (O -> O^t has the same law)
    i = i if len(i) % 2 == 0 else i + [1]
    j = data.draw(st.lists(st.integers(1, 3), min_size=len(i), max_size=len(i)))
    perm = data.draw(st.permutations(list(range(len(i)))))
    q = MomentQuery("O", i, j)
    qp = MomentQuery("O", [i[p] for p in perm], [j[p] for p in perm])
    qt = MomentQuery("O", j, i)
    assert orthogonal_moment(q) == orthogonal_moment(qp) == orthogonal_moment(qt)
