import pytest
from hypothesis import given
from hypothesis import strategies as st

from haarlimits.traces import (
    TracePolynomial,
    UnsupportedLetter,
    adjoint_word,
    canonical_monomial,
    canonical_word,
    format_monomial,
    parse_trace_polynomial,
    parse_trace_product,
    parse_word,
)

letters = st.sampled_from(["A", "A*", "B", "B*"])
words = st.lists(letters, min_size=1, max_size=6).map(tuple)


@given(words, st.integers(0, 5))
def test_canonical_word_is_rotation_invariant(w, k):
    k %= len(w)
    for ctx in ("O", "U"):
        assert canonical_word(w[k:] + w[:k], ctx) == canonical_word(w, ctx)


@given(words)
def test_transpose_invariance_only_in_orthogonal_context(w):
    # Tr(X^t) = Tr(X) for real matrices; no such identity for the adjoint-free unitary words
    assert canonical_word(adjoint_word(w), "O") == canonical_word(w, "O")


def test_unitary_context_keeps_orientation():
    w = ("A", "A", "A*")
    assert canonical_word(adjoint_word(w), "U") != canonical_word(w, "U")


def test_parse_words():
    assert parse_word("A O B O^t") == ("A", "O", "B", "O*")
    assert parse_word("AOBOt") == ("A", "O", "B", "O*")
    assert parse_word("J Jt") == ("J", "J*")
    assert parse_word("A^2 B") == ("A", "A", "B")
    with pytest.raises(UnsupportedLetter):
        parse_word("U Ut", "U")


def test_parse_products():
    assert parse_trace_product("Tr(J O) Tr(J O)") == [("J", "O"), ("J", "O")]
    assert parse_trace_product("Tr(A O B Ot)^2") == [("A", "O", "B", "O*")] * 2
    with pytest.raises(UnsupportedLetter):
        parse_trace_product("Tr(A O) + 1")


def test_polynomial_arithmetic_and_format():
    x = TracePolynomial.word("U", ("A",), normalized=True)
    y = TracePolynomial.word("U", ("A", "A"), normalized=True)
    p = y - x * x
    assert str(p) == "(-1)*tr(A)^2 + (1)*tr(A^2)" or str(p) == "(1)*tr(A^2) + (-1)*tr(A)^2"
    assert p == parse_trace_polynomial("tr(A^2) - tr(A)^2")
    assert (p * 0).is_zero()
    assert format_monomial(canonical_monomial([("A",), ("A",)], "U"), "U", True) == "tr(A)^2"


def test_contexts_do_not_mix():
    a = TracePolynomial.word("U", ("A",))
    b = TracePolynomial.word("O", ("A",))
    with pytest.raises(ValueError):
        a + b
    with pytest.raises(ValueError):
        a + TracePolynomial.word("U", ("A",), normalized=True)


def test_adjoint_names_in_polynomials():
    p = parse_trace_polynomial("tr(A*Ad) - tr(A)*tr(Ad)")
    assert p.coefficient([("A", "A*")]) == 1
    assert p.coefficient([("A",), ("A*",)]) == -1
