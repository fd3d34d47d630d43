"""Published reference values, transcribed as data.

These are comparison fixtures only.  The verification routines compare
computed results against them; nothing that computes a result depends on them.
Rational functions use ``*`` for products; trace expressions use ``tr(...)``
with ``Ad`` for the adjoint of ``A``.
"""

from __future__ import annotations

from .algebra import RationalFunctionN, parse_ratfn
from .combinatorics import Partition
from .traces import TracePolynomial, parse_trace_polynomial

_ORTHOGONAL = {
    (1,): "1/N",
    (2,): "-1/(N*(N-1)*(N+2))",
    (1, 1): "(N+1)/(N*(N-1)*(N+2))",
    (3,): "2/((N-2)*(N-1)*N*(N+2)*(N+4))",
    (2, 1): "-1/((N-2)*(N-1)*N*(N+4))",
    (1, 1, 1): "(N^2+3*N-2)/((N-2)*(N-1)*N*(N+2)*(N+4))",
    (4,): "-(5*N+6)/((N-3)*(N-2)*(N-1)*N*(N+1)*(N+2)*(N+4)*(N+6))",
    (3, 1): "2/((N-3)*(N-2)*(N-1)*(N+1)*(N+2)*(N+6))",
    (2, 2): "(N^2+5*N+18)/((N-3)*(N-2)*(N-1)*N*(N+1)*(N+2)*(N+4)*(N+6))",
    (2, 1, 1): "-(N^3+6*N^2+3*N-6)/((N-3)*(N-2)*(N-1)*N*(N+1)*(N+2)*(N+4)*(N+6))",
    (1, 1, 1, 1): "(N+3)*(N^2+6*N+1)/((N-3)*(N-1)*N*(N+1)*(N+2)*(N+4)*(N+6))",
}

_UNITARY = {
    (1,): "1/N",
    (2,): "-1/((N-1)*N*(N+1))",
    (1, 1): "1/((N-1)*(N+1))",
    (3,): "2/((N-2)*(N-1)*N*(N+1)*(N+2))",
    (2, 1): "-1/((N-2)*(N-1)*(N+1)*(N+2))",
    (1, 1, 1): "(N^2-2)/((N-2)*(N-1)*N*(N+1)*(N+2))",
    (4,): "-5/((N-3)*(N-2)*(N-1)*N*(N+1)*(N+2)*(N+3))",
    (3, 1): "(2*N^2-3)/((N-3)*(N-2)*(N-1)*N^2*(N+1)*(N+2)*(N+3))",
    (2, 2): "(N^2+6)/((N-3)*(N-2)*(N-1)*N^2*(N+1)*(N+2)*(N+3))",
    (2, 1, 1): "-1/((N-3)*(N-1)*N*(N+1)*(N+3))",
    (1, 1, 1, 1): "(N^4-8*N^2+6)/((N-3)*(N-2)*(N-1)*N^2*(N+1)*(N+2)*(N+3))",
}


def weingarten_goldens(group: str) -> dict[Partition, RationalFunctionN]:
    src = _ORTHOGONAL if group.upper().startswith("O") else _UNITARY
    return {mu: parse_ratfn(s) for mu, s in src.items()}


WEINGARTEN_TEXT = {"O": _ORTHOGONAL, "U": _UNITARY}

# free cumulants of A and their polarized versions, normalized traces
_CUMULANTS = {
    "1": "tr(A)",
    "2": "tr(A^2) - tr(A)^2",
    "3": "tr(A^3) - 3*tr(A)*tr(A^2) + 2*tr(A)^3",
    "4": "tr(A^4) - 4*tr(A)*tr(A^3) - 2*tr(A^2)^2 + 10*tr(A)^2*tr(A^2) - 5*tr(A)^4",
    "2t": "tr(A*Ad) - tr(A)*tr(Ad)",
    "3t": "tr(A^2*Ad) - tr(Ad)*tr(A^2) - 2*tr(A)*tr(A*Ad) + 2*tr(A)^2*tr(Ad)",
    "4t": (
        "tr(A^3*Ad) - tr(Ad)*tr(A^3) - 3*tr(A)*tr(A^2*Ad) - 2*tr(A^2)*tr(A*Ad)"
        " + 5*tr(A)*tr(Ad)*tr(A^2) + 5*tr(A)^2*tr(A*Ad) - 5*tr(A)^3*tr(Ad)"
    ),
    "4tt": (
        "tr(A^2*Ad^2) - 2*tr(Ad)*tr(A^2*Ad) - 2*tr(A)*tr(A*Ad^2) - tr(A^2)*tr(Ad^2) - tr(A*Ad)^2"
        " + 2*tr(A)^2*tr(Ad^2) + 2*tr(Ad)^2*tr(A^2) + 6*tr(A)*tr(Ad)*tr(A*Ad) - 5*tr(A)^2*tr(Ad)^2"
    ),
    "4t|t": (
        "tr((A*Ad)^2) - 2*tr(Ad)*tr(A^2*Ad) - 2*tr(A)*tr(A*Ad^2) - 2*tr(A*Ad)^2"
        " + tr(Ad)^2*tr(A^2) + tr(A)^2*tr(Ad^2) + 8*tr(A)*tr(Ad)*tr(A*Ad) - 5*tr(A)^2*tr(Ad)^2"
    ),
}

CUMULANT_TEXT = dict(_CUMULANTS)


def cumulant_golden(name: str) -> TracePolynomial:
    return parse_trace_polynomial(_CUMULANTS[name], "U", normalized=True)


# Large-N external-field free energy of O(N) in the cumulants of X = J J^t.
# Each term: (coefficient, [cumulant orders]).
W_ORTHOGONAL_PRINTED = [
    ("1/2", [1]),
    ("-1/4", [2]),
    ("1/3", [3]),
    ("-5/8", [4]),
    ("-1/8", [2, 2]),
]

# Printed F^(U)_n, n = 1..4.  A term is (coefficient, A-side factors, B-side
# factors); a factor is (cumulant name, conjugated) where conjugated means the
# image under A -> A^dagger (resp. B -> B^dagger).  ``swap`` marks formulas
# closed with "+ (A -> A^dagger, B -> B^dagger)", which adds the image of every
# listed term.
F_UNITARY_PRINTED = {
    1: {
        "prefactor": "1",
        "swap": False,
        "terms": [
            ("1", [("1", False)], [("1", False)]),
            ("1", [("1", True)], [("1", True)]),
        ],
    },
    2: {
        "prefactor": "1/2",
        "swap": False,
        "terms": [
            ("1", [("2", False)], [("2", False)]),
            ("2", [("2t", False)], [("2t", False)]),
            ("1", [("2", True)], [("2", True)]),
        ],
    },
    3: {
        "prefactor": "1/3",
        "swap": True,
        "terms": [
            ("1", [("3", False)], [("3", False)]),
            ("3", [("3t", False)], [("3t", False)]),
        ],
    },
    4: {
        "prefactor": "1/4",
        "swap": True,
        "terms": [
            ("1", [("4", False)], [("4", False)]),
            ("4", [("4t", False)], [("4t", False)]),
            ("2", [("4tt", False)], [("4tt", False)]),
            ("1", [("4t|t", False)], [("4t|t", False)]),
            ("-1", [("2", False), ("2", False)], [("2", False), ("2", False)]),
            ("-1", [("2t", False), ("2t", False)], [("2t", False), ("2t", False)]),
            ("-1", [("2t", False), ("2t", False)], [("2", False), ("2", True)]),
            ("-1", [("2", False), ("2", True)], [("2t", False), ("2t", False)]),
            # printed as psi_2(A) psi_2t^2(A) psi_2(B) psi_2t^2(B), which has degree 6
            # in A; the degree-4 reading with single psi_2t factors is used here
            ("-4", [("2", False), ("2t", False)], [("2", False), ("2t", False)]),
        ],
    },
}
