"""Haar sampling on O(N) and U(N) and reproducible Monte Carlo estimators.

Samples come from the QR decomposition of a Gaussian matrix with the phases of
``diag(R)`` moved into ``Q``; without that correction ``Q`` is not Haar
distributed.  Every chunk of samples has its own RNG stream derived from
``(seed, stream, chunk)``, chunk sizes are fixed, and chunk statistics are
merged in a fixed pairwise tree, so results do not depend on thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import permutations
from typing import Callable, Sequence

import numpy as np

from .weingarten import normalize_group

DEFAULT_CHUNK = 20_000
MAX_CHUNKS = 2**32


class RngExhausted(RuntimeError):
    pass


class NonFinite(FloatingPointError):
    pass


@dataclass(frozen=True)
class HaarSampler:
    group: str
    N: int
    seed: int = 0
    stream: int = 0

    def __post_init__(self):
        object.__setattr__(self, "group", normalize_group(self.group))
        if self.N < 1:
            raise ValueError("N must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 bits")

    def generator(self, chunk: int = 0) -> np.random.Generator:
        if chunk >= MAX_CHUNKS:
            raise RngExhausted(f"chunk index {chunk} exceeds the stream budget")
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream), int(chunk)))
        return np.random.Generator(np.random.PCG64(ss))

    def batch(self, size: int, chunk: int = 0) -> np.ndarray:
        """``size`` Haar matrices, shape ``(size, N, N)``, from stream chunk ``chunk``."""
        rng = self.generator(chunk)
        N = self.N
        if self.group == "O":
            Z = rng.standard_normal((size, N, N))
        else:
            Z = (rng.standard_normal((size, N, N)) + 1j * rng.standard_normal((size, N, N))) / math.sqrt(2)
        Q, R = np.linalg.qr(Z)
        d = np.diagonal(R, axis1=-2, axis2=-1)
        ph = d / np.abs(d)
        return Q * ph[:, None, :]

    def raw_qr_batch(self, size: int, chunk: int = 0) -> np.ndarray:
        """Uncorrected QR factors, kept only so tests can show the bias of skipping the fix."""
        rng = self.generator(chunk)
        if self.group == "O":
            Z = rng.standard_normal((size, self.N, self.N))
        else:
            Z = rng.standard_normal((size, self.N, self.N)) + 1j * rng.standard_normal((size, self.N, self.N))
        return np.linalg.qr(Z)[0]


def sample_orthogonal(s: HaarSampler, chunk: int = 0) -> np.ndarray:
    if s.group != "O":
        raise ValueError("sampler is not orthogonal")
    return s.batch(1, chunk)[0]


def sample_unitary(s: HaarSampler, chunk: int = 0) -> np.ndarray:
    if s.group != "U":
        raise ValueError("sampler is not unitary")
    return s.batch(1, chunk)[0]


# ---------------------------------------------------------------------------
# streaming statistics


@dataclass(frozen=True)
class _Stats:
    n: int
    mean: np.ndarray
    m2: np.ndarray

    @classmethod
    def of(cls, x: np.ndarray) -> "_Stats":
        n = x.shape[0]
        mean = x.sum(axis=0) / n
        m2 = ((x - mean) ** 2).sum(axis=0)
        return cls(n, mean, m2)

    def merge(self, other: "_Stats") -> "_Stats":
        n = self.n + other.n
        delta = other.mean - self.mean
        mean = self.mean + delta * (other.n / n)
        m2 = self.m2 + other.m2 + delta**2 * (self.n * other.n / n)
        return _Stats(n, mean, m2)


def _tree_merge(parts: list[_Stats]) -> _Stats:
    while len(parts) > 1:
        nxt = [parts[k].merge(parts[k + 1]) for k in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0]


@dataclass
class EstimatorResult:
    mean: float
    stderr: float
    n: int
    seed: int
    stream: int = 0
    label: str = ""

    def z_score(self, exact: float) -> float:
        if self.stderr == 0:
            return 0.0 if math.isclose(self.mean, exact, rel_tol=1e-12, abs_tol=1e-12) else math.inf
        return (self.mean - exact) / self.stderr

    def agrees(self, exact: float, sigmas: float = 5.0) -> bool:
        return abs(self.z_score(exact)) <= sigmas

    def to_json(self) -> dict:
        return {
            "mean": self.mean,
            "stderr": self.stderr,
            "n": self.n,
            "seed": self.seed,
            "stream": self.stream,
            "label": self.label,
            "provenance": "monte-carlo",
        }


def estimate_many(
    fn: Callable[[np.ndarray], np.ndarray],
    sampler: HaarSampler,
    samples: int,
    chunk_size: int = DEFAULT_CHUNK,
    threads: int = 1,
    labels: Sequence[str] | None = None,
) -> list[EstimatorResult]:
    """Estimate ``E[f(G)]`` for a vector-valued ``f`` sharing the same draws.

    ``fn`` maps a batch ``(size, N, N)`` to shape ``(size,)`` or ``(size, k)``.
    """
    if samples < 2:
        raise ValueError("need at least 2 samples")
    sizes = [chunk_size] * (samples // chunk_size)
    if samples % chunk_size:
        sizes.append(samples % chunk_size)

    def work(c: int) -> _Stats:
        vals = np.asarray(fn(sampler.batch(sizes[c], c)))
        if np.iscomplexobj(vals):
            vals = vals.real
        vals = vals.astype(float)
        if vals.ndim == 1:
            vals = vals[:, None]
        if not np.all(np.isfinite(vals)):
            raise NonFinite("integrand is not finite on some draws")
        return _Stats.of(vals)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(work, range(len(sizes))))
    else:
        parts = [work(c) for c in range(len(sizes))]
    st = _tree_merge(parts)
    var = st.m2 / (st.n - 1)
    se = np.sqrt(var / st.n)
    k = st.mean.shape[0]
    labels = list(labels) if labels is not None else [""] * k
    return [
        EstimatorResult(float(st.mean[q]), float(se[q]), st.n, sampler.seed, sampler.stream, labels[q]) for q in range(k)
    ]


def estimate(fn, sampler: HaarSampler, samples: int, **kw) -> EstimatorResult:
    if samples < 100:
        raise ValueError("estimate needs at least 100 samples")
    return estimate_many(fn, sampler, samples, **kw)[0]


# ---------------------------------------------------------------------------
# integrands


def moment_integrand(q) -> Callable[[np.ndarray], np.ndarray]:
    """Product of entries for a :class:`~haarlimits.moments.MomentQuery` (1-based)."""
    i = [x - 1 for x in q.i]
    j = [x - 1 for x in q.j]
    k = [x - 1 for x in q.k]
    l = [x - 1 for x in q.l]

    def f(G):
        out = np.ones(G.shape[0], dtype=G.dtype)
        for a, b in zip(i, j):
            out = out * G[:, a, b]
        for a, b in zip(k, l):
            out = out * np.conj(G[:, b, a])
        return out

    return f


def moments_integrand(queries) -> Callable[[np.ndarray], np.ndarray]:
    fs = [moment_integrand(q) for q in queries]
    return lambda G: np.stack([f(G) for f in fs], axis=1)


def _adjoint(G: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(G, -1, -2))


def hciz_exponent(A: np.ndarray, B: np.ndarray, kappa: float, N: int) -> Callable[[np.ndarray], np.ndarray]:
    """``kappa N Tr(A G B G^-1)`` per draw."""

    def f(G):
        M = np.einsum("ij,njk,kl,nlm->nim", A, G, B, _adjoint(G), optimize=True)
        return kappa * N * np.trace(M, axis1=1, axis2=2)

    return f


def partition_integrand(A, B, kappa: float, N: int):
    expo = hciz_exponent(np.asarray(A), np.asarray(B), kappa, N)

    def f(G):
        e = expo(G)
        with np.errstate(over="ignore"):
            w = np.exp(e.real if np.iscomplexobj(e) else e)
        if not np.all(np.isfinite(w)):
            raise NonFinite(f"exp(kappa N Tr A G B G^-1) overflows at kappa = {kappa}")
        return w

    return f


def estimate_partition_function(group: str, A, B, kappa: float, samples: int, seed: int = 0, **kw) -> EstimatorResult:
    A = np.asarray(A)
    N = A.shape[0]
    s = HaarSampler(group, N, seed)
    r = estimate(partition_integrand(A, np.asarray(B), kappa, N), s, samples, **kw)
    r.label = f"Z(kappa={kappa})"
    return r


def bergere_eynard_integrand(A, B, kappa: float, N: int):
    """Per draw: ``[|G_ij|^2 e^S for all i, j]`` (row-major) followed by ``e^S``."""
    expo = hciz_exponent(np.asarray(A), np.asarray(B), kappa, N)

    def f(G):
        e = expo(G)
        with np.errstate(over="ignore"):
            w = np.exp(e.real if np.iscomplexobj(e) else e)
        if not np.all(np.isfinite(w)):
            raise NonFinite(f"exp(kappa N Tr A G B G^-1) overflows at kappa = {kappa}")
        P = (G * np.conj(G)).real.reshape(G.shape[0], -1)
        return np.concatenate([P * w[:, None], w[:, None]], axis=1)

    return f


@dataclass
class BergereEynardResult:
    M: list[list[EstimatorResult]]
    Z: EstimatorResult
    column_sums: list[EstimatorResult] = field(default_factory=list)
    row_sums: list[EstimatorResult] = field(default_factory=list)

    def sum_rule_ok(self, sigmas: float = 5.0) -> bool:
        for s in self.column_sums + self.row_sums:
            comb = math.hypot(s.stderr, self.Z.stderr)
            if abs(s.mean - self.Z.mean) > sigmas * comb + 1e-12 * abs(self.Z.mean):
                return False
        return True


def bergere_eynard_all(group: str, A, B, kappa: float, samples: int, seed: int = 0, **kw) -> BergereEynardResult:
    """``M_ij = E[G_ij (G^-1)_ji exp(kappa N Tr A G B G^-1)]`` for all i, j, with Z and the sums.

    ``G_ij (G^-1)_ji`` is ``O_ij^2`` on O(N) and ``|U_ij|^2`` on U(N).
    """
    if samples < 1000:
        raise ValueError("Bergere-Eynard estimates need at least 1000 samples")
    A = np.asarray(A)
    N = A.shape[0]
    s = HaarSampler(group, N, seed)
    base_fn = bergere_eynard_integrand(A, np.asarray(B), kappa, N)

    def full(G):
        v = base_fn(G)
        P = v[:, :-1].reshape(-1, N, N)
        return np.concatenate([v, P.sum(axis=1), P.sum(axis=2)], axis=1)

    labels = [f"M[{i + 1},{j + 1}]" for i in range(N) for j in range(N)] + ["Z"]
    labels += [f"sum_i M[i,{j + 1}]" for j in range(N)] + [f"sum_j M[{i + 1},j]" for i in range(N)]
    res = estimate_many(full, s, samples, labels=labels, **kw)
    M = [res[i * N : (i + 1) * N] for i in range(N)]
    Z = res[N * N]
    cols = res[N * N + 1 : N * N + 1 + N]
    rows = res[N * N + 1 + N :]
    return BergereEynardResult(M, Z, cols, rows)


def estimate_bergere_eynard(
    i: int, j: int, A, B, kappa: float, group: str, samples: int, s: HaarSampler | None = None, **kw
) -> EstimatorResult:
    """Single entry ``M_ij`` (1-based) on the draws of sampler ``s``."""
    if samples < 1000:
        raise ValueError("Bergere-Eynard estimates need at least 1000 samples")
    A = np.asarray(A)
    N = A.shape[0]
    s = s or HaarSampler(group, N)
    if normalize_group(group) != s.group or s.N != N:
        raise ValueError("sampler does not match group and dimension")
    fn = bergere_eynard_integrand(A, np.asarray(B), kappa, N)
    col = (i - 1) * N + (j - 1)
    r = estimate(lambda G: fn(G)[:, col], s, samples, **kw)
    r.label = f"M[{i},{j}]"
    return r


# ---------------------------------------------------------------------------
# sampler diagnostics


def det_sign_balance(s: HaarSampler, samples: int, sigmas: float = 5.0) -> tuple[bool, EstimatorResult]:
    """Frequency of ``det = -1`` on O(N) must be 1/2 (both components are reached)."""
    if s.group != "O":
        raise ValueError("det sign balance is an O(N) test")
    r = estimate(lambda G: (np.linalg.det(G) < 0).astype(float), s, samples)
    r.label = "P(det = -1)"
    return r.agrees(0.5, sigmas), r


def invariance_check(
    s: HaarSampler, samples: int, G0: np.ndarray, fns, side: str = "left", sigmas: float = 5.0
) -> list[tuple[bool, EstimatorResult]]:
    """Paired comparison of ``f(G0 G)`` (or ``f(G G0)``) against ``f(G)`` per test function."""

    def diff(G):
        H = G0 @ G if side == "left" else G @ G0
        cols = [f(H) - f(G) for f in fns]
        return np.stack([np.real(c) for c in cols], axis=1)

    res = estimate_many(diff, s, samples)
    return [(r.agrees(0.0, sigmas), r) for r in res]

# ---------------------------------------------------------------------------
# moment battery


def _canonical_orthogonal(pairs) -> tuple:
    """Orbit representative of a multiset of (row, col) indices under row/column relabeling."""
    best = None
    for perm in permutations(range(len(pairs))):
        seq = [pairs[p] for p in perm]
        rmap, cmap = {}, {}
        out = []
        for r, c in seq:
            rmap.setdefault(r, len(rmap))
            cmap.setdefault(c, len(cmap))
            out.append((rmap[r], cmap[c]))
        t = tuple(out)
        if best is None or t < best:
            best = t
    return best


def _even_blocks_rgs(m: int) -> list[tuple[int, ...]]:
    """Set partitions of ``m`` positions into blocks of even size, as restricted growth strings."""
    out = []

    def rec(prefix, k):
        if len(prefix) == m:
            counts = [prefix.count(v) for v in range(k)]
            if all(c % 2 == 0 for c in counts):
                out.append(tuple(prefix))
            return
        for v in range(k + 1):
            rec(prefix + [v], max(k, v + 1))

    rec([], 0)
    return out


def _rgs(m: int) -> list[tuple[int, ...]]:
    out = []

    def rec(prefix, k):
        if len(prefix) == m:
            out.append(tuple(prefix))
            return
        for v in range(k + 1):
            rec(prefix + [v], max(k, v + 1))

    rec([], 0)
    return out


def orthogonal_battery(max_n: int = 3) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Representatives of all non-vanishing orthogonal moments with ``2n <= 2 max_n`` factors."""
    seen = {}
    for n in range(1, max_n + 1):
        m = 2 * n
        pats = _even_blocks_rgs(m)
        for i in pats:
            for j in pats:
                key = _canonical_orthogonal(list(zip(i, j)))
                if key not in seen:
                    seen[key] = (tuple(x + 1 for x, _ in key), tuple(y + 1 for _, y in key))
    return sorted(seen.values(), key=lambda t: (len(t[0]), t))


def _canonical_unitary(i, j, k, l) -> tuple:
    n = len(i)
    best = None
    for p in permutations(range(n)):
        for q in permutations(range(n)):
            rmap, cmap = {}, {}
            u = []
            for a in p:
                rmap.setdefault(i[a], len(rmap))
                cmap.setdefault(j[a], len(cmap))
                u.append((rmap[i[a]], cmap[j[a]]))
            v = []
            for b in q:
                # (U^dagger)_{k l} = conj(U_{l k}): l is a row index, k a column index of U
                rmap.setdefault(l[b], len(rmap))
                cmap.setdefault(k[b], len(cmap))
                v.append((rmap[l[b]], cmap[k[b]]))
            t = (tuple(u), tuple(v))
            if best is None or t < best:
                best = t
    return best


def unitary_battery(max_n: int = 3) -> list[tuple[tuple[int, ...], ...]]:
    """Representatives of all non-vanishing unitary moments with ``n <= max_n`` pairs ``U, U*``."""
    seen = {}
    for n in range(1, max_n + 1):
        for i in _rgs(n):
            for j in _rgs(n):
                for p in set(permutations(i)):
                    for q in set(permutations(j)):
                        l, k = p, q
                        key = _canonical_unitary(i, j, k, l)
                        if key in seen:
                            continue
                        u, v = key
                        seen[key] = (
                            tuple(r + 1 for r, _ in u),
                            tuple(c + 1 for _, c in u),
                            tuple(c + 1 for _, c in v),
                            tuple(r + 1 for r, _ in v),
                        )
    return sorted(seen.values(), key=lambda t: (len(t[0]), t))
