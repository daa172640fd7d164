"""Ordered error-pattern generation.

Conventions: coordinates and basis indices are 0-based. A basis pattern is a
support over *basis coordinates* ``j = rank - 1``; after ranking, basis
coordinate ``j`` maps to the channel position ``perm[j]`` holding the
``(j+1)``-th least reliable bit.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field

import numpy as np

from .channel import folded_inv_cdf


# ---------------------------------------------------------------------------
# weights and rankings
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GammaWeights:
    values: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("gamma must be a non-empty vector")
        if np.any(v <= 0):
            raise ValueError("gamma entries must be positive")
        if np.any(np.diff(v) < 0):
            raise ValueError("gamma must be sorted non-decreasing")
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.size

    @property
    def is_orb(self) -> bool:
        return bool(np.array_equal(self.values, np.arange(1, self.values.size + 1)))


def gamma_orbgrand(N: int) -> GammaWeights:
    return GammaWeights(np.arange(1, N + 1, dtype=np.float64), name="orb")


def gamma_cdf(N: int, sigma: float) -> GammaWeights:
    vals = [folded_inv_cdf(i / (N + 1), sigma) for i in range(1, N + 1)]
    return GammaWeights(np.array(vals), name="cdf")


@dataclass(frozen=True, eq=False)
class RankingVector:
    """``ranks[i]`` is the 1-based ascending rank of bit i; ``perm[j]`` the bit of rank j+1."""

    ranks: np.ndarray
    perm: np.ndarray


def rank_llrs(magnitudes: np.ndarray) -> RankingVector:
    perm = np.argsort(np.asarray(magnitudes), kind="stable")
    ranks = np.empty_like(perm)
    ranks[perm] = np.arange(1, perm.size + 1)
    return RankingVector(ranks=ranks, perm=perm)


# ---------------------------------------------------------------------------
# offline basis
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PatternBasis:
    """First ``T`` basis patterns in non-decreasing weight order.

    ``support_idx`` is the supports padded with the sentinel ``N`` so that a
    gather from any length-(N+1) array whose last entry is neutral reduces
    row-wise. ``prefix_counts[j, t]`` counts patterns among the first ``t``
    that flip basis coordinate ``j``.
    """

    gamma: GammaWeights
    supports: list
    weights: np.ndarray
    support_idx: np.ndarray = field(repr=False)
    membership: np.ndarray = field(repr=False)
    prefix_counts: np.ndarray = field(repr=False)

    @property
    def N(self) -> int:
        return len(self.gamma)

    @property
    def T(self) -> int:
        return len(self.supports)

    def __len__(self) -> int:
        return self.T

    def joint_prefix_counts(self, j1: int, j2: int) -> np.ndarray:
        """Counts of patterns flipping both coordinates, prefix lengths 0..T."""
        both = self.membership[:, j1] & self.membership[:, j2]
        out = np.zeros(self.T + 1, dtype=np.int64)
        np.cumsum(both, out=out[1:])
        return out

    def pair_counts(self) -> np.ndarray:
        """(N, N) matrix of patterns (among all T) flipping both j and j'."""
        m = self.membership.astype(np.int32)
        return m.T @ m


def _distinct_partitions(w: int, max_part: int):
    """Partitions of w into distinct parts <= max_part, parts in decreasing order."""
    if w == 0:
        yield ()
        return
    for first in range(min(w, max_part), 0, -1):
        for rest in _distinct_partitions(w - first, first - 1):
            yield (first,) + rest


def _orb_supports(N: int, T: int) -> list:
    out: list = []
    w = 0
    max_w = N * (N + 1) // 2
    while len(out) < T and w <= max_w:
        cls = [tuple(p - 1 for p in reversed(parts)) for parts in _distinct_partitions(w, N)]
        cls.sort(key=lambda s: (len(s), s))
        out.extend(cls)
        w += 1
    return out[:T]


def _frontier_supports(gamma: np.ndarray, T: int) -> list:
    """Best-first search keyed by (weight, cardinality, support).

    Each non-empty support S with maximum j is generated once, from S - {j}
    when j-1 is in S (append) or from S with j replaced by j-1 (replace).
    Keys never decrease from parent to child, so pops are globally sorted.
    """
    N = gamma.size

    def weight(s):
        return float(np.sum(gamma[list(s)])) if s else 0.0

    out = [()]
    heap = [(weight((0,)), 1, (0,))]
    while heap and len(out) < T:
        _, card, s = heapq.heappop(heap)
        out.append(s)
        j = s[-1]
        if j + 1 < N:
            app = s + (j + 1,)
            rep = s[:-1] + (j + 1,)
            heapq.heappush(heap, (weight(app), card + 1, app))
            heapq.heappush(heap, (weight(rep), card, rep))
    return out


def build_basis(gamma: GammaWeights, T: int, method: str = "auto") -> PatternBasis:
    N = len(gamma)
    if T <= 0:
        raise ValueError("basis size must be positive")
    if N < 63 and T > 2**N:
        raise ValueError(f"T={T} exceeds 2^N={2**N}")
    if method == "auto":
        method = "partition" if gamma.is_orb else "frontier"
    if method == "partition":
        if not gamma.is_orb:
            raise ValueError("partition enumeration needs gamma = [1..N]")
        supports = _orb_supports(N, T)
    elif method == "frontier":
        supports = _frontier_supports(gamma.values, T)
    else:
        raise ValueError(f"unknown method {method!r}")

    T = len(supports)
    width = max(1, max(len(s) for s in supports))
    support_idx = np.full((T, width), N, dtype=np.int64)
    membership = np.zeros((T, N), dtype=bool)
    for t, s in enumerate(supports):
        support_idx[t, : len(s)] = s
        membership[t, list(s)] = True
    g_pad = np.append(gamma.values, 0.0)
    # sum in ascending coordinate order, same as the frontier search
    weights = np.array([float(np.sum(gamma.values[list(s)])) if s else 0.0 for s in supports])
    assert np.allclose(weights, g_pad[support_idx].sum(axis=1))
    prefix = np.zeros((N, T + 1), dtype=np.int32)
    np.cumsum(membership.T, axis=1, out=prefix[:, 1:])
    return PatternBasis(gamma=gamma, supports=supports, weights=weights,
                        support_idx=support_idx, membership=membership, prefix_counts=prefix)


def permute_pattern(t: int, basis: PatternBasis, ranking: RankingVector) -> np.ndarray:
    """e_i(t) = basis_e_{r_i}(t): flip position perm[j] for each basis coordinate j."""
    e = np.zeros(basis.N, dtype=np.uint8)
    e[ranking.perm[list(basis.supports[t])]] = 1
    return e


def pattern_weight(e: np.ndarray, gamma: GammaWeights, ranking: RankingVector) -> float:
    """Gamma(e) = sum_i gamma_{r_i} e_i."""
    return float(np.sum(gamma.values[ranking.ranks - 1] * e))


# ---------------------------------------------------------------------------
# SGRAND
# ---------------------------------------------------------------------------

class SgrandQueue:
    """Generates all error patterns in non-decreasing ``zeta = sum ell_i e_i``.

    Optional ``payload`` (one int per position) is XOR-accumulated along each
    pattern; the decoder uses it to carry syndromes.
    """

    def __init__(self, magnitudes: np.ndarray, payload: np.ndarray | None = None):
        self.order = np.argsort(np.asarray(magnitudes), kind="stable")
        self.sorted_ell = np.asarray(magnitudes, dtype=np.float64)[self.order].tolist()
        self.N = len(self.sorted_ell)
        self.payload = None if payload is None else [int(v) for v in np.asarray(payload)[self.order]]
        self._heap: list = [(0.0, 0, (), 0)]
        self._seq = itertools.count(1)
        self.pushes = 1
        self.pops = 0

    def __iter__(self):
        return self

    def __next__(self):
        item = self.pop()
        if item is None:
            raise StopIteration
        return item

    def pop_raw(self):
        """Next (sorted-order support, zeta, payload) or None when exhausted."""
        if not self._heap:
            return None
        zeta, _, s, pay = heapq.heappop(self._heap)
        self.pops += 1
        j = s[-1] if s else -1
        if j + 1 < self.N:
            ell = self.sorted_ell
            nj = j + 1
            extra = 0 if self.payload is None else self.payload[nj]
            heapq.heappush(self._heap, (zeta + ell[nj], next(self._seq), s + (nj,), pay ^ extra))
            self.pushes += 1
            if s:
                rep_pay = pay if self.payload is None else pay ^ self.payload[j] ^ extra
                heapq.heappush(self._heap, (zeta - ell[j] + ell[nj], next(self._seq), s[:-1] + (nj,), rep_pay))
                self.pushes += 1
        return s, zeta, pay

    def positions(self, s) -> tuple:
        return tuple(int(self.order[i]) for i in s)

    def pop(self):
        """Next (positions, zeta, payload) or None when all 2^N are emitted."""
        item = self.pop_raw()
        if item is None:
            return None
        s, zeta, pay = item
        return self.positions(s), zeta, pay

    def pattern(self, positions) -> np.ndarray:
        e = np.zeros(self.N, dtype=np.uint8)
        e[list(positions)] = 1
        return e


def sgrand_init(magnitudes: np.ndarray, payload: np.ndarray | None = None) -> SgrandQueue:
    return SgrandQueue(magnitudes, payload)


def sgrand_next(queue: SgrandQueue):
    return queue.pop()
