"""Fine-tuning an ORB-type pattern order with a few exact soft values.

Selected positions ``D = (d_1, .., d_D)`` split patterns into ``2^D`` subsets
labelled ``u`` with ``d_1`` as the most significant bit. Replacing the rank
weight of a selected bit by its true reliability shifts the weight of every
pattern in subset ``u`` by ``delta(u)``; patterns are re-positioned
accordingly, lazily, through an adjustment array.

Positions, basis coordinates, basis indices and slots are 0-based; prefix
lengths ``t`` are counts (1..T).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .pattern_gen import GammaWeights, PatternBasis, RankingVector
from .partition_estimator import PositionEstimator


# ---------------------------------------------------------------------------
# subsets and shifts
# ---------------------------------------------------------------------------

def subset_index(e: np.ndarray, positions) -> int:
    """u = bin2dec([e_{d_1}, ..., e_{d_D}]), d_1 most significant."""
    u = 0
    for d in positions:
        u = (u << 1) | int(e[d])
    return u


def subset_labels(basis: PatternBasis, coords) -> np.ndarray:
    """Subset label of every basis pattern, given the basis coordinates r_{d_j} - 1."""
    u = np.zeros(basis.T, dtype=np.int64)
    for j in coords:
        u = (u << 1) | basis.membership[:, j]
    return u


def delta_table(positions, magnitudes: np.ndarray, ranking: RankingVector, gamma: GammaWeights) -> np.ndarray:
    """delta(u) = sum over set bits j of u of (ell_{d_j} - gamma_{r_{d_j}})."""
    D = len(positions)
    shift = np.array([magnitudes[d] - gamma.values[ranking.ranks[d] - 1] for d in positions])
    delta = np.zeros(1 << D)
    for u in range(1 << D):
        for j in range(D):
            if (u >> (D - 1 - j)) & 1:
                delta[u] += shift[j]
    return delta


# ---------------------------------------------------------------------------
# flip probabilities
# ---------------------------------------------------------------------------

class FlipProbTable:
    """p_u(t): share of the first t basis patterns lying in subset u.

    Subset membership of a permuted pattern depends only on the basis
    coordinates of the selected positions, so everything is read off the
    basis prefix counts.
    """

    def __init__(self, basis: PatternBasis):
        self.basis = basis
        self.prefix = basis.prefix_counts
        self._pairs = None

    @property
    def pair_counts(self) -> np.ndarray:
        if self._pairs is None:
            self._pairs = self.basis.pair_counts()
        return self._pairs

    def subset_counts(self, coords, t) -> np.ndarray:
        """Counts per subset among the first t patterns; shape (..., 2^D)."""
        t = np.asarray(t, dtype=np.int64)
        if len(coords) == 1:
            c1 = self.prefix[coords[0], t]
            return np.stack([t - c1, c1], axis=-1)
        if len(coords) == 2:
            j1, j2 = coords
            c1 = self.prefix[j1, t].astype(np.int64)
            c2 = self.prefix[j2, t].astype(np.int64)
            if t.ndim == 0 and int(t) == self.basis.T:
                c12 = np.int64(self.pair_counts[j1, j2])
            else:
                c12 = self.basis.joint_prefix_counts(j1, j2)[t]
            return np.stack([t - c1 - c2 + c12, c2 - c12, c1 - c12, c12], axis=-1)
        raise ValueError("only D in {1, 2} is supported")

    def p(self, coords, t) -> np.ndarray:
        t_arr = np.asarray(t, dtype=np.int64)
        if np.any(t_arr < 1) or np.any(t_arr > self.basis.T):
            raise ValueError(f"prefix length outside 1..{self.basis.T}")
        return self.subset_counts(coords, t_arr) / t_arr[..., None]


def flip_prob(table: FlipProbTable, coords, t) -> np.ndarray:
    return table.p(coords, t)


# ---------------------------------------------------------------------------
# inversion counting
# ---------------------------------------------------------------------------

def count_inversions(values) -> int:
    """Pairs i < j with values[i] > values[j] (ties are not inversions).

    Bottom-up merge sort: at each level every right-half element counts the
    left-half elements of its block that exceed it, all blocks at once.
    """
    a = np.asarray(values)
    n = a.size
    if n < 2:
        return 0
    _, ranks = np.unique(a, return_inverse=True)
    ranks = ranks.astype(np.int64).ravel()
    big = int(ranks.max()) + 1
    size = 1 << (n - 1).bit_length()
    arr = np.full(size, big, dtype=np.int64)
    arr[:n] = ranks
    K = big + 1
    total = 0
    width = 1
    while width < size:
        blocks = arr.reshape(-1, 2 * width)
        nb = blocks.shape[0]
        off = (np.arange(nb, dtype=np.int64) * K)[:, None]
        left = (blocks[:, :width] + off).ravel()
        right = (blocks[:, width:] + off).ravel()
        le = np.searchsorted(left, right, side="right") - np.repeat(np.arange(nb) * width, width)
        total += int((width - le).sum())
        arr = np.sort(blocks, axis=1).ravel()
        width *= 2
    return total


def exact_reverse_pairs(zeta_values, T: int | None = None) -> int:
    z = np.asarray(zeta_values)
    if T is not None:
        z = z[:T]
    if z.size < 2:
        raise ValueError("need at least two patterns")
    return count_inversions(z)


def eta(zeta_values, T: int | None = None) -> float:
    z = np.asarray(zeta_values)
    if T is not None:
        z = z[:T]
    n = z.size
    return exact_reverse_pairs(z) / (n * (n - 1) / 2)


def eta_mean(samples) -> float:
    s = np.asarray(list(samples), dtype=np.float64)
    if s.size == 0:
        raise ValueError("no eta samples")
    return float(s.mean())


def subset_reverse_pairs(weights: np.ndarray, labels: np.ndarray, delta: np.ndarray) -> np.ndarray:
    """Matrix I[u, v] of reverse pairs between subsets for a weight-sorted list.

    Counts t < t' with e(t) in u, e(t') in v and
    weights[t] + delta[u] > weights[t'] + delta[v]. Within a subset the
    shifted weights stay sorted, so both 'earlier than t' and 'lighter than
    e(t)' are prefixes of subset v and the count is a difference of two
    searchsorted results.
    """
    w = np.asarray(weights, dtype=np.float64)
    nsub = delta.size
    idx = [np.nonzero(labels == u)[0] for u in range(nsub)]
    out = np.zeros((nsub, nsub), dtype=np.int64)
    for u in range(nsub):
        if idx[u].size == 0:
            continue
        a = w[idx[u]] + delta[u]
        for v in range(nsub):
            if idx[v].size == 0 or u == v:
                continue
            b = w[idx[v]] + delta[v]
            lighter = np.searchsorted(b, a, side="left")
            earlier = np.searchsorted(idx[v], idx[u], side="left")
            out[u, v] = int(np.maximum(lighter - earlier, 0).sum())
    return out


# ---------------------------------------------------------------------------
# estimated reverse pairs and position selection
# ---------------------------------------------------------------------------

def _estimator_slope(est: PositionEstimator, m):
    m = np.asarray(m, dtype=np.float64)
    if est.mode == "fitted":
        return np.where(m >= est.m_lo, est.density(m), est.offset / est.m_lo)
    return est.density(m)


def overlap_integral(est: PositionEstimator, half_gap: float, upper: float, rtol: float = 1e-4) -> float:
    """int_0^upper O~'(m) O~'(m + half_gap) dm, via m = x^4 to tame m^(-3/4) at 0."""
    if upper <= 0:
        return 0.0

    def f(x):
        m = x**4
        return float(_estimator_slope(est, m) * _estimator_slope(est, m + half_gap)) * 4.0 * x**3

    val, _ = integrate.quad(f, 0.0, upper**0.25, epsrel=rtol, epsabs=0.0, limit=200)
    return val


def estimate_reverse_pairs(positions, magnitudes, ranking: RankingVector, gamma: GammaWeights,
                           estimator: PositionEstimator, table: FlipProbTable, T: int) -> float:
    coords = [int(ranking.ranks[d]) - 1 for d in positions]
    delta = delta_table(positions, magnitudes, ranking, gamma)
    p = table.p(coords, T)
    m_T = estimator.inverse(T)
    total = 0.0
    for u in range(delta.size):
        for v in range(u + 1, delta.size):
            gap = abs(delta[u] - delta[v])
            if gap == 0.0 or p[u] == 0.0 or p[v] == 0.0:
                continue
            total += p[u] * p[v] * gap * overlap_integral(estimator, gap / 2.0, m_T - gap / 2.0)
    return total


@dataclass(frozen=True)
class PositionSet:
    positions: tuple

    def __post_init__(self):
        if len(set(self.positions)) != len(self.positions):
            raise ValueError("positions must be distinct")

    def __len__(self) -> int:
        return len(self.positions)

    def __iter__(self):
        return iter(self.positions)


def _candidates(ranking: RankingVector, window: int | None) -> np.ndarray:
    N = ranking.ranks.size
    M = N if window is None else min(window, N)
    return np.nonzero(ranking.ranks <= M)[0]


def selection_objective(delta: np.ndarray, p: np.ndarray) -> float:
    """sum_{u<v} p_u p_v |delta(u) - delta(v)|."""
    n = delta.size
    return float(sum(p[u] * p[v] * abs(delta[u] - delta[v]) for u in range(n) for v in range(u + 1, n)))


def select_positions(D: int, magnitudes, ranking: RankingVector, gamma: GammaWeights,
                     table: FlipProbTable, T: int, window: int | None = 16) -> PositionSet:
    """Positions maximising sum_{u<v} p_u(T) p_v(T) |delta(u, v)|.

    Candidates are the bits of rank <= window; ties go to the smaller index.
    """
    cand = _candidates(ranking, window)
    shift = magnitudes[cand] - gamma.values[ranking.ranks[cand] - 1]
    coords = ranking.ranks[cand] - 1
    if D == 1:
        p1 = table.prefix[coords, T] / T
        obj = (1.0 - p1) * p1 * np.abs(shift)
        return PositionSet((int(cand[int(np.argmax(obj))]),))
    if D == 2:
        if cand.size < 2:
            raise ValueError("need at least two candidates for D = 2")
        i1, i2 = np.triu_indices(cand.size, k=1)
        c1 = table.prefix[coords[i1], T].astype(np.float64)
        c2 = table.prefix[coords[i2], T].astype(np.float64)
        c12 = table.pair_counts[coords[i1], coords[i2]].astype(np.float64)
        p = np.stack([T - c1 - c2 + c12, c2 - c12, c1 - c12, c12]) / T
        s1, s2 = shift[i1], shift[i2]
        dl = np.stack([np.zeros_like(s1), s2, s1, s1 + s2])
        obj = np.zeros_like(s1)
        for u in range(4):
            for v in range(u + 1, 4):
                obj += p[u] * p[v] * np.abs(dl[u] - dl[v])
        # triu order is lexicographic in (i1, i2), cand is sorted by position
        k = int(np.argmax(obj))
        return PositionSet((int(cand[i1[k]]), int(cand[i2[k]])))
    raise ValueError("only D in {1, 2} is supported")


# ---------------------------------------------------------------------------
# fine-tuned positions and the adjustment array
# ---------------------------------------------------------------------------

class FineTuner:
    """Per-frame state computing fine-tuned slots for basis indices."""

    def __init__(self, basis: PatternBasis, table: FlipProbTable, estimator: PositionEstimator,
                 positions, magnitudes, ranking: RankingVector, T: int):
        self.basis = basis
        self.table = table
        self.estimator = estimator
        self.positions = tuple(positions)
        self.coords = [int(ranking.ranks[d]) - 1 for d in self.positions]
        self.delta = delta_table(self.positions, magnitudes, ranking, basis.gamma)
        self.T = T
        self.labels = subset_labels(basis, self.coords)
        self.nsub = self.delta.size
        if len(self.coords) == 2:
            self._joint = basis.joint_prefix_counts(*self.coords)

    def _p_at(self, v: int, t: np.ndarray) -> np.ndarray:
        pre = self.basis.prefix_counts
        if len(self.coords) == 1:
            c1 = pre[self.coords[0], t]
            cnt = c1 if v == 1 else t - c1
        else:
            j1, j2 = self.coords
            c1, c2, c12 = pre[j1, t].astype(np.int64), pre[j2, t].astype(np.int64), self._joint[t]
            cnt = (t - c1 - c2 + c12, c2 - c12, c1 - c12, c12)[v]
        return cnt / t

    def positions_for(self, idx: np.ndarray) -> np.ndarray:
        """Rounded fine-tuned positions t_FT in 1..T for basis indices ``idx``."""
        idx = np.asarray(idx, dtype=np.int64)
        w = self.basis.weights[idx]
        u = self.labels[idx]
        acc = np.zeros(idx.size)
        Tb = self.basis.T
        for v in range(self.nsub):
            o = self.estimator.value(w + (self.delta[u] - self.delta[v]))
            t_eval = np.clip(np.rint(o), 1, Tb).astype(np.int64)
            acc += self._p_at(v, t_eval) * o
        return np.clip(np.rint(acc), 1, self.T).astype(np.int64)

    def slots_for(self, start: int, stop: int) -> np.ndarray:
        return self.positions_for(np.arange(start, stop)) - 1


def finetuned_position(idx: int, tuner: FineTuner) -> int:
    return int(tuner.positions_for(np.array([idx]))[0])


class AdjustmentArray:
    """Lazily filled array A: slot -> basis index, tested in slot order.

    ``slot_fn(start, stop)`` returns the target slots of basis indices
    start..stop-1. A collision goes to the next free slot forward, or the
    nearest free slot backward when the tail is full.

    Given ``labels`` (subset label per basis index), an empty slot is skipped
    once the latest target of every subset lies beyond it: targets grow with
    the index inside a subset, so no later pattern would land there. Each skip
    appends one slot so that T tests stay available.
    """

    def __init__(self, T: int, n_basis: int, slot_fn, labels=None, nsub: int = 1,
                 chunk: int = 64, margin: int = 1):
        self.T = T
        self.n_basis = n_basis
        self._size = T
        # sparse storage: most frames stop after a few dozen slots
        self._A: dict = {}
        self.idx = 0
        self.loops = 0
        self.skipped = 0
        self.emitted: list = []
        self.loops_at: list = []
        self._cursor = 0
        self._slot_fn = slot_fn
        self._chunk = chunk
        self._buf: list = []
        self._buf_start = 0
        self._labels = None if labels is None else np.asarray(labels).tolist()
        self._last = [-1] * nsub
        self._margin = margin
        # free-slot pointers (path halving), identity when absent: forward
        # with sentinel size, backward shifted by one with sentinel 0
        self._nxt: dict = {}
        self._prv: dict = {}

    @property
    def A(self) -> np.ndarray:
        """Slot contents; -1 is empty, -2 a skipped hole."""
        out = np.full(self._size, -1, dtype=np.int64)
        for s, v in self._A.items():
            out[s] = v
        return out

    @staticmethod
    def _find(ptr: dict, s: int) -> int:
        while True:
            p = ptr.get(s, s)
            if p == s:
                return s
            pp = ptr.get(p, p)
            ptr[s] = pp
            s = pp

    def _target(self, idx: int) -> int:
        off = idx - self._buf_start
        if off >= len(self._buf):
            stop = min(self.n_basis, idx + self._chunk)
            self._chunk = min(self._chunk * 2, 4096)
            self._buf = np.asarray(self._slot_fn(idx, stop), dtype=np.int64).tolist()
            self._buf_start = idx
            off = 0
        return self._buf[off]

    def _occupy(self, s: int, value: int) -> None:
        self._A[s] = value
        self._nxt[s] = s + 1
        self._prv[s + 1] = s

    def place(self, idx: int, slot: int) -> int:
        size = self._size
        slot = min(max(slot, 0), size - 1)
        s = self._find(self._nxt, slot)
        if s >= size:
            s = self._find(self._prv, slot + 1) - 1
            if s < 0:
                raise RuntimeError("adjustment array is full")
        self._occupy(s, idx)
        return s

    def _grow(self) -> None:
        self._size += 1

    def _fill(self, t: int) -> None:
        """Make slot t non-empty, placing patterns or marking it skipped."""
        A = self._A
        while t not in A:
            if self.idx >= self.n_basis:
                # nothing left to land here: later slots keep their order
                self._occupy(t, -2)
                return
            if self._labels is not None and min(self._last) > t + self._margin:
                self._occupy(t, -2)
                self.skipped += 1
                self._grow()
                return
            self.loops += 1
            tgt = self._target(self.idx)
            if self._labels is not None:
                self._last[self._labels[self.idx]] = tgt
            self.place(self.idx, tgt)
            self.idx += 1

    def next_index(self) -> int:
        """Basis index of the next test, or -1 when nothing is left."""
        while self._cursor < self._size:
            t = self._cursor
            self._fill(t)
            self._cursor += 1
            v = self._A[t]
            if v >= 0:
                self.emitted.append(v)
                self.loops_at.append(self.loops)
                return v
        return -1

    def at(self, t: int) -> int:
        """Basis index tested at time t (0-based), or -1 past the end."""
        while len(self.emitted) <= t:
            if len(self.emitted) >= self.T or self.next_index() < 0:
                return -1
        return self.emitted[t]


def adjust_stream(adj: AdjustmentArray):
    """Yield the basis index tested at each time t = 0..T-1."""
    for t in range(adj.T):
        i = adj.at(t)
        if i < 0:
            return
        yield i
