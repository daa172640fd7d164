"""GRAND decoders: the generic test loop, ORB-type (ORBGRAND, CDF-ORBGRAND),
SGRAND, fine-tuned ORB-type GRAND, and a brute-force ML oracle.

The fast paths test ``theta(y) xor e`` through packed syndromes: the syndrome
of a pattern is the XOR of the column syndromes it flips, and the word is a
codeword iff that equals the syndrome of ``theta(y)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import LlrVector
from .finetune import AdjustmentArray, FineTuner, FlipProbTable, PositionSet, select_positions
from .gf2_codes import LinearCode
from .partition_estimator import PositionEstimator
from .pattern_gen import PatternBasis, RankingVector, SgrandQueue, rank_llrs

DECODED = "decoded"
ABANDONED = "abandoned"


@dataclass
class DecodeResult:
    status: str
    tests_used: int
    codeword: np.ndarray | None = None
    zeta: float = float("nan")
    positions: PositionSet | None = None
    counters: dict = field(default_factory=dict)

    @property
    def decoded(self) -> bool:
        return self.status == DECODED


def op_counters(result: DecodeResult) -> dict:
    """Operation counts of a decode run (membership tests, adjust loops, queue ops)."""
    base = {"membership_tests": result.tests_used, "pattern_generations": 0,
            "adjust_loop_iterations": 0, "queue_pushes": 0, "queue_pops": 0}
    base.update(result.counters)
    base["queue_ops"] = base["queue_pushes"] + base["queue_pops"]
    return base


def _zeta(magnitudes: np.ndarray, flips) -> float:
    return float(np.sum(magnitudes[list(flips)])) if len(flips) else 0.0


def _success(llr: LlrVector, flips, t: int, **kw) -> DecodeResult:
    cw = llr.hard_bits.copy()
    cw[list(flips)] ^= 1
    return DecodeResult(DECODED, t, cw, _zeta(llr.magnitudes, flips), **kw)


def grand_decode(llr: LlrVector, code: LinearCode, patterns, T: int) -> DecodeResult:
    """Reference GRAND loop over an iterable of error-pattern arrays."""
    if T < 1:
        raise ValueError("T must be >= 1")
    t = 0
    for t, e in enumerate(patterns, start=1):
        if t > T:
            t = T
            break
        w = llr.hard_bits ^ np.asarray(e, dtype=np.uint8)
        if code.is_codeword(w):
            return DecodeResult(DECODED, t, w, float(np.sum(llr.magnitudes * e)))
    return DecodeResult(ABANDONED, min(t, T))


def _first_hit(synd: np.ndarray, target: int, support_idx: np.ndarray, order=None, start=0, stop=None):
    rows = support_idx[start:stop] if order is None else support_idx[order]
    hits = np.flatnonzero(np.bitwise_xor.reduce(synd[rows], axis=1) == target)
    return int(hits[0]) if hits.size else -1


def _chunks(T: int, first: int = 32, cap: int = 2048):
    a, size = 0, first
    while a < T:
        b = min(T, a + size)
        yield a, b
        a, size = b, min(size * 2, cap)


class OrbDecoder:
    """ORB-type GRAND over a fixed basis (ORBGRAND, CDF-ORBGRAND, any gamma)."""

    name = "orb"

    def __init__(self, code: LinearCode, basis: PatternBasis, T: int):
        if code.col_synd is None:
            raise ValueError("fast decoders need n - k <= 63")
        if T < 1:
            raise ValueError("T must be >= 1")
        self.code, self.basis, self.T = code, basis, min(T, basis.T)

    def decode(self, llr: LlrVector, ranking: RankingVector | None = None) -> DecodeResult:
        code, basis = self.code, self.basis
        s0 = code.syndrome_int(llr.hard_bits)
        if s0 == 0:
            return _success(llr, (), 1)
        ranking = ranking if ranking is not None else rank_llrs(llr.magnitudes)
        synd = np.append(code.col_synd[ranking.perm], 0)
        for a, b in _chunks(self.T):
            h = _first_hit(synd, s0, basis.support_idx, start=a, stop=b)
            if h >= 0:
                t = a + h
                return _success(llr, ranking.perm[list(basis.supports[t])], t + 1)
        return DecodeResult(ABANDONED, self.T)

    def order_zetas(self, llr: LlrVector) -> np.ndarray:
        """zeta of the first T patterns in test order."""
        ranking = rank_llrs(llr.magnitudes)
        ell = np.append(llr.magnitudes[ranking.perm], 0.0)
        return ell[self.basis.support_idx[: self.T]].sum(axis=1)


def decode_orbgrand(llr: LlrVector, code: LinearCode, basis: PatternBasis, T: int) -> DecodeResult:
    return OrbDecoder(code, basis, T).decode(llr)


decode_cdf_orbgrand = decode_orbgrand


class SgrandDecoder:
    """Soft GRAND: patterns in exact ascending zeta, i.e. ML order."""

    name = "sgrand"

    def __init__(self, code: LinearCode, T: int):
        if code.col_synd is None:
            raise ValueError("fast decoders need n - k <= 63")
        self.code, self.T = code, T

    def decode(self, llr: LlrVector) -> DecodeResult:
        s0 = self.code.syndrome_int(llr.hard_bits)
        q = SgrandQueue(llr.magnitudes, self.code.col_synd)
        for t in range(1, self.T + 1):
            item = q.pop_raw()
            if item is None:
                t -= 1
                break
            s, zeta, pay = item
            if pay == s0:
                res = _success(llr, q.positions(s), t)
                res.counters = {"queue_pushes": q.pushes, "queue_pops": q.pops,
                                "pattern_generations": q.pushes}
                return res
        else:
            t = self.T
        return DecodeResult(ABANDONED, t, counters={"queue_pushes": q.pushes, "queue_pops": q.pops,
                                                    "pattern_generations": q.pushes})

    def order_zetas(self, llr: LlrVector) -> np.ndarray:
        q = SgrandQueue(llr.magnitudes)
        out = []
        for _ in range(self.T):
            item = q.pop_raw()
            if item is None:
                break
            out.append(item[1])
        return np.array(out)


def decode_sgrand(llr: LlrVector, code: LinearCode, T: int) -> DecodeResult:
    return SgrandDecoder(code, T).decode(llr)


def _identity_slots(start: int, stop: int) -> np.ndarray:
    return np.arange(start, stop)


class FineTunedDecoder:
    """ORB-type GRAND re-ordered through the adjustment array.

    Per frame: rank, select D positions among the ``window`` least reliable,
    then test basis patterns in the order the adjustment array assigns.
    """

    name = "ft"

    def __init__(self, code: LinearCode, basis: PatternBasis, estimator: PositionEstimator,
                 D: int, T: int, window: int | None = 16, table: FlipProbTable | None = None):
        if code.col_synd is None:
            raise ValueError("fast decoders need n - k <= 63")
        self.code, self.basis, self.estimator = code, basis, estimator
        self.table = table if table is not None else FlipProbTable(basis)
        self.D, self.T, self.window = D, min(T, basis.T), window

    def prepare(self, llr: LlrVector):
        ranking = rank_llrs(llr.magnitudes)
        pos = select_positions(self.D, llr.magnitudes, ranking, self.basis.gamma,
                               self.table, self.T, self.window)
        tuner = FineTuner(self.basis, self.table, self.estimator, pos.positions,
                          llr.magnitudes, ranking, self.T)
        if np.any(tuner.delta):
            adj = AdjustmentArray(self.T, self.basis.T, tuner.slots_for, tuner.labels, tuner.nsub)
        else:
            # no shift: the base order is already sorted by the exact weights
            adj = AdjustmentArray(self.T, self.basis.T, _identity_slots)
        return ranking, pos, adj

    def decode(self, llr: LlrVector) -> DecodeResult:
        code, basis = self.code, self.basis
        s0 = code.syndrome_int(llr.hard_bits)
        ranking, pos, adj = self.prepare(llr)
        synd = np.append(code.col_synd[ranking.perm], 0)
        for a, b in _chunks(self.T):
            order = [adj.at(t) for t in range(a, b)]
            if order and order[-1] < 0:
                order = [i for i in order if i >= 0]
            if order:
                h = _first_hit(synd, s0, basis.support_idx, order=order)
                if h >= 0:
                    res = _success(llr, ranking.perm[list(basis.supports[order[h]])], a + h + 1,
                                   positions=pos)
                    res.counters = {"adjust_loop_iterations": adj.loops_at[a + h],
                                    "skipped_slots": adj.skipped}
                    return res
            if len(order) < b - a:
                break
        return DecodeResult(ABANDONED, self.T, positions=pos,
                            counters={"adjust_loop_iterations": adj.loops, "skipped_slots": adj.skipped})

    def order(self, llr: LlrVector) -> tuple[np.ndarray, RankingVector, PositionSet, AdjustmentArray]:
        ranking, pos, adj = self.prepare(llr)
        order = np.array([adj.at(t) for t in range(self.T)])
        return order[order >= 0], ranking, pos, adj

    def order_zetas(self, llr: LlrVector) -> np.ndarray:
        order, ranking, _, _ = self.order(llr)
        ell = np.append(llr.magnitudes[ranking.perm], 0.0)
        return ell[self.basis.support_idx[order]].sum(axis=1)


def decode_finetuned(llr: LlrVector, code: LinearCode, basis: PatternBasis, table: FlipProbTable,
                     estimator: PositionEstimator, D: int, T: int, window: int | None = 16) -> DecodeResult:
    return FineTunedDecoder(code, basis, estimator, D, T, window, table).decode(llr)


_CODEBOOKS: dict = {}


def codebook(code: LinearCode) -> np.ndarray:
    key = id(code)
    if key not in _CODEBOOKS:
        if code.k > 20:
            raise ValueError(f"code too large for exhaustive ML (k={code.k} > 20)")
        msgs = ((np.arange(1 << code.k)[:, None] >> np.arange(code.k - 1, -1, -1)) & 1).astype(np.uint8)
        _CODEBOOKS[key] = (code, code.encode(msgs))
    return _CODEBOOKS[key][1]


def ml_oracle(llr: LlrVector, code: LinearCode) -> np.ndarray:
    """Codeword minimising zeta(theta(y) xor w); ties to the lexicographically smallest."""
    words = codebook(code)
    zeta = (words != llr.hard_bits).astype(np.float64) @ llr.magnitudes
    best = np.flatnonzero(zeta == zeta.min())
    if best.size > 1:
        cand = words[best]
        best = best[np.lexsort(cand.T[::-1])]
    return words[best[0]].copy()
