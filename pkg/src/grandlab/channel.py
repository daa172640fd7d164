"""BPSK over AWGN: transmission, LLRs, and the folded-normal law of |LLR|.

Eb/N0 convention: unit symbol energy, Eb = Es / R and N0 = 2 sigma^2, so
``sigma^2 = 1 / (2 R 10^(EbN0/10))``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

_SQRT2PI = np.sqrt(2.0 * np.pi)


@dataclass(frozen=True)
class ChannelParams:
    ebn0_db: float
    rate: float

    @property
    def sigma(self) -> float:
        return ebn0_to_sigma(self.ebn0_db, self.rate)


@dataclass(frozen=True)
class LlrVector:
    """Reliabilities ``magnitudes`` (|LLR_i|) and hard decisions ``hard_bits``."""

    magnitudes: np.ndarray
    hard_bits: np.ndarray

    def __len__(self) -> int:
        return len(self.magnitudes)

    @property
    def signed(self) -> np.ndarray:
        return self.magnitudes * (1.0 - 2.0 * self.hard_bits)


def ebn0_to_sigma(ebn0_db: float, rate: float) -> float:
    return float(np.sqrt(1.0 / (2.0 * rate * 10.0 ** (ebn0_db / 10.0))))


def bpsk(codeword: np.ndarray) -> np.ndarray:
    return 1.0 - 2.0 * np.asarray(codeword, dtype=np.float64)


def transmit(codeword: np.ndarray, sigma: float, rng: np.random.Generator) -> np.ndarray:
    x = bpsk(codeword)
    return x + sigma * rng.standard_normal(x.shape)


def hard_decision(y: np.ndarray) -> np.ndarray:
    """theta(y): 0 for y >= 0, else 1."""
    return (np.asarray(y) < 0).astype(np.uint8)


def llr(y: np.ndarray, sigma: float) -> LlrVector:
    y = np.asarray(y, dtype=np.float64)
    return LlrVector(magnitudes=np.abs(2.0 * y / sigma**2), hard_bits=hard_decision(y))


def _fold_params(sigma: float) -> tuple[float, float]:
    # |LLR| is |N(mu, s^2)| with mu = 2/sigma^2, s = 2/sigma
    return 2.0 / sigma**2, 2.0 / sigma


def folded_pdf(ell, sigma: float):
    ell = np.asarray(ell, dtype=np.float64)
    mu, s = _fold_params(sigma)
    dens = (np.exp(-0.5 * ((ell - mu) / s) ** 2) + np.exp(-0.5 * ((ell + mu) / s) ** 2)) / (s * _SQRT2PI)
    out = np.where(ell >= 0, dens, 0.0)
    return out if out.ndim else float(out)


def folded_cdf(ell, sigma: float):
    ell = np.asarray(ell, dtype=np.float64)
    mu, s = _fold_params(sigma)
    with np.errstate(invalid="ignore"):
        val = ndtr((ell - mu) / s) + ndtr((ell + mu) / s) - 1.0
    out = np.where(ell > 0, np.clip(val, 0.0, 1.0), 0.0)
    out = np.where(np.isposinf(ell), 1.0, out)
    return out if out.ndim else float(out)


def folded_inv_cdf(p: float, sigma: float, tol: float = 1e-12) -> float:
    """Inverse CDF by Newton steps safeguarded with a bisection bracket.

    Converges to ``|folded_cdf(x) - p| <= 1e-9`` (tighter by default).
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"probability {p} outside (0, 1)")
    mu, s = _fold_params(sigma)
    lo, hi = 0.0, mu + s
    while folded_cdf(hi, sigma) < p:
        hi *= 2.0
    x = 0.5 * (lo + hi)
    for _ in range(200):
        err = folded_cdf(x, sigma) - p
        if abs(err) <= tol:
            return x
        if err > 0:
            hi = x
        else:
            lo = x
        d = folded_pdf(x, sigma)
        nxt = x - err / d if d > 0 else lo - 1.0
        if not lo < nxt < hi:
            nxt = 0.5 * (lo + hi)
        if hi - lo < 1e-15 * max(1.0, hi):
            return nxt
        x = nxt
    return x
