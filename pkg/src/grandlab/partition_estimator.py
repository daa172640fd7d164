"""Counting error-pattern positions: exact distinct-part partition counts, the
Szekeres asymptotic, and the continuous position estimator O~(m) (closed form
via erfi for gamma = [1..N], fitted density otherwise).
"""

from __future__ import annotations

import math
import warnings
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize
from scipy.interpolate import PchipInterpolator

from .pattern_gen import PatternBasis

_SQRT_PI = math.sqrt(math.pi)
_C4 = 4.0 * 3.0 ** 0.25
_B_ORB = math.pi / math.sqrt(3.0)


class FitError(RuntimeError):
    def __init__(self, msg: str, residual: float, params):
        super().__init__(f"{msg} (residual={residual:.3g}, params={params})")
        self.residual = residual
        self.params = params


# ---------------------------------------------------------------------------
# partitions into distinct parts
# ---------------------------------------------------------------------------

@lru_cache(maxsize=8)
def _q_table(n_max: int) -> tuple:
    q = np.zeros(n_max + 1, dtype=object)
    q[0] = 1
    for part in range(1, n_max + 1):
        # RHS is evaluated before assignment: each part used at most once
        q[part:] = q[part:] + q[: n_max + 1 - part]
    return tuple(int(v) for v in q)


def q_exact(n: int) -> int:
    """Number of partitions of n into distinct parts (exact, arbitrary precision)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    size = max(64, 1 << (n.bit_length()))
    return _q_table(size)[n]


def q_exact_table(n_max: int) -> list[int]:
    size = max(64, 1 << (n_max.bit_length()))
    return list(_q_table(size)[: n_max + 1])


def q_szekeres(n) -> float:
    n = np.asarray(n, dtype=np.float64)
    if np.any(n <= 0):
        raise ValueError("Szekeres formula needs n >= 1")
    out = np.exp(_B_ORB * np.sqrt(n)) / (_C4 * n**0.75)
    return out if out.ndim else float(out)


def o_exact(m: float, basis: PatternBasis) -> int:
    """Number of basis patterns with weight <= m (the zero pattern included).

    Raises if the basis could end inside the weight class of ``m``.
    """
    complete = basis.N < 63 and basis.T == 2**basis.N
    if not complete and m >= basis.weights[-1]:
        raise ValueError(f"basis too short: weight classes complete only below {basis.weights[-1]}")
    return int(np.searchsorted(basis.weights, m, side="right"))


@lru_cache(maxsize=8)
def _restricted_table(n_max: int, N: int) -> tuple:
    """Counts of subsets of {1..N} by sum, sums 0..n_max."""
    q = np.zeros(n_max + 1, dtype=object)
    q[0] = 1
    for part in range(1, min(N, n_max) + 1):
        q[part:] = q[part:] + q[: n_max + 1 - part]
    return tuple(int(v) for v in q)


def o_exact_orb(m: int, N: int) -> int:
    """o_exact for gamma = [1..N] without materialising the basis.

    For m <= N this is 1 + sum_{n<=m} q(n); beyond N parts are capped at N.
    """
    if m < 0:
        return 0
    m = int(m)
    if m <= N:
        return sum(q_exact_table(m))
    return sum(_restricted_table(m, N))


def o_exact_orb_table(m_max: int, N: int) -> list[int]:
    """[o_exact_orb(m, N) for m = 0..m_max]."""
    counts = _restricted_table(int(m_max), N)
    out, acc = [], 0
    for c in counts:
        acc += c
        out.append(acc)
    return out


# ---------------------------------------------------------------------------
# erfi
# ---------------------------------------------------------------------------

def _erfi_scalar(x: float) -> float:
    ax = abs(x)
    if ax < 1e-9:
        # higher terms are below double precision
        return 2.0 / _SQRT_PI * x
    if ax > 26.5:
        # exp(x^2) overflows a double past about 26.6
        return math.copysign(math.inf, x)
    if ax < 5.0:
        # Maclaurin: 2/sqrt(pi) sum x^(2k+1) / (k! (2k+1)); all terms positive
        x2 = ax * ax
        term = ax
        total = ax
        k = 0
        while True:
            k += 1
            term *= x2 / k
            inc = term / (2 * k + 1)
            total += inc
            if inc <= 1e-17 * total:
                break
        val = 2.0 / _SQRT_PI * total
    else:
        # erfi(x) = 2/sqrt(pi) e^(x^2) D(x), D(x) ~ 1/(2x) sum (2k-1)!! / (2x^2)^k
        inv = 1.0 / (2.0 * ax * ax)
        term = 1.0
        total = 1.0
        k = 0
        while True:
            k += 1
            nxt = term * (2 * k - 1) * inv
            if nxt >= term or nxt < 1e-17:
                break
            term = nxt
            total += term
        dawson = total / (2.0 * ax)
        val = 2.0 / _SQRT_PI * math.exp(ax * ax) * dawson
    return math.copysign(val, x)


def erfi(x):
    """Imaginary error function 2/sqrt(pi) int_0^x exp(z^2) dz."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 0:
        return _erfi_scalar(float(arr))
    return np.vectorize(_erfi_scalar, otypes=[np.float64])(arr)


# ---------------------------------------------------------------------------
# continuous estimators
# ---------------------------------------------------------------------------

def o_tilde(m):
    """O~(m) = erfi(sqrt(pi) m^(1/4) / 3^(1/4)) / 2 for gamma = [1..N]."""
    m = np.asarray(m, dtype=np.float64)
    if np.any(m <= 0):
        raise ValueError("O~ needs m > 0")
    out = 0.5 * erfi(_SQRT_PI * m**0.25 / 3.0**0.25)
    return out if np.ndim(out) else float(out)


def o_tilde_prime(m):
    return q_szekeres(m)


class PositionEstimator:
    """Smooth, increasing estimate of a basis position count O(m).

    ``mode="erfi"`` is the closed form ``erfi(sqrt(pi) m^(1/4) / 3^(1/4)) / 2``.
    ``mode="fitted"`` integrates the density ``a exp(b m^c) / m^d`` upward
    from the lightest non-empty pattern weight ``m_lo``, starting at
    ``offset`` (the zero pattern), with a linear ramp on ``(0, m_lo)``.
    Both are 0 for m <= 0.
    """

    def __init__(self, mode: str = "erfi", params=None, m_max: float = 400.0,
                 m_lo: float = 0.0, offset: float = 0.0):
        self.mode = mode
        if mode == "erfi":
            self.params = (1.0 / _C4, _B_ORB, 0.5, 0.75)
            m_lo, offset = 0.0, 0.0
        elif mode == "fitted":
            self.params = tuple(float(v) for v in params)
            if m_lo <= 0.0 and not self.params[3] < 1.0:
                raise ValueError("density not integrable at 0; give m_lo > 0")
        else:
            raise ValueError(f"unknown mode {mode!r}")
        self.m_lo = float(m_lo)
        self.offset = float(offset)
        self.m_max = float(m_max)
        self._build_table()

    def _build_table(self) -> None:
        if self.mode == "erfi":
            # tabulate in x = m^(1/4), where the closed form is smooth
            xs = np.linspace(0.0, self.m_max ** 0.25, 4097)[1:]
            ys = o_tilde(xs**4)
            self._grid_lo, self._grid_hi = float(xs[0] ** 4), self.m_max
            self._interp = PchipInterpolator(xs, np.log(ys))
            self._to_x = lambda m: m**0.25
            return
        ms = np.linspace(self.m_lo, self.m_max, 8193)
        mid = 0.5 * (ms[:-1] + ms[1:])
        f, fm = self.density(ms), self.density(mid)
        cum = np.empty_like(ms)
        cum[0] = 0.0
        np.cumsum((ms[1:] - ms[:-1]) / 6.0 * (f[:-1] + 4.0 * fm + f[1:]), out=cum[1:])
        ys = self.offset + cum
        self._grid_lo, self._grid_hi = self.m_lo, self.m_max
        self._tail = float(ys[-1])
        self._interp = PchipInterpolator(ms, np.log(ys))
        self._to_x = lambda m: m

    def density(self, m):
        m = np.asarray(m, dtype=np.float64)
        a, b, c, d = self.params
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            val = a * np.exp(b * np.abs(m) ** c) / np.abs(m) ** d
        out = np.where(m > 0, val, 0.0)
        return out if out.ndim else float(out)

    def value(self, m):
        m = np.asarray(m, dtype=np.float64)
        out = np.zeros_like(m)
        inside = (m >= self._grid_lo) & (m <= self._grid_hi)
        out[inside] = np.exp(self._interp(self._to_x(m[inside])))
        below = (m > 0) & (m < self._grid_lo)
        if np.any(below):
            if self.mode == "erfi":
                out[below] = o_tilde(m[below])
            else:
                out[below] = self.offset * m[below] / self.m_lo
        beyond = m > self._grid_hi
        if np.any(beyond):
            if self.mode == "erfi":
                out[beyond] = o_tilde(m[beyond])
            else:
                out[beyond] = [self._tail + integrate.quad(self.density, self.m_max, float(v))[0]
                               for v in np.atleast_1d(m[beyond])]
        return out if out.ndim else float(out)

    __call__ = value

    def inverse(self, target: float, rtol: float = 1e-6) -> float:
        """m with value(m) = target, by bracketed root finding."""
        if target < 1.0:
            raise ValueError(f"target {target} below estimator range (>= 1)")
        hi = max(1.0, self.m_lo)
        while self.value(hi) < target:
            hi *= 2.0
            if hi > 1e9:
                raise ValueError(f"target {target} beyond estimator range")
        return optimize.brentq(lambda m: self.value(m) - target, 0.0, hi,
                               xtol=1e-12, rtol=min(rtol, 1e-12) * 1e-3 + 4 * np.finfo(float).eps)


def o_tilde_inverse(target: float, estimator: PositionEstimator | None = None) -> float:
    est = estimator if estimator is not None else ORB_ESTIMATOR
    return est.inverse(target)


ORB_ESTIMATOR = PositionEstimator("erfi")


# ---------------------------------------------------------------------------
# fitting for general gamma
# ---------------------------------------------------------------------------

def default_m_grid(basis: PatternBasis, points: int = 80, min_count: int = 10) -> np.ndarray:
    """Weights at which the basis count crosses geometric levels min_count..T.

    Only complete weight classes are used (strictly below the last weight).
    """
    w = basis.weights
    levels = np.unique(np.geomspace(min_count, basis.T - 1, points).astype(np.int64))
    grid = np.unique(w[levels])
    return grid[grid < w[-1]]


def fit_o_prime(basis: PatternBasis, m_grid=None) -> tuple[float, float, float, float]:
    """Fit ``a exp(b m^c) / m^d`` to the density of o_exact.

    The density is the central finite difference of the basis count on
    ``m_grid``; the loss is squared error of the logs. Linear least squares
    over a scan of ``c`` seeds a Nelder-Mead refinement.
    """
    m = np.asarray(default_m_grid(basis) if m_grid is None else m_grid, dtype=np.float64)
    if m.size < 5:
        raise ValueError("need at least 5 grid points")
    counts = np.searchsorted(basis.weights, m, side="right").astype(np.float64)
    dens = (counts[2:] - counts[:-2]) / (m[2:] - m[:-2])
    mid = m[1:-1]
    keep = (dens > 0) & (mid > 0)
    mk, logd = mid[keep], np.log(dens[keep])
    if mk.size < 4:
        raise FitError("too few positive density samples", float("nan"), None)

    def loss(p):
        a_log, b, c, d = p
        if not 0.1 <= c <= 1.5:
            return 1e6
        pred = a_log + b * mk**c - d * np.log(mk)
        return float(np.mean((pred - logd) ** 2))

    # linear least squares in (log a, b, d) for each c on a scan
    best = None
    for c in np.linspace(0.1, 1.5, 57):
        A = np.column_stack([np.ones_like(mk), mk**c, -np.log(mk)])
        coef, *_ = np.linalg.lstsq(A, logd, rcond=None)
        cand = np.array([coef[0], coef[1], c, coef[2]])
        val = loss(cand)
        if best is None or val < best[0]:
            best = (val, cand)
    res = optimize.minimize(loss, best[1], method="Nelder-Mead",
                            options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 20000, "maxfev": 40000})
    a_log, b, c, d = res.x
    params = (math.exp(a_log), float(b), float(c), float(d))
    if not np.isfinite(res.fun) or res.fun > 0.5:
        raise FitError("fit did not converge", float(res.fun), params)
    return params


def fitted_estimator(basis: PatternBasis, m_grid=None, strict: bool = True) -> PositionEstimator:
    """Integrated fit as a position estimator.

    With ``strict=False`` a poor fit warns and keeps its best parameters; the
    density stays positive, so the estimate is still increasing.
    """
    try:
        params = fit_o_prime(basis, m_grid)
    except FitError as exc:
        if strict or exc.params is None:
            raise
        warnings.warn(f"using a poor position-count fit: {exc}", RuntimeWarning, stacklevel=2)
        params = exc.params
    m_lo = float(basis.weights[1]) if basis.T > 1 else 1.0
    return PositionEstimator("fitted", params, m_max=3.0 * float(basis.weights[-1]),
                             m_lo=m_lo, offset=1.0)


def estimator_for(basis: PatternBasis) -> PositionEstimator:
    """Closed form for gamma = [1..N], fitted otherwise."""
    return ORB_ESTIMATOR if basis.gamma.is_orb else fitted_estimator(basis)
