"""Binary linear block codes: GF(2^m) arithmetic, BCH construction, encoding,
syndrome-based membership testing and alist I/O.

Bit vectors are numpy ``uint8`` arrays with values in {0, 1}. Polynomials over
GF(2) are Python ints, bit ``i`` holding the coefficient of ``x^i``.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass, field

import numpy as np


class CodeError(ValueError):
    """Invalid code construction or input of the wrong shape."""


class AlistParseError(ValueError):
    def __init__(self, msg: str, line: int):
        super().__init__(f"line {line}: {msg}")
        self.line = line


# ---------------------------------------------------------------------------
# GF(2) linear algebra
# ---------------------------------------------------------------------------

def gf2_rref(mat: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over GF(2). Returns (R, pivot_columns)."""
    R = (np.asarray(mat, dtype=np.uint8) & 1).copy()
    rows, cols = R.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(R[r:, c])[0]
        if nz.size == 0:
            continue
        p = r + nz[0]
        if p != r:
            R[[r, p]] = R[[p, r]]
        others = np.nonzero(R[:, c])[0]
        others = others[others != r]
        R[others] ^= R[r]
        pivots.append(c)
        r += 1
    return R, pivots


def gf2_rank(mat: np.ndarray) -> int:
    return len(gf2_rref(mat)[1])


# ---------------------------------------------------------------------------
# GF(2^m)
# ---------------------------------------------------------------------------

class GF2m:
    """Arithmetic in GF(2^m) built from a primitive polynomial via log tables.

    Elements are ints in ``[0, 2^m)`` using the polynomial basis; ``alpha`` is
    the element ``0b10``.
    """

    def __init__(self, m: int, primitive_poly: int):
        if not 2 <= m <= 16:
            raise CodeError(f"field degree m={m} outside [2, 16]")
        if primitive_poly.bit_length() - 1 != m:
            raise CodeError(f"polynomial {primitive_poly:#b} does not have degree {m}")
        self.m = m
        self.order = (1 << m) - 1
        self.poly = primitive_poly
        exp = np.zeros(2 * self.order, dtype=np.int64)
        log = np.full(1 << m, -1, dtype=np.int64)
        a = 1
        for i in range(self.order):
            if log[a] != -1:
                raise CodeError(f"polynomial {primitive_poly:#b} is not primitive over GF(2)")
            exp[i] = a
            log[a] = i
            a <<= 1
            if a >> m:
                a ^= primitive_poly
        if a != 1:
            raise CodeError(f"polynomial {primitive_poly:#b} is not primitive over GF(2)")
        exp[self.order:] = exp[: self.order]
        self.exp = exp
        self.log = log

    def add(self, a: int, b: int) -> int:
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self.exp[self.log[a] + self.log[b]])

    def pow(self, a: int, k: int) -> int:
        if a == 0:
            if k == 0:
                return 1
            if k < 0:
                raise ZeroDivisionError("0 has no inverse")
            return 0
        return int(self.exp[(self.log[a] * k) % self.order])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no inverse")
        return int(self.exp[(self.order - self.log[a]) % self.order])

    def alpha_pow(self, k: int) -> int:
        return int(self.exp[k % self.order])


def poly_mul_gf2(a: int, b: int) -> int:
    res = 0
    while b:
        if b & 1:
            res ^= a
        a <<= 1
        b >>= 1
    return res


def poly_mod_gf2(a: int, mod: int) -> int:
    dm = mod.bit_length() - 1
    while a and a.bit_length() - 1 >= dm:
        a ^= mod << (a.bit_length() - 1 - dm)
    return a


def minimal_polynomial(field: GF2m, k: int) -> int:
    """Minimal polynomial of alpha^k over GF(2), as a binary int."""
    coset = []
    e = k % field.order
    while e not in coset:
        coset.append(e)
        e = (2 * e) % field.order
    # prod (x - alpha^e) with coefficients in GF(2^m), low degree first
    coeffs = [1]
    for e in coset:
        root = field.alpha_pow(e)
        nxt = [0] * (len(coeffs) + 1)
        for i, c in enumerate(coeffs):
            nxt[i + 1] ^= c
            nxt[i] ^= field.mul(c, root)
        coeffs = nxt
    out = 0
    for i, c in enumerate(coeffs):
        if c not in (0, 1):
            raise CodeError("minimal polynomial has coefficients outside GF(2)")
        out |= c << i
    return out


# default primitive polynomials, x^m + ... + 1
PRIMITIVE_POLYS = {
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10001001,  # x^7 + x^3 + 1
    8: 0b100011101,
    9: 0b1000010001,
    10: 0b10000001001,
    11: 0b100000000101,
    12: 0b1000001010011,
    13: 0b10000000011011,
    14: 0b100010001000011,
    15: 0b1000000000000011,
    16: 0b10001000000001011,
}


@dataclass(frozen=True)
class BchSpec:
    m: int
    t: int
    primitive_poly: int | None = None

    @property
    def n(self) -> int:
        return (1 << self.m) - 1

    @property
    def poly(self) -> int:
        return self.primitive_poly if self.primitive_poly is not None else PRIMITIVE_POLYS[self.m]


def bch_generator_poly(spec: BchSpec) -> int:
    """g(x) = lcm of the minimal polynomials of alpha, alpha^3, ..., alpha^(2t-1)."""
    field = GF2m(spec.m, spec.poly)
    g = 1
    seen: set[int] = set()
    for k in range(1, 2 * spec.t, 2):
        mp = minimal_polynomial(field, k)
        if mp not in seen:
            seen.add(mp)
            g = poly_mul_gf2(g, mp)
    return g


# ---------------------------------------------------------------------------
# Codes
# ---------------------------------------------------------------------------

def _column_syndromes(H: np.ndarray) -> np.ndarray | None:
    """Pack each column of H into an int64 (row i -> bit i); None if > 63 rows."""
    if H.shape[0] > 63:
        return None
    weights = (np.int64(1) << np.arange(H.shape[0], dtype=np.int64))
    return (H.astype(np.int64) * weights[:, None]).sum(axis=0)


@dataclass(frozen=True, eq=False)
class LinearCode:
    """A binary (n, k) linear code with full-rank parity-check matrix H.

    ``G`` is in reduced echelon form with an identity on ``info_positions``;
    for codes built by :func:`bch_construct` those are the first k positions.
    """

    H: np.ndarray
    G: np.ndarray
    info_positions: np.ndarray
    name: str = "code"
    col_synd: np.ndarray | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.H.shape[1]

    @property
    def k(self) -> int:
        return self.G.shape[0]

    @property
    def rate(self) -> float:
        return self.k / self.n

    def syndrome(self, w: np.ndarray) -> np.ndarray:
        w = np.asarray(w)
        if w.shape[-1] != self.n:
            raise CodeError(f"vector length {w.shape[-1]} != n={self.n}")
        return (w.astype(np.int64) @ self.H.T.astype(np.int64)) & 1

    def syndrome_int(self, w: np.ndarray) -> int:
        """Syndrome packed as an int (requires n - k <= 63)."""
        return int(np.bitwise_xor.reduce(self.col_synd[np.asarray(w, dtype=bool)], initial=0))

    def is_codeword(self, w: np.ndarray) -> bool:
        return not np.any(self.syndrome(w))

    def encode(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u)
        if u.shape[-1] != self.k:
            raise CodeError(f"message length {u.shape[-1]} != k={self.k}")
        return ((u.astype(np.int64) @ self.G.astype(np.int64)) & 1).astype(np.uint8)


def code_from_parity(H: np.ndarray, name: str = "code") -> LinearCode:
    """Build a code from H, checking full rank and deriving G from the null space."""
    H = np.asarray(H, dtype=np.uint8) & 1
    m_rows, n = H.shape
    rank = gf2_rank(H)
    if rank != m_rows:
        raise CodeError(f"parity-check matrix has rank {rank}, expected {m_rows} rows full rank")
    k = n - m_rows
    if k <= 0:
        raise CodeError(f"degenerate code: k = {k}")
    R, pivots = gf2_rref(H)
    free = [c for c in range(n) if c not in set(pivots)]
    # null space basis: one vector per free column
    G = np.zeros((k, n), dtype=np.uint8)
    for i, f in enumerate(free):
        G[i, f] = 1
        for r, p in enumerate(pivots):
            G[i, p] = R[r, f]
    return LinearCode(H=H, G=G, info_positions=np.array(free), name=name,
                      col_synd=_column_syndromes(H))


def code_from_systematic_generator(G: np.ndarray, name: str = "code") -> LinearCode:
    """G = [I_k | P]  ->  H = [P^T | I_{n-k}]."""
    G = np.asarray(G, dtype=np.uint8) & 1
    k, n = G.shape
    if not np.array_equal(G[:, :k], np.eye(k, dtype=np.uint8)):
        raise CodeError("generator matrix is not in systematic form [I_k | P]")
    P = G[:, k:]
    H = np.concatenate([P.T, np.eye(n - k, dtype=np.uint8)], axis=1)
    return LinearCode(H=H, G=G, info_positions=np.arange(k), name=name,
                      col_synd=_column_syndromes(H))


def bch_construct(spec: BchSpec) -> LinearCode:
    """Narrow-sense primitive binary BCH code with systematic G = [I_k | P]."""
    n = spec.n
    g = bch_generator_poly(spec)
    deg = g.bit_length() - 1
    k = n - deg
    if k <= 0:
        raise CodeError(f"BCH(m={spec.m}, t={spec.t}) is degenerate: deg g = {deg} >= n")
    # row i: x^(n-1-i) + (x^(n-1-i) mod g(x)); position j holds coefficient of x^(n-1-j)
    G = np.zeros((k, n), dtype=np.uint8)
    for i in range(k):
        e = n - 1 - i
        rem = poly_mod_gf2(1 << e, g)
        G[i, i] = 1
        for d in range(deg):
            if (rem >> d) & 1:
                G[i, n - 1 - d] = 1
    return code_from_systematic_generator(G, name=f"BCH({n},{k})")


def hamming74() -> LinearCode:
    return bch_construct(BchSpec(3, 1))


def parse_code_spec(text: str) -> LinearCode:
    """``bch:127:113`` (n:k), ``bch:m:t`` style ``bchmt:7:2``, or ``alist:<path>``."""
    kind, _, rest = text.partition(":")
    if kind == "bch":
        n_s, _, k_s = rest.partition(":")
        n, k = int(n_s), int(k_s)
        m = n.bit_length()
        if (1 << m) - 1 != n:
            raise CodeError(f"BCH length {n} is not 2^m - 1")
        for t in range(1, n):
            code = bch_construct(BchSpec(m, t))
            if code.k == k:
                return code
            if code.k < k:
                break
        raise CodeError(f"no narrow-sense BCH code with n={n}, k={k}")
    if kind == "alist":
        return code_from_parity(read_alist(rest), name=os.path.basename(rest))
    raise CodeError(f"unknown code spec {text!r}")


# ---------------------------------------------------------------------------
# alist
# ---------------------------------------------------------------------------

def write_alist(H: np.ndarray, dest) -> None:
    """Write a binary matrix in alist format (no zero padding)."""
    H = np.asarray(H, dtype=np.uint8)
    m_rows, n = H.shape
    col_idx = [np.nonzero(H[:, j])[0] + 1 for j in range(n)]
    row_idx = [np.nonzero(H[i, :])[0] + 1 for i in range(m_rows)]
    lines = [
        f"{n} {m_rows}",
        f"{max((len(c) for c in col_idx), default=0)} {max((len(r) for r in row_idx), default=0)}",
        " ".join(str(len(c)) for c in col_idx),
        " ".join(str(len(r)) for r in row_idx),
    ]
    # an empty list is written as a single 0 pad so no line is blank
    lines += [" ".join(map(str, c)) or "0" for c in col_idx]
    lines += [" ".join(map(str, r)) or "0" for r in row_idx]
    text = "\n".join(lines) + "\n"
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "w") as fh:
            fh.write(text)
    else:
        dest.write(text)


def read_alist(src) -> np.ndarray:
    """Parse an alist file or stream into a dense (m, n) uint8 matrix.

    Trailing zeros after a column/row's declared degree are accepted as padding;
    a zero (or out-of-range index) inside the declared entries is an error.
    """
    if isinstance(src, (str, os.PathLike)):
        with open(src) as fh:
            text = fh.read()
    elif isinstance(src, io.IOBase) or hasattr(src, "read"):
        text = src.read()
    else:
        raise TypeError("expected a path or a text stream")
    lines = [(i + 1, ln.split()) for i, ln in enumerate(text.splitlines()) if ln.strip()]
    pos = 0

    def take(count: int | None = None) -> tuple[int, list[int]]:
        nonlocal pos
        if pos >= len(lines):
            raise AlistParseError("unexpected end of file", lines[-1][0] + 1 if lines else 1)
        lineno, toks = lines[pos]
        pos += 1
        try:
            vals = [int(t) for t in toks]
        except ValueError:
            raise AlistParseError(f"non-integer token in {' '.join(toks)!r}", lineno) from None
        if count is not None and len(vals) != count:
            raise AlistParseError(f"expected {count} entries, found {len(vals)}", lineno)
        return lineno, vals

    lineno, (n, m_rows) = take(2)
    if n <= 0 or m_rows <= 0:
        raise AlistParseError(f"bad dimensions n={n} m={m_rows}", lineno)
    lineno, (max_col, max_row) = take(2)
    lineno, col_deg = take(n)
    if any(d < 0 or d > max_col for d in col_deg):
        raise AlistParseError("column degree exceeds declared maximum", lineno)
    lineno, row_deg = take(m_rows)
    if any(d < 0 or d > max_row for d in row_deg):
        raise AlistParseError("row degree exceeds declared maximum", lineno)

    H = np.zeros((m_rows, n), dtype=np.uint8)
    for j in range(n):
        lineno, vals = take()
        d = col_deg[j]
        if len(vals) < d or any(v != 0 for v in vals[d:]):
            raise AlistParseError(f"column {j + 1}: expected {d} indices", lineno)
        for v in vals[:d]:
            if not 1 <= v <= m_rows:
                raise AlistParseError(f"column {j + 1}: row index {v} out of range 1..{m_rows}", lineno)
            H[v - 1, j] = 1
    H_rows = np.zeros_like(H)
    for i in range(m_rows):
        lineno, vals = take()
        d = row_deg[i]
        if len(vals) < d or any(v != 0 for v in vals[d:]):
            raise AlistParseError(f"row {i + 1}: expected {d} indices", lineno)
        for v in vals[:d]:
            if not 1 <= v <= n:
                raise AlistParseError(f"row {i + 1}: column index {v} out of range 1..{n}", lineno)
            H_rows[i, v - 1] = 1
    if not np.array_equal(H, H_rows):
        raise AlistParseError("column and row index lists disagree", lineno)
    if not np.array_equal(H.sum(axis=0), col_deg) or not np.array_equal(H.sum(axis=1), row_deg):
        raise AlistParseError("duplicate indices: degrees do not match entries", lineno)
    return H
