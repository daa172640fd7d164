import io
import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from grandlab.gf2_codes import (AlistParseError, BchSpec, CodeError, GF2m, bch_construct, bch_generator_poly,
                                code_from_parity, gf2_rank, hamming74, parse_code_spec, read_alist, write_alist)

_BCH127 = bch_construct(BchSpec(7, 2))


def _mulmod(a, b, poly, m):
    # schoolbook shift-and-add, independent of the log tables
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if (a >> m) & 1:
            a ^= poly
    return r


def _eval_poly(g, x, poly, m):
    acc = 0
    for i in range(g.bit_length() - 1, -1, -1):
        acc = _mulmod(acc, x, poly, m) ^ ((g >> i) & 1)
    return acc


def _min_distance(code):
    msgs = np.array(list(itertools.product([0, 1], repeat=code.k)), dtype=np.uint8)
    words = code.encode(msgs)
    return int(words[1:].sum(axis=1).min())


def test_gf8_alpha_cubed():
    f = GF2m(3, 0b1011)
    assert f.mul(0b010, 0b100) == 0b011


def test_gf128_alpha_order():
    f = GF2m(7, 0b10001001)
    assert f.alpha_pow(127) == 1
    assert _mulmod(1, 1, 0x89, 7) == 1
    x = 1
    for _ in range(127):
        x = _mulmod(x, 2, 0x89, 7)
    assert x == 1


def test_non_primitive_poly_rejected():
    # x^4 + x^3 + x^2 + x + 1 is irreducible but alpha has order 5
    with pytest.raises(CodeError):
        GF2m(4, 0b11111)


@given(st.integers(1, 127), st.integers(1, 127), st.integers(1, 127))
def test_field_axioms(a, b, c):
    f = GF2m(7, 0b10001001)
    assert f.mul(a, b) == f.mul(b, a)
    assert f.mul(f.mul(a, b), c) == f.mul(a, f.mul(b, c))
    assert f.mul(a, 1) == a
    assert f.mul(a, f.inv(a)) == 1
    assert f.mul(a, b) == _mulmod(a, b, 0x89, 7)


def test_hamming_generator():
    assert bch_generator_poly(BchSpec(3, 1)) == 0b1011


@pytest.mark.parametrize("m,t,expected", [(4, 1, 0x13), (4, 2, 0x1D1), (7, 2, 0x4377)])
def test_generator_roots(m, t, expected):
    # frozen values; roots alpha^1..alpha^2t checked with an independent evaluator
    spec = BchSpec(m, t)
    g = bch_generator_poly(spec)
    assert g == expected
    x = 1
    for _ in range(2 * t):
        x = _mulmod(x, 2, spec.poly, m)
        assert _eval_poly(g, x, spec.poly, m) == 0


def test_bch127_dimensions(bch127):
    assert (bch127.n, bch127.k) == (127, 113)
    assert bch127.H.shape == (14, 127)
    assert not np.any((bch127.G.astype(int) @ bch127.H.T.astype(int)) % 2)


def test_degenerate_bch():
    with pytest.raises(CodeError):
        bch_construct(BchSpec(3, 4))
    assert bch_construct(BchSpec(3, 3)).k == 1


@pytest.mark.parametrize("m,t,dmin", [(3, 1, 3), (4, 1, 3), (4, 2, 5)])
def test_minimum_distance(m, t, dmin):
    assert _min_distance(bch_construct(BchSpec(m, t))) >= dmin
    assert _min_distance(bch_construct(BchSpec(m, t))) >= 2 * t + 1


def test_hamming_codeword_count(hamming):
    words = np.array(list(itertools.product([0, 1], repeat=7)), dtype=np.uint8)
    assert sum(hamming.is_codeword(w) for w in words) == 16


def test_encode_systematic_and_linear(bch15):
    k = bch15.k
    assert not bch15.encode(np.zeros(k, dtype=np.uint8)).any()
    e = np.zeros(k, dtype=np.uint8)
    e[3] = 1
    assert np.array_equal(bch15.encode(e), bch15.G[3])
    with pytest.raises(CodeError):
        bch15.encode(np.zeros(k + 1, dtype=np.uint8))
    with pytest.raises(CodeError):
        bch15.is_codeword(np.zeros(3, dtype=np.uint8))


@given(st.lists(st.integers(0, 1), min_size=113, max_size=113), st.lists(st.integers(0, 1), min_size=113, max_size=113))
def test_encode_properties(u, v):
    code = _BCH127
    u, v = np.array(u, dtype=np.uint8), np.array(v, dtype=np.uint8)
    cu, cv = code.encode(u), code.encode(v)
    assert code.is_codeword(cu)
    assert np.array_equal(cu[:113], u)
    assert np.array_equal(code.encode(u ^ v), cu ^ cv)
    assert code.syndrome_int(cu) == 0


@given(st.integers(0, 126))
def test_single_flip_is_not_codeword(j):
    w = np.zeros(127, dtype=np.uint8)
    w[j] = 1
    assert not _BCH127.is_codeword(w)
    assert _BCH127.syndrome_int(w) != 0


def test_alist_round_trip(hamming, bch127):
    for code in (hamming, bch127):
        buf = io.StringIO()
        write_alist(code.H, buf)
        H = read_alist(io.StringIO(buf.getvalue()))
        assert np.array_equal(H, code.H)
    assert gf2_rank(H) == 14


def test_alist_zero_column_round_trip():
    H = np.array([[1, 0, 1], [0, 0, 1]], dtype=np.uint8)
    buf = io.StringIO()
    write_alist(H, buf)
    assert np.array_equal(read_alist(io.StringIO(buf.getvalue())), H)


def test_alist_padding_accepted():
    text = "3 2\n2 2\n1 1 2\n2 2\n1 0\n2 0\n1 2\n1 3\n2 3\n"
    H = read_alist(io.StringIO(text))
    assert H.tolist() == [[1, 0, 1], [0, 1, 1]]


def test_alist_zero_index_error_has_line():
    text = "3 2\n2 2\n1 1 2\n2 2\n0\n2\n1 2\n1 3\n3 0\n"
    with pytest.raises(AlistParseError) as exc:
        read_alist(io.StringIO(text))
    assert exc.value.line == 5


def test_alist_out_of_range_and_mismatch():
    with pytest.raises(AlistParseError):
        read_alist(io.StringIO("3 2\n2 2\n1 1 2\n2 2\n5\n2\n1 2\n1 3\n3 0\n"))
    with pytest.raises(AlistParseError):
        read_alist(io.StringIO("3 2\n2 2\n1 1 2\n2 2\n2\n2\n1 2\n1 3\n3 0\n"))
    with pytest.raises(AlistParseError):
        read_alist(io.StringIO("3 2\n"))


def test_rank_deficient_rejected():
    with pytest.raises(CodeError):
        code_from_parity(np.array([[1, 1, 0], [1, 1, 0]]))


def test_code_from_parity_matches(hamming):
    c = code_from_parity(hamming.H)
    for row in c.G:
        assert hamming.is_codeword(row)
    assert c.k == 4


def test_parse_code_spec(tmp_path):
    assert parse_code_spec("bch:127:113").k == 113
    assert parse_code_spec("bch:15:7").k == 7
    p = tmp_path / "h.alist"
    write_alist(hamming74().H, str(p))
    assert parse_code_spec(f"alist:{p}").k == 4
    with pytest.raises(CodeError):
        parse_code_spec("bch:100:50")
    with pytest.raises(CodeError):
        parse_code_spec("ldpc:1")
