"""Binary BCH(31, 11) codec over GF(2^5), correcting up to 5 bit errors.

Codewords are 31-bit integers, bit j holding the coefficient of x^j.
Encoding is systematic: the 11 message bits occupy positions 30..20 and the
20 parity bits (remainder of x^20 * m(x) modulo the generator) positions
19..0.  GF(2^5) is built on the primitive polynomial x^5 + x^2 + 1; this
fixes the generator and therefore the parity bits, so it is wire-format law.

Decoding is the classical chain: syndromes, Berlekamp-Massey for the error
locator, Chien search for its roots.  More than 5 channel errors either
produce an inconsistent locator (reported as decode failure) or, rarely,
land on a different codeword; the miscorrection hazard is handled by the
layers above.
"""

from __future__ import annotations

import math

import numpy as np

M = 5                   # GF(2^m)
CODE_N = 31             # block length 2^m - 1
CODE_K = 11             # message bits
CODE_T = 5              # correction capability
_PRIM_POLY = 0b100101   # x^5 + x^2 + 1

# log/antilog tables for GF(32); EXP is doubled so products of logs need no mod
EXP = [0] * 62
LOG = [0] * 32
_x = 1
for _i in range(31):
    EXP[_i] = _x
    LOG[_x] = _i
    _x <<= 1
    if _x & 32:
        _x ^= _PRIM_POLY
for _i in range(31, 62):
    EXP[_i] = EXP[_i - 31]


def gf_mul(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return EXP[LOG[a] + LOG[b]]


def gf_inv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("inverse of 0 in GF(32)")
    return EXP[(31 - LOG[a]) % 31]


def _poly2_mul(a: int, b: int) -> int:
    """Carry-less product of binary polynomials packed as ints."""
    r = 0
    while b:
        if b & 1:
            r ^= a
        a <<= 1
        b >>= 1
    return r


def _poly2_mod(a: int, g: int) -> int:
    dg = g.bit_length()
    while a.bit_length() >= dg:
        a ^= g << (a.bit_length() - dg)
    return a


def _minimal_polynomial(exponent: int) -> int:
    """Minimal polynomial over GF(2) of alpha^exponent, as a packed int."""
    coset = []
    e = exponent % 31
    while e not in coset:
        coset.append(e)
        e = (2 * e) % 31
    poly = [1]  # coefficients over GF(32), index = degree
    for j in coset:
        root = EXP[j]
        nxt = [0] * (len(poly) + 1)
        for d, c in enumerate(poly):
            nxt[d + 1] ^= c              # x * poly
            nxt[d] ^= gf_mul(root, c)    # root * poly
        poly = nxt
    if any(c not in (0, 1) for c in poly):
        raise AssertionError("minimal polynomial not binary")
    out = 0
    for d, c in enumerate(poly):
        out |= c << d
    return out


def bch_generator() -> int:
    """lcm of the minimal polynomials of alpha^1, alpha^3, ..., alpha^9.

    Even exponents are conjugates of odd ones, so the result vanishes on
    alpha^1..alpha^10 (design distance 11), has degree 20 and divides
    x^31 - 1.
    """
    g = 1
    seen = set()
    for e in (1, 3, 5, 7, 9):
        mp = _minimal_polynomial(e)
        if mp not in seen:
            seen.add(mp)
            g = _poly2_mul(g, mp)
    return g


GENERATOR = bch_generator()
assert GENERATOR.bit_length() - 1 == CODE_N - CODE_K


def bch_encode(msg: int) -> int:
    """Systematic 31-bit codeword for an 11-bit message."""
    if not 0 <= msg < (1 << CODE_K):
        raise ValueError("message must fit in 11 bits")
    shifted = msg << (CODE_N - CODE_K)
    return shifted | _poly2_mod(shifted, GENERATOR)


# one codeword per message; the hot receive path is a table compare
ENCODE_TABLE = np.array([bch_encode(m) for m in range(1 << CODE_K)],
                        dtype=np.int64)


def _syndromes(r: int):
    """S_i = r(alpha^i) for i = 1..2t; None when all vanish."""
    positions = [j for j in range(CODE_N) if (r >> j) & 1]
    syn = []
    nonzero = False
    for i in range(1, 2 * CODE_T + 1):
        s = 0
        for j in positions:
            s ^= EXP[(i * j) % 31]
        syn.append(s)
        nonzero = nonzero or s
    return syn if nonzero else None


def _berlekamp_massey(syn):
    """Error locator polynomial (list over GF(32), index = degree)."""
    c = [1]
    b = [1]
    l, m, bb = 0, 1, 1
    for n in range(2 * CODE_T):
        d = syn[n]
        for i in range(1, min(l, len(c) - 1) + 1):
            d ^= gf_mul(c[i], syn[n - i])
        if d == 0:
            m += 1
            continue
        coef = gf_mul(d, gf_inv(bb))
        shifted_len = len(b) + m
        if shifted_len > len(c):
            c = c + [0] * (shifted_len - len(c))
        prev_c = c[:]
        for i, bi in enumerate(b):
            c[i + m] ^= gf_mul(coef, bi)
        if 2 * l <= n:
            l = n + 1 - l
            b = prev_c
            bb = d
            m = 1
        else:
            m += 1
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return c, l


def bch_decode(received: int):
    """Decode a 31-bit word.

    Returns (message, corrections) on success, None on decode failure.
    A received word lying on a wrong codeword decodes "successfully" to
    that codeword; the caller accounts for that hazard end to end.
    """
    if not 0 <= received < (1 << CODE_N):
        raise ValueError("received word must fit in 31 bits")
    syn = _syndromes(received)
    if syn is None:
        return received >> (CODE_N - CODE_K), 0
    locator, l = _berlekamp_massey(syn)
    if l > CODE_T or len(locator) - 1 != l:
        return None
    # Chien search: an error sits at position j iff locator(alpha^-j) == 0
    err_mask = 0
    nroots = 0
    for j in range(CODE_N):
        acc = 0
        for d, cd in enumerate(locator):
            if cd:
                acc ^= EXP[(LOG[cd] + d * (31 - j)) % 31]
        if acc == 0:
            err_mask |= 1 << j
            nroots += 1
    if nroots != l:
        return None
    corrected = received ^ err_mask
    if int(ENCODE_TABLE[corrected >> (CODE_N - CODE_K)]) != corrected:
        return None
    return corrected >> (CODE_N - CODE_K), nroots


def codeword_error_prob(p_b: float) -> float:
    """Probability that more than t = 5 of the 31 bits arrive flipped.

    Exact upper binomial tail; numerically this equals the regularized
    incomplete beta form I_p(t+1, n-t) without the cancellation that the
    1 - CDF route suffers at small p.
    """
    if not 0.0 <= p_b <= 1.0:
        raise ValueError("bit error probability outside [0, 1]")
    if p_b == 0.0:
        return 0.0
    if p_b == 1.0:
        return 1.0
    total = 0.0
    for j in range(CODE_T + 1, CODE_N + 1):
        total += (math.comb(CODE_N, j) * p_b ** j * (1.0 - p_b) ** (CODE_N - j))
    return min(total, 1.0)
