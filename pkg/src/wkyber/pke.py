"""Baseline module-LWE public-key encryption (keygen / encrypt / decrypt).

This is the reference scheme with binomially sampled errors and compressed
ciphertexts; the wireless variants in :mod:`wkyber.protocol` reuse its key
generation and drop the sampled ciphertext noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (RingElement, RingVector, XofStream, check_seed,
                   compress_array, decompress_array, gen_matrix, inner_product,
                   matvec_mul, pack12, poly_add, poly_sub, sample_noise_vector,
                   unpack12, vec_add)
from .params import N, ParamSet


class Message:
    """A 256-bit plaintext."""

    __slots__ = ("bits",)

    def __init__(self, bits):
        arr = np.asarray(bits, dtype=np.int64)
        if arr.shape != (N,) or not np.isin(arr, (0, 1)).all():
            raise ValueError("message must be 256 binary values")
        self.bits = arr

    @classmethod
    def random(cls, stream) -> "Message":
        raw = np.frombuffer(stream.read(N // 8), dtype=np.uint8)
        return cls(np.unpackbits(raw, bitorder="little"))

    @classmethod
    def zero(cls) -> "Message":
        return cls(np.zeros(N, dtype=np.int64))

    def to_bytes(self) -> bytes:
        return np.packbits(self.bits.astype(np.uint8), bitorder="little").tobytes()

    def __eq__(self, other):
        return isinstance(other, Message) and np.array_equal(self.bits, other.bits)

    def __repr__(self):
        return f"Message({self.to_bytes().hex()})"


class PublicKey:
    """(seed for the matrix A, vector b).  The expanded A is cached."""

    __slots__ = ("seed", "b", "_a")

    def __init__(self, seed: bytes, b: RingVector):
        self.seed = check_seed(seed)
        self.b = b
        self._a = None

    def matrix(self, params: ParamSet):
        if self._a is None:
            self._a = gen_matrix(self.seed, params)
        return self._a

    def to_bytes(self) -> bytes:
        return self.seed + pack12(self.b.coeff_array())

    @classmethod
    def from_bytes(cls, data: bytes, params: ParamSet) -> "PublicKey":
        seed, packed = data[:32], data[32:]
        coeffs = unpack12(packed, params.k * N)
        elems = [RingElement(coeffs[i * N:(i + 1) * N]) for i in range(params.k)]
        return cls(seed, RingVector(elems))

    def __eq__(self, other):
        return (isinstance(other, PublicKey) and self.seed == other.seed
                and self.b == other.b)


@dataclass
class SecretKey:
    s: RingVector

    def to_bytes(self) -> bytes:
        return pack12(self.s.coeff_array())

    @classmethod
    def from_bytes(cls, data: bytes, params: ParamSet) -> "SecretKey":
        coeffs = unpack12(data, params.k * N)
        elems = [RingElement(coeffs[i * N:(i + 1) * N]) for i in range(params.k)]
        return cls(RingVector(elems))


@dataclass
class CompressedCiphertext:
    """Ciphertext with d_u / d_v bit coefficients (baseline scheme only)."""

    u_c: list  # k arrays of n integers in [0, 2^du)
    v_c: np.ndarray  # n integers in [0, 2^dv)

    def __eq__(self, other):
        return (isinstance(other, CompressedCiphertext)
                and len(self.u_c) == len(other.u_c)
                and all(np.array_equal(a, b) for a, b in zip(self.u_c, other.u_c))
                and np.array_equal(self.v_c, other.v_c))


def keygen(seed_a: bytes, rng, params: ParamSet):
    """b = A s + e with s, e drawn from the eta1 binomial; pk carries the seed."""
    a = gen_matrix(seed_a, params)
    s = sample_noise_vector(rng, params.eta1, params.k)
    e = sample_noise_vector(rng, params.eta1, params.k)
    b = vec_add(matvec_mul(a, s), e)
    pk = PublicKey(seed_a, b)
    pk._a = a
    return pk, SecretKey(s)


def message_to_ring(m: Message) -> RingElement:
    """Per-bit decompress(bit, 1): 0 -> 0, 1 -> 1665."""
    return RingElement(decompress_array(m.bits, 1))


def _expand_coins(coins: bytes, params: ParamSet):
    check_seed(coins)
    sp = sample_noise_vector(XofStream(coins, b"sp"), params.eta1, params.k)
    ep = sample_noise_vector(XofStream(coins, b"ep"), params.eta2, params.k)
    epp = sample_noise_vector(XofStream(coins, b"epp"), params.eta2, 1)[0]
    return sp, ep, epp


def encrypt_with_noise(pk: PublicKey, m: Message, sp: RingVector,
                       ep: RingVector, epp: RingElement,
                       params: ParamSet) -> CompressedCiphertext:
    """Encryption core with the noise terms supplied by the caller."""
    a = pk.matrix(params)
    u = vec_add(matvec_mul(a, sp, transpose=True), ep)
    v = poly_add(poly_add(inner_product(pk.b, sp), epp), message_to_ring(m))
    return CompressedCiphertext(
        u_c=[compress_array(p.coeffs, params.du) for p in u],
        v_c=compress_array(v.coeffs, params.dv),
    )


def encrypt(pk: PublicKey, m: Message, coins: bytes,
            params: ParamSet) -> CompressedCiphertext:
    """u = A^T s' + e', v = b^T s' + e'' + mhat, both compressed.

    Deterministic: s', e', e'' are expanded from the 32-byte coins.
    """
    sp, ep, epp = _expand_coins(coins, params)
    return encrypt_with_noise(pk, m, sp, ep, epp, params)


def decrypt(sk: SecretKey, ct: CompressedCiphertext, params: ParamSet) -> Message:
    """Recover each bit as compress(v - s^T u, 1)."""
    u = RingVector([RingElement(decompress_array(uc, params.du)) for uc in ct.u_c])
    v = RingElement(decompress_array(ct.v_c, params.dv))
    w = poly_sub(v, inner_product(sk.s, u))
    return Message(compress_array(w.coeffs, 1))


def decryption_noise(sk: SecretKey, ct: CompressedCiphertext, m: Message,
                     params: ParamSet) -> np.ndarray:
    """Centered per-coefficient noise v - s^T u - mhat, for diagnostics.

    Decryption recovers m wherever this stays strictly inside the decision
    region around the encoded bit.
    """
    u = RingVector([RingElement(decompress_array(uc, params.du)) for uc in ct.u_c])
    v = RingElement(decompress_array(ct.v_c, params.dv))
    w = poly_sub(poly_sub(v, inner_product(sk.s, u)), message_to_ring(m))
    return w.centered()
