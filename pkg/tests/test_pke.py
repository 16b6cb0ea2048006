import numpy as np
import pytest

from wkyber.core import FixedStream, RingElement, RingVector, XofStream, matvec_mul
from wkyber.params import KYBER768, N, Q, PARAM_SETS
from wkyber.pke import (CompressedCiphertext, Message, PublicKey, SecretKey,
                        decrypt, decryption_noise, encrypt, keygen,
                        message_to_ring)

SEED = bytes(32)


def stream(label):
    return XofStream(b"\xab" * 32, label)


class TestMessage:
    def test_roundtrip_bytes(self):
        m = Message.random(stream(b"m"))
        assert Message(np.unpackbits(np.frombuffer(m.to_bytes(), np.uint8),
                                     bitorder="little")) == m

    def test_rejects_non_binary(self):
        with pytest.raises(ValueError):
            Message(np.full(N, 2))

    def test_mhat_values(self):
        m = Message.random(stream(b"m2"))
        mhat = message_to_ring(m)
        assert set(np.unique(mhat.coeffs)) <= {0, 1665}


class TestKeygen:
    def test_zero_noise_gives_zero_b(self):
        # forced s = 0, e = 0 via an all-zero sampling stream
        pk, sk = keygen(SEED, FixedStream(bytes(10_000)), KYBER768)
        assert pk.b == RingVector.zero(3)
        assert sk.s == RingVector.zero(3)

    def test_deterministic(self):
        pk1, sk1 = keygen(SEED, stream(b"kg"), KYBER768)
        pk2, sk2 = keygen(SEED, stream(b"kg"), KYBER768)
        assert pk1 == pk2 and sk1.s == sk2.s

    @pytest.mark.parametrize("params", PARAM_SETS.values(), ids=lambda p: p.name)
    def test_b_minus_as_in_cbd_range(self, params):
        pk, sk = keygen(SEED, stream(b"kg3"), params)
        a_s = matvec_mul(pk.matrix(params), sk.s)
        for be, ae in zip(pk.b, a_s):
            e = (be.coeffs - ae.coeffs) % Q
            assert ((e <= params.eta1) | (e >= Q - params.eta1)).all()


class TestEncryptDecrypt:
    def test_forced_zero_noise_gives_zero_ciphertext(self):
        from wkyber.pke import encrypt_with_noise
        pk, _ = keygen(SEED, stream(b"kgz"), KYBER768)
        ct = encrypt_with_noise(pk, Message.zero(), RingVector.zero(3),
                                RingVector.zero(3), RingElement.zero(), KYBER768)
        assert all((uc == 0).all() for uc in ct.u_c)
        assert (ct.v_c == 0).all()

    def test_noise_free_construction_decrypts_exactly(self):
        # no error terms and no compression loss on v=mhat: decrypt is exact
        sk = SecretKey(RingVector.zero(3))
        m = Message.random(stream(b"nf"))
        ct = CompressedCiphertext(
            u_c=[np.zeros(N, dtype=np.int64) for _ in range(3)],
            v_c=np.array([0 if b == 0 else (1 << KYBER768.dv) // 2
                          for b in m.bits], dtype=np.int64))
        assert decrypt(sk, ct, KYBER768) == m

    def test_deterministic(self):
        pk, _ = keygen(SEED, stream(b"kg4"), KYBER768)
        m = Message.random(stream(b"m4"))
        assert encrypt(pk, m, b"c" * 32, KYBER768) == encrypt(pk, m, b"c" * 32, KYBER768)

    @pytest.mark.parametrize("params", PARAM_SETS.values(), ids=lambda p: p.name)
    def test_roundtrips(self, params):
        kg = stream(b"kg5" + params.name.encode())
        ms = stream(b"m5")
        for i in range(30):
            pk, sk = keygen(SEED, kg, params)
            m = Message.random(ms)
            ct = encrypt(pk, m, ms.read(32), params)
            assert decrypt(sk, ct, params) == m

    def test_noise_stays_below_bound(self):
        pk, sk = keygen(SEED, stream(b"kg6"), KYBER768)
        ms = stream(b"m6")
        for _ in range(10):
            m = Message.random(ms)
            ct = encrypt(pk, m, ms.read(32), KYBER768)
            noise = decryption_noise(sk, ct, m, KYBER768)
            assert np.abs(noise).max() < 832

    def test_decision_boundary_single_coefficient(self):
        # direct per-coefficient sweep: bit survives iff the added noise stays
        # inside the decision region of compress(., 1); noise of magnitude
        # < 832 = round(q/4) is always safe, 832 already flips an encoded 1
        from wkyber.core import compress
        for delta in range(-840, 841):
            bit0_ok = compress(delta % Q, 1) == 0
            assert bit0_ok == (abs(delta) <= 832)
            bit1_ok = compress((1665 + delta) % Q, 1) == 1
            assert bit1_ok == (-832 <= delta <= 831)
            if abs(delta) < 832:
                assert bit0_ok and bit1_ok


class TestSerialization:
    @pytest.mark.parametrize("params", PARAM_SETS.values(), ids=lambda p: p.name)
    def test_pk_sk_roundtrip(self, params):
        pk, sk = keygen(SEED, stream(b"ser"), params)
        assert PublicKey.from_bytes(pk.to_bytes(), params) == pk
        assert SecretKey.from_bytes(sk.to_bytes(), params).s == sk.s

    def test_pk_length(self):
        pk, _ = keygen(SEED, stream(b"len"), KYBER768)
        assert len(pk.to_bytes()) == 32 + 3 * 384  # seed + 12-bit packed b
