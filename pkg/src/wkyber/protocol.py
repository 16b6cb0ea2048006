"""WKyber V1/V2 public-key encryption and the V1 key encapsulation mechanism.

Both versions drop the sampled ciphertext noise of the baseline scheme and
let the channel supply it: the uncompressed ciphertext (u = A^T s',
v = b^T s' + mhat) travels with its two low bits exposed at low SNR.  V1
keeps the baseline key generation (b = A s + e, public key sent with both
paths well protected) and therefore supports the re-encrypting KEM; V2 also
drops e (b = A s) and lets the public-key transmission inject it, which
rules out re-encryption, so V2 is used as a PKE with ephemeral keys.

KEM robustness detail: the public key's two low bits per coefficient are
not BCH-protected, so rare channel flips would leave encapsulator and
decapsulator with different views of b and make the re-encryption check
fail spuriously.  The KEM therefore binds its hash chain and re-encryption
to the protected projection of the key (w2 bits zeroed); the low bits still
travel and still feed decryption, but the check no longer depends on them.
Like the relaxed ciphertext comparison, the security of ignoring exposed
bits in the check is not analysed here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (RingElement, RingVector, XofStream, check_seed,
                   compress_array, gen_matrix, inner_product, matvec_mul,
                   pack12, sample_noise_vector, unpack12)
from .modem import ChannelPlan, NoiseSource
from .params import N, Q, ParamSet
from .pke import Message, PublicKey, SecretKey, keygen, message_to_ring
from .transport import Frame, receive_blocks, receive_coeffs, send_blocks, send_coeffs


# ---------------------------------------------------------------------------
# ciphertext and V2 key


@dataclass
class WkCiphertext:
    """Uncompressed ciphertext: full 12-bit coefficients, never compressed."""

    u: RingVector
    v: RingElement

    def coeff_array(self) -> np.ndarray:
        return np.concatenate([self.u.coeff_array(), self.v.coeffs])

    def to_bytes(self) -> bytes:
        return pack12(self.coeff_array())

    @classmethod
    def from_coeffs(cls, coeffs: np.ndarray, k: int) -> "WkCiphertext":
        elems = [RingElement(coeffs[i * N:(i + 1) * N]) for i in range(k)]
        return cls(u=RingVector(elems), v=RingElement(coeffs[k * N:]))

    @classmethod
    def from_bytes(cls, data: bytes, params: ParamSet) -> "WkCiphertext":
        count = (params.k + 1) * N
        return cls.from_coeffs(unpack12(data, count), params.k)

    def __eq__(self, other):
        return (isinstance(other, WkCiphertext) and self.u == other.u
                and self.v == other.v)


class WkPublicKeyV2(PublicKey):
    """V2 public key: b is exactly A s before transmission; the receiver's
    copy picks up channel noise the sender never learns."""

    @property
    def b_clean(self) -> RingVector:
        return self.b


# ---------------------------------------------------------------------------
# SNR policy


@dataclass(frozen=True)
class SnrPolicy:
    """Operating window: protected path at >= 10 dB keeps decode failures
    negligible, exposed path at <= -5 dB keeps the injected error wide
    enough (its deviation stays above the baseline binomial's)."""

    min_msb_db: float = 10.0
    max_lsb_db: float = -5.0

    def violations(self, plan: ChannelPlan, label: str) -> list:
        out = []
        if not plan.snr_msb_db >= self.min_msb_db:
            out.append(f"{label}: MSB-path SNR {plan.snr_msb_db:g} dB below "
                       f"{self.min_msb_db:g} dB; decode failures not negligible")
        if not plan.snr_lsb_db <= self.max_lsb_db:
            out.append(f"{label}: LSB-path SNR {plan.snr_lsb_db:g} dB above "
                       f"{self.max_lsb_db:g} dB; injected error too narrow")
        return out


# ---------------------------------------------------------------------------
# V1 / V2 PKE


def v1_keygen(seed_a: bytes, rng, params: ParamSet):
    """Identical to the baseline key generation (binomial e retained)."""
    return keygen(seed_a, rng, params)


def v2_keygen(seed_a: bytes, rng, params: ParamSet):
    """b = A s with no sampled error; the channel adds it in transit."""
    a = gen_matrix(seed_a, params)
    s = sample_noise_vector(rng, params.eta1, params.k)
    b = matvec_mul(a, s)
    pk = WkPublicKeyV2(seed_a, b)
    pk._a = a
    return pk, SecretKey(s)


def _sample_sprime(coins: bytes, params: ParamSet) -> RingVector:
    check_seed(coins)
    return sample_noise_vector(XofStream(coins, b"sp"), params.eta1, params.k)


def wk_encrypt_with_sprime(pk: PublicKey, m: Message, sp: RingVector,
                           params: ParamSet) -> WkCiphertext:
    a = pk.matrix(params)
    u = matvec_mul(a, sp, transpose=True)
    v = RingElement(inner_product(pk.b, sp).coeffs
                    + message_to_ring(m).coeffs)
    return WkCiphertext(u=u, v=v)


def wk_encrypt(pk: PublicKey, m: Message, coins: bytes,
               params: ParamSet) -> WkCiphertext:
    """u = A^T s', v = b^T s' + mhat; no e' or e'' is ever sampled."""
    return wk_encrypt_with_sprime(pk, m, _sample_sprime(coins, params), params)


def wk_decrypt(sk: SecretKey, c: WkCiphertext) -> Message:
    """Per-coefficient compress(v - s^T u, 1)."""
    w = (c.v.coeffs - inner_product(sk.s, c.u).coeffs) % Q
    return Message(compress_array(w, 1))


def wk_decryption_noise(sk: SecretKey, c: WkCiphertext, m: Message) -> np.ndarray:
    """Centered per-coefficient noise v - s^T u - mhat (diagnostics)."""
    w = RingElement(c.v.coeffs - inner_product(sk.s, c.u).coeffs
                    - message_to_ring(m).coeffs)
    return w.centered()


# spec'd aliases: V1 and V2 share the encryption/decryption contracts
v1_encrypt = wk_encrypt
v1_decrypt = wk_decrypt
v2_encrypt = wk_encrypt
v2_decrypt = wk_decrypt


# ---------------------------------------------------------------------------
# V1 KEM (re-encrypting transform with implicit rejection)


@dataclass
class KemSecretKey:
    sk: SecretKey
    z: bytes  # implicit-rejection secret


def kem_v1_keygen(seed_a: bytes, rng, params: ParamSet):
    pk, sk = v1_keygen(seed_a, rng, params)
    return pk, KemSecretKey(sk=sk, z=rng.read(32))


def _project_pk(pk: PublicKey) -> PublicKey:
    """Zero the exposed w2 bits of b: the channel-robust view of the key."""
    b = RingVector([RingElement(e.coeffs & ~np.int64(3)) for e in pk.b])
    proj = PublicKey(pk.seed, b)
    proj._a = pk._a  # same seed, same matrix
    return proj


def _hash(label: bytes, data: bytes, outlen: int = 32) -> bytes:
    return XofStream(data, label).read(outlen)


def _derive_key_coins(m: Message, pk_proj: PublicKey):
    pk_hash = _hash(b"pk", pk_proj.to_bytes())
    kd = _hash(b"enc", m.to_bytes() + pk_hash, 64)
    return kd[:32], kd[32:]


def kem_v1_encaps(pk: PublicKey, rng, params: ParamSet):
    """Returns (ciphertext to transmit, shared secret).

    Deterministic given (pk, message): key and coins derive from the message
    and the projected public key; the secret also binds the clean ciphertext.
    """
    m = Message.random(rng)
    return _encaps_with_message(pk, m, params)


def _encaps_with_message(pk: PublicKey, m: Message, params: ParamSet):
    pk_proj = _project_pk(pk)
    k_bytes, coins = _derive_key_coins(m, pk_proj)
    c = wk_encrypt(pk_proj, m, coins, params)
    secret = _hash(b"kdf", k_bytes + _hash(b"ct", c.to_bytes()))
    return c, secret


def _coeffs_match(a: np.ndarray, b: np.ndarray, policy: str) -> bool:
    if policy == "exact":
        return np.array_equal(a, b)
    if policy == "msb-only":
        # the protected words agree iff the values differ by at most a w2
        # perturbation; the centered comparison also absorbs the mod-q wrap
        # of coefficients stored just below q
        diff = (a - b) % Q
        diff[diff > Q // 2] -= Q
        return bool((np.abs(diff) <= 3).all())
    raise ValueError(f"unknown comparison policy {policy!r}")


def kem_v1_decaps(ksk: KemSecretKey, pk: PublicKey, c_received: WkCiphertext,
                  params: ParamSet, policy: str = "msb-only") -> bytes:
    """Decrypt, re-encrypt, compare; mismatches yield the implicit-rejection
    secret rather than an error.

    The default msb-only policy compares only the BCH-protected content;
    exact comparison rejects nearly every honest session because the channel
    legitimately perturbs the exposed bits.
    """
    m2 = wk_decrypt(ksk.sk, c_received)
    pk_proj = _project_pk(pk)
    k_bytes, coins = _derive_key_coins(m2, pk_proj)
    c2 = wk_encrypt(pk_proj, m2, coins, params)
    if _coeffs_match(c2.coeff_array(), c_received.coeff_array(), policy):
        return _hash(b"kdf", k_bytes + _hash(b"ct", c2.to_bytes()))
    return _hash(b"rej", ksk.z + _hash(b"ct", c_received.to_bytes()))


# ---------------------------------------------------------------------------
# full sessions over the simulated channel


@dataclass
class SessionTranscript:
    version: str
    k: int
    pk_plan: ChannelPlan
    ct_plan: ChannelPlan
    outcome: bool
    bch_failures_pk: int
    bch_failures_ct: int
    policy_warnings: tuple = ()
    ct_error_offsets: np.ndarray | None = None

    @property
    def bch_failures(self) -> int:
        return self.bch_failures_pk + self.bch_failures_ct

    def record(self, session_id) -> str:
        return ",".join([
            str(session_id), self.version, str(self.k),
            f"{self.pk_plan.snr_msb_db:g}", f"{self.pk_plan.snr_lsb_db:g}",
            f"{self.ct_plan.snr_msb_db:g}", f"{self.ct_plan.snr_lsb_db:g}",
            "match" if self.outcome else "mismatch",
            str(self.bch_failures),
        ])


def _derive_seed(master: int, label: bytes) -> bytes:
    return _hash(b"session" + label, master.to_bytes(8, "little", signed=False))


def _send_pk(pk: PublicKey, plan: ChannelPlan, noise: NoiseSource, params: ParamSet):
    """Seed bytes ride the protected path (26 blocks of 10 bits), then the
    b coefficients take the standard 17-symbol form."""
    seed_bits = np.unpackbits(np.frombuffer(pk.seed, dtype=np.uint8),
                              bitorder="little").astype(np.int64)
    padded = np.concatenate([seed_bits, np.zeros(4, dtype=np.int64)])
    weights = (1 << np.arange(9, -1, -1)).astype(np.int64)
    words = padded.reshape(26, 10) @ weights
    seed_syms = send_blocks(words, plan.snr_msb_db, noise)
    frame = send_coeffs(pk.b.coeff_array(), plan, noise)
    return seed_syms, frame


def _receive_pk(seed_syms, frame: Frame, params: ParamSet, v2: bool):
    words, seed_failed = receive_blocks(seed_syms, 26)
    shifts = np.arange(9, -1, -1)
    bits = ((words[:, None] >> shifts) & 1).ravel()[:256].astype(np.uint8)
    seed = np.packbits(bits, bitorder="little").tobytes()
    coeffs, b_fail = receive_coeffs(frame, params.k * N)
    elems = [RingElement(coeffs[i * N:(i + 1) * N]) for i in range(params.k)]
    cls = WkPublicKeyV2 if v2 else PublicKey
    return cls(seed, RingVector(elems)), int(seed_failed.sum()) + b_fail


def _send_ct(c: WkCiphertext, plan: ChannelPlan, noise: NoiseSource) -> Frame:
    return send_coeffs(c.coeff_array(), plan, noise)


def _receive_ct(frame: Frame, params: ParamSet):
    coeffs, failures = receive_coeffs(frame, (params.k + 1) * N)
    return WkCiphertext.from_coeffs(coeffs, params.k), failures


def run_session(version: str, params: ParamSet, plans, seed: int,
                policy: SnrPolicy | None = None,
                fo_policy: str = "msb-only",
                collect_offsets: bool = False) -> SessionTranscript:
    """One full exchange: keygen, key transport, encrypt/encaps, ciphertext
    transport, decrypt/decaps.

    plans is the (public key, ciphertext) ChannelPlan pair.  Policy
    violations are recorded as warnings; the run proceeds regardless.
    V2 keys are ephemeral by construction: every session generates its own.
    """
    if version not in ("v1", "v2"):
        raise ValueError(f"version must be 'v1' or 'v2', got {version!r}")
    pk_plan, ct_plan = plans
    policy = policy or SnrPolicy()
    warnings = tuple(policy.violations(ct_plan, "ciphertext")
                     + (policy.violations(pk_plan, "public key")
                        if version == "v2" else []))

    key_rng = XofStream(_derive_seed(seed, b"key"), b"rng")
    msg_rng = XofStream(_derive_seed(seed, b"msg"), b"rng")
    noise_a = NoiseSource(int.from_bytes(_derive_seed(seed, b"ch-a")[:8], "little"))
    noise_b = NoiseSource(int.from_bytes(_derive_seed(seed, b"ch-b")[:8], "little"))
    seed_a = key_rng.read(32)

    if version == "v1":
        pk, ksk = kem_v1_keygen(seed_a, key_rng, params)
        seed_syms, pk_frame = _send_pk(pk, pk_plan, noise_a, params)
        pk_rx, pk_fail = _receive_pk(seed_syms, pk_frame, params, v2=False)
        c_clean, secret_b = kem_v1_encaps(pk_rx, msg_rng, params)
        ct_frame = _send_ct(c_clean, ct_plan, noise_b)
        c_rx, ct_fail = _receive_ct(ct_frame, params)
        secret_a = kem_v1_decaps(ksk, pk, c_rx, params, policy=fo_policy)
        outcome = secret_a == secret_b
    else:
        pk, sk = v2_keygen(seed_a, key_rng, params)
        seed_syms, pk_frame = _send_pk(pk, pk_plan, noise_a, params)
        pk_rx, pk_fail = _receive_pk(seed_syms, pk_frame, params, v2=True)
        m = Message.random(msg_rng)
        c_clean = v2_encrypt(pk_rx, m, msg_rng.read(32), params)
        ct_frame = _send_ct(c_clean, ct_plan, noise_b)
        c_rx, ct_fail = _receive_ct(ct_frame, params)
        outcome = v2_decrypt(sk, c_rx) == m

    offsets = None
    if collect_offsets:
        diff = (c_rx.coeff_array() - c_clean.coeff_array()) % Q
        diff[diff > Q // 2] -= Q
        offsets = diff
    return SessionTranscript(version=version, k=params.k, pk_plan=pk_plan,
                             ct_plan=ct_plan, outcome=outcome,
                             bch_failures_pk=pk_fail, bch_failures_ct=ct_fail,
                             policy_warnings=warnings,
                             ct_error_offsets=offsets)
