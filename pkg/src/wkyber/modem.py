"""Gray-coded 4QAM over a memoryless AWGN channel.

Energy per bit is normalised to 1, so a symbol is (+-1, +-1) and the SNR in
dB fixes the noise variance alone: Eb/N0 = 10^(snr/10), per-component
variance N0/2.  Corner assignment (wire-format law):

    (+,+) <-> 00    (-,+) <-> 01    (-,-) <-> 11    (+,-) <-> 10

i.e. the low bit selects the I sign and the high bit the Q sign; adjacent
quadrants differ in exactly one bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class IQSymbol:
    i: float
    q: float


@dataclass(frozen=True)
class ChannelPlan:
    """SNR pair for one transmission: BCH-protected path / raw 2-bit path."""

    snr_msb_db: float
    snr_lsb_db: float


class NoiseSource:
    """Seeded circularly-symmetric Gaussian noise; one owner per thread."""

    def __init__(self, seed: int):
        self.seed = seed
        self._rng = np.random.default_rng(seed)

    def pairs(self, n: int, sigma: float) -> np.ndarray:
        """n complex samples, per-component deviation sigma."""
        flat = self._rng.normal(0.0, sigma, 2 * n)
        return flat[0::2] + 1j * flat[1::2]


def snr_db_to_linear(snr_db: float) -> float:
    return 10.0 ** (snr_db / 10.0)


def noise_sigma(snr_db: float) -> float:
    """Per-component noise deviation sqrt(N0/2) for Eb = 1."""
    return math.sqrt(1.0 / (2.0 * snr_db_to_linear(snr_db)))


def modulate_words(words: np.ndarray) -> np.ndarray:
    """Vector Gray mapping of 2-bit words onto the four quadrants."""
    w = np.asarray(words)
    return (1.0 - 2.0 * (w & 1)) + 1j * (1.0 - 2.0 * (w >> 1))


def demodulate_symbols(symbols: np.ndarray) -> np.ndarray:
    """Quadrant decision; sign ties go to the positive side."""
    s = np.asarray(symbols)
    return ((s.real < 0).astype(np.int64)
            + 2 * (s.imag < 0).astype(np.int64))


def modulate(word: int) -> IQSymbol:
    if word not in (0, 1, 2, 3):
        raise ValueError(f"2-bit word expected, got {word}")
    s = modulate_words(np.array([word]))[0]
    return IQSymbol(float(s.real), float(s.imag))


def demodulate(symbol) -> int:
    if isinstance(symbol, IQSymbol):
        symbol = symbol.i + 1j * symbol.q
    return int(demodulate_symbols(np.array([symbol]))[0])


def transmit(symbols: np.ndarray, snr_db: float, noise: NoiseSource) -> np.ndarray:
    """y = s + n with i.i.d. Gaussian components of variance N0/2."""
    symbols = np.asarray(symbols, dtype=np.complex128)
    if math.isinf(snr_db) and snr_db > 0:
        return symbols.copy()
    return symbols + noise.pairs(len(symbols), noise_sigma(snr_db))


# ---------------------------------------------------------------------------
# closed-form error rates


def q_function(x: float) -> float:
    """Gaussian upper-tail probability Q(x)."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def ber_4qam(eb_n0: float) -> float:
    """Bit error probability Q(sqrt(2 Eb/N0)) of Gray-coded 4QAM on AWGN."""
    if eb_n0 <= 0:
        raise ValueError("Eb/N0 must be positive")
    return q_function(math.sqrt(2.0 * eb_n0))


def ber_mpsk(eb_n0: float, m: int) -> float:
    """Approximate MPSK bit error probability for constellations of size M.

    Shows why one symbol per 12-bit coefficient is hopeless: the required
    constellation (~q points) drives the error rate up at any sane power.
    """
    if eb_n0 <= 0:
        raise ValueError("Eb/N0 must be positive")
    if m < 4 or m & (m - 1):
        raise ValueError("M must be a power of two, M >= 4")
    log2m = math.log2(m)
    return (2.0 / log2m) * q_function(
        math.sqrt(2.0 * eb_n0 * log2m) * math.sin(math.pi / m))
