"""WSSUS multipath channel generation and the per-subcarrier observation model.

Each transmit/receive link is a tapped delay line with complex gains
``alpha_i ~ CN(0, P_i)`` at delays ``tau_i``; the frequency response at
subcarrier ``k`` (1-based) is ``h(k) = sum_i alpha_i exp(-2j pi k df tau_i)``.
Gains are independent across links and frames and constant over the
``L`` OFDM symbols of a frame (block fading), so the response of a frame
is fully described by an ``(M, N, K)`` array.

The received frequency-domain signal per antenna/RE is
``y_n(k,l) = sum_m h_nm(k) x_m(k,l) + w_n(k,l)`` with white complex
Gaussian noise of variance ``noise_var``.  Time-domain OFDM processing
(IFFT, cyclic prefix) is not simulated: with the maximum delay inside
the cyclic prefix the two descriptions are exactly equivalent, and the
receivers operate entirely on the post-FFT grid.

Power delay profiles are normalized to unit total power so that the
average per-link channel gain is one and Eb/N0 bookkeeping stays
channel-independent in expectation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DimensionMismatchError(ValueError):
    """Raised when symbol grids and channel realizations disagree in shape."""


@dataclass(frozen=True)
class PowerDelayProfile:
    """Tap delays (seconds, strictly increasing) and linear powers summing to one."""

    name: str
    delays_s: np.ndarray
    powers: np.ndarray

    def __post_init__(self) -> None:
        delays = np.asarray(self.delays_s, dtype=float)
        powers = np.asarray(self.powers, dtype=float)
        if delays.shape != powers.shape or delays.ndim != 1 or delays.size == 0:
            raise ValueError("delays and powers must be matching nonempty 1-D arrays")
        if np.any(np.diff(delays) <= 0) and delays.size > 1:
            raise ValueError("tap delays must be strictly increasing")
        if np.any(delays < 0):
            raise ValueError("tap delays must be nonnegative")
        if np.any(powers <= 0):
            raise ValueError("tap powers must be positive")
        total = powers.sum()
        object.__setattr__(self, "delays_s", delays)
        object.__setattr__(self, "powers", powers / total)

    @property
    def n_taps(self) -> int:
        return self.delays_s.size

    @classmethod
    def from_db(cls, name: str, delays_ns, powers_db) -> "PowerDelayProfile":
        delays = np.asarray(delays_ns, dtype=float) * 1e-9
        powers = 10.0 ** (np.asarray(powers_db, dtype=float) / 10.0)
        return cls(name, delays, powers)


def etu_profile() -> PowerDelayProfile:
    """The 9-tap Extended Typical Urban profile, power-normalized."""
    delays_ns = [0.0, 50.0, 120.0, 200.0, 230.0, 500.0, 1600.0, 2300.0, 5000.0]
    powers_db = [-1.0, -1.0, -1.0, 0.0, 0.0, 0.0, -3.0, -5.0, -7.0]
    return PowerDelayProfile.from_db("etu", delays_ns, powers_db)


def freq_response(gains: np.ndarray, delays_s: np.ndarray, K: int, delta_f: float) -> np.ndarray:
    """Evaluate ``sum_i gains_i * exp(-2j pi k delta_f tau_i)`` at k = 1..K."""
    gains = np.asarray(gains, dtype=complex)
    delays = np.asarray(delays_s, dtype=float)
    if np.any(delays < 0):
        raise ValueError("delays must be nonnegative")
    k = np.arange(1, K + 1)
    phase = np.exp(-2j * np.pi * np.outer(k, delays) * delta_f)  # (K, I)
    return phase @ gains


@dataclass(frozen=True)
class ChannelRealization:
    """Tap gains of every link plus the derived per-subcarrier responses.

    ``gains[m, n, i]`` is tap ``i`` of the link from transmit antenna ``m``
    to receive antenna ``n``; ``freq[m, n, k]`` the response at subcarrier
    ``k+1``.  Responses are constant across the OFDM symbols of the frame.
    """

    profile: PowerDelayProfile
    gains: np.ndarray  # (M, N, I) complex
    freq: np.ndarray  # (M, N, K) complex
    delta_f: float

    @property
    def tx_antennas(self) -> int:
        return self.gains.shape[0]

    @property
    def rx_antennas(self) -> int:
        return self.gains.shape[1]

    @property
    def subcarriers(self) -> int:
        return self.freq.shape[2]

    def stacked(self, L: int) -> np.ndarray:
        """Full channel vector ``h`` of length M*N*K*L in the documented order.

        Ordering: transmit antenna, then receive antenna, then OFDM symbol,
        then subcarrier fastest; the response repeats across OFDM symbols.
        """
        M, N, K = self.freq.shape
        rep = np.broadcast_to(self.freq[:, :, None, :], (M, N, L, K))
        return rep.reshape(-1)


def draw_channel(
    profile: PowerDelayProfile, M: int, N: int, K: int, delta_f: float, rng: np.random.Generator
) -> ChannelRealization:
    """Draw i.i.d. Rayleigh tap gains for every link and derive responses."""
    shape = (M, N, profile.n_taps)
    scale = np.sqrt(profile.powers / 2.0)
    gains = scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    k = np.arange(1, K + 1)
    phase = np.exp(-2j * np.pi * np.outer(k, profile.delays_s) * delta_f)  # (K, I)
    freq = np.einsum("ki,mni->mnk", phase, gains)
    return ChannelRealization(profile=profile, gains=gains, freq=freq, delta_f=delta_f)


@dataclass(frozen=True)
class Observation:
    """Received frequency-domain grid ``y[n, l, k]`` and the true noise variance."""

    y: np.ndarray  # (N, L, K) complex
    noise_var: float

    @property
    def flat(self) -> np.ndarray:
        """Vectorized ``y`` (receive antenna, then symbol, then subcarrier fastest)."""
        return self.y.reshape(-1)


def transmit(
    symbols: np.ndarray, ch: ChannelRealization, noise_var: float, rng: np.random.Generator
) -> Observation:
    """Propagate symbol grids ``(M, L, K)`` through the channel and add noise.

    ``noise_var`` is the complex noise variance per resource element;
    zero disables noise.
    """
    symbols = np.asarray(symbols, dtype=complex)
    M, N, K = ch.freq.shape
    if symbols.ndim != 3 or symbols.shape[0] != M or symbols.shape[2] != K:
        raise DimensionMismatchError(
            f"symbol grid shape {symbols.shape} incompatible with channel ({M} tx, {K} subcarriers)"
        )
    if noise_var < 0:
        raise ValueError("noise variance must be nonnegative")
    # y[n,l,k] = sum_m freq[m,n,k] * x[m,l,k]
    y = np.einsum("mnk,mlk->nlk", ch.freq, symbols)
    if noise_var > 0:
        w = rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape)
        y = y + np.sqrt(noise_var / 2.0) * w
    return Observation(y=y, noise_var=float(noise_var))


def freq_prior_covariance(profile: PowerDelayProfile, K: int, delta_f: float) -> np.ndarray:
    """Exact WSSUS frequency-correlation matrix of one link.

    ``[C]_{k,k'} = sum_i P_i exp(-2j pi (k - k') delta_f tau_i)``; Hermitian
    Toeplitz with unit diagonal after profile normalization.  Its rank is
    at most the number of taps, so consumers that need an inverse must
    regularize.
    """
    k = np.arange(K)
    diff = k[:, None] - k[None, :]
    cov = np.einsum("i,kli->kl", profile.powers, np.exp(-2j * np.pi * diff[..., None] * delta_f * profile.delays_s))
    return 0.5 * (cov + cov.conj().T)
