"""Bit/symbol mapping and discrete symbol-belief algebra.

Constellations are unit-average-energy with Gray labeling.  A symbol's
integer label packs its bits MSB-first, and ``points[label]`` is the
complex constellation point:

* QPSK: labels 00, 01, 11, 10 sit counterclockwise at 45, 135, 225,
  315 degrees, so ``00 -> (1+1j)/sqrt(2)``.
* 16QAM: the first two bits select the in-phase level and the last two
  the quadrature level through the 2-bit Gray map
  ``00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3`` (scaled by ``1/sqrt(10)``).

Symbol probability mass functions (pmfs) are dense arrays over the
alphabet, kept normalized; all pmf products run in the log domain with
max subtraction so that near-certain beliefs at high SNR do not
underflow.

The :class:`SymbolBeliefGrid` stores the per-resource-element first and
second moments consumed by the observation-factor updates.  Pilot REs
carry degenerate beliefs (known value, zero variance) in the same grid
so downstream matrix assembly is uniform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .fec import saturate_llrs
from .frame import PilotPattern


class DegenerateVarianceError(ValueError):
    """Raised when a Gaussian evidence variance is not strictly positive."""


_GRAY2 = {0b00: -3.0, 0b01: -1.0, 0b11: 1.0, 0b10: 3.0}


def _qpsk_points() -> np.ndarray:
    pts = np.empty(4, dtype=complex)
    pts[0b00] = 1 + 1j
    pts[0b01] = -1 + 1j
    pts[0b11] = -1 - 1j
    pts[0b10] = 1 - 1j
    return pts / np.sqrt(2.0)


def _qam16_points() -> np.ndarray:
    pts = np.empty(16, dtype=complex)
    for label in range(16):
        i_bits = label >> 2
        q_bits = label & 0b11
        pts[label] = _GRAY2[i_bits] + 1j * _GRAY2[q_bits]
    return pts / np.sqrt(10.0)


@dataclass(frozen=True)
class Constellation:
    """Gray-labeled complex alphabet with unit average energy."""

    name: str
    points: np.ndarray  # (S,), indexed by the MSB-first integer label
    bits_per_symbol: int

    def __post_init__(self) -> None:
        points = np.asarray(self.points, dtype=complex)
        if points.size != 1 << self.bits_per_symbol:
            raise ValueError("alphabet size must be 2**bits_per_symbol")
        if not np.isclose(np.mean(np.abs(points) ** 2), 1.0, atol=1e-12):
            raise ValueError("constellation must have unit average energy")
        object.__setattr__(self, "points", points)

    @property
    def size(self) -> int:
        return self.points.size

    def label_bits(self) -> np.ndarray:
        """Bit table of shape (S, bits_per_symbol), MSB first."""
        labels = np.arange(self.size)
        shifts = np.arange(self.bits_per_symbol - 1, -1, -1)
        return ((labels[:, None] >> shifts[None, :]) & 1).astype(np.uint8)

    @classmethod
    def get(cls, name: str) -> "Constellation":
        name = name.lower()
        if name == "qpsk":
            return cls("qpsk", _qpsk_points(), 2)
        if name == "16qam":
            return cls("16qam", _qam16_points(), 4)
        raise ValueError(f"unknown constellation {name!r}")


def map_bits(bits: np.ndarray, constellation: Constellation) -> np.ndarray:
    """Map a bit sequence onto constellation symbols (MSB-first per symbol)."""
    bits = np.asarray(bits, dtype=np.int64).reshape(-1)
    bps = constellation.bits_per_symbol
    if bits.size % bps:
        raise ValueError(f"bit count {bits.size} not divisible by {bps}")
    groups = bits.reshape(-1, bps)
    weights = 1 << np.arange(bps - 1, -1, -1)
    labels = groups @ weights
    return constellation.points[labels]


def hard_decisions(symbols: np.ndarray, constellation: Constellation) -> np.ndarray:
    """Nearest-point demapping back to bits."""
    symbols = np.asarray(symbols, dtype=complex).reshape(-1)
    d = np.abs(symbols[:, None] - constellation.points[None, :])
    labels = np.argmin(d, axis=1)
    return constellation.label_bits()[labels].reshape(-1)


def _normalize_log_pmf(logp: np.ndarray) -> np.ndarray:
    logp = logp - logp.max(axis=-1, keepdims=True)
    p = np.exp(logp)
    return p / p.sum(axis=-1, keepdims=True)


def extrinsic_symbol_pmf(bit_llrs: np.ndarray, constellation: Constellation) -> np.ndarray:
    """Per-symbol pmf from independent per-bit LLRs.

    ``bit_llrs`` has shape ``(..., bits_per_symbol)``; the result has shape
    ``(..., S)`` with ``pmf(s) ~ prod_b P(bit_b = label_b(s))``.
    """
    llrs = np.asarray(bit_llrs, dtype=float)
    if llrs.shape[-1] != constellation.bits_per_symbol:
        raise ValueError("LLR slice length must equal bits_per_symbol")
    logp0 = -np.logaddexp(0.0, -llrs)
    logp1 = -np.logaddexp(0.0, llrs)
    bits = constellation.label_bits().astype(float)  # (S, B)
    logp = logp0 @ (1.0 - bits.T) + logp1 @ bits.T
    return _normalize_log_pmf(logp)


def uniform_pmf(shape: tuple[int, ...], constellation: Constellation) -> np.ndarray:
    return np.full(shape + (constellation.size,), 1.0 / constellation.size)


def combine_symbol_belief(
    beta: np.ndarray, x_vmp: np.ndarray, sigma2: np.ndarray, constellation: Constellation
) -> np.ndarray:
    """Multiply a discrete prior pmf with Gaussian evidence and renormalize.

    Implements ``pmf(s) ~ beta(s) * exp(-|s - x_vmp|^2 / sigma2)`` per
    resource element; ``beta``, ``x_vmp`` and ``sigma2`` broadcast over
    leading axes.
    """
    beta = np.asarray(beta, dtype=float)
    x_vmp = np.asarray(x_vmp, dtype=complex)
    sigma2 = np.asarray(sigma2, dtype=float)
    if np.any(sigma2 <= 0):
        raise DegenerateVarianceError("evidence variance must be strictly positive")
    with np.errstate(divide="ignore"):
        log_beta = np.log(beta)
    d2 = np.abs(x_vmp[..., None] - constellation.points) ** 2
    return _normalize_log_pmf(log_beta - d2 / sigma2[..., None])


def pmf_moments(pmf: np.ndarray, constellation: Constellation) -> tuple[np.ndarray, np.ndarray]:
    """Mean and variance of symbol pmfs; shapes ``(..., S) -> (...), (...)``."""
    pmf = np.asarray(pmf, dtype=float)
    pts = constellation.points
    mean = pmf @ pts
    second = pmf @ (np.abs(pts) ** 2)
    var = np.maximum(second - np.abs(mean) ** 2, 0.0)
    return mean, var


def gaussian_bit_llrs(
    x_vmp: np.ndarray,
    sigma2: np.ndarray,
    constellation: Constellation,
    bit_priors: np.ndarray | None = None,
) -> np.ndarray:
    """Soft-demap Gaussian symbol evidence into per-bit LLRs.

    Marginalizes ``exp(-|s - x_vmp|^2 / sigma2)`` over the alphabet; with
    ``bit_priors`` given (shape ``(..., B)``), the prior of the *other*
    bits of each symbol weighs the marginalization and the output stays
    extrinsic with respect to each bit's own prior.  Output shape is
    ``(..., bits_per_symbol)``, saturated to +/-40.
    """
    x_vmp = np.asarray(x_vmp, dtype=complex)
    sigma2 = np.asarray(sigma2, dtype=float)
    if np.any(sigma2 <= 0):
        raise DegenerateVarianceError("evidence variance must be strictly positive")
    bits = constellation.label_bits()  # (S, B)
    n_bits = constellation.bits_per_symbol
    score = -(np.abs(x_vmp[..., None] - constellation.points) ** 2) / sigma2[..., None]
    # per-bit score tables, shape (..., B, S)
    score = np.broadcast_to(score[..., None, :], score.shape[:-1] + (n_bits, constellation.size)).copy()
    if bit_priors is not None:
        priors = np.asarray(bit_priors, dtype=float)
        logp0 = -np.logaddexp(0.0, -priors)  # (..., B)
        logp1 = -np.logaddexp(0.0, priors)
        bits_f = bits.astype(float)
        total = logp0 @ (1.0 - bits_f.T) + logp1 @ bits_f.T  # (..., S)
        # remove each bit's own prior so the message stays extrinsic
        own = np.where(bits.T[..., :, :] == 1, logp1[..., :, None], logp0[..., :, None])  # (..., B, S)
        score += total[..., None, :] - own
    b_mask = bits.T  # (B, S), broadcasts over the leading axes of score
    llrs = logsumexp(np.where(b_mask == 0, score, -np.inf), axis=-1) - logsumexp(
        np.where(b_mask == 1, score, -np.inf), axis=-1
    )
    return saturate_llrs(llrs)


@dataclass
class SymbolBeliefGrid:
    """First and second moments of every transmitted symbol on the grid.

    ``means``/``variances`` have shape ``(M, L, K)``.  Pilot REs hold the
    known pilot value with zero variance and are never updated; data REs
    carry the moments of the current discrete symbol beliefs.
    """

    means: np.ndarray
    variances: np.ndarray
    pilot_mask: np.ndarray  # (L, K) bool

    def __post_init__(self) -> None:
        self.means = np.asarray(self.means, dtype=complex)
        self.variances = np.asarray(self.variances, dtype=float)
        self.pilot_mask = np.asarray(self.pilot_mask, dtype=bool)
        if self.means.shape != self.variances.shape:
            raise ValueError("means and variances must share a shape")
        if self.means.shape[1:] != self.pilot_mask.shape:
            raise ValueError("grid shape mismatch with pilot mask")
        if np.any(self.variances < 0):
            raise ValueError("variances must be nonnegative")

    @property
    def n_antennas(self) -> int:
        return self.means.shape[0]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.means.shape

    @property
    def data_indices(self) -> np.ndarray:
        return np.flatnonzero(~self.pilot_mask.reshape(-1))

    @classmethod
    def from_pilots(
        cls,
        pattern: PilotPattern,
        L: int,
        K: int,
        data_mean: complex = 0.0,
        data_var: float = 0.0,
    ) -> "SymbolBeliefGrid":
        """Grid with pilot beliefs installed and constant data beliefs.

        The default ``(0, 0)`` data belief is the point mass at zero used
        by pilot-only channel estimation.
        """
        M = pattern.tx_antennas
        means = np.full((M, L, K), complex(data_mean), dtype=complex)
        variances = np.full((M, L, K), float(data_var))
        mask = np.zeros((L, K), dtype=bool)
        for i, (k, l) in enumerate(pattern.positions):
            mask[l, k] = True
            means[:, l, k] = pattern.values[:, i]
            variances[:, l, k] = 0.0
        return cls(means, variances, mask)

    @classmethod
    def from_true_symbols(cls, symbols: np.ndarray, pilot_mask: np.ndarray) -> "SymbolBeliefGrid":
        """Degenerate beliefs at the given symbols (genie/test helper)."""
        symbols = np.asarray(symbols, dtype=complex)
        return cls(symbols.copy(), np.zeros(symbols.shape), pilot_mask)

    def data_moments(self, m: int) -> tuple[np.ndarray, np.ndarray]:
        """Mean/variance of antenna ``m``'s data REs in flat order."""
        idx = self.data_indices
        return self.means[m].reshape(-1)[idx], self.variances[m].reshape(-1)[idx]

    def set_data_moments(self, m: int, mean: np.ndarray, var: np.ndarray) -> None:
        """Overwrite antenna ``m``'s data-RE beliefs (flat order)."""
        idx = self.data_indices
        flat_mean = self.means[m].reshape(-1)
        flat_var = self.variances[m].reshape(-1)
        flat_mean[idx] = mean
        flat_var[idx] = np.maximum(np.asarray(var, dtype=float), 0.0)
        self.means[m] = flat_mean.reshape(self.means[m].shape)
        self.variances[m] = flat_var.reshape(self.variances[m].shape)

    def copy(self) -> "SymbolBeliefGrid":
        return SymbolBeliefGrid(self.means.copy(), self.variances.copy(), self.pilot_mask.copy())
