"""Convolutional coding, interleaving, and SISO BCJR decoding.

The code is the rate-1/3, constraint-length-7 feedforward convolutional
code with octal generators (133, 171, 165), zero-tail terminated with 6
flush bits so the trellis starts and ends in the all-zero state.

LLR convention: ``L = log(P(bit = 0) / P(bit = 1))``, so positive values
favor bit 0.  All exported LLRs are saturated to +/-40, which is
numerically indistinguishable from certainty in double precision while
preventing overflow in downstream exponentials.

The BCJR recursion runs in the log domain with exact Jacobian corrections
(``logaddexp``), so its bit posteriors match exhaustive-enumeration MAP
posteriors to within accumulation error.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import logsumexp

LLR_SATURATION = 40.0
_DEFAULT_GENERATORS = (0o133, 0o171, 0o165)


class LengthMismatchError(ValueError):
    """Raised when a bit/LLR sequence length is inconsistent with the code or permutation."""


def saturate_llrs(llrs: np.ndarray) -> np.ndarray:
    """Clip LLRs into [-40, +40]."""
    return np.clip(llrs, -LLR_SATURATION, LLR_SATURATION)


@dataclass(frozen=True)
class ConvCodeSpec:
    """The fixed rate-1/3 convolutional code with generators (133, 171, 165) octal."""

    generators_octal: tuple[int, int, int] = _DEFAULT_GENERATORS
    constraint_length: int = 7
    zero_tail: bool = True

    def __post_init__(self) -> None:
        if tuple(self.generators_octal) != _DEFAULT_GENERATORS or self.constraint_length != 7:
            raise ValueError("only the (133, 171, 165) octal, constraint-length-7 code is supported")

    @property
    def n_outputs(self) -> int:
        return len(self.generators_octal)

    @property
    def memory(self) -> int:
        return self.constraint_length - 1

    @property
    def rate(self) -> float:
        return 1.0 / self.n_outputs

    def n_coded_bits(self, n_info_bits: int) -> int:
        tail = self.memory if self.zero_tail else 0
        return self.n_outputs * (n_info_bits + tail)

    def generator_taps(self) -> np.ndarray:
        """Tap matrix of shape (n_outputs, constraint_length), current input first."""
        taps = np.zeros((self.n_outputs, self.constraint_length), dtype=np.uint8)
        for j, g in enumerate(self.generators_octal):
            for i in range(self.constraint_length):
                taps[j, i] = (g >> (self.constraint_length - 1 - i)) & 1
        return taps


def conv_encode(u: np.ndarray, spec: ConvCodeSpec | None = None) -> np.ndarray:
    """Encode information bits; output length is ``3 * (len(u) + 6)`` with zero tail."""
    spec = spec or ConvCodeSpec()
    u = np.asarray(u, dtype=np.uint8).reshape(-1)
    if u.size == 0:
        raise ValueError("information bit sequence must be nonempty")
    if spec.zero_tail:
        u = np.concatenate([u, np.zeros(spec.memory, dtype=np.uint8)])
    taps = spec.generator_taps()
    streams = [np.convolve(u, taps[j])[: u.size] % 2 for j in range(spec.n_outputs)]
    return np.stack(streams, axis=1).reshape(-1).astype(np.uint8)


@dataclass(frozen=True)
class Interleaver:
    """A bijective permutation of coded-bit indices.

    ``interleave`` applies ``out[i] = x[pi[i]]``; ``deinterleave`` is the
    inverse, so ``deinterleave(interleave(x)) == x``.
    """

    permutation: np.ndarray

    def __post_init__(self) -> None:
        pi = np.asarray(self.permutation, dtype=np.int64)
        if sorted(pi.tolist()) != list(range(pi.size)):
            raise ValueError("permutation must be a bijection on 0..n-1")
        object.__setattr__(self, "permutation", pi)

    @classmethod
    def random(cls, length: int, rng: np.random.Generator) -> "Interleaver":
        return cls(rng.permutation(length))

    @property
    def size(self) -> int:
        return self.permutation.size

    def interleave(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x)
        if x.shape[0] != self.size:
            raise LengthMismatchError(f"sequence length {x.shape[0]} != permutation size {self.size}")
        return x[self.permutation]

    def deinterleave(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x)
        if x.shape[0] != self.size:
            raise LengthMismatchError(f"sequence length {x.shape[0]} != permutation size {self.size}")
        out = np.empty_like(x)
        out[self.permutation] = x
        return out


@lru_cache(maxsize=4)
def _trellis(spec: ConvCodeSpec):
    """Precompute trellis tables for the 64-state code.

    Returns (next_state, out_bits, prev_states, prev_inbit):
      next_state[s, b]  -> state after input b in state s
      out_bits[s, b, j] -> j-th output bit on that branch
      prev_states[s', i] -> the two predecessor states of s'
      prev_inbit[s']     -> the input bit that leads into s'
    """
    n_states = 1 << spec.memory
    taps = spec.generator_taps().astype(np.int64)
    next_state = np.zeros((n_states, 2), dtype=np.int64)
    out_bits = np.zeros((n_states, 2, spec.n_outputs), dtype=np.uint8)
    for s in range(n_states):
        for b in (0, 1):
            reg = (b << spec.memory) | s  # bit 6 = current input, bits 5..0 = state
            for j in range(spec.n_outputs):
                acc = 0
                for i in range(spec.constraint_length):
                    acc ^= taps[j, i] & (reg >> (spec.constraint_length - 1 - i))
                out_bits[s, b, j] = acc & 1
            next_state[s, b] = (b << (spec.memory - 1)) | (s >> 1)
    prev_states = np.zeros((n_states, 2), dtype=np.int64)
    prev_inbit = np.zeros(n_states, dtype=np.int64)
    for sp in range(n_states):
        base = (sp & ((1 << (spec.memory - 1)) - 1)) << 1
        prev_states[sp] = (base, base + 1)
        prev_inbit[sp] = sp >> (spec.memory - 1)
    return next_state, out_bits, prev_states, prev_inbit


def bcjr_decode(coded_priors: np.ndarray, spec: ConvCodeSpec | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Soft-in soft-out MAP decoding of one zero-tail-terminated codeword.

    Args:
        coded_priors: LLRs of the coded bits, length ``3 * (U + 6)``.

    Returns:
        ``(extrinsic_coded, app_info)``: extrinsic LLRs of the coded bits
        (a-posteriori minus the intrinsic prior) and a-posteriori LLRs of
        the ``U`` information bits, both saturated to +/-40.
    """
    spec = spec or ConvCodeSpec()
    llrs = np.asarray(coded_priors, dtype=float).reshape(-1)
    if llrs.size % spec.n_outputs:
        raise LengthMismatchError(f"coded length {llrs.size} not a multiple of {spec.n_outputs}")
    n_steps = llrs.size // spec.n_outputs
    n_info = n_steps - (spec.memory if spec.zero_tail else 0)
    if n_info < 1:
        raise LengthMismatchError("codeword too short for a terminated trellis")

    next_state, out_bits, prev_states, prev_inbit = _trellis(spec)
    n_states = next_state.shape[0]

    # per-bit log-probabilities from the priors
    logp0 = -np.logaddexp(0.0, -llrs).reshape(n_steps, spec.n_outputs)
    logp1 = -np.logaddexp(0.0, llrs).reshape(n_steps, spec.n_outputs)

    # branch metrics gamma[t, s, b]
    mask = out_bits.astype(float)  # (S, 2, J)
    gamma = np.einsum("tj,sbj->tsb", logp0, 1.0 - mask) + np.einsum("tj,sbj->tsb", logp1, mask)
    if spec.zero_tail:
        gamma[n_info:, :, 1] = -np.inf  # tail inputs are known zeros

    p0, p1 = prev_states[:, 0], prev_states[:, 1]
    alpha = np.full((n_steps + 1, n_states), -np.inf)
    alpha[0, 0] = 0.0
    for t in range(n_steps):
        g = gamma[t]
        a = alpha[t]
        nxt = np.logaddexp(a[p0] + g[p0, prev_inbit], a[p1] + g[p1, prev_inbit])
        nxt -= nxt.max()
        alpha[t + 1] = nxt

    beta = np.full((n_steps + 1, n_states), -np.inf)
    beta[n_steps, 0] = 0.0
    for t in range(n_steps - 1, -1, -1):
        g = gamma[t]
        b = beta[t + 1]
        prv = np.logaddexp(g[:, 0] + b[next_state[:, 0]], g[:, 1] + b[next_state[:, 1]])
        prv -= prv.max()
        beta[t] = prv

    # joint branch log-scores
    joint = alpha[:-1, :, None] + gamma + beta[1:][np.arange(n_steps)[:, None, None], next_state[None, :, :]]

    app_info = logsumexp(joint[:n_info, :, 0], axis=1) - logsumexp(joint[:n_info, :, 1], axis=1)

    app_coded = np.empty((n_steps, spec.n_outputs))
    for j in range(spec.n_outputs):
        sel0 = np.where(out_bits[None, :, :, j] == 0, joint, -np.inf)
        sel1 = np.where(out_bits[None, :, :, j] == 1, joint, -np.inf)
        app_coded[:, j] = logsumexp(sel0, axis=(1, 2)) - logsumexp(sel1, axis=(1, 2))
    extrinsic = app_coded.reshape(-1) - llrs
    return saturate_llrs(extrinsic), saturate_llrs(app_info)
