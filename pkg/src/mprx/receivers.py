"""Receiver schedules composing the belief updates into complete chains.

Five iterative structures plus a non-iterative reference are provided:

===============  =========================  ==================  ==========================
Receiver         Channel-weight init        Channel model       In-loop demod/decoding
===============  =========================  ==================  ==========================
psc-dd           null mean and covariance   disjoint            none (MLD+BCJR at the end)
djc-dd           pilot LMMSE, zero cov      joint               demodulation only
dsc-dd           pilot LMMSE, zero cov      disjoint            demodulation only
i-djc-dd         pilot LMMSE, zero cov      joint               demodulation and decoding
i-dsc-dd         pilot LMMSE, zero cov      disjoint            demodulation and decoding
i-djc-dd-em      as i-djc-dd                joint, point est.   demodulation and decoding
lmmse-baseline   pilot LMMSE (true noise)   --                  single MLD+BCJR pass
===============  =========================  ==================  ==========================

Every run records per-iteration diagnostics (channel-estimate error
against the true realization, current noise-variance estimate, and the
bit errors a decode at that point would produce).  Iteration index 0 is
the initialization.  An optional ``trace`` list receives one label per
belief update, which the test suite uses to pin the schedules.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.special import logsumexp

from . import vmp
from .channel import Observation
from .fec import LLR_SATURATION, Interleaver, bcjr_decode
from .frame import FrameConfig, PilotPattern
from .modem import (
    Constellation,
    SymbolBeliefGrid,
    combine_symbol_belief,
    extrinsic_symbol_pmf,
    gaussian_bit_llrs,
    pmf_moments,
    uniform_pmf,
)
from .vmp import (
    ChannelPrior,
    disjoint_channel_update,
    em_restrict,
    joint_channel_update,
    noise_precision_update,
    noise_precision_update_pilot_only,
    null_disjoint_belief,
    point_disjoint_belief,
    point_joint_belief,
    vmp_symbol_update,
)


class ReceiverKind(str, Enum):
    PSC_DD = "psc-dd"
    DJC_DD = "djc-dd"
    DSC_DD = "dsc-dd"
    I_DJC_DD = "i-djc-dd"
    I_DSC_DD = "i-dsc-dd"
    I_DJC_DD_EM = "i-djc-dd-em"
    LMMSE_BASELINE = "lmmse-baseline"


DEFAULT_ITERATIONS: dict[ReceiverKind, int] = {
    ReceiverKind.PSC_DD: 10,
    ReceiverKind.DJC_DD: 3,
    ReceiverKind.DSC_DD: 3,
    ReceiverKind.I_DJC_DD: 5,
    ReceiverKind.I_DSC_DD: 5,
    ReceiverKind.I_DJC_DD_EM: 5,
    ReceiverKind.LMMSE_BASELINE: 1,
}


@dataclass(frozen=True)
class StreamLayout:
    """Bit bookkeeping of one antenna's stream within a frame.

    One codeword is sized to fill the frame's data capacity as closely as
    the terminated rate-1/3 code allows; up to two leftover bit positions
    are filler bits fixed to zero and known at the receiver.
    """

    n_data: int
    bits_per_symbol: int
    n_info: int
    n_coded: int

    @property
    def capacity(self) -> int:
        return self.n_data * self.bits_per_symbol

    @property
    def n_filler(self) -> int:
        return self.capacity - self.n_coded


def stream_layout(cfg: FrameConfig) -> StreamLayout:
    constellation = Constellation.get(cfg.constellation)
    n_data = cfg.grid.n_data
    capacity = n_data * constellation.bits_per_symbol
    n_info = capacity // cfg.code.n_outputs - cfg.code.memory
    if n_info < 1:
        raise ValueError("frame too small to carry one terminated codeword")
    return StreamLayout(
        n_data=n_data,
        bits_per_symbol=constellation.bits_per_symbol,
        n_info=n_info,
        n_coded=cfg.code.n_coded_bits(n_info),
    )


@dataclass(frozen=True)
class FrameTruth:
    """Ground truth for diagnostics only; receivers never read it for estimation."""

    info_bits: np.ndarray  # (M, U)
    channel_freq: np.ndarray  # (M, N, K)


@dataclass(frozen=True)
class ReceiverInputs:
    """Everything a receiver may legitimately use, plus optional truth."""

    obs: Observation
    cfg: FrameConfig
    pilots: PilotPattern
    interleavers: tuple[Interleaver, ...]
    prior: ChannelPrior
    truth: FrameTruth | None = None


@dataclass
class IterationDiag:
    noise_var_est: float
    channel_err: float | None = None
    channel_pow: float | None = None
    bit_errors: int | None = None
    bit_count: int = 0


@dataclass
class ReceiverRun:
    kind: ReceiverKind
    hard_bits: np.ndarray  # (M, U)
    info_llrs: np.ndarray  # (M, U)
    diags: list[IterationDiag] = field(default_factory=list)


def mld_detect(
    y_res: np.ndarray, h_res: np.ndarray, lam: float, constellation: Constellation
) -> tuple[np.ndarray, np.ndarray]:
    """Exact joint-alphabet maximum-likelihood detection.

    Args:
        y_res: received vectors per resource element, shape (n, N).
        h_res: per-RE channel matrices, shape (n, N, M).
        lam: noise precision used in the Gaussian metric.

    Returns:
        ``(bit_llrs, pmfs)``: exact per-bit LLRs of shape
        ``(M, n, bits_per_symbol)`` and marginal per-antenna symbol pmfs of
        shape ``(M, n, S)``, both from full enumeration of the joint
        alphabet (no max-log approximation).
    """
    y_res = np.asarray(y_res, dtype=complex)
    h_res = np.asarray(h_res, dtype=complex)
    n, N, M = h_res.shape
    S = constellation.size
    labels = np.indices((S,) * M).reshape(M, -1)  # (M, V)
    svec = constellation.points[labels]  # (M, V)
    z = np.einsum("dnm,mv->dnv", h_res, svec)
    metric = -lam * np.sum(np.abs(y_res[:, :, None] - z) ** 2, axis=1)  # (d, V)

    bits = constellation.label_bits()  # (S, B)
    log_pmf = np.empty((M, n, S))
    for m in range(M):
        for s in range(S):
            log_pmf[m, :, s] = logsumexp(metric[:, labels[m] == s], axis=1)
    log_pmf -= log_pmf.max(axis=2, keepdims=True)
    pmfs = np.exp(log_pmf)
    pmfs /= pmfs.sum(axis=2, keepdims=True)

    llrs = np.empty((M, n, constellation.bits_per_symbol))
    for b in range(constellation.bits_per_symbol):
        sel0 = np.where(bits[:, b] == 0, log_pmf, -np.inf)
        sel1 = np.where(bits[:, b] == 1, log_pmf, -np.inf)
        llrs[:, :, b] = logsumexp(sel0, axis=2) - logsumexp(sel1, axis=2)
    return np.clip(llrs, -LLR_SATURATION, LLR_SATURATION), pmfs


def lmmse_channel_estimate(
    obs: Observation,
    pilots: PilotPattern,
    prior_cov: np.ndarray,
    noise_var: float,
    rx_antennas: int,
) -> np.ndarray:
    """Pilot-based joint LMMSE channel estimate, interpolated to all subcarriers.

    Implements ``h = Sigma_p X_p^H (X_p Sigma_p X_p^H + v I)^{-1} y_p`` per
    receive antenna, with the per-link prior covariance ``prior_cov`` and
    all transmit antennas estimated jointly.  Returns means of shape
    ``(M, N, K)``.
    """
    if noise_var <= 0:
        raise ValueError("noise variance must be positive")
    ks = np.array([k for (k, _) in pilots.positions])
    ls = np.array([l for (_, l) in pilots.positions])
    vals = pilots.values  # (M, P)
    y_p = obs.y[:, ls, ks]  # (N, P)

    gram = np.einsum("mi,mj->ij", vals, vals.conj()) * prior_cov[np.ix_(ks, ks)]
    gram = gram + noise_var * np.eye(len(ks))
    sol = np.linalg.solve(gram, y_p.T)  # (P, N)
    cross = prior_cov[:, ks][None, :, :] * vals.conj()[:, None, :]  # (M, K, P)
    return np.einsum("mkp,pn->mnk", cross, sol)


class _Session:
    """Shared per-frame plumbing for the receiver schedules."""

    def __init__(self, inputs: ReceiverInputs, trace: list[str] | None):
        self.inputs = inputs
        self.trace = trace
        cfg = inputs.cfg
        self.cfg = cfg
        self.M = cfg.tx_antennas
        self.N = cfg.rx_antennas
        self.K = cfg.subcarriers
        self.L = cfg.ofdm_symbols
        self.y = inputs.obs.y
        self.prior = inputs.prior
        self.constellation = Constellation.get(cfg.constellation)
        self.layout = stream_layout(cfg)
        data_idx = np.flatnonzero(~_pilot_mask(inputs.pilots, self.L, self.K).reshape(-1))
        self.data_ls = data_idx // self.K
        self.data_ks = data_idx % self.K

    def log(self, event: str) -> None:
        if self.trace is not None:
            self.trace.append(event)

    def pilot_grid(self) -> SymbolBeliefGrid:
        return SymbolBeliefGrid.from_pilots(self.inputs.pilots, self.L, self.K)

    def channel_energy(self, mean: np.ndarray) -> tuple[float, float] | tuple[None, None]:
        truth = self.inputs.truth
        if truth is None:
            return None, None
        err = float(np.sum(np.abs(mean - truth.channel_freq) ** 2))
        pow_ = float(np.sum(np.abs(truth.channel_freq) ** 2))
        return err, pow_

    def bit_errors(self, app_info: np.ndarray) -> tuple[int | None, int]:
        truth = self.inputs.truth
        hard = (app_info < 0).astype(np.uint8)
        if truth is None:
            return None, hard.size
        return int(np.sum(hard != truth.info_bits)), hard.size

    def data_res(self, mean: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Gather (y, H) per data RE: shapes (n_d, N) and (n_d, N, M)."""
        y_d = self.y[:, self.data_ls, self.data_ks].T
        h_d = mean[:, :, self.data_ks].transpose(2, 1, 0)
        return y_d, h_d

    def bootstrap_noise(self) -> vmp.NoisePrecisionBelief:
        """Initial precision from the raw pilot observations (null channel belief)."""
        return noise_precision_update_pilot_only(
            self.y, self.pilot_grid(), null_disjoint_belief(self.M, self.N, self.K)
        )

    def lmmse_mean(self, noise_var: float) -> np.ndarray:
        return lmmse_channel_estimate(
            self.inputs.obs, self.inputs.pilots, self.prior.freq_cov, noise_var, self.N
        )

    def decode_stream(self, m: int, onair_llrs: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """BCJR pass of one antenna's on-air LLRs.

        Returns ``(app_info, onair_extrinsic, onair_app)`` where the on-air
        vectors cover all ``capacity`` bit positions; filler positions carry
        the saturated LLR of a known zero bit.
        """
        layout = self.layout
        il = self.inputs.interleavers[m]
        coded = il.deinterleave(onair_llrs[: layout.n_coded])
        extrinsic, app_info = bcjr_decode(coded, self.cfg.code)
        filler = np.full(layout.n_filler, LLR_SATURATION)
        onair_ext = np.concatenate([il.interleave(extrinsic), filler])
        onair_app = np.concatenate([il.interleave(np.clip(extrinsic + coded, -LLR_SATURATION, LLR_SATURATION)), filler])
        return app_info, onair_ext, onair_app

    def gaussian_data_message(
        self, m: int, lam: float, ch, sym: SymbolBeliefGrid
    ) -> tuple[np.ndarray, np.ndarray]:
        """VMP symbol message of antenna ``m`` restricted to the data REs."""
        x_vmp, var = vmp_symbol_update(m, self.y, lam, ch, sym)
        return x_vmp[self.data_ls, self.data_ks], var[self.data_ls, self.data_ks]

    def demap_message(self, x_d: np.ndarray, v_d: np.ndarray) -> np.ndarray:
        """Per-bit LLRs of the Gaussian symbol message, flattened to on-air order."""
        bps = self.constellation.bits_per_symbol
        llrs = gaussian_bit_llrs(x_d, v_d, self.constellation)
        return llrs.reshape(-1)

    def mld_decode(self, mean: np.ndarray, lam: float, log_prefix: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """MLD followed by one BCJR pass per antenna (the non-iterative chain)."""
        y_d, h_d = self.data_res(mean)
        self.log(f"{log_prefix}:mld")
        llrs, _ = mld_detect(y_d, h_d, lam, self.constellation)
        app_infos = np.empty((self.M, self.layout.n_info))
        for m in range(self.M):
            app_infos[m], _, _ = self.decode_stream(m, llrs[m].reshape(-1))
            self.log(f"{log_prefix}:decode:{m}")
        return app_infos, llrs, y_d


def _pilot_mask(pilots: PilotPattern, L: int, K: int) -> np.ndarray:
    mask = np.zeros((L, K), dtype=bool)
    for (k, l) in pilots.positions:
        mask[l, k] = True
    return mask


def _diag_from(session: _Session, mean: np.ndarray, lam: float, app_infos: np.ndarray | None) -> IterationDiag:
    err, pow_ = session.channel_energy(mean)
    diag = IterationDiag(noise_var_est=1.0 / lam, channel_err=err, channel_pow=pow_)
    if app_infos is not None:
        errors, bits = session.bit_errors(app_infos)
        diag.bit_errors = errors
        diag.bit_count = bits
    return diag


def run_psc_dd(
    inputs: ReceiverInputs,
    iterations: int = 10,
    trace: list[str] | None = None,
    decode_each_iteration: bool = False,
) -> ReceiverRun:
    """Pilot-aided sequential channel estimation, then one MLD+BCJR pass.

    Channel beliefs start at zero mean and zero covariance; data symbols
    are pinned to a point mass at zero so only pilots drive estimation.
    Each iteration sweeps the per-antenna channel updates and refreshes
    the noise precision from the pilot observations alone.
    """
    s = _Session(inputs, trace)
    sym = s.pilot_grid()
    ch = null_disjoint_belief(s.M, s.N, s.K)
    nb = s.bootstrap_noise()
    s.log("init:noise-pilot")
    lam = nb.mean

    diags = [_diag_from(s, ch.mean, lam, None)]
    for _ in range(iterations):
        for m in range(s.M):
            ch = disjoint_channel_update(m, s.y, lam, sym, ch, s.prior)
            s.log(f"channel:disjoint:{m}")
        nb = noise_precision_update_pilot_only(s.y, sym, ch)
        s.log("noise:pilot")
        lam = nb.mean
        app_infos = s.mld_decode(ch.mean, lam, "iter")[0] if decode_each_iteration else None
        diags.append(_diag_from(s, ch.mean, lam, app_infos))

    app_infos, _, _ = s.mld_decode(ch.mean, lam, "final")
    errors, bits = s.bit_errors(app_infos)
    diags[-1].bit_errors = errors
    diags[-1].bit_count = bits
    return ReceiverRun(
        kind=ReceiverKind.PSC_DD,
        hard_bits=(app_infos < 0).astype(np.uint8),
        info_llrs=app_infos,
        diags=diags,
    )


def run_dc_dd(
    inputs: ReceiverInputs,
    iterations: int = 3,
    channel_model: str = "joint",
    trace: list[str] | None = None,
) -> ReceiverRun:
    """Data-aided channel and noise estimation with decoding kept outside the loop.

    Initialization: pilot LMMSE channel mean (zero covariance), symbol
    beliefs from MIMO MLD marginals (no decoding), pilot-restricted noise
    estimate.  Iterations refresh the channel belief (joint or disjoint),
    the symbol beliefs through the VMP equalizer combined with a uniform
    constellation prior, and the noise precision.  A BCJR pass on the
    current equalizer messages is run per iteration for diagnostics; the
    last one provides the decoded bits.
    """
    if channel_model not in ("joint", "disjoint"):
        raise ValueError("channel_model must be 'joint' or 'disjoint'")
    s = _Session(inputs, trace)
    kind = ReceiverKind.DJC_DD if channel_model == "joint" else ReceiverKind.DSC_DD

    nb0 = s.bootstrap_noise()
    s.log("init:noise-bootstrap")
    h_init = s.lmmse_mean(nb0.noise_variance)
    s.log("init:lmmse")
    ch = point_joint_belief(h_init) if channel_model == "joint" else point_disjoint_belief(h_init)

    sym = s.pilot_grid()
    nb = noise_precision_update_pilot_only(s.y, sym, ch)
    s.log("init:noise-pilot")
    lam = nb.mean

    y_d, h_d = s.data_res(ch.mean)
    s.log("init:mld")
    mld_llrs, mld_pmfs = mld_detect(y_d, h_d, lam, s.constellation)
    for m in range(s.M):
        mean_d, var_d = pmf_moments(mld_pmfs[m], s.constellation)
        sym.set_data_moments(m, mean_d, var_d)

    # iteration-0 diagnostics: decode the initialization messages
    app_infos = np.empty((s.M, s.layout.n_info))
    for m in range(s.M):
        app_infos[m], _, _ = s.decode_stream(m, mld_llrs[m].reshape(-1))
        s.log(f"init:decode:{m}")
    diags = [_diag_from(s, ch.mean, lam, app_infos)]

    uniform = uniform_pmf((s.layout.n_data,), s.constellation)
    for _ in range(iterations):
        if channel_model == "joint":
            ch = joint_channel_update(s.y, lam, sym, s.prior)
            s.log("channel:joint")
        else:
            for m in range(s.M):
                ch = disjoint_channel_update(m, s.y, lam, sym, ch, s.prior)
                s.log(f"channel:disjoint:{m}")
        messages = []
        for m in range(s.M):
            x_d, v_d = s.gaussian_data_message(m, lam, ch, sym)
            s.log(f"symbol:vmp:{m}")
            belief = combine_symbol_belief(uniform, x_d, v_d, s.constellation)
            mean_d, var_d = pmf_moments(belief, s.constellation)
            sym.set_data_moments(m, mean_d, var_d)
            messages.append((x_d, v_d))
        nb = noise_precision_update(s.y, sym, ch)
        s.log("noise:full")
        lam = nb.mean

        app_infos = np.empty((s.M, s.layout.n_info))
        for m in range(s.M):
            x_d, v_d = messages[m]
            app_infos[m], _, _ = s.decode_stream(m, s.demap_message(x_d, v_d))
            s.log(f"decode:{m}")
        diags.append(_diag_from(s, ch.mean, lam, app_infos))

    return ReceiverRun(
        kind=kind,
        hard_bits=(app_infos < 0).astype(np.uint8),
        info_llrs=app_infos,
        diags=diags,
    )


def run_i_dc_dd(
    inputs: ReceiverInputs,
    iterations: int = 5,
    channel_model: str = "joint",
    em: bool = False,
    trace: list[str] | None = None,
) -> ReceiverRun:
    """Fully iterative receiver with decoding inside the loop.

    Initialization: pilot LMMSE channel mean, MLD followed by BCJR, and
    symbol beliefs from soft modulation of the coded-bit posteriors; the
    noise precision then follows from the full-grid update.  Each
    iteration updates the channel belief, runs the modulation-and-coding
    pass per antenna (VMP symbol message, demapping, BCJR, extrinsic
    symbol prior, combined belief), and refreshes the noise precision.
    With ``em=True`` the channel and noise beliefs are restricted to point
    masses after each update, zeroing every second-order term they feed.
    """
    if channel_model not in ("joint", "disjoint"):
        raise ValueError("channel_model must be 'joint' or 'disjoint'")
    s = _Session(inputs, trace)
    if em and channel_model != "joint":
        raise ValueError("the EM variant is defined for the joint channel model")
    kind = (
        ReceiverKind.I_DJC_DD_EM
        if em
        else (ReceiverKind.I_DJC_DD if channel_model == "joint" else ReceiverKind.I_DSC_DD)
    )

    nb0 = s.bootstrap_noise()
    s.log("init:noise-bootstrap")
    h_init = s.lmmse_mean(nb0.noise_variance)
    s.log("init:lmmse")
    ch = point_joint_belief(h_init) if channel_model == "joint" else point_disjoint_belief(h_init)

    sym = s.pilot_grid()
    nb_p = noise_precision_update_pilot_only(s.y, sym, ch)
    s.log("init:noise-pilot")
    lam = nb_p.mean
    y_d, h_d = s.data_res(ch.mean)
    s.log("init:mld")
    mld_llrs, _ = mld_detect(y_d, h_d, lam, s.constellation)

    bps = s.constellation.bits_per_symbol
    app_infos = np.empty((s.M, s.layout.n_info))
    for m in range(s.M):
        app_infos[m], _, onair_app = s.decode_stream(m, mld_llrs[m].reshape(-1))
        s.log(f"init:decode:{m}")
        mean_d, var_d = soft_modulate(onair_app.reshape(-1, bps), s.constellation)
        sym.set_data_moments(m, mean_d, var_d)

    nb = noise_precision_update(s.y, sym, ch)
    s.log("init:noise-full")
    lam = nb.mean
    diags = [_diag_from(s, ch.mean, lam, app_infos)]

    for _ in range(iterations):
        if channel_model == "joint":
            ch = joint_channel_update(s.y, lam, sym, s.prior)
            s.log("channel:joint")
        else:
            for m in range(s.M):
                ch = disjoint_channel_update(m, s.y, lam, sym, ch, s.prior)
                s.log(f"channel:disjoint:{m}")
        if em:
            ch = em_restrict(ch)
            s.log("em:channel")

        app_infos = np.empty((s.M, s.layout.n_info))
        for m in range(s.M):
            x_d, v_d = s.gaussian_data_message(m, lam, ch, sym)
            s.log(f"symbol:vmp:{m}")
            app_infos[m], onair_ext, _ = s.decode_stream(m, s.demap_message(x_d, v_d))
            s.log(f"decode:{m}")
            beta = extrinsic_symbol_pmf(onair_ext.reshape(-1, bps), s.constellation)
            belief = combine_symbol_belief(beta, x_d, v_d, s.constellation)
            mean_d, var_d = pmf_moments(belief, s.constellation)
            sym.set_data_moments(m, mean_d, var_d)

        nb = noise_precision_update(s.y, sym, ch)
        s.log("noise:full")
        if em:
            nb = em_restrict(nb)
            s.log("em:noise")
        lam = nb.mean
        diags.append(_diag_from(s, ch.mean, lam, app_infos))

    return ReceiverRun(
        kind=kind,
        hard_bits=(app_infos < 0).astype(np.uint8),
        info_llrs=app_infos,
        diags=diags,
    )


def run_lmmse_baseline(inputs: ReceiverInputs, trace: list[str] | None = None) -> ReceiverRun:
    """Non-iterative LMMSE + MLD + BCJR chain with known noise variance."""
    s = _Session(inputs, trace)
    noise_var = inputs.obs.noise_var
    mean = s.lmmse_mean(noise_var)
    s.log("init:lmmse")
    lam = 1.0 / noise_var
    app_infos, _, _ = s.mld_decode(mean, lam, "final")
    diag = _diag_from(s, mean, lam, app_infos)
    return ReceiverRun(
        kind=ReceiverKind.LMMSE_BASELINE,
        hard_bits=(app_infos < 0).astype(np.uint8),
        info_llrs=app_infos,
        diags=[diag],
    )


def soft_modulate(app_llr_groups: np.ndarray, constellation: Constellation) -> tuple[np.ndarray, np.ndarray]:
    """Per-symbol moments from a-posteriori coded-bit LLRs.

    ``app_llr_groups`` has shape ``(n, bits_per_symbol)``; returns per-symbol
    mean and variance of the induced product pmf.
    """
    pmf = extrinsic_symbol_pmf(app_llr_groups, constellation)
    return pmf_moments(pmf, constellation)


def run_receiver(
    kind: ReceiverKind | str,
    inputs: ReceiverInputs,
    iterations: int | None = None,
    trace: list[str] | None = None,
) -> ReceiverRun:
    """Dispatch a receiver by kind with its default iteration count."""
    kind = ReceiverKind(kind)
    iters = DEFAULT_ITERATIONS[kind] if iterations is None else iterations
    if iters < 1:
        raise ValueError("iteration count must be >= 1")
    if kind is ReceiverKind.PSC_DD:
        return run_psc_dd(inputs, iterations=iters, trace=trace)
    if kind is ReceiverKind.DJC_DD:
        return run_dc_dd(inputs, iterations=iters, channel_model="joint", trace=trace)
    if kind is ReceiverKind.DSC_DD:
        return run_dc_dd(inputs, iterations=iters, channel_model="disjoint", trace=trace)
    if kind is ReceiverKind.I_DJC_DD:
        return run_i_dc_dd(inputs, iterations=iters, channel_model="joint", trace=trace)
    if kind is ReceiverKind.I_DSC_DD:
        return run_i_dc_dd(inputs, iterations=iters, channel_model="disjoint", trace=trace)
    if kind is ReceiverKind.I_DJC_DD_EM:
        return run_i_dc_dd(inputs, iterations=iters, channel_model="joint", em=True, trace=trace)
    if kind is ReceiverKind.LMMSE_BASELINE:
        return run_lmmse_baseline(inputs, trace=trace)
    raise ValueError(f"unhandled receiver kind {kind}")
