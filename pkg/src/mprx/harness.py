"""Monte-Carlo experiment runner, Eb/N0 bookkeeping, and CSV emission.

A scenario is a pure function of its master seed: every frame derives an
independent RNG stream from ``(master_seed, point_index, frame_index)``
via ``numpy.random.SeedSequence`` spawn keys, so results are bit-identical
regardless of worker count or execution order.  Within a frame the draw
order is fixed: pilot values, interleavers, information bits, channel
taps, then noise.

Eb/N0 maps to the complex noise variance per resource element as
``noise_var = 1 / (code_rate * bits_per_symbol * 10^(EbN0_dB / 10))``
with unit-energy constellations and unit-energy channels; pilot and
tail-bit overheads are excluded from the energy accounting, so absolute
dB positions are a convention while receiver-vs-receiver comparisons at
the identical mapping are meaningful.

Metrics are aggregated per (receiver, Eb/N0, iteration) cell: bit error
counts and totals, channel-estimate error energy against the true
realization, and the mean estimated noise variance.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import PowerDelayProfile, draw_channel, etu_profile, freq_prior_covariance, transmit
from .fec import Interleaver, conv_encode
from .frame import FrameConfig, build_default_config, build_pilot_pattern
from .modem import Constellation, map_bits
from .receivers import (
    DEFAULT_ITERATIONS,
    FrameTruth,
    ReceiverInputs,
    ReceiverKind,
    run_receiver,
    stream_layout,
)
from .vmp import ChannelPrior

WORKERS_ENV_VAR = "MPRX_WORKERS"
EARLY_STOP_MIN_ERRORS = 200
EARLY_STOP_MIN_FRAMES = 50
_BATCH = 32


class IoFailure(OSError):
    """Raised when results cannot be written or read back."""


def eb_n0_to_noise_var(eb_n0_db: float, code_rate: float, bits_per_symbol: int) -> float:
    """Complex noise variance per RE for a given Eb/N0 in dB."""
    if code_rate <= 0 or bits_per_symbol <= 0:
        raise ValueError("code rate and bits per symbol must be positive")
    return 1.0 / (code_rate * bits_per_symbol * 10.0 ** (eb_n0_db / 10.0))


@dataclass(frozen=True)
class Scenario:
    """One Monte-Carlo experiment: a config, receivers, an Eb/N0 grid, and a seed."""

    config: FrameConfig
    receivers: tuple[ReceiverKind, ...]
    eb_n0_grid: tuple[float, ...]
    frames: int
    master_seed: int = 0
    iterations: int | None = None  # None = per-receiver defaults
    profile: PowerDelayProfile = field(default_factory=etu_profile)
    early_stop: bool = False
    workers: int | None = None

    def __post_init__(self) -> None:
        if self.frames < 1:
            raise ValueError("frame count must be >= 1")
        if not self.eb_n0_grid:
            raise ValueError("Eb/N0 grid must be nonempty")
        if not self.receivers:
            raise ValueError("at least one receiver kind is required")
        object.__setattr__(self, "receivers", tuple(ReceiverKind(r) for r in self.receivers))
        object.__setattr__(self, "eb_n0_grid", tuple(float(x) for x in self.eb_n0_grid))


@dataclass
class CellStats:
    """Accumulated metrics of one (receiver, Eb/N0, iteration) cell."""

    bit_errors: int = 0
    bit_count: int = 0
    channel_err: float = 0.0
    channel_pow: float = 0.0
    noise_var_sum: float = 0.0
    noise_var_count: int = 0
    frames: int = 0

    def add(self, diag) -> None:
        self.frames += 1
        if diag.bit_errors is not None:
            self.bit_errors += diag.bit_errors
            self.bit_count += diag.bit_count
        if diag.channel_err is not None:
            self.channel_err += diag.channel_err
            self.channel_pow += diag.channel_pow
        if diag.noise_var_est is not None:
            self.noise_var_sum += diag.noise_var_est
            self.noise_var_count += 1

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bit_count if self.bit_count else math.nan

    @property
    def ber_stderr(self) -> float:
        if not self.bit_count:
            return math.nan
        p = self.ber
        return math.sqrt(max(p * (1.0 - p), 0.0) / self.bit_count)

    @property
    def channel_mse(self) -> float:
        return self.channel_err / self.channel_pow if self.channel_pow else math.nan

    @property
    def noise_var_est(self) -> float:
        return self.noise_var_sum / self.noise_var_count if self.noise_var_count else math.nan


CSV_COLUMNS = ("receiver", "eb_n0_db", "iteration", "ber", "ber_stderr", "channel_mse", "noise_var_est", "frames")


@dataclass(frozen=True)
class MetricsRow:
    receiver: str
    eb_n0_db: float
    iteration: int
    ber: float
    ber_stderr: float
    channel_mse: float
    noise_var_est: float
    frames: int


class MetricsTable:
    """Per-cell aggregation keyed by (receiver value, Eb/N0, iteration index)."""

    def __init__(self) -> None:
        self.cells: dict[tuple[str, float, int], CellStats] = {}

    def cell(self, receiver: ReceiverKind | str, eb_n0_db: float, iteration: int) -> CellStats:
        key = (str(ReceiverKind(receiver).value), float(eb_n0_db), int(iteration))
        return self.cells.setdefault(key, CellStats())

    def get(self, receiver: ReceiverKind | str, eb_n0_db: float, iteration: int) -> CellStats:
        return self.cells[(str(ReceiverKind(receiver).value), float(eb_n0_db), int(iteration))]

    def rows(self) -> list[MetricsRow]:
        out = []
        for (receiver, ebn0, it) in sorted(self.cells):
            c = self.cells[(receiver, ebn0, it)]
            out.append(
                MetricsRow(
                    receiver=receiver,
                    eb_n0_db=ebn0,
                    iteration=it,
                    ber=c.ber,
                    ber_stderr=c.ber_stderr,
                    channel_mse=c.channel_mse,
                    noise_var_est=c.noise_var_est,
                    frames=c.frames,
                )
            )
        return out


def emit_results(table: MetricsTable, path: str) -> None:
    """Write the metrics table as UTF-8, LF-terminated CSV at full precision."""
    rows = table.rows()
    if not rows:
        raise ValueError("refusing to emit an empty metrics table")
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for r in rows:
                writer.writerow(
                    [
                        r.receiver,
                        repr(float(r.eb_n0_db)),
                        r.iteration,
                        repr(float(r.ber)),
                        repr(float(r.ber_stderr)),
                        repr(float(r.channel_mse)),
                        repr(float(r.noise_var_est)),
                        r.frames,
                    ]
                )
    except OSError as exc:
        raise IoFailure(f"could not write results to {path}: {exc}") from exc


def read_results(path: str) -> list[MetricsRow]:
    """Parse a results CSV back into rows (inverse of :func:`emit_results`)."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if tuple(header) != CSV_COLUMNS:
                raise IoFailure(f"unexpected header {header!r} in {path}")
            rows = []
            for rec in reader:
                rows.append(
                    MetricsRow(
                        receiver=rec[0],
                        eb_n0_db=float(rec[1]),
                        iteration=int(rec[2]),
                        ber=float(rec[3]),
                        ber_stderr=float(rec[4]),
                        channel_mse=float(rec[5]),
                        noise_var_est=float(rec[6]),
                        frames=int(rec[7]),
                    )
                )
            return rows
    except OSError as exc:
        raise IoFailure(f"could not read results from {path}: {exc}") from exc


def build_frame(
    cfg: FrameConfig,
    profile: PowerDelayProfile,
    prior: ChannelPrior,
    noise_var: float,
    seed_seq: np.random.SeedSequence,
) -> ReceiverInputs:
    """Generate one transmitted frame and its observation.

    Draw order from the frame RNG: pilot values, interleavers, info bits,
    channel taps, noise.
    """
    rng = np.random.default_rng(seed_seq)
    M, N, K, L = cfg.tx_antennas, cfg.rx_antennas, cfg.subcarriers, cfg.ofdm_symbols
    layout = stream_layout(cfg)
    constellation = Constellation.get(cfg.constellation)

    pilots = build_pilot_pattern(K, L, rng, tx_antennas=M)
    interleavers = tuple(Interleaver.random(layout.n_coded, rng) for _ in range(M))
    info_bits = rng.integers(0, 2, size=(M, layout.n_info), dtype=np.uint8)

    symbols = np.zeros((M, L, K), dtype=complex)
    mask = np.zeros((L, K), dtype=bool)
    for i, (k, l) in enumerate(pilots.positions):
        mask[l, k] = True
        symbols[:, l, k] = pilots.values[:, i]
    data_idx = np.flatnonzero(~mask.reshape(-1))

    for m in range(M):
        coded = conv_encode(info_bits[m], cfg.code)
        onair = np.concatenate([interleavers[m].interleave(coded), np.zeros(layout.n_filler, dtype=np.uint8)])
        data_syms = map_bits(onair, constellation)
        flat = symbols[m].reshape(-1)
        flat[data_idx] = data_syms
        symbols[m] = flat.reshape(L, K)

    ch = draw_channel(profile, M, N, K, cfg.subcarrier_spacing_hz, rng)
    obs = transmit(symbols, ch, noise_var, rng)
    truth = FrameTruth(info_bits=info_bits, channel_freq=ch.freq)
    return ReceiverInputs(obs=obs, cfg=cfg, pilots=pilots, interleavers=interleavers, prior=prior, truth=truth)


def _frame_job(args) -> list[tuple[str, list]]:
    """Run all receivers on one frame; returns (receiver value, diags) pairs."""
    cfg, profile, prior, receivers, iterations, noise_var, master_seed, pi, fi = args
    seed_seq = np.random.SeedSequence(entropy=master_seed, spawn_key=(pi, fi))
    inputs = build_frame(cfg, profile, prior, noise_var, seed_seq)
    out = []
    for kind in receivers:
        run = run_receiver(kind, inputs, iterations=iterations)
        out.append((kind.value, run.diags))
    return out


def _resolve_workers(scenario: Scenario) -> int:
    if scenario.workers is not None:
        return max(1, scenario.workers)
    env = os.environ.get(WORKERS_ENV_VAR)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def run_monte_carlo(scenario: Scenario) -> MetricsTable:
    """Run the scenario and aggregate metrics.

    Frames are processed in fixed-size batches; aggregation always happens
    in frame-index order, so the emitted numbers are identical for any
    worker count.  With ``early_stop`` enabled, a receiver stops consuming
    frames at an Eb/N0 point once at least 200 final-iteration bit errors
    and 50 frames have been observed (checked on batch boundaries).
    """
    cfg = scenario.config
    prior = ChannelPrior(freq_prior_covariance(scenario.profile, cfg.subcarriers, cfg.subcarrier_spacing_hz))
    workers = _resolve_workers(scenario)
    table = MetricsTable()

    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for pi, ebn0 in enumerate(scenario.eb_n0_grid):
            constellation = Constellation.get(cfg.constellation)
            noise_var = eb_n0_to_noise_var(ebn0, cfg.code.rate, constellation.bits_per_symbol)
            active = {kind: True for kind in scenario.receivers}
            done_frames = 0
            while done_frames < scenario.frames and any(active.values()):
                batch = range(done_frames, min(done_frames + _BATCH, scenario.frames))
                kinds = tuple(k for k in scenario.receivers if active[k])
                jobs = [
                    (cfg, scenario.profile, prior, kinds, scenario.iterations, noise_var, scenario.master_seed, pi, fi)
                    for fi in batch
                ]
                results = list(pool.map(_frame_job, jobs)) if pool else [_frame_job(j) for j in jobs]
                for frame_result in results:
                    for kind_value, diags in frame_result:
                        for it, diag in enumerate(diags):
                            table.cell(kind_value, ebn0, it).add(diag)
                done_frames = batch.stop
                if scenario.early_stop:
                    for kind in kinds:
                        iters = scenario.iterations or DEFAULT_ITERATIONS[kind]
                        last = iters if kind is not ReceiverKind.LMMSE_BASELINE else 0
                        key = (kind.value, float(ebn0), last)
                        cell = table.cells.get(key)
                        if (
                            cell is not None
                            and cell.frames >= EARLY_STOP_MIN_FRAMES
                            and cell.bit_errors >= EARLY_STOP_MIN_ERRORS
                        ):
                            active[kind] = False
    finally:
        if pool:
            pool.shutdown()
    return table


def default_scenario(**overrides) -> Scenario:
    """A small ready-to-run scenario on the default configuration."""
    params = dict(
        config=build_default_config(),
        receivers=(ReceiverKind.I_DJC_DD,),
        eb_n0_grid=(8.0,),
        frames=10,
        master_seed=0,
    )
    params.update(overrides)
    return Scenario(**params)
