"""System configuration, resource-grid indexing, and pilot patterns.

The time-frequency grid has ``K`` subcarriers and ``L`` OFDM symbols per
frame.  Vectorization order follows
``x_m = [x_m(1,1), ..., x_m(K,1), ..., x_m(1,L), ..., x_m(K,L)]^T``,
i.e. subcarrier index fastest; arrays of shape ``(L, K)`` flattened in C
order match this convention.  Indices are 0-based internally; only
:func:`flat_index` exposes the 1-based convention used in the project
documentation.

The default pilot layout places 13 pilots in OFDM symbols 1 and 5
(1-based): subcarriers {1, 13, 25, 37, 49, 61, 73} in symbol 1 and the
staggered set {7, 19, 31, 43, 55, 67} in symbol 5.  All transmit antennas
share the same pilot resource elements; pilot values are unit-magnitude
QPSK symbols drawn independently per antenna.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import PowerDelayProfile, etu_profile
from .fec import ConvCodeSpec

PILOT_SYMBOLS = (0, 4)  # 0-based OFDM symbol indices carrying pilots
PILOT_SPACING = 12
QPSK_POINTS = np.array([1 + 1j, -1 + 1j, 1 - 1j, -1 - 1j]) / np.sqrt(2.0)

CONSTELLATION_NAMES = ("qpsk", "16qam")


class InvalidGridError(ValueError):
    """Raised when a pilot pattern cannot be placed on the requested grid."""


class OutOfRangeError(IndexError):
    """Raised for resource-element coordinates outside the grid."""


class ConfigError(ValueError):
    """Raised for malformed or unknown configuration-file content."""


def flat_index(k: int, l: int, K: int) -> int:
    """Map 1-based (subcarrier ``k``, OFDM symbol ``l``) to the flat vector index.

    Returns ``(l - 1) * K + (k - 1)`` per the vectorization order above.
    """
    if not 1 <= k <= K:
        raise OutOfRangeError(f"subcarrier index {k} outside 1..{K}")
    if l < 1:
        raise OutOfRangeError(f"OFDM symbol index {l} must be >= 1")
    return (l - 1) * K + (k - 1)


def pilot_positions(K: int, L: int) -> tuple[tuple[int, int], ...]:
    """Return the 13 default pilot positions as 0-based ``(k, l)`` pairs.

    Ordered by flat index (symbol-major).  Requires a grid of at least
    73 subcarriers and 5 OFDM symbols.
    """
    if K < 73 or L < 5:
        raise InvalidGridError(f"grid {K}x{L} too small for the default 13-pilot layout")
    first = [(k, PILOT_SYMBOLS[0]) for k in range(0, 73, PILOT_SPACING)]
    second = [(k, PILOT_SYMBOLS[1]) for k in range(6, 67, PILOT_SPACING)]
    return tuple(first + second)


@dataclass(frozen=True)
class PilotPattern:
    """Pilot resource elements (shared by all transmit antennas) and their values.

    ``positions`` holds 0-based ``(k, l)`` pairs; ``values[m, i]`` is the
    unit-magnitude symbol sent by antenna ``m`` on ``positions[i]``.
    """

    positions: tuple[tuple[int, int], ...]
    values: np.ndarray  # (M, P) complex

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=complex)
        if values.ndim != 2 or values.shape[1] != len(self.positions):
            raise ValueError("pilot values must have shape (antennas, positions)")
        if len(set(self.positions)) != len(self.positions):
            raise ValueError("pilot positions must be unique")
        if not np.allclose(np.abs(values), 1.0, atol=1e-12):
            raise ValueError("pilot symbols must have unit magnitude")
        object.__setattr__(self, "values", values)

    @property
    def count(self) -> int:
        return len(self.positions)

    @property
    def tx_antennas(self) -> int:
        return self.values.shape[0]


def build_pilot_pattern(K: int, L: int, rng: np.random.Generator, tx_antennas: int = 2) -> PilotPattern:
    """Place the default 13-pilot layout and draw i.i.d. QPSK pilot values."""
    positions = pilot_positions(K, L)
    values = QPSK_POINTS[rng.integers(0, 4, size=(tx_antennas, len(positions)))]
    return PilotPattern(positions, values)


@dataclass(frozen=True)
class ResourceGrid:
    """Pilot/data classification of the ``(K, L)`` grid with flat index maps."""

    subcarriers: int
    ofdm_symbols: int
    pilot_mask: np.ndarray  # (L, K) bool

    @classmethod
    def from_pattern(cls, K: int, L: int, pattern: PilotPattern) -> "ResourceGrid":
        mask = np.zeros((L, K), dtype=bool)
        for (k, l) in pattern.positions:
            if not (0 <= k < K and 0 <= l < L):
                raise OutOfRangeError(f"pilot position {(k, l)} outside the {K}x{L} grid")
            mask[l, k] = True
        return cls(K, L, mask)

    @property
    def size(self) -> int:
        return self.subcarriers * self.ofdm_symbols

    @property
    def n_pilots(self) -> int:
        return int(self.pilot_mask.sum())

    @property
    def n_data(self) -> int:
        return self.size - self.n_pilots

    @property
    def data_indices(self) -> np.ndarray:
        """Flat indices of data REs, in vectorization order."""
        return np.flatnonzero(~self.pilot_mask.reshape(-1))

    @property
    def pilot_indices(self) -> np.ndarray:
        return np.flatnonzero(self.pilot_mask.reshape(-1))


@dataclass(frozen=True)
class FrameConfig:
    """Dimensions, constellation, code, and pilot pattern of one OFDM frame."""

    tx_antennas: int
    rx_antennas: int
    subcarriers: int
    ofdm_symbols: int
    subcarrier_spacing_hz: float
    constellation: str
    code: ConvCodeSpec
    pilot_pattern: PilotPattern
    eb_n0_db: float = 10.0

    def __post_init__(self) -> None:
        if min(self.tx_antennas, self.rx_antennas, self.subcarriers, self.ofdm_symbols) < 1:
            raise ValueError("antenna and grid dimensions must be >= 1")
        if self.subcarrier_spacing_hz <= 0:
            raise ValueError("subcarrier spacing must be positive")
        if self.constellation not in CONSTELLATION_NAMES:
            raise ValueError(f"unknown constellation {self.constellation!r}")
        if self.pilot_pattern.tx_antennas != self.tx_antennas:
            raise ValueError("pilot pattern antenna count does not match tx_antennas")
        # pilots must lie on the grid
        ResourceGrid.from_pattern(self.subcarriers, self.ofdm_symbols, self.pilot_pattern)

    @property
    def grid(self) -> ResourceGrid:
        return ResourceGrid.from_pattern(self.subcarriers, self.ofdm_symbols, self.pilot_pattern)


def build_default_config(seed: int = 0, constellation: str = "16qam", eb_n0_db: float = 10.0) -> FrameConfig:
    """The 2x2, 75-subcarrier, 7-symbol, 15 kHz configuration with 13 pilots."""
    rng = np.random.default_rng(seed)
    pattern = build_pilot_pattern(75, 7, rng, tx_antennas=2)
    return FrameConfig(
        tx_antennas=2,
        rx_antennas=2,
        subcarriers=75,
        ofdm_symbols=7,
        subcarrier_spacing_hz=15e3,
        constellation=constellation,
        code=ConvCodeSpec(),
        pilot_pattern=pattern,
        eb_n0_db=eb_n0_db,
    )


_CONFIG_KEYS = {
    "tx_antennas",
    "rx_antennas",
    "subcarriers",
    "ofdm_symbols",
    "subcarrier_spacing_hz",
    "constellation",
    "eb_n0_db",
    "pilot_seed",
    "channel_profile",
}


@dataclass(frozen=True)
class LoadedConfig:
    frame: FrameConfig
    profile: PowerDelayProfile


def load_config(path: str) -> LoadedConfig:
    """Read a JSON configuration file.

    Keys mirror :class:`FrameConfig` fields; ``pilot_seed`` seeds the pilot
    pattern and ``channel_profile`` selects a named profile (``"etu"``) or
    provides a custom list of ``[delay_ns, power_db]`` pairs.  Unknown keys
    are rejected.
    """
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("configuration root must be a JSON object")
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")

    tx = int(raw.get("tx_antennas", 2))
    rx = int(raw.get("rx_antennas", 2))
    K = int(raw.get("subcarriers", 75))
    L = int(raw.get("ofdm_symbols", 7))
    spacing = float(raw.get("subcarrier_spacing_hz", 15e3))
    constellation = str(raw.get("constellation", "16qam")).lower()
    eb_n0_db = float(raw.get("eb_n0_db", 10.0))
    pilot_seed = int(raw.get("pilot_seed", 0))

    rng = np.random.default_rng(pilot_seed)
    pattern = build_pilot_pattern(K, L, rng, tx_antennas=tx)
    frame = FrameConfig(
        tx_antennas=tx,
        rx_antennas=rx,
        subcarriers=K,
        ofdm_symbols=L,
        subcarrier_spacing_hz=spacing,
        constellation=constellation,
        code=ConvCodeSpec(),
        pilot_pattern=pattern,
        eb_n0_db=eb_n0_db,
    )

    profile_spec = raw.get("channel_profile", "etu")
    profile = _parse_profile(profile_spec)
    return LoadedConfig(frame=frame, profile=profile)


def _parse_profile(spec) -> PowerDelayProfile:
    if isinstance(spec, str):
        if spec.lower() == "etu":
            return etu_profile()
        raise ConfigError(f"unknown channel profile {spec!r}")
    if isinstance(spec, Sequence):
        try:
            pairs = [(float(d), float(p)) for d, p in spec]
        except (TypeError, ValueError) as exc:
            raise ConfigError("custom profile must be a list of [delay_ns, power_db] pairs") from exc
        delays_ns = [d for d, _ in pairs]
        powers_db = [p for _, p in pairs]
        return PowerDelayProfile.from_db("custom", delays_ns, powers_db)
    raise ConfigError("channel_profile must be a name or a list of [delay_ns, power_db] pairs")
