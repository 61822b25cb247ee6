"""Built-in oracle and property checks, runnable without a test harness.

Each check is independent, seeded, and fast; together they cover the
load-bearing algebra: encoder/decoder exactness, constellation
consistency, Gaussian-product moments against quadrature, the trace
identity behind the noise update, the frequency-response evaluation, the
reduced-versus-dense channel update, and end-to-end determinism.
"""

from __future__ import annotations

import numpy as np

from . import fec, modem, numerics, vmp
from .channel import etu_profile, freq_response
from .frame import build_pilot_pattern, flat_index
from .harness import Scenario, run_monte_carlo
from .receivers import ReceiverKind


def _check_flat_index():
    K, L = 75, 7
    seen = {flat_index(k, l, K) for l in range(1, L + 1) for k in range(1, K + 1)}
    assert seen == set(range(K * L)), "flat_index is not a bijection"


def _check_pilot_pattern():
    rng = np.random.default_rng(7)
    pat = build_pilot_pattern(75, 7, rng)
    assert pat.count == 13, f"expected 13 pilots, got {pat.count}"
    assert {l for (_, l) in pat.positions} == {0, 4}, "pilots must sit in OFDM symbols 1 and 5"
    assert np.allclose(np.abs(pat.values), 1.0), "pilot symbols must be unit magnitude"
    pat2 = build_pilot_pattern(75, 7, np.random.default_rng(7))
    assert np.array_equal(pat.values, pat2.values), "pilot pattern must be seed-deterministic"


def _check_encoder():
    impulse = np.zeros(7, dtype=np.uint8)
    impulse[0] = 1
    coded = fec.conv_encode(impulse)
    assert coded[:3].tolist() == [1, 1, 1], "leading impulse output must be (1,1,1)"
    rng = np.random.default_rng(3)
    u1, u2 = rng.integers(0, 2, (2, 24)).astype(np.uint8)
    lhs = fec.conv_encode((u1 ^ u2))
    rhs = fec.conv_encode(u1) ^ fec.conv_encode(u2)
    assert np.array_equal(lhs, rhs), "encoder must be linear over GF(2)"


def _check_bcjr_oracle():
    rng = np.random.default_rng(11)
    spec = fec.ConvCodeSpec()
    n_info = 6
    priors = rng.normal(0, 1.5, spec.n_coded_bits(n_info))
    _, app = fec.bcjr_decode(priors, spec)
    # exhaustive MAP posterior
    logp0 = -np.logaddexp(0.0, -priors)
    logp1 = -np.logaddexp(0.0, priors)
    scores = np.empty(1 << n_info)
    words = np.empty((1 << n_info, n_info), dtype=np.uint8)
    for i in range(1 << n_info):
        u = np.array([(i >> (n_info - 1 - j)) & 1 for j in range(n_info)], dtype=np.uint8)
        words[i] = u
        c = fec.conv_encode(u, spec)
        scores[i] = np.sum(np.where(c == 0, logp0, logp1))
    from scipy.special import logsumexp

    ref = np.array(
        [
            logsumexp(scores[words[:, j] == 0]) - logsumexp(scores[words[:, j] == 1])
            for j in range(n_info)
        ]
    )
    err = np.max(np.abs(app - ref))
    assert err < 1e-9, f"BCJR deviates from enumeration by {err:.2e}"


def _check_constellations():
    for name in ("qpsk", "16qam"):
        c = modem.Constellation.get(name)
        assert np.isclose(np.mean(np.abs(c.points) ** 2), 1.0), f"{name} must be unit energy"
        rng = np.random.default_rng(5)
        bits = rng.integers(0, 2, 40 * c.bits_per_symbol).astype(np.uint8)
        back = modem.hard_decisions(modem.map_bits(bits, c), c)
        assert np.array_equal(bits, back), f"{name} demap round trip failed"


def _check_gaussian_product():
    a = numerics.GaussianDensity(np.array([1.0 + 0j]), np.array([[2.0 + 0j]]))
    b = numerics.GaussianDensity(np.array([3.0 + 0j]), np.array([[4.0 + 0j]]))
    prod = numerics.gaussian_product(a, b)
    # quadrature over the complex plane
    grid = np.linspace(-8, 12, 601)
    xr, xi = np.meshgrid(grid, grid)
    z = xr + 1j * xi
    w = np.exp(-np.abs(z - 1.0) ** 2 / 2.0 - np.abs(z - 3.0) ** 2 / 4.0)
    w /= w.sum()
    mean = (w * z).sum()
    var = (w * np.abs(z - mean) ** 2).sum()
    assert abs(prod.mean[0] - mean) < 1e-6, "gaussian product mean mismatch"
    assert abs(prod.cov[0, 0].real - var) < 1e-6, "gaussian product variance mismatch"


def _check_trace_identity():
    rng = np.random.default_rng(2)
    n = 6
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    sigma = a @ a.conj().T
    c = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    c = c @ c.conj().T
    b = numerics.psd_sqrt_factor(sigma)
    lhs = np.trace(b.conj().T @ c @ b).real
    rhs = np.trace(c @ sigma).real
    assert abs(lhs - rhs) <= 1e-8 * abs(rhs), "trace identity violated"


def _check_freq_response():
    rng = np.random.default_rng(9)
    profile = etu_profile()
    gains = rng.normal(size=profile.n_taps) + 1j * rng.normal(size=profile.n_taps)
    resp = freq_response(gains, profile.delays_s, 75, 15e3)
    k = np.arange(1, 76)
    ref = np.array([np.sum(gains * np.exp(-2j * np.pi * kk * 15e3 * profile.delays_s)) for kk in k])
    assert np.max(np.abs(resp - ref)) < 1e-10, "frequency response deviates from direct evaluation"


def _check_joint_vs_disjoint_m1():
    rng = np.random.default_rng(21)
    K, N, L = 6, 2, 3
    means = rng.normal(size=(1, L, K)) + 1j * rng.normal(size=(1, L, K))
    variances = rng.uniform(0.0, 0.5, size=(1, L, K))
    sym = modem.SymbolBeliefGrid(means, variances, np.zeros((L, K), dtype=bool))
    y = rng.normal(size=(N, L, K)) + 1j * rng.normal(size=(N, L, K))
    prior = vmp.ChannelPrior(np.eye(K), regularization=0.0)
    joint = vmp.joint_channel_update(y, 2.0, sym, prior)
    disjoint = vmp.disjoint_channel_update(0, y, 2.0, sym, vmp.null_disjoint_belief(1, N, K), prior)
    assert np.allclose(joint.mean, disjoint.mean, atol=1e-10), "M=1 joint/disjoint means differ"
    assert np.allclose(joint.cov, disjoint.covs[0], atol=1e-10), "M=1 joint/disjoint covariances differ"


def _check_determinism():
    from .frame import build_default_config

    cfg = build_default_config(constellation="qpsk")
    scenario = Scenario(
        config=cfg,
        receivers=(ReceiverKind.PSC_DD, ReceiverKind.LMMSE_BASELINE),
        eb_n0_grid=(4.0,),
        frames=2,
        master_seed=123,
        iterations=2,
    )
    t1 = run_monte_carlo(scenario)
    t2 = run_monte_carlo(scenario)
    assert t1.rows() == t2.rows(), "repeated runs must be bit-identical"


CHECKS = [
    ("flat-index bijection", _check_flat_index),
    ("pilot pattern", _check_pilot_pattern),
    ("convolutional encoder", _check_encoder),
    ("bcjr enumeration oracle", _check_bcjr_oracle),
    ("constellations", _check_constellations),
    ("gaussian product quadrature", _check_gaussian_product),
    ("trace identity", _check_trace_identity),
    ("frequency response oracle", _check_freq_response),
    ("joint/disjoint M=1 equivalence", _check_joint_vs_disjoint_m1),
    ("monte-carlo determinism", _check_determinism),
]


def run_selftest() -> int:
    failures = 0
    for name, fn in CHECKS:
        try:
            fn()
        except AssertionError as exc:
            print(f"FAIL  {name}: {exc}")
            failures += 1
        except Exception as exc:  # pragma: no cover - defensive
            print(f"ERROR {name}: {type(exc).__name__}: {exc}")
            failures += 1
        else:
            print(f"PASS  {name}")
    if failures:
        print(f"{failures} of {len(CHECKS)} checks failed")
        return 1
    print(f"all {len(CHECKS)} checks passed")
    return 0
