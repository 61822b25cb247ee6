"""Closed-form belief updates at the observation factor.

This module implements the mean-field updates coupling the received grid
``y[n, l, k]`` with three belief families:

* a Gamma-shaped noise-precision belief (degrees ``KLN + a``, rate
  ``A + A_prior``) whose first moment is the working precision estimate;
* Gaussian channel-weight beliefs, either joint over all transmit
  antennas or disjoint per antenna;
* discrete symbol beliefs summarized by their first two moments
  (:class:`~mprx.modem.SymbolBeliefGrid`).

Block-fading structure is exploited throughout: the channel repeats
across the ``L`` OFDM symbols of a frame, so beliefs are stored per
``(tx antenna, rx antenna, subcarrier)`` and the joint covariance lives
on an ``(M*K, M*K)`` grid instead of ``(M*N*K*L)^2``.  Because the
per-RE mixing matrices are diagonal, the likelihood couples subcarriers
only through the channel prior and receive antennas not at all; all
antennas additionally share one covariance since they observe identical
symbol statistics.  The test suite checks this reduced algebra against
dense full-dimension constructions.

Normalization constants of the message products are never computed;
every emitted belief is renormalized, which is sufficient for all
downstream moments.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .modem import SymbolBeliefGrid
from .numerics import GaussianDensity, hermitian_part, hpd_inverse

LAMBDA_MAX = 1e12


class DegenerateChannelError(ValueError):
    """Raised when a symbol update hits a zero-energy channel direction."""


@dataclass(frozen=True)
class NoisePrecisionBelief:
    """Gamma-shaped noise-precision belief with mean ``degrees / rate``.

    The rate is floored at ``degrees / LAMBDA_MAX`` so the precision
    estimate stays finite in noiseless perfect-estimate corners.
    ``point_mass`` marks an EM-restricted belief; only the first moment is
    consumed downstream, so the restriction does not change the estimate.
    """

    degrees: float
    rate: float
    point_mass: bool = False

    def __post_init__(self) -> None:
        if self.degrees <= 0:
            raise ValueError("degrees must be positive")
        object.__setattr__(self, "rate", max(float(self.rate), self.degrees / LAMBDA_MAX))

    @property
    def mean(self) -> float:
        """First moment of the precision, ``lambda_hat``."""
        return self.degrees / self.rate

    @property
    def noise_variance(self) -> float:
        return self.rate / self.degrees


@dataclass(frozen=True)
class ChannelPrior:
    """Zero-mean Gaussian prior of one link's frequency response.

    ``freq_cov`` is the per-link ``(K, K)`` covariance (identical across
    links).  Exact multipath covariances are rank-deficient (rank = tap
    count), so the inverse is taken of ``freq_cov + regularization * I``.
    """

    freq_cov: np.ndarray
    regularization: float = 1e-8

    def __post_init__(self) -> None:
        cov = hermitian_part(np.asarray(self.freq_cov, dtype=complex))
        object.__setattr__(self, "freq_cov", cov)
        object.__setattr__(self, "_precision", hpd_inverse(self.effective_cov))

    @property
    def K(self) -> int:
        return self.freq_cov.shape[0]

    @property
    def effective_cov(self) -> np.ndarray:
        return self.freq_cov + self.regularization * np.eye(self.K)

    @property
    def precision(self) -> np.ndarray:
        return self._precision  # type: ignore[attr-defined]


@dataclass(frozen=True)
class JointChannelBelief:
    """Gaussian belief over all links jointly.

    ``mean[m, n, k]`` is the response estimate; ``cov`` is the ``(M*K, M*K)``
    covariance on the (tx antenna, subcarrier) grid, shared by every receive
    antenna (their updates see identical symbol statistics) and carrying the
    cross-antenna correlations that distinguish the joint model.
    """

    mean: np.ndarray  # (M, N, K)
    cov: np.ndarray  # (M*K, M*K)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.mean.shape

    def gamma(self) -> np.ndarray:
        """Per-subcarrier cross-antenna covariance summed over receive antennas.

        ``gamma[k, m, p] = sum_n Cov(h_nm(k), h_np(k))``, shape (K, M, M).
        """
        M, N, K = self.mean.shape
        cov4 = self.cov.reshape(M, K, M, K)
        return N * np.einsum("mkpk->kmp", cov4)

    def with_zero_covariance(self) -> "JointChannelBelief":
        return JointChannelBelief(self.mean, np.zeros_like(self.cov))


@dataclass(frozen=True)
class DisjointChannelBelief:
    """Independent per-transmit-antenna Gaussian beliefs.

    ``covs[m]`` is the ``(K, K)`` covariance of antenna ``m``'s response,
    shared across receive antennas; cross-antenna covariances are exactly
    zero under this model.
    """

    mean: np.ndarray  # (M, N, K)
    covs: np.ndarray  # (M, K, K)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.mean.shape

    def gamma(self) -> np.ndarray:
        M, N, K = self.mean.shape
        out = np.zeros((K, M, M), dtype=complex)
        idx = np.arange(K)
        for m in range(M):
            out[:, m, m] = N * self.covs[m, idx, idx]
        return out

    def with_zero_covariance(self) -> "DisjointChannelBelief":
        return DisjointChannelBelief(self.mean, np.zeros_like(self.covs))


ChannelBelief = JointChannelBelief | DisjointChannelBelief


def null_disjoint_belief(M: int, N: int, K: int) -> DisjointChannelBelief:
    """Zero-mean, zero-covariance per-antenna beliefs (pilot-only init)."""
    return DisjointChannelBelief(np.zeros((M, N, K), dtype=complex), np.zeros((M, K, K), dtype=complex))


def point_joint_belief(mean: np.ndarray) -> JointChannelBelief:
    M, _, K = mean.shape
    return JointChannelBelief(np.asarray(mean, dtype=complex), np.zeros((M * K, M * K), dtype=complex))


def point_disjoint_belief(mean: np.ndarray) -> DisjointChannelBelief:
    M, _, K = mean.shape
    return DisjointChannelBelief(np.asarray(mean, dtype=complex), np.zeros((M, K, K), dtype=complex))


def channel_gram(ch: ChannelBelief) -> np.ndarray:
    """Per-subcarrier mean Gram matrix ``G[k, m, p] = sum_n conj(h_nm) h_np``."""
    return np.einsum("mnk,pnk->kmp", ch.mean.conj(), ch.mean)


@dataclass(frozen=True)
class ObservationStats:
    """Second-order summaries entering the noise-precision update.

    Diagonal matrices are stored as their diagonals: ``d_diag`` holds the
    symbol variances (zero at pilots) and ``b_diag`` its elementwise square
    root, the PSD factor of the diagonal symbol covariance.  ``c`` is the
    per-subcarrier channel covariance contribution in the mixing-matrix
    convention (``c[k, m, p] = sum_n <h_nm~ h_np~>* ``) and ``h_gram`` the
    matching mean Gram matrix; ``residual`` is ``y - X_hat h_hat`` when an
    observation is supplied.
    """

    d_diag: np.ndarray  # (M, L, K)
    b_diag: np.ndarray  # (M, L, K)
    c: np.ndarray  # (K, M, M)
    h_gram: np.ndarray  # (K, M, M)
    residual: np.ndarray | None = None


def build_observation_stats(
    sym: SymbolBeliefGrid, ch: ChannelBelief, y: np.ndarray | None = None
) -> ObservationStats:
    d_diag = sym.variances
    c = ch.gamma().conj()
    h_gram = channel_gram(ch)
    residual = None
    if y is not None:
        residual = np.asarray(y, dtype=complex) - np.einsum("mlk,mnk->nlk", sym.means, ch.mean)
    return ObservationStats(d_diag=d_diag, b_diag=np.sqrt(d_diag), c=c, h_gram=h_gram, residual=residual)


def _noise_update(
    y: np.ndarray,
    sym: SymbolBeliefGrid,
    ch: ChannelBelief,
    prior: tuple[float, float],
    mask: np.ndarray | None,
) -> NoisePrecisionBelief:
    y = np.asarray(y, dtype=complex)
    N = y.shape[0]
    M, L, K = sym.shape
    stats = build_observation_stats(sym, ch, y=y)
    if mask is None:
        mask = np.ones((L, K), dtype=bool)
    n_sel = int(mask.sum())
    if n_sel == 0:
        raise ValueError("noise update needs at least one resource element")
    kk = np.nonzero(mask.reshape(-1))[0] % K  # subcarrier of each selected RE

    resid = stats.residual[:, mask]  # (N, n_sel)
    fit = float(np.sum(np.abs(resid) ** 2))

    # tr((C + H^H H) Sigma_x): per-RE symbol variance times channel second moment
    second = np.real(np.einsum("kmm->km", stats.h_gram + stats.c))  # (K, M) = sum_n <|h_nm(k)|^2>
    var_sel = sym.variances[:, mask]  # (M, n_sel)
    tr_symbol = float(np.einsum("mq,qm->", var_sel, second[kk]))

    # tr(X_hat Sigma_h X_hat^H): channel covariance weighted by symbol means
    gam = ch.gamma()
    x_sel = sym.means[:, mask]  # (M, n_sel)
    tr_channel = float(np.real(np.einsum("mq,qmp,pq->", x_sel, gam[kk], x_sel.conj())))

    a, a_prior = prior
    degrees = N * n_sel + a
    rate = fit + tr_symbol + tr_channel + a_prior
    return NoisePrecisionBelief(degrees=degrees, rate=rate)


def noise_precision_update(
    y: np.ndarray, sym: SymbolBeliefGrid, ch: ChannelBelief, prior: tuple[float, float] = (0.0, 0.0)
) -> NoisePrecisionBelief:
    """Noise-precision update from the full grid.

    With the non-informative prior ``(0, 0)`` the first moment is
    ``K*L*N / A`` with ``A`` the posterior-expected squared residual,
    which coincides with the ML noise-precision estimate.
    """
    return _noise_update(y, sym, ch, prior, mask=None)


def noise_precision_update_pilot_only(
    y: np.ndarray, sym: SymbolBeliefGrid, ch: ChannelBelief, prior: tuple[float, float] = (0.0, 0.0)
) -> NoisePrecisionBelief:
    """Noise-precision update restricted to the pilot resource elements."""
    if not sym.pilot_mask.any():
        raise ValueError("pilot-only update requires a nonempty pilot set")
    return _noise_update(y, sym, ch, prior, mask=sym.pilot_mask)


def joint_channel_update(
    y: np.ndarray, lam: float, sym: SymbolBeliefGrid, prior: ChannelPrior
) -> JointChannelBelief:
    """Update the joint Gaussian belief over all links.

    Posterior precision ``lam * <X^H X> + P_prior`` and mean
    ``Sigma (lam <X>^H y)`` (zero prior mean), evaluated on the reduced
    (tx antenna, subcarrier) grid.  One ``(M*K, M*K)`` system is solved
    and shared across receive antennas.
    """
    y = np.asarray(y, dtype=complex)
    M, L, K = sym.shape
    N = y.shape[0]
    if lam <= 0:
        raise ValueError("noise precision must be positive")

    # W[k, m, p] = sum_l <x_m(l,k)* x_p(l,k)>
    w = np.einsum("mlk,plk->kmp", sym.means.conj(), sym.means)
    var_sum = sym.variances.sum(axis=1)  # (M, K)
    diag = np.arange(M)
    w[:, diag, diag] += var_sum.T

    j4 = np.zeros((M, K, M, K), dtype=complex)
    j4[:, np.arange(K), :, np.arange(K)] = lam * w
    j4[diag, :, diag, :] += prior.precision
    precision = hermitian_part(j4.reshape(M * K, M * K))

    cov = hpd_inverse(precision)
    b = lam * np.einsum("mlk,nlk->mkn", sym.means.conj(), y).reshape(M * K, N)
    mean = (cov @ b).reshape(M, K, N).transpose(0, 2, 1)
    return JointChannelBelief(mean=mean, cov=cov)


def disjoint_channel_update(
    m: int,
    y: np.ndarray,
    lam: float,
    sym: SymbolBeliefGrid,
    ch: DisjointChannelBelief,
    prior: ChannelPrior,
) -> DisjointChannelBelief:
    """Update antenna ``m``'s belief given the current beliefs of the others.

    The interfering antennas' mean contributions are cancelled from the
    observation; only component ``m`` of the returned belief changes.
    Callers iterating over antennas see each update immediately because
    the residual is recomputed from the newest means on every call.
    """
    y = np.asarray(y, dtype=complex)
    M, L, K = sym.shape
    N = y.shape[0]
    if lam <= 0:
        raise ValueError("noise precision must be positive")
    if not 0 <= m < M:
        raise ValueError(f"antenna index {m} outside 0..{M - 1}")

    others = [i for i in range(M) if i != m]
    resid = y
    if others:
        resid = y - np.einsum("mlk,mnk->nlk", sym.means[others], ch.mean[others])

    w = (np.abs(sym.means[m]) ** 2 + sym.variances[m]).sum(axis=0)  # (K,)
    precision = lam * np.diag(w) + prior.precision
    cov_m = hpd_inverse(hermitian_part(precision))
    b = lam * np.einsum("lk,nlk->kn", sym.means[m].conj(), resid)  # (K, N)
    mean_m = (cov_m @ b).T  # (N, K)

    new_mean = ch.mean.copy()
    new_mean[m] = mean_m
    new_covs = ch.covs.copy()
    new_covs[m] = cov_m
    return DisjointChannelBelief(mean=new_mean, covs=new_covs)


def vmp_symbol_update(
    m: int, y: np.ndarray, lam: float, ch: ChannelBelief, sym: SymbolBeliefGrid
) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian symbol message for antenna ``m`` at every resource element.

    Because the per-RE mixing matrices are diagonal, the update decouples
    into scalars: with ``g(k) = sum_n |h_nm(k)|^2 + C_mm(k)``,

    ``x_vmp = (h_m^H (y - interference) - sum_{p != m} C_mp x_p) / g`` and
    ``sigma^2 = 1 / (lam * g)``.

    Returns ``(mean, variance)`` grids of shape ``(L, K)``; entries at
    pilot REs are computed but unused by callers.
    """
    y = np.asarray(y, dtype=complex)
    M, L, K = sym.shape
    gram = channel_gram(ch)
    gam = ch.gamma()
    c = gam.conj()  # paper-convention per-RE channel covariance matrix

    denom = np.real(gram[:, m, m] + c[:, m, m])  # (K,)
    if np.any(denom <= 0):
        raise DegenerateChannelError(f"zero channel energy for antenna {m}")

    others = [i for i in range(M) if i != m]
    resid = y
    if others:
        resid = y - np.einsum("mlk,mnk->nlk", sym.means[others], ch.mean[others])
    matched = np.einsum("nk,nlk->lk", ch.mean[m].conj(), resid)
    if others:
        matched = matched - np.einsum("kp,plk->lk", c[:, m, others].reshape(K, len(others)), sym.means[others])
    x_vmp = matched / denom[None, :]
    var = np.broadcast_to(1.0 / (lam * denom)[None, :], (L, K)).copy()
    return x_vmp, var


def em_restrict(belief):
    """Restrict a belief to a point mass at its location estimate.

    Gaussian beliefs keep their mean and lose all spread, so every
    second-order term they feed downstream vanishes; the noise-precision
    belief keeps its first moment (the only quantity other updates read).
    """
    if isinstance(belief, NoisePrecisionBelief):
        return replace(belief, point_mass=True)
    if isinstance(belief, (JointChannelBelief, DisjointChannelBelief)):
        return belief.with_zero_covariance()
    if isinstance(belief, GaussianDensity):
        return GaussianDensity.point_mass(belief.mean)
    raise TypeError(f"cannot EM-restrict {type(belief).__name__}")
