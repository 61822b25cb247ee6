"""Complex linear-algebra primitives and Gaussian-density algebra.

All estimation modules share these helpers.  Matrices are plain
``numpy.ndarray`` objects with ``complex128`` entries; Hermitian
positive-(semi)definite inputs are validated rather than wrapped in a
dedicated class.  Tolerances follow a fixed hierarchy: 1e-10 for
Hermitian/PSD construction checks, a relative 1e-12 eigenvalue floor for
inversion conditioning, and 1e-8 relative error for reconstruction-style
assertions in the test suite.

Gaussian densities are circularly-symmetric complex Gaussians,
``p(x) ~ exp(-(x - mu)^H Sigma^{-1} (x - mu))``.  Degenerate (zero
covariance) and flat (infinite covariance) densities are first-class
states: pilot beliefs are exact point masses and non-informative priors
are flat, and both participate in products via precision-weighted sums.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERMITIAN_ATOL = 1e-10
PSD_EIG_ATOL = 1e-10
INVERSION_RTOL = 1e-12


class SingularMatrixError(np.linalg.LinAlgError):
    """Raised when a matrix required to be invertible is (numerically) singular."""


def hermitian_part(m: np.ndarray) -> np.ndarray:
    """Return the Hermitian part ``(m + m^H) / 2``."""
    m = np.asarray(m, dtype=complex)
    return 0.5 * (m + m.conj().T)


def require_hermitian(m: np.ndarray, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    """Validate that ``m`` is self-adjoint within ``atol`` and return its Hermitian part.

    The returned matrix is exactly Hermitian, which keeps ``eigh``-based
    routines deterministic.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    scale = max(1.0, float(np.abs(m).max(initial=0.0)))
    if np.abs(m - m.conj().T).max(initial=0.0) > atol * scale:
        raise ValueError("matrix is not Hermitian within tolerance")
    return hermitian_part(m)


def hpd_inverse(m: np.ndarray) -> np.ndarray:
    """Invert a Hermitian positive-definite matrix.

    Raises:
        SingularMatrixError: if the smallest eigenvalue is below
            ``INVERSION_RTOL`` times the largest (the matrix is treated as
            numerically singular).
    """
    m = require_hermitian(m)
    evals = np.linalg.eigvalsh(m)
    if evals[-1] <= 0.0 or evals[0] <= INVERSION_RTOL * evals[-1]:
        raise SingularMatrixError(
            f"matrix not strictly positive definite (eig range [{evals[0]:.3e}, {evals[-1]:.3e}])"
        )
    inv = np.linalg.inv(m)
    return hermitian_part(inv)


def psd_sqrt_factor(m: np.ndarray) -> np.ndarray:
    """Factor a Hermitian PSD matrix as ``B @ B^H == m``.

    Uses the eigendecomposition ``m = U diag(w) U^H`` and returns
    ``B = U diag(sqrt(w))``.  Slightly negative eigenvalues within the PSD
    tolerance are clamped to zero.  The column phases of ``B`` are not
    canonicalized; ``B`` only ever enters through ``B B^H``-type products.
    """
    m = require_hermitian(m)
    w, u = np.linalg.eigh(m)
    floor = -PSD_EIG_ATOL * max(1.0, float(w[-1]) if w.size else 1.0)
    if w.size and w[0] < floor:
        raise ValueError(f"matrix is not PSD within tolerance (min eigenvalue {w[0]:.3e})")
    w = np.maximum(w, 0.0)
    return u * np.sqrt(w)


@dataclass(frozen=True)
class GaussianDensity:
    """A complex Gaussian with mean vector and Hermitian PSD covariance.

    ``cov`` may be the zero matrix (a degenerate point mass, used for pilot
    beliefs) or carry ``inf`` on the whole diagonal (a flat, non-informative
    density).  Proper densities must have a Hermitian PSD covariance.
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=complex).reshape(-1)
        cov = np.asarray(self.cov, dtype=complex)
        if cov.shape != (mean.size, mean.size):
            raise ValueError(f"mean length {mean.size} does not match covariance shape {cov.shape}")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.size

    @property
    def is_degenerate(self) -> bool:
        """True for an exact point mass (zero covariance)."""
        return bool(np.all(self.cov == 0))

    @property
    def is_flat(self) -> bool:
        """True for a non-informative density (infinite variance everywhere)."""
        d = np.diagonal(self.cov)
        return bool(d.size and np.all(np.isinf(d.real)))

    @classmethod
    def point_mass(cls, mean: np.ndarray) -> "GaussianDensity":
        mean = np.asarray(mean, dtype=complex).reshape(-1)
        return cls(mean, np.zeros((mean.size, mean.size), dtype=complex))

    @classmethod
    def flat(cls, dim: int) -> "GaussianDensity":
        return cls(np.zeros(dim, dtype=complex), np.diag(np.full(dim, np.inf, dtype=complex)))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw ``size`` samples, shape ``(size, dim)``."""
        if self.is_flat:
            raise ValueError("cannot sample from a flat density")
        b = psd_sqrt_factor(self.cov) if not self.is_degenerate else None
        if b is None:
            return np.broadcast_to(self.mean, (size, self.dim)).copy()
        w = (rng.standard_normal((size, self.dim)) + 1j * rng.standard_normal((size, self.dim)))
        w *= np.sqrt(0.5)
        return self.mean + w @ b.T  # rows are B @ u for u ~ CN(0, I)


def gaussian_product(a: GaussianDensity, b: GaussianDensity) -> GaussianDensity:
    """Combine two Gaussian messages into the normalized product density.

    Precision form: the product has precision ``Pa + Pb`` and mean
    ``(Pa + Pb)^{-1} (Pa mu_a + Pb mu_b)``.  A flat factor is absorbed; a
    degenerate factor (infinite precision) dominates the product.
    """
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    if a.is_flat:
        return b
    if b.is_flat:
        return a
    if a.is_degenerate and b.is_degenerate:
        raise SingularMatrixError("product of two degenerate densities is ill-defined")
    if a.is_degenerate:
        return GaussianDensity.point_mass(a.mean)
    if b.is_degenerate:
        return GaussianDensity.point_mass(b.mean)
    pa = hpd_inverse(a.cov)
    pb = hpd_inverse(b.cov)
    cov = hpd_inverse(pa + pb)
    mean = cov @ (pa @ a.mean + pb @ b.mean)
    return GaussianDensity(mean, cov)
