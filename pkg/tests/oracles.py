"""Dense reference implementations used as independent oracles.

These build the full stacked matrices of the observation model without
any of the structural shortcuts the package exploits (per-tone
decoupling, shared covariances across receive antennas, diagonal
bookkeeping), so agreement with them validates the fast paths.

Index conventions match the package: the observation vector stacks
(receive antenna, OFDM symbol, subcarrier) with subcarrier fastest; the
reduced channel vector stacks (tx antenna, rx antenna, subcarrier).
"""

import numpy as np


def dense_design(means, n_rx):
    """X_hat mapping the reduced channel vector to the observation vector.

    ``means`` is the (M, L, K) grid of symbol means; the result has shape
    (N*L*K, M*N*K).
    """
    M, L, K = means.shape
    N = n_rx
    X = np.zeros((N * L * K, M * N * K), dtype=complex)
    for n in range(N):
        for l in range(L):
            for k in range(K):
                row = n * L * K + l * K + k
                for m in range(M):
                    col = m * N * K + n * K + k
                    X[row, col] = means[m, l, k]
    return X


def dense_symbol_var_diag(variances, n_rx):
    """R^H D R: per-(m, n, k) sums of symbol variances across OFDM symbols."""
    M, L, K = variances.shape
    out = np.zeros(M * n_rx * K)
    for m in range(M):
        for n in range(n_rx):
            for k in range(K):
                out[m * n_rx * K + n * K + k] = variances[m, :, k].sum()
    return out


def dense_prior_precision(p0, M, N):
    K = p0.shape[0]
    out = np.zeros((M * N * K, M * N * K), dtype=complex)
    for m in range(M):
        for n in range(N):
            i = (m * N + n) * K
            out[i : i + K, i : i + K] = p0
    return out


def dense_joint_update(y, lam, means, variances, p0):
    """Textbook posterior over the reduced channel vector, all matrices dense."""
    N = y.shape[0]
    X = dense_design(means, N)
    d = dense_symbol_var_diag(variances, N)
    P = dense_prior_precision(p0, means.shape[0], N)
    J = lam * (X.conj().T @ X) + lam * np.diag(d) + P
    cov = np.linalg.inv(J)
    mean = cov @ (lam * X.conj().T @ y.reshape(-1))
    return mean, cov


def dense_disjoint_update(m, y, lam, means, variances, chan_means, p0):
    """Posterior of antenna m's reduced vector with the others cancelled."""
    M, L, K = means.shape
    N = y.shape[0]
    resid = y.reshape(-1).copy()
    for mp in range(M):
        if mp == m:
            continue
        Xp = dense_design(means[mp : mp + 1], N)
        resid -= Xp @ chan_means[mp].reshape(-1)
    Xm = dense_design(means[m : m + 1], N)
    d = dense_symbol_var_diag(variances[m : m + 1], N)
    P = dense_prior_precision(p0, 1, N)
    J = lam * (Xm.conj().T @ Xm) + lam * np.diag(d) + P
    cov = np.linalg.inv(J)
    mean = cov @ (lam * Xm.conj().T @ resid)
    return mean, cov


def dense_expected_residual_energy(y, means, variances, chan_mean, chan_cov_dense, n_rx):
    """< ||y - X h||^2 > over the symbol and channel beliefs, built from moments.

    ``chan_mean`` is the flattened (m, n, k) mean and ``chan_cov_dense`` the
    matching full covariance; the symbol expectation enters through the
    dense second-moment matrix <X^H X>.
    """
    M, L, K = means.shape
    N = n_rx
    y_flat = y.reshape(-1)
    X = dense_design(means, N)
    # <X^H X> = X_hat^H X_hat + R^H D R
    xhx = X.conj().T @ X + np.diag(dense_symbol_var_diag(variances, N))
    second = chan_cov_dense + np.outer(chan_mean, chan_mean.conj())
    a = (
        np.vdot(y_flat, y_flat).real
        - 2.0 * np.real(chan_mean.conj() @ (X.conj().T @ y_flat))
        + np.trace(xhx @ second).real
    )
    return a


def dense_symbol_message(m, y, lam, means, chan_means, chan_cov_dense, n_rx):
    """Gaussian symbol message of antenna m with dense per-frame matrices.

    ``chan_cov_dense`` is the full (M*N*K)^2 covariance of the channel
    belief.  Returns per-RE mean and variance grids of shape (L, K).
    """
    M, L, K = means.shape
    N = n_rx
    LK = L * K

    def h_stack(mp):
        # (N*L*K, L*K) block-diagonal-in-RE channel matrix of antenna mp
        H = np.zeros((N * LK, LK), dtype=complex)
        for n in range(N):
            for l in range(L):
                for k in range(K):
                    H[n * LK + l * K + k, l * K + k] = chan_means[mp, n, k]
        return H

    def cov_entry(ma, na, ka, mb, nb, kb):
        return chan_cov_dense[ma * N * K + na * K + ka, mb * N * K + nb * K + kb]

    Hm = h_stack(m)
    # diagonal of C_m: sum_n Var(h_nm(k)); C_mmp: sum_n conj(Cov(h_nm, h_nmp))
    cm = np.zeros(LK)
    for l in range(L):
        for k in range(K):
            cm[l * K + k] = sum(cov_entry(m, n, k, m, n, k).real for n in range(N))
    resid = y.reshape(-1).copy()
    corr = np.zeros(LK, dtype=complex)
    for mp in range(M):
        if mp == m:
            continue
        x_mp = means[mp].reshape(-1)
        resid -= h_stack(mp) @ x_mp
        c_mmp = np.zeros(LK, dtype=complex)
        for l in range(L):
            for k in range(K):
                c_mmp[l * K + k] = sum(np.conj(cov_entry(m, n, k, mp, n, k)) for n in range(N))
        corr += c_mmp * x_mp
    g = np.real(np.sum(np.abs(Hm) ** 2, axis=0)) + cm
    mean = (Hm.conj().T @ resid - corr) / g
    var = 1.0 / (lam * g)
    return mean.reshape(L, K), var.reshape(L, K)


def reduced_cov_to_dense(cov, M, N, K, joint):
    """Expand a package channel covariance to the dense (M*N*K)^2 layout."""
    out = np.zeros((M * N * K, M * N * K), dtype=complex)
    if joint:
        for n in range(N):
            for m in range(M):
                for mp in range(M):
                    for k in range(K):
                        for kp in range(K):
                            out[m * N * K + n * K + k, mp * N * K + n * K + kp] = cov[m * K + k, mp * K + kp]
    else:
        for m in range(M):
            for n in range(N):
                i = (m * N + n) * K
                out[i : i + K, i : i + K] = cov[m]
    return out
