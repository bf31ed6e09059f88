"""Kenward-Roger (1997) small-sample adjustment.

Bias-adjusted covariance of the fixed effects plus approximate denominator
degrees of freedom for contrasts; reduces to the classical exact answers
for OLS and balanced designs.
"""

from dataclasses import dataclass

import numpy as np
from scipy import stats

from ..errors import NotConverged


@dataclass(frozen=True)
class KRState:
    """Precomputed ingredients shared by all contrasts of one fit."""

    Phi: np.ndarray          # unadjusted cov(beta)
    PhiA: np.ndarray         # KR bias-adjusted cov(beta)
    P_list: tuple            # information-derivative blocks, one per theta_i
    W: np.ndarray            # cov of the variance-parameter estimates
    n: int
    p: int


def kr_state(fit):
    """Assemble the KR quantities for a converged fit.

    Variance parameters are (tau_j^2 for each free component, sigma^2);
    components pinned at the zero boundary are treated as known zeros.
    """
    if not fit.converged:
        raise NotConverged("Kenward-Roger adjustment needs a converged fit")
    X = fit.X
    n, p = X.shape
    sigma2 = fit.sigma2
    V = np.eye(n)
    free_Z = []
    for g, Z in zip(fit.gamma, fit.Z_list):
        if g > 0.0:
            V += g * (Z @ Z.T)
            free_Z.append(Z)
    sigma_inv = np.linalg.inv(sigma2 * V)
    SiX = sigma_inv @ X
    Phi = np.linalg.inv(X.T @ SiX)

    # Derivative of Sigma wrt each parameter: Z_j Z_j' for tau_j^2, I for
    # sigma^2. Held as factor lists for cheap products.
    ops = [("zz", Z) for Z in free_Z] + [("eye", None)]
    m = len(ops)

    P_list = []
    C_list = []          # Sigma_i @ SiX
    for kind, Z in ops:
        if kind == "zz":
            A = Z.T @ SiX
            P_list.append(A.T @ A)
            C_list.append(Z @ A)
        else:
            P_list.append(SiX.T @ SiX)
            C_list.append(SiX)
    Q = np.empty((m, m), dtype=object)
    for i in range(m):
        for j in range(m):
            Q[i, j] = C_list[i].T @ sigma_inv @ C_list[j]

    Pt = sigma_inv - SiX @ Phi @ SiX.T
    info = np.empty((m, m))
    PtZ = [Pt @ Z for kind, Z in ops if kind == "zz"]
    for i, (kind_i, Zi) in enumerate(ops):
        for j, (kind_j, Zj) in enumerate(ops[:i + 1]):
            if kind_i == "zz" and kind_j == "zz":
                T = Zj.T @ PtZ[i]
                val = 0.5 * float((T * T).sum())
            elif kind_i == "zz":
                val = 0.5 * float((PtZ[i] * PtZ[i]).sum())
            elif kind_j == "zz":
                val = 0.5 * float((PtZ[j] * PtZ[j]).sum())
            else:
                val = 0.5 * float((Pt * Pt).sum())
            info[i, j] = info[j, i] = val
    W = np.linalg.pinv(info)

    U = np.zeros((p, p))
    for i in range(m):
        for j in range(m):
            if W[i, j] != 0.0:
                U += W[i, j] * (Q[i, j] - P_list[i] @ Phi @ P_list[j])
    PhiA = Phi + 2.0 * Phi @ U @ Phi
    return KRState(Phi=Phi, PhiA=PhiA, P_list=tuple(P_list), W=W, n=n, p=p)


def _kr_df_and_scale(state, L):
    """KR denominator df and F scale for a p x q contrast matrix L."""
    q = L.shape[1]
    Phi, W, P_list = state.Phi, state.W, state.P_list
    M = L @ np.linalg.inv(L.T @ Phi @ L) @ L.T
    G = [Phi @ P @ Phi for P in P_list]
    m = len(P_list)
    t1 = np.array([np.trace(M @ Gi) for Gi in G])
    A1 = float(t1 @ W @ t1)
    A2 = 0.0
    MG = [M @ Gi for Gi in G]
    for i in range(m):
        for j in range(m):
            if W[i, j] != 0.0:
                A2 += W[i, j] * float((MG[i] * MG[j].T).sum())
    resid_df = float(state.n - state.p)
    if A2 <= 0.0:
        return resid_df, 1.0
    B = (A1 + 6.0 * A2) / (2.0 * q)
    g = ((q + 1.0) * A1 - (q + 4.0) * A2) / ((q + 2.0) * A2)
    denom = 3.0 * q + 2.0 * (1.0 - g)
    c1 = g / denom
    c2 = (q - g) / denom
    c3 = (q + 2.0 - g) / denom
    e_star = 1.0 / (1.0 - A2 / q)
    v_star = (2.0 / q) * (1.0 + c1 * B) / ((1.0 - c2 * B) ** 2
                                           * (1.0 - c3 * B))
    rho = v_star / (2.0 * e_star ** 2)
    if q * rho <= 1.0:
        return resid_df, 1.0
    df = 4.0 + (q + 2.0) / (q * rho - 1.0)
    lam = df / (e_star * (df - 2.0)) if df > 2.0 else 1.0
    return df, lam


def kr_adjust(fit, contrast, state=None):
    """Adjusted standard error and KR df for one scalar contrast of beta."""
    if not fit.converged:
        raise NotConverged("fit did not converge")
    c = np.asarray(contrast, dtype=np.float64)
    if fit.sigma2 <= 0.0:
        # Degenerate noiseless fit: no sampling variability to adjust.
        return 0.0, float(fit.n_obs - fit.beta.size)
    if state is None:
        state = kr_state(fit)
    se = float(np.sqrt(c @ state.PhiA @ c))
    df, _ = _kr_df_and_scale(state, c.reshape(-1, 1))
    return se, df


def kr_f_test(fit, L, state=None):
    """KR-scaled Wald F test of L'beta = 0 (L is p x q, full column rank).

    Returns (f_scaled, q, df, p_value).
    """
    if not fit.converged:
        raise NotConverged("fit did not converge")
    L = np.asarray(L, dtype=np.float64)
    q = L.shape[1]
    if fit.sigma2 <= 0.0:
        est = L.T @ fit.beta
        big = float(np.abs(est).max() > 0.0)
        return (np.inf if big else 0.0), q, float(fit.n_obs - fit.beta.size), \
            (0.0 if big else 1.0)
    if state is None:
        state = kr_state(fit)
    est = L.T @ fit.beta
    f_raw = float(est @ np.linalg.solve(L.T @ state.PhiA @ L, est)) / q
    df, lam = _kr_df_and_scale(state, L)
    f_scaled = lam * f_raw
    p = float(stats.f.sf(f_scaled, q, df))
    return f_scaled, q, df, p
