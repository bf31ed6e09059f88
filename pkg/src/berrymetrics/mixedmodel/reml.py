"""REML fitting of Gaussian linear mixed models with independent
random intercepts.

The restricted log-likelihood is maximized over variance ratios
gamma_j = tau_j^2 / sigma^2 >= 0; beta and sigma^2 are profiled out in
closed form at every evaluation (GLS with V = I + sum gamma_j Z_j Z_j').
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy.linalg import cho_factor, cho_solve

from ..errors import RankDeficientX

PIN_TOLERANCE = 1e-10       # gamma below this is pinned to the 0 boundary
GRAD_TOLERANCE = 1e-6       # projected-gradient norm for convergence
LOGLIK_TOLERANCE = 1e-10    # successive log-likelihood change
MAX_ITER = 500


@dataclass(frozen=True)
class FitResult:
    beta: np.ndarray
    sigma2: float
    var_components: np.ndarray      # tau_j^2, one per random factor
    beta_cov: np.ndarray
    reml_loglik: float
    converged: bool
    n_obs: int
    n_params: int                   # len(beta) + 1 + len(var_components)
    gamma: np.ndarray               # variance ratios tau_j^2 / sigma^2
    beta_names: tuple = ()
    fixed_factor: str | None = None
    fixed_levels: tuple = ()
    random_factors: tuple = ()
    n_dropped: int = 0
    X: np.ndarray | None = None
    Z_list: tuple = ()
    y: np.ndarray | None = None


class _Profile:
    """Profiled REML objective over the variance ratios."""

    def __init__(self, y, X, Z_list):
        self.y = np.asarray(y, dtype=np.float64)
        self.X = np.asarray(X, dtype=np.float64)
        self.Z_list = [np.asarray(Z, dtype=np.float64) for Z in Z_list]
        self.ZZt = [Z @ Z.T for Z in self.Z_list]
        self.n, self.p = self.X.shape

    def evaluate(self, gamma):
        n, p, X, y = self.n, self.p, self.X, self.y
        V = np.eye(n)
        for g, G in zip(gamma, self.ZZt):
            V += g * G
        cf = cho_factor(V, lower=True)
        logdet_v = 2.0 * np.log(np.diag(cf[0])).sum()
        ViX = cho_solve(cf, X)
        Viy = cho_solve(cf, y)
        XtViX = X.T @ ViX
        sign, logdet_xvx = np.linalg.slogdet(XtViX)
        if sign <= 0:
            raise np.linalg.LinAlgError("X'V^-1X not positive definite")
        beta = np.linalg.solve(XtViX, X.T @ Viy)
        Py = Viy - ViX @ beta
        rss = float(y @ Py)
        sigma2 = rss / (n - p)
        ll = -0.5 * (logdet_v + logdet_xvx
                     + (n - p) * (1.0 + math.log(2.0 * math.pi * sigma2)))
        return {"ll": ll, "beta": beta, "sigma2": sigma2, "Py": Py,
                "ViX": ViX, "XtViX": XtViX, "cf": cf}

    def gradient(self, gamma, state=None):
        """d loglik / d gamma_j at gamma."""
        if state is None:
            state = self.evaluate(gamma)
        cf, ViX, XtViX, Py = (state["cf"], state["ViX"], state["XtViX"],
                              state["Py"])
        sigma2 = state["sigma2"]
        grad = np.empty(len(self.Z_list))
        for j, Z in enumerate(self.Z_list):
            ViZ = cho_solve(cf, Z)
            PZ = ViZ - ViX @ np.linalg.solve(XtViX, ViX.T @ Z)
            tr = float((Z * PZ).sum())
            u = Z.T @ Py
            grad[j] = -0.5 * (tr - float(u @ u) / sigma2)
        return grad

    def loglik(self, gamma):
        return self.evaluate(gamma)["ll"]


def _projected_grad_norm(gamma, grad_ll):
    """Inf-norm of the gradient projected onto the feasible set gamma>=0.

    At the 0 boundary only an ascent direction (positive gradient) counts.
    """
    proj = np.where((gamma <= 0.0) & (grad_ll <= 0.0), 0.0, grad_ll)
    return float(np.abs(proj).max()) if proj.size else 0.0


def _newton_polish(prof, gamma, max_iter=40):
    """Projected Newton refinement of the L-BFGS-B solution."""
    gamma = gamma.copy()
    r = gamma.size
    ll = prof.loglik(gamma)
    for _ in range(max_iter):
        grad = prof.gradient(gamma)
        free = [j for j in range(r)
                if gamma[j] > 0.0 or grad[j] > PIN_TOLERANCE]
        if not free or _projected_grad_norm(gamma, grad) < 1e-11:
            break
        h = np.array([1e-6 * max(gamma[j], 1.0) for j in free])
        hess = np.empty((len(free), len(free)))
        for k, j in enumerate(free):
            up, dn = gamma.copy(), gamma.copy()
            up[j] += h[k]
            dn[j] = max(dn[j] - h[k], 0.0)
            span = up[j] - dn[j]
            hess[:, k] = (prof.gradient(up)[free]
                          - prof.gradient(dn)[free]) / span
        hess = 0.5 * (hess + hess.T)
        try:
            step = np.linalg.solve(hess, -grad[free])
        except np.linalg.LinAlgError:
            step = np.zeros(len(free))
        if not np.isfinite(step).all() or float(step @ grad[free]) <= 0.0:
            # Hessian unusable: fall back to a scaled ascent step.
            scale0 = max(float(np.abs(np.diag(hess)).max()), 1.0)
            step = grad[free] / scale0
        # Backtrack on the restricted log-likelihood; near the optimum the
        # surface is flat to machine precision, so tiny decreases are
        # tolerated and the loop is driven by the gradient instead.
        taken = None
        scale = 1.0
        for _ in range(25):
            cand = gamma.copy()
            cand[free] = np.maximum(gamma[free] + scale * step, 0.0)
            cand[cand < PIN_TOLERANCE] = 0.0
            try:
                cand_ll = prof.loglik(cand)
            except np.linalg.LinAlgError:
                cand_ll = -np.inf
            if cand_ll >= ll - 1e-11 * max(1.0, abs(ll)):
                taken = (cand, cand_ll, scale)
                break
            scale *= 0.5
        if taken is None:
            break
        gamma, ll, scale = taken
        if float(np.abs(step).max()) * scale < 1e-14 * max(
                1.0, float(np.abs(gamma).max())):
            break
    return gamma


def _ols_fit(y, X, meta):
    n, p = X.shape
    XtX = X.T @ X
    beta = np.linalg.solve(XtX, X.T @ y)
    resid = y - X @ beta
    rss = float(resid @ resid)
    sigma2 = rss / (n - p)
    sign, logdet = np.linalg.slogdet(XtX)
    if sigma2 > 0.0:
        ll = -0.5 * (logdet
                     + (n - p) * (1.0 + math.log(2.0 * math.pi * sigma2)))
    else:
        ll = math.inf   # exact interpolation: degenerate likelihood
    return FitResult(beta=beta, sigma2=sigma2,
                     var_components=np.zeros(0),
                     beta_cov=sigma2 * np.linalg.inv(XtX),
                     reml_loglik=ll, converged=True, n_obs=n,
                     n_params=p + 1, gamma=np.zeros(0),
                     X=X, Z_list=(), y=y, **meta)


def fit_reml(y, X, Z_list, **meta):
    """Fit the mixed model by REML.

    Extra keyword arguments (beta_names, fixed_factor, fixed_levels,
    random_factors, n_dropped) are carried through onto the FitResult.
    A fit that exhausts the iteration cap is returned with
    converged=False rather than raised.
    """
    y = np.asarray(y, dtype=np.float64)
    X = np.asarray(X, dtype=np.float64)
    n, p = X.shape
    if np.linalg.matrix_rank(X) < p:
        raise RankDeficientX(f"X has rank < {p}")
    if n <= p:
        raise ValueError("need more observations than fixed parameters")
    if not Z_list:
        return _ols_fit(y, X, meta)

    prof = _Profile(y, X, Z_list)
    r = len(prof.Z_list)

    best = None
    for start in (np.ones(r), np.full(r, 0.1), np.full(r, 10.0)):
        res = optimize.minimize(
            lambda g: -prof.loglik(g),
            start,
            jac=lambda g: -prof.gradient(g),
            method="L-BFGS-B",
            bounds=[(0.0, None)] * r,
            options={"maxiter": MAX_ITER, "ftol": 1e-14, "gtol": 1e-9})
        gamma = res.x.copy()
        gamma[gamma < PIN_TOLERANCE] = 0.0
        gamma = _newton_polish(prof, gamma)
        gamma[gamma < PIN_TOLERANCE] = 0.0
        ll = prof.loglik(gamma)
        if best is None or ll > best["ll"]:
            best = {"ll": ll, "gamma": gamma}
        grad = prof.gradient(best["gamma"])
        if _projected_grad_norm(best["gamma"], grad) < GRAD_TOLERANCE:
            break

    gamma = best["gamma"]
    state = prof.evaluate(gamma)
    grad = prof.gradient(gamma, state)
    converged = _projected_grad_norm(gamma, grad) < GRAD_TOLERANCE
    sigma2 = state["sigma2"]
    beta_cov = sigma2 * np.linalg.inv(state["XtViX"])
    return FitResult(beta=state["beta"], sigma2=sigma2,
                     var_components=gamma * sigma2,
                     beta_cov=beta_cov, reml_loglik=state["ll"],
                     converged=converged, n_obs=n, n_params=p + 1 + r,
                     gamma=gamma, X=X,
                     Z_list=tuple(prof.Z_list), y=y, **meta)


def fit_design(design):
    """fit_reml over a Design, carrying factor metadata through."""
    return fit_reml(design.y, design.X, design.Z_list,
                    beta_names=design.beta_names,
                    fixed_factor=design.fixed_factor,
                    fixed_levels=design.fixed_levels,
                    random_factors=design.random_factors,
                    n_dropped=design.n_dropped)
