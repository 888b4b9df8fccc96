"""Dense symmetric linear algebra and the discrimination SDP solver.

The discrimination problem on one Gram block reads

    maximize   sum_k [sqrtG]_k^T E_k [sqrtG]_k
    s.t.       E_k >= 0,  sum_k E_k = I,

whose dual is  min tr(Y) s.t. Y >= rho_k := g_k g_k^T  for every column g_k
of sqrtG.  The solver follows the central path of the dual log-det barrier.
Each constraint is a rank-one downdate of Y, so Sherman-Morrison reduces the
barrier Hessian to a Lyapunov operator plus a rank-n correction, solved per
Newton step by one eigendecomposition plus a Woodbury system of order n.
Primal matrices are recovered from the barrier optimality condition
E_k = S_k^{-1}/t and renormalized so that sum_k E_k = I exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cholesky, solve_triangular

__all__ = [
    "NotPsdError",
    "SdpSolution",
    "eig_sym",
    "psd_sqrt",
    "solve_discrimination_sdp",
]

_FINAL_T_MARGIN = 1.25   # final barrier parameter 1.25*nu/gap_tol, so gap ~ 0.8*gap_tol
_BARRIER_GROWTH = 25.0


class NotPsdError(ValueError):
    """Matrix expected to be positive semidefinite is not."""


def eig_sym(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric matrix."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    if m.size and np.abs(m - m.T).max() > 1e-12 * max(np.abs(m).max(), 1.0):
        raise ValueError("matrix is not symmetric")
    return np.linalg.eigh(0.5 * (m + m.T))


def psd_sqrt(m: np.ndarray, rank_tol: float = 1e-12) -> np.ndarray:
    """Symmetric PSD square root, deflating eigenvalues below rank_tol * lambda_max."""
    w, v = eig_sym(m)
    wmax = max(w[-1], 0.0) if w.size else 0.0
    if w.size and w[0] < -rank_tol * max(wmax, 1e-300):
        raise NotPsdError(f"matrix has eigenvalue {w[0]:.3e} < -rank_tol*lambda_max")
    w = np.where(w > rank_tol * wmax, w, 0.0)
    root = (v * np.sqrt(w)) @ v.T
    return 0.5 * (root + root.T)


@dataclass
class SdpSolution:
    """Primal POVM, dual certificate, and diagnostics of one block solve."""

    primal: list[np.ndarray] = field(repr=False)
    dual: np.ndarray = field(repr=False)
    primal_value: float = 0.0
    dual_value: float = 0.0
    gap: float = 0.0
    iterations: int = 0
    status: str = "converged"   # converged | maxIterations | numericalFailure


def solve_discrimination_sdp(
    sqrt_gram: np.ndarray,
    gap_tol: float = 1e-8,
    rank_tol: float = 1e-12,
    max_iter: int = 200,
) -> SdpSolution:
    """Optimal-discrimination SDP for the block whose state vectors are sqrt_gram's columns.

    Returns primal POVM matrices E_k (sum = identity), the dual certificate Y
    with Y >= rho_k, and the duality gap.  Degenerate blocks are handled by
    deflation onto the numerical range of sqrt_gram; the identity remainder on
    the null space is assigned to the hypothesis of largest prior (lowest
    index on ties).
    """
    s = np.asarray(sqrt_gram, dtype=float)
    n = s.shape[0]
    if s.shape != (n, n):
        raise ValueError(f"sqrt_gram must be square, got {s.shape}")
    w, vecs = np.linalg.eigh(0.5 * (s + s.T))
    sig_tol = np.sqrt(rank_tol) * max(w[-1], 0.0)
    keep = w > sig_tol
    r = int(keep.sum())
    if r == 0:
        eye = [np.zeros((n, n)) for _ in range(n)]
        eye[0] = np.eye(n)
        return SdpSolution(primal=eye, dual=np.zeros((n, n)),
                           primal_value=0.0, dual_value=0.0, gap=0.0)
    vr = vecs[:, keep]                     # n x r
    b = (vr * w[keep]).T                   # r x n, columns b_k; b^T b = G = s^2
    diag_g = (b * b).sum(axis=0)           # priors eta_k
    k_star = int(np.argmax(np.round(diag_g / max(diag_g.max(), 1e-300), 12)))

    if r == 1:
        return _rank_one_solution(b, vr, n, k_star)

    sol = _barrier_solve(b, gap_tol, max_iter)
    if sol is None:
        return SdpSolution(primal=[np.zeros((n, n))] * n, dual=np.zeros((n, n)),
                           primal_value=float("nan"), dual_value=float("nan"),
                           gap=float("nan"), status="numericalFailure")
    y_hat, es_hat, iters, centered = sol

    # lift to the original coordinates; null-space remainder goes to k_star
    null_proj = np.eye(n) - vr @ vr.T
    primal = [vr @ e @ vr.T for e in es_hat]
    primal[k_star] = primal[k_star] + null_proj
    dual = vr @ y_hat @ vr.T
    primal_value = float(sum(b[:, k] @ es_hat[k] @ b[:, k] for k in range(n)))
    dual_value = float(np.trace(y_hat))
    gap = dual_value - primal_value
    status = "converged" if centered and gap <= gap_tol else "maxIterations"
    return SdpSolution(primal=primal, dual=dual, primal_value=primal_value,
                       dual_value=dual_value, gap=gap, iterations=iters, status=status)


def _rank_one_solution(b: np.ndarray, vr: np.ndarray, n: int, k_star: int) -> SdpSolution:
    """Identical-states block: optimum is the largest prior, achieved by always guessing k*."""
    diag_g = (b * b).sum(axis=0)
    val = float(diag_g[k_star])
    primal = [np.zeros((n, n)) for _ in range(n)]
    primal[k_star] = np.eye(n)
    dual = val * vr @ vr.T
    return SdpSolution(primal=primal, dual=dual, primal_value=val, dual_value=val,
                       gap=0.0, iterations=0, status="converged")


def _barrier_phi(y: np.ndarray, b: np.ndarray, t: float, n: int):
    """Barrier value t*tr(Y) - n*logdet(Y) - sum_k log(1 - q_k), or None if infeasible."""
    try:
        low = cholesky(y, lower=True)
    except np.linalg.LinAlgError:
        return None
    gh = solve_triangular(low, b, lower=True)
    q = (gh * gh).sum(axis=0)
    if q.max() >= 1.0:
        return None
    val = t * np.trace(y) - 2.0 * n * np.log(np.diag(low)).sum() - np.log1p(-q).sum()
    return val, low, gh, q


def _barrier_solve(b: np.ndarray, gap_tol: float, max_iter: int):
    """Path-following on min tr(Y) s.t. Y >= b_k b_k^T. Returns (Y, [E_k], iters, centered)."""
    r, n = b.shape
    nu = n * r
    tr_rho_max = float((b * b).sum(axis=0).max())
    y = (1.0 + tr_rho_max) * np.eye(r)
    t = max(1.0, nu / (r * (1.0 + tr_rho_max)))
    t_final = _FINAL_T_MARGIN * nu / gap_tol
    eye_r = np.eye(r)
    iters = 0
    centered = False
    while True:
        target_tol = 1e-10 if t >= t_final else 1e-4
        prev_dec2 = np.inf
        stalls = 0
        while iters < max_iter:
            state = _barrier_phi(y, b, t, n)
            if state is None:
                return None
            val, low, gh, q = state
            c = 1.0 / (1.0 - q)
            # hat-space gradient of the barrier: L^T grad L
            m_hat = (gh * c) @ gh.T
            g_hat = t * (low.T @ low) - n * eye_r - m_hat
            # Newton system: Lyapunov part A X + X A with A = n/2 I + M,
            # plus the rank-n Woodbury correction sum c_k^2 <P_k, .> P_k
            lam, qrot = np.linalg.eigh(0.5 * n * eye_r + m_hat)
            rmat = 1.0 / (lam[:, None] + lam[None, :])
            gt = qrot.T @ gh
            ct = qrot.T @ (-g_hat) @ qrot
            lyap_c = ct * rmat
            z = np.einsum("ik,jk->kij", gt, gt)
            zf = z.reshape(n, -1)
            f = (z * rmat).reshape(n, -1)
            kmat = zf @ f.T + np.diag(1.0 / (c * c))
            beta = zf @ lyap_c.reshape(-1)
            try:
                alpha = np.linalg.solve(kmat, beta)
            except np.linalg.LinAlgError:
                alpha = np.linalg.lstsq(kmat, beta, rcond=None)[0]
            delta_rot = (ct - np.einsum("k,kij->ij", alpha, z)) * rmat
            d_hat = qrot @ delta_rot @ qrot.T
            d_hat = 0.5 * (d_hat + d_hat.T)
            dec2 = float(-np.sum(g_hat * d_hat))
            dy = low @ d_hat @ low.T
            dy = 0.5 * (dy + dy.T)
            slope = float(np.sum(g_hat * d_hat))
            step = 1.0
            for _ in range(60):
                nxt = _barrier_phi(y + step * dy, b, t, n)
                if nxt is not None and nxt[0] <= val + 0.25 * step * slope:
                    break
                step *= 0.5
            else:
                return None
            y = y + step * dy
            iters += 1
            if dec2 <= target_tol:
                centered = True
                break
            # accept a plateau only once the decrement is already tiny
            # (its numerical floor), never during the damped phase
            if dec2 < 1e-6 and dec2 > 0.99 * prev_dec2:
                stalls += 1
                if stalls >= 3:
                    centered = True
                    break
            else:
                stalls = 0
            prev_dec2 = dec2
        else:
            break
        if t >= t_final:
            break
        t = min(t * _BARRIER_GROWTH, t_final)
        centered = False
    # primal recovery at the final parameter
    state = _barrier_phi(y, b, t, n)
    if state is None:
        return None
    _, low, gh, q = state
    c = 1.0 / (1.0 - q)
    linv = solve_triangular(low, np.eye(r), lower=True)
    y_inv = linv.T @ linv
    h = y_inv @ b                               # r x n, columns h_k
    es = [(y_inv + c[k] * np.outer(h[:, k], h[:, k])) / t for k in range(n)]
    total = np.sum(es, axis=0)
    w, vecs = np.linalg.eigh(0.5 * (total + total.T))
    if w[0] <= 0:
        return None
    corr = (vecs / np.sqrt(w)) @ vecs.T
    es = [corr @ e @ corr for e in es]
    return y, es, iters, centered and t >= t_final
