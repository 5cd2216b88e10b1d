"""ADMM solver for outlier-robust tensor low-rank representation.

Solves

    min ||Z||_* + lambda ||E||_{2,1}   s.t.  X = X * Z + E

through the reduced problem with dictionary D = U_X * S_X, alternating a
transform-domain singular value thresholding step, an l2,1 column
shrinkage, a linear closed-form update and multiplier ascent with a
growing penalty.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .tlinalg import (
    _freq_svd,
    _stack,
    _unstack,
    slicewise_product,
    t_svd_skinny,
    tensor_spectral_norm,
)
from .transforms import TransformSpec, frontal_slice_plan, from_freq, to_freq


@dataclass(frozen=True)
class SolverConfig:
    lam: float
    gamma: float = 1.1
    beta0: float = 1e-5
    beta_max: float = 1e8
    eps: float = 1e-5
    max_iters: int = 500

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("lambda must be positive")
        if self.gamma <= 1:
            raise ValueError("gamma must exceed 1")
        if self.beta0 <= 0 or self.beta_max < self.beta0:
            raise ValueError("need 0 < beta0 <= beta_max")
        if self.eps <= 0 or self.max_iters < 1:
            raise ValueError("eps must be positive and max_iters >= 1")


@dataclass
class SolverResult:
    Z_star: np.ndarray
    E_star: np.ndarray
    iters: int
    converged: bool
    trace: np.ndarray  # per-iteration residual quantities, max over row <= eps at exit
    undetectable: tuple = ()


def scaled_lambda(alpha, X, spec):
    """lambda = alpha / (sqrt(log n_(1)) * ||X||) with n_(1) = max(n1, n2)."""
    X = np.asarray(X, dtype=float)
    n_1 = max(X.shape[0], X.shape[1])
    norm = tensor_spectral_norm(X, spec)
    if norm == 0.0:
        raise ValueError("cannot scale lambda for a zero tensor")
    return float(alpha / (math.sqrt(math.log(n_1)) * norm))


def prox_tensor_nuclear(B, thresh, spec):
    """Proximal operator of the tensor nuclear norm (slice-wise SVT)."""
    if thresh <= 0:
        raise ValueError("thresh must be positive")
    B = np.asarray(B, dtype=float)
    if B.size == 0:
        return B.copy()
    U, s, Vh, keep, pairs = _freq_svd(B, spec)
    s = np.maximum(s - thresh, 0.0)
    stack = np.matmul(U * s[:, None, :], Vh)
    return from_freq(_unstack(stack, pairs, spec.n3), spec)


def prox_l21(B, thresh):
    """Proximal operator of the l2,1 norm: shrink lateral slices."""
    if thresh <= 0:
        raise ValueError("thresh must be positive")
    B = np.asarray(B, dtype=float)
    col = np.sqrt(np.sum(B * B, axis=(0, 2)))
    scale = np.where(col > thresh, 1.0 - np.divide(thresh, col, where=col > 0), 0.0)
    return B * scale[None, :, None]


def j_inverse_cache(Dbar, n3):
    """Per-slice inverse (D^H D + I)^-1 in the transform domain."""
    Ds = np.moveaxis(Dbar, 2, 0)
    Dh = np.conj(np.swapaxes(Ds, 1, 2))
    G = np.matmul(Dh, Ds)
    r = G.shape[-1]
    G[:, np.arange(r), np.arange(r)] += 1.0
    return np.moveaxis(np.linalg.inv(G), 0, 2)


def solve_j_subproblem(P1, P2, D, Qcache, spec):
    """Closed-form minimizer of ||P1 - J||_F^2 + ||P2 - D * J||_F^2.

    Qcache must hold (D^H * D + I)^-1 in the transform domain, as
    produced by j_inverse_cache.
    """
    P1bar = to_freq(np.asarray(P1, dtype=float), spec)
    P2bar = to_freq(np.asarray(P2, dtype=float), spec)
    Dbar = to_freq(np.asarray(D, dtype=float), spec)
    Jbar = _solve_j_freq(P1bar, P2bar, Dbar, Qcache)
    return from_freq(Jbar, spec)


def _solve_j_freq(P1bar, P2bar, Dbar, Qbar):
    Dh = np.conj(np.swapaxes(np.moveaxis(Dbar, 2, 0), 1, 2))
    rhs = np.moveaxis(P1bar, 2, 0) + np.matmul(Dh, np.moveaxis(P2bar, 2, 0))
    Jbar = np.matmul(np.moveaxis(Qbar, 2, 0), rhs)
    return np.moveaxis(Jbar, 0, 2)


def _empty_result(n1, n2, n3, rz=None):
    rz = n2 if rz is None else rz
    return SolverResult(
        Z_star=np.zeros((rz, n2, n3)), E_star=np.zeros((n1, n2, n3)),
        iters=0, converged=True, trace=np.zeros((0, 5)))


def solve_ortlrr(X, spec, config, use_reduced=True, rank_tol=1e-10):
    """Run the ADMM loop and map the reduced solution back.

    With use_reduced=False the raw data tensor itself is the dictionary
    (Z is n2 x n2 x n3); this is only sensible for small problems and is
    kept for cross-checking the two formulations.
    """
    X = np.asarray(X, dtype=float)
    if not np.all(np.isfinite(X)):
        raise ValueError("input tensor contains non-finite values")
    n1, n2, n3 = X.shape
    if np.linalg.norm(X) == 0.0:
        return _empty_result(n1, n2, n3)

    if use_reduced:
        tsvd = t_svd_skinny(X, spec, rank_tol)
        Dbar = tsvd.Ubar * tsvd.svals.T[None, :, :]
        Vbar = tsvd.Vbar
    else:
        Dbar = to_freq(X, spec)
        Vbar = None
    res = _admm_core(X, Dbar, spec, config)
    Zp, E, iters, converged, trace = res
    if Vbar is not None:
        Z_star = from_freq(slicewise_product(Vbar, to_freq(Zp, spec)), spec)
    else:
        Z_star = Zp
    return SolverResult(Z_star=Z_star, E_star=E, iters=iters,
                        converged=converged, trace=trace)


def _admm_core(X, Dbar, spec, config):
    """Shared ADMM iteration for the complete-data problem."""
    n1, n2, n3 = X.shape
    r = Dbar.shape[1]
    Qbar = j_inverse_cache(Dbar, n3)

    Zp = np.zeros((r, n2, n3))
    J = np.zeros((r, n2, n3))
    E = np.zeros((n1, n2, n3))
    Y1 = np.zeros((r, n2, n3))
    Y2 = np.zeros((n1, n2, n3))
    DJ = np.zeros((n1, n2, n3))
    beta = config.beta0
    trace = []
    converged = False
    it = 0
    for it in range(1, config.max_iters + 1):
        Zp_new = prox_tensor_nuclear(J - Y1 / beta, 1.0 / beta, spec)
        E_new = prox_l21(X - DJ + Y2 / beta, config.lam / beta)
        P1bar = to_freq(Zp_new + Y1 / beta, spec)
        P2bar = to_freq(X - E_new + Y2 / beta, spec)
        Jbar = _solve_j_freq(P1bar, P2bar, Dbar, Qbar)
        J_new = from_freq(Jbar, spec)
        DJ_new = from_freq(slicewise_product(Dbar, Jbar), spec)

        feas = X - DJ_new - E_new
        Y1 += beta * (Zp_new - J_new)
        Y2 += beta * feas
        resid = (
            np.abs(Zp_new - Zp).max(initial=0.0),
            np.abs(J_new - J).max(initial=0.0),
            np.abs(E_new - E).max(initial=0.0),
            np.abs(Zp_new - J_new).max(initial=0.0),
            np.abs(feas).max(initial=0.0),
        )
        trace.append(resid)
        Zp, J, E, DJ = Zp_new, J_new, E_new, DJ_new
        beta = min(config.beta_max, config.gamma * beta)
        if max(resid) <= config.eps:
            converged = True
            break
    return Zp, E, it, converged, np.asarray(trace)
