"""Entry-wise zero-fill ADMM for partially observed tensors.

Handles

    min ||Z||_* + lambda ||P_Omega(E)||_{2,1 or 1}
    s.t.  P_Omega(X_miss) = P_Omega(X_miss * Z + E)

by splitting with an auxiliary tensor H that is hard-projected onto the
observed entries each iteration.  penalty="l21" is the outlier-robust
variant; penalty="l1" realizes the element-wise robust one.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .solver import (
    SolverConfig,
    SolverResult,
    _empty_result,
    _solve_j_freq,
    j_inverse_cache,
    prox_tensor_nuclear,
)
from .tlinalg import slicewise_product, t_svd_skinny
from .transforms import from_freq, to_freq


class Penalty(enum.Enum):
    L21 = "l21"
    L1 = "l1"


@dataclass(frozen=True)
class ObservationMask:
    """Binary observation pattern; 1 marks an observed entry."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if not np.isin(bits, (0, 1)).all():
            raise ValueError("mask entries must be 0 or 1")
        object.__setattr__(self, "bits", bits.astype(float))

    @property
    def dims(self):
        return self.bits.shape

    def unobserved_columns(self):
        """Lateral slices with no observed entry at all."""
        seen = self.bits.sum(axis=(0, 2))
        return tuple(int(j) for j in np.nonzero(seen == 0)[0])


@dataclass(frozen=True)
class MissingSolverOptions:
    base: SolverConfig
    penalty: Penalty = Penalty.L21


def project_omega(A, mask):
    """Zero out the unobserved entries of A."""
    A = np.asarray(A, dtype=float)
    if A.shape != mask.dims:
        raise ValueError(f"shape mismatch: {A.shape} vs mask {mask.dims}")
    return A * mask.bits


def prox_l21_masked(B, mask, thresh):
    """Masked l2,1 shrinkage: observed part shrunk by its masked column
    norm, unobserved part passed through unchanged."""
    if thresh <= 0:
        raise ValueError("thresh must be positive")
    B = np.asarray(B, dtype=float)
    W = mask.bits
    obs = W * B
    col = np.sqrt(np.sum(obs * obs, axis=(0, 2)))
    scale = np.where(col > thresh, 1.0 - np.divide(thresh, col, where=col > 0), 0.0)
    return obs * scale[None, :, None] + (1.0 - W) * B


def prox_l1_masked(B, mask, thresh):
    """Masked soft-thresholding: elementwise on observed entries only."""
    if thresh <= 0:
        raise ValueError("thresh must be positive")
    B = np.asarray(B, dtype=float)
    W = mask.bits
    shrunk = np.sign(B) * np.maximum(np.abs(B) - thresh, 0.0)
    return W * shrunk + (1.0 - W) * B


def solve_ortlrr_ewzf(X_miss, mask, spec, opts, rank_tol=1e-10):
    """ADMM for the zero-filled problem; X_miss must vanish outside the mask."""
    X_miss = np.asarray(X_miss, dtype=float)
    if not np.all(np.isfinite(X_miss)):
        raise ValueError("input tensor contains non-finite values")
    if X_miss.shape != mask.dims:
        raise ValueError("tensor and mask dimensions differ")
    if np.any(X_miss * (1.0 - mask.bits) != 0.0):
        raise ValueError("X_miss has nonzero entries outside the mask")
    n1, n2, n3 = X_miss.shape
    undetectable = mask.unobserved_columns()
    if np.linalg.norm(X_miss) == 0.0:
        res = _empty_result(n1, n2, n3)
        res.undetectable = undetectable
        return res

    config = opts.base
    tsvd = t_svd_skinny(X_miss, spec, rank_tol)
    Dbar = tsvd.Ubar * tsvd.svals.T[None, :, :]
    r = tsvd.r
    Qbar = j_inverse_cache(Dbar, n3)
    W = mask.bits
    PX = X_miss * W

    Zp = np.zeros((r, n2, n3))
    J = np.zeros((r, n2, n3))
    E = np.zeros((n1, n2, n3))
    H = np.zeros((n1, n2, n3))
    Y1 = np.zeros((r, n2, n3))
    Y2 = np.zeros((n1, n2, n3))
    DJ = np.zeros((n1, n2, n3))
    beta = config.beta0
    trace = []
    converged = False
    it = 0
    for it in range(1, config.max_iters + 1):
        H_new = (1.0 - W) * (DJ + E - Y2 / beta) + PX
        Zp_new = prox_tensor_nuclear(J - Y1 / beta, 1.0 / beta, spec)
        B = H_new - DJ + Y2 / beta
        if opts.penalty is Penalty.L21:
            E_new = prox_l21_masked(B, mask, config.lam / beta)
        else:
            E_new = prox_l1_masked(B, mask, config.lam / beta)
        P1bar = to_freq(Zp_new + Y1 / beta, spec)
        P2bar = to_freq(H_new - E_new + Y2 / beta, spec)
        Jbar = _solve_j_freq(P1bar, P2bar, Dbar, Qbar)
        J_new = from_freq(Jbar, spec)
        DJ_new = from_freq(slicewise_product(Dbar, Jbar), spec)

        feas = H_new - DJ_new - E_new
        Y1 += beta * (Zp_new - J_new)
        Y2 += beta * feas
        resid = (
            np.abs(Zp_new - Zp).max(initial=0.0),
            np.abs(J_new - J).max(initial=0.0),
            np.abs(E_new - E).max(initial=0.0),
            np.abs(H_new - H).max(initial=0.0),
            np.abs(Zp_new - J_new).max(initial=0.0),
            np.abs(feas).max(initial=0.0),
        )
        trace.append(resid)
        Zp, J, E, H, DJ = Zp_new, J_new, E_new, H_new, DJ_new
        beta = min(config.beta_max, config.gamma * beta)
        if max(resid) <= config.eps:
            converged = True
            break

    Z_star = from_freq(slicewise_product(tsvd.Vbar, to_freq(Zp, spec)), spec)
    return SolverResult(Z_star=Z_star, E_star=E, iters=it, converged=converged,
                        trace=np.asarray(trace), undetectable=undetectable)
