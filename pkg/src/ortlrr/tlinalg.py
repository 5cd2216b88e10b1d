"""Transform-domain tensor algebra: t-product, t-SVD, ranks and norms.

Tensors are plain float64 numpy arrays of shape (n1, n2, n3); lateral
slices A[:, j, :] are data samples.  All operations go through the
transform given by a TransformSpec and come back to the spatial domain,
preserving realness (conjugate symmetry is enforced explicitly for the
DFT rather than trusted to per-slice LAPACK determinism).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .transforms import TransformSpec, frontal_slice_plan, from_freq, to_freq

DEFAULT_RANK_TOL = 1e-10


def _check_finite(A, name="tensor"):
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} contains non-finite values")


def _stack(Abar, keep):
    # (n1, n2, n3) -> (len(keep), n1, n2) for batched LAPACK calls
    return np.ascontiguousarray(np.moveaxis(Abar[:, :, keep], 2, 0))


def _unstack(stack, pairs, n3):
    # Inverse of _stack, filling mirrored DFT slices with conjugates.
    m, n1, n2 = stack.shape
    out = np.empty((n1, n2, n3), dtype=stack.dtype)
    out[:, :, :m] = np.moveaxis(stack, 0, 2)
    for src, dst in pairs:
        out[:, :, dst] = np.conj(out[:, :, src])
    return out


def slicewise_product(Abar, Bbar):
    """Frontal-slice-wise matrix product of two transform-domain tensors."""
    if Abar.shape[1] != Bbar.shape[0] or Abar.shape[2] != Bbar.shape[2]:
        raise ValueError(
            f"incompatible shapes for slice-wise product: "
            f"{Abar.shape} and {Bbar.shape}")
    C = np.matmul(np.moveaxis(Abar, 2, 0), np.moveaxis(Bbar, 2, 0))
    return np.moveaxis(C, 0, 2)


def t_product(A, B, spec):
    """t-product C = A * B under the transform: L(C) = L(A) (.) L(B)."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape[2] != spec.n3 or B.shape[2] != spec.n3:
        raise ValueError("tube length mismatch with transform")
    if A.shape[1] != B.shape[0]:
        raise ValueError(
            f"inner dimension mismatch: {A.shape} * {B.shape}")
    Cbar = slicewise_product(to_freq(A, spec), to_freq(B, spec))
    return from_freq(Cbar, spec)


def conj_transpose(A, spec):
    """Tensor conjugate transpose: slice-wise Hermitian in the transform domain."""
    A = np.asarray(A, dtype=float)
    if A.shape[2] != spec.n3:
        raise ValueError("tube length mismatch with transform")
    Abar = to_freq(A, spec)
    return from_freq(np.conj(np.swapaxes(Abar, 0, 1)), spec)


def identity_tensor(n, spec):
    """Tensor whose every transform-domain frontal slice is the identity."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    Ibar = np.zeros((n, n, spec.n3))
    idx = np.arange(n)
    Ibar[idx, idx, :] = 1.0
    return from_freq(Ibar, spec)


@dataclass
class SkinnyTSVD:
    """Skinny t-SVD A = U * S * V^H with tubal rank r.

    U, S, V are spatial-domain real tensors.  The transform-domain
    factors (Ubar, Vbar) and per-slice singular values svals of shape
    (n3, r) are kept so solvers can reuse them without re-transforming.
    """

    U: np.ndarray
    S: np.ndarray
    V: np.ndarray
    r: int
    spec_id: str
    Ubar: np.ndarray
    Vbar: np.ndarray
    svals: np.ndarray


def _freq_svd(A, spec):
    """Batched per-slice SVD in the transform domain.

    Returns (Ustack, sstack, Vhstack, keep, pairs) where the stacks cover
    only the non-redundant slices of the plan.
    """
    Abar = to_freq(np.asarray(A, dtype=float), spec)
    keep, pairs = frontal_slice_plan(spec)
    stack = _stack(Abar, keep)
    try:
        U, s, Vh = np.linalg.svd(stack, full_matrices=False)
    except np.linalg.LinAlgError:
        # gesdd occasionally fails on ill-conditioned slices; gesvd is
        # slower but does not give up
        import scipy.linalg

        outs = [scipy.linalg.svd(stack[k], full_matrices=False,
                                 lapack_driver="gesvd")
                for k in range(stack.shape[0])]
        U = np.stack([o[0] for o in outs])
        s = np.stack([o[1] for o in outs])
        Vh = np.stack([o[2] for o in outs])
    return U, s, Vh, keep, pairs


def _global_rank(s, tol):
    # s: (m_slices, min(n1,n2)) descending per slice; rank counts tube
    # indices whose largest singular value across slices clears the cutoff.
    smax = s.max(initial=0.0)
    if smax == 0.0:
        return 0
    return int(np.count_nonzero(s.max(axis=0) > tol * smax))


def t_svd_skinny(A, spec, rank_tol=DEFAULT_RANK_TOL):
    """Skinny t-SVD under the given transform."""
    A = np.asarray(A, dtype=float)
    _check_finite(A)
    if rank_tol < 0:
        raise ValueError("rank_tol must be non-negative")
    n1, n2, n3 = A.shape
    U, s, Vh, keep, pairs = _freq_svd(A, spec)
    r = _global_rank(s, rank_tol)
    Ubar = _unstack(U[:, :, :r], pairs, n3)
    Vbar = _unstack(np.conj(np.swapaxes(Vh[:, :r, :], 1, 2)), pairs, n3)
    svals = np.zeros((n3, r))
    svals[keep] = s[:, :r]
    for src, dst in pairs:
        svals[dst] = svals[src]
    Sbar = np.zeros((r, r, n3))
    idx = np.arange(r)
    Sbar[idx, idx, :] = svals.T
    return SkinnyTSVD(
        U=from_freq(Ubar, spec), S=from_freq(Sbar, spec),
        V=from_freq(Vbar, spec), r=r, spec_id=spec.spec_id,
        Ubar=Ubar, Vbar=Vbar, svals=svals)


def singular_values(A, spec):
    """Per-slice transform-domain singular values, shape (n3, min(n1, n2))."""
    _, s, _, keep, pairs = _freq_svd(A, spec)
    n3 = spec.n3
    out = np.zeros((n3, s.shape[1]))
    out[keep] = s
    for src, dst in pairs:
        out[dst] = out[src]
    return out


def tubal_rank(A, spec, tol=DEFAULT_RANK_TOL):
    """Number of singular tubes whose peak value exceeds tol * sigma_max."""
    if tol < 0:
        raise ValueError("tol must be non-negative")
    _, s, _, _, _ = _freq_svd(A, spec)
    return _global_rank(s, tol)


def tensor_nuclear_norm(A, spec):
    """Sum of all transform-domain singular values divided by tau."""
    s = singular_values(A, spec)
    return float(s.sum() / spec.tau)


def tensor_spectral_norm(A, spec):
    """Largest transform-domain singular value over all frontal slices."""
    _, s, _, _, _ = _freq_svd(A, spec)
    return float(s.max(initial=0.0))


def norms(A):
    """Tensor l21, l2-infinity and Frobenius norms of lateral slices."""
    A = np.asarray(A, dtype=float)
    col = np.sqrt(np.sum(A * A, axis=(0, 2)))
    return {
        "l21": float(col.sum()),
        "l2inf": float(col.max(initial=0.0)),
        "fro": float(np.linalg.norm(A)),
    }


def inner_product(A, B):
    """Spatial tensor inner product <A, B>."""
    return float(np.sum(np.asarray(A) * np.asarray(B)))


def pseudo_inverse(A, spec, tol=DEFAULT_RANK_TOL):
    """Moore-Penrose pseudo-inverse under the t-product."""
    if tol < 0:
        raise ValueError("tol must be non-negative")
    A = np.asarray(A, dtype=float)
    n1, n2, n3 = A.shape
    U, s, Vh, keep, pairs = _freq_svd(A, spec)
    smax = s.max(initial=0.0)
    sinv = np.where(s > tol * smax, np.divide(1.0, s, where=s > 0), 0.0)
    stack = np.matmul(np.conj(np.swapaxes(Vh, 1, 2)) * sinv[:, None, :],
                      np.conj(np.swapaxes(U, 1, 2)))
    return from_freq(_unstack(stack, pairs, n3), spec)
