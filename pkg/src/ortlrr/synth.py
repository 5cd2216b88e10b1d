"""Synthetic union-of-tensor-subspaces instances with column outliers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .solver_missing import ObservationMask
from .tlinalg import slicewise_product, t_product
from .transforms import TransformSpec, from_freq, to_freq


@dataclass(frozen=True)
class SynthParams:
    n1: int
    n3: int
    c: int = 5
    ranks: tuple = ()      # r_l per subspace; default 0.1 * n1 each
    sizes: tuple = ()      # s_l per subspace; default n1 each
    rho: float = 0.2
    seed: int = 0

    def resolved(self):
        ranks = self.ranks or tuple([max(1, round(0.1 * self.n1))] * self.c)
        sizes = self.sizes or tuple([self.n1] * self.c)
        if len(ranks) != self.c or len(sizes) != self.c:
            raise ValueError("ranks/sizes must have one entry per subspace")
        if self.c < 1 or min(ranks) < 1 or min(sizes) < 1:
            raise ValueError("need c >= 1, r_l >= 1, s_l >= 1")
        if not 0.0 <= self.rho < 1.0:
            raise ValueError("rho must lie in [0, 1)")
        return ranks, sizes


@dataclass
class SyntheticInstance:
    X: np.ndarray
    L0: np.ndarray
    E0: np.ndarray
    theta0: tuple
    labels: np.ndarray
    params: SynthParams


def generate_instance(params, spec):
    """Sample c tensor subspaces, corrupt a rho-fraction of columns.

    Each block is A_l * B_l with N(0, 1/n1) entries; outlier columns are
    filled with Gaussian entries calibrated so outliers match the average
    sample energy, and the corresponding clean columns are zeroed.
    """
    ranks, sizes = params.resolved()
    n1, n3 = params.n1, params.n3
    if n3 != spec.n3:
        raise ValueError("params.n3 disagrees with the transform")
    rng = np.random.default_rng(params.seed)
    blocks = []
    labels = []
    for ell, (r, s) in enumerate(zip(ranks, sizes)):
        A = rng.standard_normal((n1, r, n3)) / np.sqrt(n1)
        B = rng.standard_normal((r, s, n3)) / np.sqrt(n1)
        blocks.append(from_freq(slicewise_product(to_freq(A, spec),
                                                  to_freq(B, spec)), spec))
        labels.extend([ell] * s)
    Q = np.concatenate(blocks, axis=1)
    n2 = Q.shape[1]
    labels = np.asarray(labels, dtype=int)

    is_outlier = rng.random(n2) < params.rho
    theta0 = tuple(int(j) for j in np.nonzero(is_outlier)[0])
    # per-entry variance matching the mean per-column energy of the samples
    zeta = float(np.mean(np.sum(Q * Q, axis=(0, 2))))
    E0 = np.zeros_like(Q)
    if theta0:
        E0[:, list(theta0), :] = rng.normal(
            scale=np.sqrt(zeta / (n1 * n3)), size=(n1, len(theta0), n3))
    L0 = Q.copy()
    L0[:, list(theta0), :] = 0.0
    return SyntheticInstance(X=L0 + E0, L0=L0, E0=E0, theta0=theta0,
                             labels=labels, params=params)


def apply_missing_mask(X, delta, seed):
    """Hide floor(delta * N) uniformly chosen entries, zero-filling them."""
    if not 0.0 <= delta < 1.0:
        raise ValueError("delta must lie in [0, 1)")
    X = np.asarray(X, dtype=float)
    total = X.size
    hidden = int(np.floor(delta * total))
    rng = np.random.default_rng(seed)
    flat = np.ones(total)
    if hidden:
        flat[rng.permutation(total)[:hidden]] = 0.0
    mask = ObservationMask(bits=flat.reshape(X.shape))
    return X * mask.bits, mask


def ivec(a, n1, n3):
    """Reshape a stacked-columns vector of length n1*n3 into a lateral slice."""
    return np.asarray(a, dtype=float).reshape((n1, n3), order="F")


def lift_vector_representation(A_mat, Z_mat, spec):
    """Lift a matrix factorization x_j = A z_j into tensors with A * Z_(j)
    reproducing each sample.

    A_mat is (n1*n3) x p with columns reshaped into lateral slices;
    the transform-domain coefficients repeat z_j in every frontal slice
    and are pulled back through the inverse transform.
    """
    A_mat = np.asarray(A_mat, dtype=float)
    Z_mat = np.asarray(Z_mat, dtype=float)
    n3 = spec.n3
    if A_mat.shape[0] % n3 != 0:
        raise ValueError("row count of A_mat must be n1 * n3")
    if A_mat.shape[1] != Z_mat.shape[0]:
        raise ValueError("inner dimensions of A_mat and Z_mat disagree")
    n1 = A_mat.shape[0] // n3
    p, n2 = Z_mat.shape
    A = np.empty((n1, p, n3))
    for j in range(p):
        A[:, j, :] = ivec(A_mat[:, j], n1, n3)
    Zbar = np.repeat(Z_mat[:, :, None], n3, axis=2).astype(complex)
    Z = from_freq(Zbar, spec)
    return A, Z
