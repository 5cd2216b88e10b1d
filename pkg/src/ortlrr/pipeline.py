"""Post-solver pipeline: outlier detection, affinity, Ncut, and metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.stats import rankdata

from .tlinalg import singular_values, t_svd_skinny
from .transforms import to_freq


@dataclass(frozen=True)
class OutlierPartition:
    scores: np.ndarray
    outliers: tuple
    inliers: tuple
    threshold: float


def outlier_scores(E):
    """Squared Frobenius norm of each lateral slice."""
    E = np.asarray(E, dtype=float)
    return np.sum(E * E, axis=(0, 2))


def detect_outliers(scores):
    """Exact two-means split of 1-D scores; high cluster is the outliers.

    Optimal 1-D 2-clustering is contiguous in sorted order, so the best
    threshold is found by scanning every split of the sorted scores.
    Ties break toward fewer outliers; a degenerate split (all scores
    equal) yields an empty outlier set.
    """
    scores = np.asarray(scores, dtype=float)
    n = scores.size
    if n < 2:
        raise ValueError("need at least 2 samples to split")
    order = np.argsort(scores, kind="stable")
    s = scores[order]
    if s[0] == s[-1]:
        return OutlierPartition(scores=scores, outliers=(),
                                inliers=tuple(range(n)), threshold=float("inf"))
    # prefix sums give within-cluster SSE for every contiguous split
    csum = np.cumsum(s)
    csq = np.cumsum(s * s)
    m = np.arange(1, n)  # size of the low cluster
    low_sse = csq[m - 1] - csum[m - 1] ** 2 / m
    hi_sum = csum[-1] - csum[m - 1]
    hi_sq = csq[-1] - csq[m - 1]
    hi_sse = hi_sq - hi_sum ** 2 / (n - m)
    sse = low_sse + hi_sse
    # argmax of m among minimizing splits = fewest outliers
    best = np.flatnonzero(sse == sse.min())[-1]
    cut = int(m[best])
    threshold = 0.5 * (s[cut - 1] + s[cut])
    out_idx = tuple(sorted(int(i) for i in order[cut:]))
    in_idx = tuple(sorted(int(i) for i in order[:cut]))
    return OutlierPartition(scores=scores, outliers=out_idx, inliers=in_idx,
                            threshold=float(threshold))


def build_affinity(Z_star, inliers):
    """Symmetrized absolute coefficients averaged over frontal slices,
    restricted to the inlier rows/columns."""
    Z = np.asarray(Z_star, dtype=float)
    idx = np.asarray(sorted(inliers), dtype=int)
    if idx.size == 0:
        raise ValueError("inlier set is empty")
    sub = Z[np.ix_(idx, idx)]
    n3 = Z.shape[2]
    acc = np.abs(sub).sum(axis=2)
    return (acc + acc.T) / (2.0 * n3)


def _kmeans(X, c, rng, n_iter=300):
    """Lloyd's iterations with k-means++ seeding; returns (labels, inertia)."""
    n = X.shape[0]
    centers = np.empty((c, X.shape[1]))
    centers[0] = X[rng.integers(n)]
    d2 = np.sum((X - centers[0]) ** 2, axis=1)
    for i in range(1, c):
        total = d2.sum()
        if total <= 0:
            centers[i:] = X[rng.integers(n, size=c - i)]
            break
        centers[i] = X[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, np.sum((X - centers[i]) ** 2, axis=1))
    labels = None
    for _ in range(n_iter):
        dist = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = dist.argmin(axis=1)
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for i in range(c):
            members = X[labels == i]
            if len(members):
                centers[i] = members.mean(axis=0)
    dist = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    labels = dist.argmin(axis=1)
    return labels, float(dist[np.arange(n), labels].sum())


def spectral_cluster(affinity, c, seed, restarts=20):
    """Normalized-cut clustering of a symmetric non-negative affinity."""
    W = np.asarray(affinity, dtype=float)
    n = W.shape[0]
    if c < 1 or c > n:
        raise ValueError(f"cluster count {c} out of range for {n} samples")
    if c == 1:
        return np.zeros(n, dtype=int)
    deg = W.sum(axis=1)
    inv_sqrt = np.where(deg > 0, 1.0 / np.sqrt(np.maximum(deg, 1e-300)), 0.0)
    Lsym = np.eye(n) - inv_sqrt[:, None] * W * inv_sqrt[None, :]
    Lsym = 0.5 * (Lsym + Lsym.T)
    vals, vecs = np.linalg.eigh(Lsym)
    emb = vecs[:, :c]
    row = np.linalg.norm(emb, axis=1)
    emb = emb / np.where(row > 0, row, 1.0)[:, None]
    rng = np.random.default_rng(seed)
    best_labels, best_inertia = None, np.inf
    for _ in range(restarts):
        labels, inertia = _kmeans(emb, c, rng)
        if inertia < best_inertia:
            best_labels, best_inertia = labels, inertia
    return best_labels


def _contingency(pred, truth):
    pu, pi = np.unique(pred, return_inverse=True)
    tu, ti = np.unique(truth, return_inverse=True)
    M = np.zeros((len(pu), len(tu)), dtype=int)
    np.add.at(M, (pi, ti), 1)
    return M


def eval_clustering(pred, truth):
    """ACC (optimal assignment), NMI (geometric-mean normalized) and purity."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape or pred.size == 0:
        raise ValueError("label vectors must be non-empty and equal length")
    n = pred.size
    M = _contingency(pred, truth)
    # accuracy under the best one-to-one label matching
    k = max(M.shape)
    cost = np.zeros((k, k))
    cost[: M.shape[0], : M.shape[1]] = -M
    rows, cols = linear_sum_assignment(cost)
    acc = -cost[rows, cols].sum() / n
    pur = M.max(axis=1).sum() / n
    # mutual information from the contingency table
    pij = M / n
    pi = pij.sum(axis=1)
    pj = pij.sum(axis=0)
    nz = pij > 0
    mi = float(np.sum(pij[nz] * np.log(pij[nz] / np.outer(pi, pj)[nz])))
    hi = -float(np.sum(pi[pi > 0] * np.log(pi[pi > 0])))
    hj = -float(np.sum(pj[pj > 0] * np.log(pj[pj > 0])))
    denom = np.sqrt(hi * hj)
    nmi = mi / denom if denom > 0 else (1.0 if mi == 0 and hi == hj else 0.0)
    return {"acc": float(acc), "nmi": float(max(0.0, min(1.0, nmi))),
            "pur": float(pur)}


def eval_outlier_auc(scores, truth_outlier):
    """Mann-Whitney rank AUC of scores as outlier evidence."""
    scores = np.asarray(scores, dtype=float)
    truth = np.asarray(truth_outlier, dtype=bool)
    npos = int(truth.sum())
    nneg = truth.size - npos
    if npos == 0 or nneg == 0:
        raise ValueError("AUC needs at least one outlier and one inlier")
    ranks = rankdata(scores)
    return float((ranks[truth].sum() - npos * (npos + 1) / 2) / (npos * nneg))


def support_distance(theta0, theta_hat, n2):
    """Hamming distance between the indicator vectors of two supports."""
    a = set(int(i) for i in theta0)
    b = set(int(i) for i in theta_hat)
    for i in a | b:
        if not 0 <= i < n2:
            raise ValueError(f"index {i} out of range for n2={n2}")
    return len(a ^ b)


def rowspace_error(V0, Z_star, spec):
    """Relative projector distance between span(V0) and the column space
    of Z_star."""
    V0 = np.asarray(V0, dtype=float)
    V0bar = to_freq(V0, spec)
    r0 = V0.shape[1]
    gram = np.matmul(np.conj(np.swapaxes(np.moveaxis(V0bar, 2, 0), 1, 2)),
                     np.moveaxis(V0bar, 2, 0))
    eye = np.eye(r0)
    if np.abs(gram - eye).max() > 1e-8:
        raise ValueError("V0 is not column-orthonormal under the transform")
    tsvd = t_svd_skinny(Z_star, spec)
    Ubar = tsvd.Ubar
    P0 = np.matmul(np.moveaxis(V0bar, 2, 0),
                   np.conj(np.swapaxes(np.moveaxis(V0bar, 2, 0), 1, 2)))
    Pu = np.matmul(np.moveaxis(Ubar, 2, 0),
                   np.conj(np.swapaxes(np.moveaxis(Ubar, 2, 0), 1, 2)))
    # Frobenius norms of projector tensors, computed in the transform domain
    num = np.linalg.norm(P0 - Pu)
    den = np.linalg.norm(P0)
    return float(num / den)


def incoherence_mu(Lten, spec):
    """Column-incoherence of the row space: 1 for evenly spread rows,
    n2 when the energy concentrates on one column."""
    Lten = np.asarray(Lten, dtype=float)
    if np.linalg.norm(Lten) == 0.0:
        raise ValueError("zero tensor has no incoherence")
    tsvd = t_svd_skinny(Lten, spec)
    n2 = Lten.shape[1]
    # per-column energy of the right factor across all slices
    row_energy = np.sum(np.abs(tsvd.Vbar) ** 2, axis=(1, 2))
    return float(n2 / (tsvd.r * spec.n3) * row_energy.max())


def ambiguity_norm(E, theta, spec):
    """Spectral norm of E with supported columns normalized to unit
    Frobenius norm and the rest zeroed."""
    E = np.asarray(E, dtype=float)
    n2 = E.shape[1]
    B = np.zeros_like(E)
    for j in theta:
        col = E[:, j, :]
        nrm = np.linalg.norm(col)
        if nrm == 0.0:
            raise ValueError(f"supported column {j} is zero")
        B[:, j, :] = col / nrm
    s = singular_values(B, spec)
    return float(s.max(initial=0.0))
