"""Invertible linear transforms along the third tensor dimension.

All transforms are scaled-orthogonal: the defining matrix L satisfies
L L^H = L^H L = tau * I.  Three kinds are supported: the unnormalized
DFT (tau = n3), the orthonormal type-II DCT (tau = 1), and a seeded
random orthogonal matrix (tau = 1).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.fft

# Relative imaginary residue above which an inverse transform is rejected
# instead of silently truncated.
IMAG_TOL = 1e-10


class TransformKind(enum.Enum):
    DFT = "dft"
    DCT = "dct"
    ROM = "rom"

    @classmethod
    def parse(cls, name):
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            raise ValueError(f"unknown transform kind: {name!r}") from None


@dataclass(frozen=True)
class TransformSpec:
    """A concrete mode-3 transform: matrix L, its scale tau, and identity."""

    kind: TransformKind
    matrix: np.ndarray
    tau: float
    n3: int
    seed: int | None = None

    @property
    def spec_id(self) -> str:
        return f"{self.kind.value}:{self.n3}:{self.seed}"

    @property
    def is_real(self) -> bool:
        return self.kind is not TransformKind.DFT


@dataclass(frozen=True)
class TransformedTensor:
    """Transform-domain image of a real tensor, tagged with its producer."""

    data: np.ndarray
    spec_id: str


def build_transform(kind, n3, seed=None):
    """Construct a TransformSpec of the given kind and tube length."""
    kind = TransformKind.parse(kind) if not isinstance(kind, TransformKind) else kind
    if n3 < 1:
        raise ValueError(f"n3 must be positive, got {n3}")
    if kind is TransformKind.DFT:
        L = scipy.fft.fft(np.eye(n3), axis=0)
        tau = float(n3)
    elif kind is TransformKind.DCT:
        L = scipy.fft.dct(np.eye(n3), type=2, axis=0, norm="ortho")
        tau = 1.0
    else:
        if seed is None:
            raise ValueError("RandomOrthogonal transform requires a seed")
        rng = np.random.default_rng(seed)
        G = rng.standard_normal((n3, n3))
        Q, R = np.linalg.qr(G)
        # Sign-fix the QR so the factorization is unique and reproducible.
        d = np.sign(np.diag(R))
        d[d == 0] = 1.0
        Q = Q * d
        L = Q.T  # rows of L act on tubes; any orthonormal matrix works
        tau = 1.0
    L.setflags(write=False)
    return TransformSpec(kind=kind, matrix=L, tau=tau, n3=n3,
                         seed=seed if kind is TransformKind.ROM else None)


def to_freq(A, spec):
    """Mode-3 transform of an array (last axis = tubes).  Returns L(A)."""
    A = np.asarray(A)
    if A.shape[-1] != spec.n3:
        raise ValueError(
            f"tube length {A.shape[-1]} does not match transform n3={spec.n3}")
    if spec.kind is TransformKind.DFT:
        return scipy.fft.fft(A, axis=-1)
    if spec.kind is TransformKind.DCT:
        return scipy.fft.dct(A, type=2, axis=-1, norm="ortho")
    return A @ spec.matrix.T


def from_freq(Abar, spec, check_imag=True):
    """Inverse mode-3 transform; validates and drops imaginary residue."""
    Abar = np.asarray(Abar)
    if Abar.shape[-1] != spec.n3:
        raise ValueError(
            f"tube length {Abar.shape[-1]} does not match transform n3={spec.n3}")
    if spec.kind is TransformKind.DFT:
        out = scipy.fft.ifft(Abar, axis=-1)
    elif spec.kind is TransformKind.DCT:
        out = scipy.fft.idct(Abar, type=2, axis=-1, norm="ortho")
    else:
        out = Abar @ (spec.matrix.conj() / spec.tau)
    if np.iscomplexobj(out):
        if check_imag:
            scale = np.linalg.norm(out)
            resid = np.linalg.norm(out.imag)
            if resid > IMAG_TOL * max(scale, 1.0):
                raise ValueError(
                    f"non-negligible imaginary residue after inverse transform "
                    f"({resid:.3e} vs scale {scale:.3e})")
        out = out.real
    return np.ascontiguousarray(out)


def apply_transform(A, spec):
    """Transform a real tensor along mode 3, wrapping the result."""
    A = np.asarray(A, dtype=float)
    return TransformedTensor(data=to_freq(A, spec), spec_id=spec.spec_id)


def invert_transform(Abar, spec):
    """Invert apply_transform.  Rejects mismatched specs."""
    if isinstance(Abar, TransformedTensor):
        if Abar.spec_id != spec.spec_id:
            raise ValueError(
                f"transformed tensor was produced under {Abar.spec_id}, "
                f"not {spec.spec_id}")
        Abar = Abar.data
    return from_freq(Abar, spec)


def frontal_slice_plan(spec):
    """Indices of transform-domain slices that must be computed explicitly.

    For the DFT of a real tensor, slice n3-k is the conjugate of slice k,
    so only the first n3//2 + 1 slices are computed and the rest mirrored.
    Returns (keep_indices, mirror_pairs) where each pair (src, dst) means
    slice dst = conj(slice src).
    """
    n3 = spec.n3
    if spec.kind is TransformKind.DFT and n3 > 2:
        keep = np.arange(n3 // 2 + 1)
        pairs = [(k, n3 - k) for k in range(1, (n3 + 1) // 2)]
        return keep, pairs
    return np.arange(n3), []
