import numpy as np
import pytest

from ortlrr.tlinalg import (
    conj_transpose,
    identity_tensor,
    inner_product,
    norms,
    pseudo_inverse,
    singular_values,
    t_product,
    t_svd_skinny,
    tensor_nuclear_norm,
    tensor_spectral_norm,
    tubal_rank,
)
from ortlrr.transforms import build_transform, to_freq


def spec_for(case, n3):
    kinds = ("dft", "dct", "rom")
    return build_transform(kinds[case % 3], n3, seed=case)


def oracle_t_product(A, B, spec):
    """Per-slice python-loop product in the transform domain."""
    Abar = to_freq(A, spec)
    Bbar = to_freq(B, spec)
    n3 = spec.n3
    Cbar = np.empty((A.shape[0], B.shape[1], n3), dtype=complex)
    for k in range(n3):
        Cbar[:, :, k] = Abar[:, :, k] @ Bbar[:, :, k]
    # invert with the explicit matrix to stay independent of from_freq
    Linv = np.conj(spec.matrix).T / spec.tau
    out = np.einsum("ijk,lk->ijl", Cbar, Linv)
    assert np.abs(out.imag).max() < 1e-8
    return out.real


def test_t_product_vs_oracle_200_cases():
    rng = np.random.default_rng(3)
    for case in range(200):
        n1, n2, n3, m = (int(rng.integers(1, 6)) for _ in range(4))
        spec = spec_for(case, n3)
        A = rng.standard_normal((n1, m, n3))
        B = rng.standard_normal((m, n2, n3))
        assert np.allclose(t_product(A, B, spec), oracle_t_product(A, B, spec),
                           atol=1e-10)


def test_identity_tensor_neutral():
    rng = np.random.default_rng(4)
    for kind in ("dft", "dct", "rom"):
        spec = build_transform(kind, 6, seed=1)
        A = rng.standard_normal((4, 5, 6))
        I4 = identity_tensor(4, spec)
        I5 = identity_tensor(5, spec)
        assert np.allclose(t_product(I4, A, spec), A, atol=1e-10)
        assert np.allclose(t_product(A, I5, spec), A, atol=1e-10)


def test_conj_transpose_anti_homomorphism_200_cases():
    rng = np.random.default_rng(5)
    for case in range(200):
        n1, n2, n3, m = (int(rng.integers(1, 6)) for _ in range(4))
        spec = spec_for(case, n3)
        A = rng.standard_normal((n1, m, n3))
        B = rng.standard_normal((m, n2, n3))
        lhs = conj_transpose(t_product(A, B, spec), spec)
        rhs = t_product(conj_transpose(B, spec), conj_transpose(A, spec), spec)
        assert np.allclose(lhs, rhs, atol=1e-10)
        assert np.allclose(conj_transpose(conj_transpose(A, spec), spec), A,
                           atol=1e-12)


def test_t_svd_reconstruction_200_cases():
    rng = np.random.default_rng(6)
    for case in range(200):
        n1 = int(rng.integers(1, 7))
        n2 = int(rng.integers(1, 7))
        n3 = int(rng.integers(1, 7))
        spec = spec_for(case, n3)
        A = rng.standard_normal((n1, n2, n3))
        f = t_svd_skinny(A, spec)
        US = t_product(f.U, f.S, spec)
        rec = t_product(US, conj_transpose(f.V, spec), spec)
        assert np.allclose(A, rec, atol=1e-10)


def test_t_svd_factor_orthonormality():
    rng = np.random.default_rng(7)
    for kind in ("dft", "dct", "rom"):
        spec = build_transform(kind, 5, seed=2)
        A = rng.standard_normal((6, 4, 5))
        f = t_svd_skinny(A, spec)
        Ir = identity_tensor(f.r, spec)
        UhU = t_product(conj_transpose(f.U, spec), f.U, spec)
        VhV = t_product(conj_transpose(f.V, spec), f.V, spec)
        assert np.allclose(UhU, Ir, atol=1e-10)
        assert np.allclose(VhV, Ir, atol=1e-10)


def test_t_svd_exact_low_rank():
    rng = np.random.default_rng(8)
    for kind in ("dft", "dct", "rom"):
        spec = build_transform(kind, 6, seed=3)
        A = rng.standard_normal((7, 3, 6))
        B = rng.standard_normal((3, 8, 6))
        C = t_product(A, B, spec)
        assert t_svd_skinny(C, spec).r == 3
        assert tubal_rank(C, spec) == 3


def test_singular_values_match_bdiag_oracle():
    rng = np.random.default_rng(9)
    for kind in ("dft", "dct", "rom"):
        spec = build_transform(kind, 5, seed=4)
        A = rng.standard_normal((4, 6, 5))
        s = singular_values(A, spec)
        Abar = to_freq(A, spec)
        for k in range(5):
            ref = np.linalg.svd(Abar[:, :, k], compute_uv=False)
            assert np.allclose(np.sort(s[k])[::-1], ref, atol=1e-10)


def test_nuclear_norm_identity_tensor():
    # identity tensor: every transform-domain singular value is 1,
    # so the nuclear norm is n * n3 / tau for all three transforms
    for kind in ("dft", "dct", "rom"):
        spec = build_transform(kind, 7, seed=5)
        I4 = identity_tensor(4, spec)
        expect = 4 * 7 / spec.tau
        assert abs(tensor_nuclear_norm(I4, spec) - expect) < 1e-8


def test_spectral_norm_matches_bdiag():
    rng = np.random.default_rng(10)
    for kind in ("dft", "dct", "rom"):
        spec = build_transform(kind, 6, seed=6)
        A = rng.standard_normal((5, 5, 6))
        Abar = to_freq(A, spec)
        ref = max(np.linalg.norm(Abar[:, :, k], 2) for k in range(6))
        assert abs(tensor_spectral_norm(A, spec) - ref) < 1e-10


def test_nuclear_spectral_duality_bound():
    # |<A, B>| <= ||A||_* ||B||_spec, with equality direction checked on
    # aligned tensors
    rng = np.random.default_rng(11)
    for case in range(50):
        n3 = int(rng.integers(1, 6))
        spec = spec_for(case, n3)
        A = rng.standard_normal((4, 4, n3))
        B = rng.standard_normal((4, 4, n3))
        lhs = abs(inner_product(A, B))
        rhs = tensor_nuclear_norm(A, spec) * tensor_spectral_norm(B, spec)
        assert lhs <= rhs + 1e-8


def test_norms_dict():
    A = np.zeros((2, 3, 2))
    A[:, 0, :] = [[3.0, 0.0], [0.0, 4.0]]  # column norm 5
    A[:, 2, :] = [[0.0, 1.0], [0.0, 0.0]]  # column norm 1
    n = norms(A)
    assert abs(n["l21"] - 6.0) < 1e-12
    assert abs(n["l2inf"] - 5.0) < 1e-12
    assert abs(n["fro"] - np.sqrt(26.0)) < 1e-12


def test_pseudo_inverse_moore_penrose_200_cases():
    rng = np.random.default_rng(12)
    for case in range(200):
        n1 = int(rng.integers(1, 6))
        n2 = int(rng.integers(1, 6))
        n3 = int(rng.integers(1, 6))
        spec = spec_for(case, n3)
        if case % 4 == 0:
            # exactly rank-deficient input
            r = max(1, min(n1, n2) - 1)
            A = t_product(rng.standard_normal((n1, r, n3)),
                          rng.standard_normal((r, n2, n3)), spec)
        else:
            A = rng.standard_normal((n1, n2, n3))
        P = pseudo_inverse(A, spec)
        APA = t_product(t_product(A, P, spec), A, spec)
        PAP = t_product(t_product(P, A, spec), P, spec)
        AP = t_product(A, P, spec)
        PA = t_product(P, A, spec)
        assert np.allclose(APA, A, atol=1e-8)
        assert np.allclose(PAP, P, atol=1e-8)
        assert np.allclose(AP, conj_transpose(AP, spec), atol=1e-8)
        assert np.allclose(PA, conj_transpose(PA, spec), atol=1e-8)


def test_tubal_rank_zero_tensor():
    spec = build_transform("dft", 4)
    assert tubal_rank(np.zeros((3, 3, 4)), spec) == 0
    assert tensor_nuclear_norm(np.zeros((3, 3, 4)), spec) == 0.0


def test_rank_tolerance_rejects_noise_tubes():
    rng = np.random.default_rng(13)
    spec = build_transform("dct", 5)
    A = t_product(rng.standard_normal((6, 2, 5)),
                  rng.standard_normal((2, 6, 5)), spec)
    noisy = A + 1e-13 * rng.standard_normal(A.shape)
    assert tubal_rank(noisy, spec, tol=1e-8) == 2
