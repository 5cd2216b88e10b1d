import numpy as np
import pytest

from ortlrr.transforms import (
    TransformKind,
    TransformSpec,
    apply_transform,
    build_transform,
    frontal_slice_plan,
    from_freq,
    invert_transform,
    to_freq,
)


def explicit_mode3(A, L):
    """Oracle: apply the transform matrix tube by tube with a python loop."""
    n1, n2, n3 = A.shape
    out = np.empty((n1, n2, n3), dtype=np.result_type(A.dtype, L.dtype))
    for i in range(n1):
        for j in range(n2):
            out[i, j, :] = L @ A[i, j, :]
    return out


def test_kind_parse():
    assert TransformKind.parse("dft") is TransformKind.DFT
    assert TransformKind.parse("DCT") is TransformKind.DCT
    assert TransformKind.parse("Rom") is TransformKind.ROM
    with pytest.raises(ValueError):
        TransformKind.parse("walsh")


def test_dft_matrix_is_unnormalized_fourier():
    spec = build_transform("dft", 4)
    W = np.exp(-2j * np.pi * np.outer(np.arange(4), np.arange(4)) / 4)
    assert np.allclose(spec.matrix, W, atol=1e-12)
    assert spec.tau == 4.0


def test_dct_matrix_is_orthonormal():
    spec = build_transform("dct", 6)
    L = spec.matrix
    assert np.allclose(L @ L.T, np.eye(6), atol=1e-12)
    assert spec.tau == 1.0


def test_rom_matrix_is_orthogonal_and_seeded():
    a = build_transform("rom", 5, seed=7)
    b = build_transform("rom", 5, seed=7)
    c = build_transform("rom", 5, seed=8)
    assert np.allclose(a.matrix, b.matrix)
    assert not np.allclose(a.matrix, c.matrix)
    assert np.allclose(a.matrix @ a.matrix.T, np.eye(5), atol=1e-12)
    assert a.tau == 1.0


def test_tau_identity_all_kinds():
    for kind in ("dft", "dct", "rom"):
        spec = build_transform(kind, 9, seed=3)
        L = spec.matrix
        assert np.allclose(L @ np.conj(L).T, spec.tau * np.eye(9), atol=1e-10)


def test_round_trip_200_cases():
    rng = np.random.default_rng(0)
    kinds = ("dft", "dct", "rom")
    for case in range(200):
        kind = kinds[case % 3]
        n1 = int(rng.integers(1, 6))
        n2 = int(rng.integers(1, 6))
        n3 = int(rng.integers(1, 8))
        spec = build_transform(kind, n3, seed=case)
        A = rng.standard_normal((n1, n2, n3))
        back = invert_transform(apply_transform(A, spec), spec)
        assert np.allclose(A, back, atol=1e-10)


def test_fast_path_matches_matrix_oracle_200_cases():
    rng = np.random.default_rng(1)
    kinds = ("dft", "dct", "rom")
    for case in range(200):
        kind = kinds[case % 3]
        n3 = int(rng.integers(1, 9))
        spec = build_transform(kind, n3, seed=case)
        A = rng.standard_normal((3, 4, n3))
        fast = to_freq(A, spec)
        slow = explicit_mode3(A, spec.matrix)
        assert np.allclose(fast, slow, atol=1e-10)


def test_parseval_identity_200_cases():
    rng = np.random.default_rng(2)
    kinds = ("dft", "dct", "rom")
    for case in range(200):
        kind = kinds[case % 3]
        n3 = int(rng.integers(1, 9))
        spec = build_transform(kind, n3, seed=case)
        A = rng.standard_normal((4, 3, n3))
        Abar = to_freq(A, spec)
        lhs = np.linalg.norm(A) ** 2
        rhs = np.linalg.norm(Abar) ** 2 / spec.tau
        assert abs(lhs - rhs) <= 1e-8 * max(1.0, lhs)


def test_invert_rejects_mismatched_spec():
    a = build_transform("dft", 4)
    b = build_transform("dct", 4)
    A = np.zeros((2, 2, 4))
    ta = apply_transform(A, a)
    with pytest.raises(ValueError):
        invert_transform(ta, b)


def test_frontal_slice_plan_dft():
    spec = build_transform("dft", 6)
    keep, pairs = frontal_slice_plan(spec)
    assert list(keep) == [0, 1, 2, 3]
    assert sorted(pairs) == [(1, 5), (2, 4)]
    spec5 = build_transform("dft", 5)
    keep5, pairs5 = frontal_slice_plan(spec5)
    assert list(keep5) == [0, 1, 2]
    assert sorted(pairs5) == [(1, 4), (2, 3)]


def test_frontal_slice_plan_real_transforms():
    for kind in ("dct", "rom"):
        spec = build_transform(kind, 7, seed=0)
        keep, pairs = frontal_slice_plan(spec)
        assert list(keep) == list(range(7))
        assert len(pairs) == 0


def test_from_freq_flags_nonsymmetric_input():
    spec = build_transform("dft", 4)
    bad = np.ones((2, 2, 4), dtype=complex)
    bad[0, 0, 1] = 5.0 + 3.0j  # breaks conjugate symmetry
    with pytest.raises(ValueError):
        from_freq(bad, spec, check_imag=True)


def test_spec_is_frozen():
    spec = build_transform("dct", 3)
    with pytest.raises(Exception):
        spec.tau = 2.0
