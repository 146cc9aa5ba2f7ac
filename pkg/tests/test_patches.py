import math

import numpy as np
import pytest

from topodenoise import (DNormSpec, PatchCloudSpec, ValidationError,
                         barcode_stats, build_patch_cloud, default_basis,
                         persistence, preprocess_patch, rips_complex,
                         synthetic_gradient_patches)
from topodenoise.patches import (read_matrix_csv, read_patches_csv,
                                 write_matrix_csv, write_patches_csv)

I9 = DNormSpec.identity(9)


def test_constant_patch_has_zero_contrast():
    vec, contrast = preprocess_patch(np.full((3, 3), 5.0), I9, apply_log=True)
    np.testing.assert_allclose(vec, 0.0, atol=1e-15)
    assert contrast == 0.0


def test_log_inverts_exp_identity_dnorm(rng):
    a = rng.standard_normal(9)
    a -= a.mean()
    vec, contrast = preprocess_patch(np.exp(a).reshape(3, 3), I9, apply_log=True)
    np.testing.assert_allclose(vec, a, atol=1e-12)
    assert contrast == pytest.approx(np.linalg.norm(a), rel=1e-12)


def test_known_contrast_sqrt6():
    logs = np.array([[1.0, 1.0, 1.0], [0.0, 0.0, 0.0], [-1.0, -1.0, -1.0]])
    vec, contrast = preprocess_patch(np.exp(logs), I9, apply_log=True)
    assert contrast == pytest.approx(math.sqrt(6), rel=1e-12)


def test_log_requires_positive_intensities():
    patch = np.ones((3, 3))
    patch[1, 1] = 0.0
    with pytest.raises(ValidationError, match="positive"):
        preprocess_patch(patch, I9, apply_log=True)


def test_scale_invariance():
    rng = np.random.default_rng(4)
    patch = np.exp(rng.standard_normal((3, 3)))
    v1, c1 = preprocess_patch(patch, I9, apply_log=True)
    v2, c2 = preprocess_patch(7.3 * patch, I9, apply_log=True)
    assert np.abs(v1 - v2).max() < 1e-12
    assert abs(c1 - c2) < 1e-12


def test_dnorm_validation():
    with pytest.raises(ValidationError, match="symmetric"):
        DNormSpec(np.array([[1.0, 0.5], [0.0, 1.0]]))
    with pytest.raises(ValidationError, match="positive definite"):
        DNormSpec(np.array([[1.0, 0.0], [0.0, -2.0]]))


def test_default_basis_properties(rng):
    m = rng.standard_normal((9, 9))
    dnorm = DNormSpec(m @ m.T + 9 * np.eye(9))
    b = default_basis(dnorm)
    assert b.shape == (9, 8)
    np.testing.assert_allclose(b.T @ dnorm.matrix @ b, np.eye(8), atol=1e-10)
    np.testing.assert_allclose(b.sum(axis=0), 0.0, atol=1e-10)


def test_bad_basis_rejected(rng):
    stack = synthetic_gradient_patches(20, 0, seed=1)
    bad = np.ones((9, 8))
    with pytest.raises(ValidationError, match="orthonormal"):
        build_patch_cloud(stack, I9, PatchCloudSpec(), basis=bad)


def test_output_on_unit_sphere():
    stack = synthetic_gradient_patches(100, 20, seed=2)
    cloud = build_patch_cloud(stack, I9, PatchCloudSpec(contrast_fraction=0.5))
    assert cloud.dim == 8
    norms = np.linalg.norm(cloud.points, axis=1)
    assert np.abs(norms - 1.0).max() < 1e-9


def test_full_fraction_keeps_all_but_constant():
    stack = synthetic_gradient_patches(30, 5, seed=3)
    stack = np.concatenate([stack, np.full((1, 3, 3), 2.0)])  # constant patch
    cloud = build_patch_cloud(stack, I9, PatchCloudSpec(contrast_fraction=1.0))
    assert len(cloud) == 35  # everything except the zero-contrast patch


def test_nonidentity_dnorm_changes_contrast_ranking():
    d = np.diag([10.0, 1, 1, 1, 1, 1, 1, 1, 1.0])
    spec = DNormSpec(d)
    patch = np.exp(np.arange(9.0).reshape(3, 3) / 10)
    _, c_id = preprocess_patch(patch, I9)
    _, c_w = preprocess_patch(patch, spec)
    assert c_w != pytest.approx(c_id)


def test_selection_is_per_image_group():
    rng = np.random.default_rng(5)
    # group 0: low contrast, group 1: high contrast
    low = np.exp(0.1 * rng.standard_normal((10, 3, 3)))
    high = np.exp(1.0 * rng.standard_normal((10, 3, 3)))
    stack = np.concatenate([low, high])
    groups = np.array([0] * 10 + [1] * 10)
    cloud = build_patch_cloud(stack, I9, PatchCloudSpec(contrast_fraction=0.2),
                              groups=groups)
    # two patches per group survive, not four from the high-contrast group
    assert len(cloud) == 4


def test_threshold_commutes_with_relabeling(rng):
    stack = synthetic_gradient_patches(40, 10, seed=6)
    spec = PatchCloudSpec(contrast_fraction=0.3)
    a = build_patch_cloud(stack, I9, spec)
    perm = rng.permutation(len(stack))
    b = build_patch_cloud(stack[perm], I9, spec)
    sa = {tuple(np.round(p, 12)) for p in a.points}
    sb = {tuple(np.round(p, 12)) for p in b.points}
    assert sa == sb


def test_gradient_corpus_recovers_angle_circle(rng):
    """Small-scale oracle for the patch pipeline: pure gradient patches land
    on a circle in R^8, visible as one dominant loop."""
    stack = synthetic_gradient_patches(300, 60, seed=7, jitter=0.02)
    cloud = build_patch_cloud(stack, I9, PatchCloudSpec(contrast_fraction=0.20))
    fc = rips_complex(cloud, max_eps=1.0, max_dim=2)
    st = barcode_stats(persistence(fc), 1)
    assert st.prominence is not None and st.prominence >= 3.0


def test_patch_csv_roundtrip_and_file_pipeline(tmp_path):
    stack = synthetic_gradient_patches(12, 3, seed=8)
    ids = [0] * 7 + [1] * 8
    csv, meta = tmp_path / "p.csv", tmp_path / "p.json"
    write_patches_csv(stack, csv, meta, image_ids=ids)
    back, back_ids = read_patches_csv(csv, meta)
    np.testing.assert_array_equal(back, stack)
    np.testing.assert_array_equal(back_ids, ids)

    # files in -> standard point-cloud CSV out
    from topodenoise import read_csv, write_csv
    cloud = build_patch_cloud(back, I9, PatchCloudSpec(contrast_fraction=0.5),
                              groups=back_ids)
    out = tmp_path / "cloud.csv"
    write_csv(cloud, out)
    np.testing.assert_array_equal(read_csv(out).points, cloud.points)


def test_matrix_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(9)
    m = rng.standard_normal((9, 8))
    path = tmp_path / "m.csv"
    write_matrix_csv(m, path)
    np.testing.assert_array_equal(read_matrix_csv(path), m)
