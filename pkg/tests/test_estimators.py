import numpy as np
import pytest
from sklearn.base import clone

from jegauge import (
    ClipScorer,
    GradCamMapper,
    MotionMapper,
    RegionBox,
    SemanticMapper,
    KeypointSet,
    compute_gradcam,
    default_part_weights,
    normalize_map,
)


def test_gradcam_mapper_matches_functions():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(3, 4, 4)).astype(np.float32)
    g = rng.normal(size=(3, 4, 4)).astype(np.float32)
    maps = GradCamMapper().fit().transform([(a, g)])
    np.testing.assert_array_equal(maps[0], normalize_map(compute_gradcam(a, g)))


def test_gradcam_mapper_upsamples():
    rng = np.random.default_rng(1)
    a = rng.normal(size=(2, 4, 4)).astype(np.float32)
    g = rng.normal(size=(2, 4, 4)).astype(np.float32)
    maps = GradCamMapper(size=(16, 12)).transform([(a, g)])
    assert maps[0].shape == (12, 16)


def test_motion_mapper_on_pairs():
    f0 = np.zeros((16, 16), dtype=np.uint8)
    f1 = np.zeros((16, 16), dtype=np.uint8)
    f0[6:10, 6:10] = 200
    f1[6:10, 8:12] = 200
    maps = MotionMapper(iterations=30).transform([(f0, f1), (f0, f0)])
    assert maps[0].max() == 1.0
    assert not maps[1].any()


def test_semantic_mapper_sigma_scales_with_width():
    pts = np.zeros((17, 3), dtype=np.float32)
    pts[0] = (12.0, 12.0, 1.0)
    kps = [KeypointSet("parent", pts)]
    small = SemanticMapper(sigma=6.0).transform([(kps, None, (24, 24))])[0]
    pts2 = pts.copy()
    pts2[0] = (24.0, 24.0, 1.0)
    large = SemanticMapper(sigma=6.0).transform(
        [([KeypointSet("parent", pts2)], None, (48, 48))]
    )[0]
    # doubled width doubles sigma: downsampling the large map by 2 matches
    np.testing.assert_allclose(large[::2, ::2], small, atol=1e-4)


def test_clip_scorer_transform():
    rng = np.random.default_rng(2)
    frames = [
        (rng.random((6, 6)), rng.random((6, 6)), rng.random((6, 6)),
         [RegionBox("parent", "face", 0, 0, 3, 3)])
    ]
    reports = ClipScorer(alpha=0.25, bins=8).transform([("clip-a", frames)])
    assert reports[0].clip_id == "clip-a"
    assert reports[0].config.alpha == 0.25
    assert "face" in reports[0].aggregate["mi"]["parent"]


def test_estimators_clone_and_get_params():
    for est in (
        GradCamMapper(size=(8, 8)),
        MotionMapper(smoothness=0.2, iterations=10),
        SemanticMapper(sigma=4.0, weights=default_part_weights()),
        ClipScorer(alpha=0.7, bins=12, jobs=2),
    ):
        params = est.get_params()
        cloned = clone(est)
        assert cloned.get_params() == params


def test_scorer_rejects_bad_params_on_fit():
    with pytest.raises(Exception):
        ClipScorer(alpha=2.0).fit()
    with pytest.raises(Exception):
        SemanticMapper(sigma=-1.0).fit()
