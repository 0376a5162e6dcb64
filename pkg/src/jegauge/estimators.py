"""Scikit-learn style wrappers around the map and scoring pipeline.

Each stage is a stateless transformer: ``fit`` only validates
hyperparameters and returns self, ``transform`` maps an iterable of
per-frame (or per-clip) inputs to outputs. Parameters follow the
sklearn convention (constructor args stored verbatim, ``get_params`` /
``set_params`` inherited), so stages clone and compose with the wider
ecosystem.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator, TransformerMixin

from . import gradcam as _gradcam
from . import matching as _matching
from . import refmaps as _refmaps
from .refmaps import SIGMA_REFERENCE_WIDTH, PartWeightTable


class GradCamMapper(BaseEstimator, TransformerMixin):
    """(activations, gradients) pairs -> normalized saliency maps.

    ``size`` optionally upsamples each map to (width, height) before
    normalization.
    """

    def __init__(self, size=None):
        self.size = size

    def fit(self, X=None, y=None):
        if self.size is not None:
            w, h = self.size
            if w < 1 or h < 1:
                raise ValueError(f"size must be positive, got {self.size}")
        return self

    def transform(self, X):
        self.fit()
        out = []
        for activations, gradients in X:
            raw = _gradcam.compute_gradcam(activations, gradients)
            if self.size is not None:
                raw = _gradcam.upsample_bilinear(raw, self.size[0], self.size[1])
            out.append(_gradcam.normalize_map(raw))
        return out


class MotionMapper(BaseEstimator, TransformerMixin):
    """(frame_t, frame_t+1) grayscale pairs -> motion magnitude maps."""

    def __init__(self, smoothness=0.1, iterations=100):
        self.smoothness = smoothness
        self.iterations = iterations

    def fit(self, X=None, y=None):
        return self

    def transform(self, X):
        return [
            _refmaps.flow_magnitude(
                _refmaps.horn_schunck_flow(f0, f1, self.smoothness, self.iterations)
            )
            for f0, f1 in X
        ]


class SemanticMapper(BaseEstimator, TransformerMixin):
    """(keypoint sets, segment mask or None, (width, height)) -> reference maps.

    ``sigma`` is specified at the 224-px reference width and scales
    proportionally with each frame's width.
    """

    def __init__(self, sigma=6.0, weights=None):
        self.sigma = sigma
        self.weights = weights

    def _table(self) -> PartWeightTable:
        return self.weights if self.weights is not None else _refmaps.default_part_weights()

    def fit(self, X=None, y=None):
        if self.sigma <= 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        return self

    def transform(self, X):
        self.fit()
        table = self._table()
        out = []
        for keypoint_sets, seg, (width, height) in X:
            eff_sigma = self.sigma * width / SIGMA_REFERENCE_WIDTH
            heat = _refmaps.keypoint_heatmap(
                keypoint_sets, table, eff_sigma, width, height
            )
            out.append(
                heat if seg is None else _refmaps.combine_semantic(heat, seg, table)
            )
        return out


class ClipScorer(BaseEstimator, TransformerMixin):
    """Clip bundles -> score reports.

    Each input item is (clip_id, frames) where frames is a sequence of
    (cam, motion, semantic, boxes) tuples; transform returns one
    ClipScoreReport per item.
    """

    def __init__(self, alpha=0.5, bins=20, roles=("parent", "child"),
                 parts=("face", "body"), jobs=1):
        self.alpha = alpha
        self.bins = bins
        self.roles = roles
        self.parts = parts
        self.jobs = jobs

    def config(self) -> _matching.ScoringConfig:
        return _matching.ScoringConfig(
            alpha=self.alpha, bins=self.bins,
            roles=tuple(self.roles), parts=tuple(self.parts),
        )

    def fit(self, X=None, y=None):
        self.config()
        return self

    def transform(self, X):
        cfg = self.config()
        return [
            _matching.score_clip(frames, cfg, clip_id=clip_id, jobs=self.jobs)
            for clip_id, frames in X
        ]

    def score_clip(self, frames, clip_id="clip", indices=None):
        return _matching.score_clip(
            frames, self.config(), clip_id=clip_id, indices=indices, jobs=self.jobs
        )
