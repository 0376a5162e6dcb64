"""jegauge: scores video-model attention against motion and social-cue references.

The pipeline takes exported layer activations/gradients, builds a
saliency map per frame, builds two reference maps (optical-flow
magnitude and keypoint/segment semantics), and scores their agreement
inside annotated parent/child face and body regions with mutual
information and cross-entropy. Dataset-side helpers cover augmentation,
class balancing, annotation agreement, and classification metrics.
"""

from .annotations import (
    COCO_KEYPOINT_NAMES,
    COCO_LR_SWAP,
    LABELS,
    PARTS,
    ROLES,
    ClipAnnotation,
    FrameAnnotation,
    KeypointSet,
    RegionBox,
    parse_annotation,
    read_annotation,
    write_annotation,
)
from .augment import (
    BalancePlan,
    BgBlur,
    BgImage,
    BgSolid,
    Cutout,
    HFlip,
    LabelRecord,
    MixPlan,
    Noise,
    Rotate,
    add_gaussian_noise,
    apply_background,
    apply_cutout,
    box_blur,
    hflip,
    plan_balance,
    plan_mix,
    resize_frame,
    rotate,
)
from .errors import (
    BoundsError,
    DimensionError,
    FormatError,
    IncompatibleReportsError,
    JeGaugeError,
    QuotaError,
    ResourceError,
    UndefinedInputError,
    UnsupportedFormatError,
    ValidationError,
)
from .estimators import ClipScorer, GradCamMapper, MotionMapper, SemanticMapper
from .gradcam import (
    compute_cam,
    compute_gradcam,
    normalize_map,
    render_colormap,
    upsample_bilinear,
)
from .matching import (
    ClipScoreReport,
    Histogram2D,
    PixelDistribution,
    ScoringConfig,
    cross_entropy,
    crop_region,
    image_softmax,
    joint_histogram,
    mutual_information,
    read_report,
    score_clip,
    score_frame,
    write_report,
)
from .refmaps import (
    PartWeightTable,
    combine_semantic,
    default_part_weights,
    flow_magnitude,
    horn_schunck_energies,
    horn_schunck_energy,
    horn_schunck_flow,
    keypoint_heatmap,
    load_part_weights,
    save_part_weights,
)
from .report import (
    PredictionRecord,
    SummaryRow,
    aggregate_reports,
    class_from_rating,
    icc_consistency,
    mean_ce_loss,
    top1_accuracy,
)
from .tensorio import (
    read_frame_pnm,
    read_tensor,
    write_frame_pnm,
    write_tensor,
)

__version__ = "0.1.0"
