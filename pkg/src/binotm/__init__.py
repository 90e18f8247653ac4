"""Binocular tone mapping: map one HDR image to an optimal LDR stereo pair by
minimizing a perception-based energy over two bilateral tone-map parameters."""

from .edges import CannyParams, canny
from .energy import (
    EnergyBreakdown,
    EnergyEvaluator,
    NonFiniteEnergyError,
    contrast_term,
    detail_term,
    total_energy,
)
from .fusibility import (
    ComfortRatioPredictor,
    FusibilityMap,
    FusibilityThresholds,
    fusibility_energy,
    fusibility_maps,
)
from .image_io import (
    BinocularPair,
    HdrImage,
    ImageFormatError,
    LdrImage,
    compose_stereo,
    load_hdr,
    load_ldr,
    luminance,
    write_hdr,
    write_ldr,
    write_pfm,
)
from .optimizer import (
    OptimizationResult,
    OptimizerConfig,
    build_evaluator,
    grid_minimum,
    optimize,
    order_views,
)
from .perception import (
    FusionParams,
    contour_contrast,
    fuse_brightness,
    fuse_contrast,
    local_brightness,
)
from .tonemap import (
    BETA_CONTRAST,
    BETA_DETAIL,
    ToneMapParams,
    bilateral_exact,
    bilateral_fast,
    make_references,
    tonemap,
)

__version__ = "0.1.0"
