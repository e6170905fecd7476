"""Bezier-curve text geometry toolbox.

Curve fitting and ground-truth generation for curved text regions, sampling
operators that rectify those regions onto fixed grids, regression codecs,
detection post-processing, the forward arithmetic of an attention recognizer,
and low-bit quantizer math with hardware-cost estimators.
"""

from .align import (
    SampleGrid,
    bezier_align,
    bilinear_at,
    concat_coords,
    horizontal_align,
    make_coord_channels,
    quad_align,
)
from .bezier import (
    BezierCurve,
    bernstein,
    bernstein_matrix,
    chord_length_params,
    eval_curve,
    fit_curve,
    fit_residual,
    merge_coincident,
)
from .codec import RegressionTarget, decode_targets, encode_targets
from .decoder import (
    BILINGUAL,
    ENGLISH,
    CharsetSpec,
    DecoderParams,
    GruWeights,
    attention_step,
    classify_step,
    decode_sequence,
    gru_step,
    load_params,
    random_params,
    save_params,
    softmax,
)
from .errors import (
    BezierTextError,
    CorruptFileError,
    DegenerateError,
    IntegerOverflowError,
    ValidationError,
)
from .formats import (
    SvgScene,
    read_image,
    read_tensor,
    rectify_image,
    render_bezier_svg,
    write_image,
    write_tensor,
)
from .gt import (
    BezierBBox,
    PolygonAnnotation,
    bbox_corners,
    bbox_to_polygon,
    fit_bbox,
    polygon_to_bbox,
    quad_to_bbox,
)
from .postproc import (
    Assignment,
    Detection,
    assign_recognition,
    control_point_distance,
    filter_by_score,
    nms,
    polygon_iou,
)
from .quant import (
    ENERGY_PJ,
    OPS_PER_CYCLE,
    QuantSpec,
    discretization_error,
    energy_estimate,
    int_matmul_check,
    load_energy_table,
    memory_saving,
    progressive_schedule,
    quant_act,
    quant_weight,
    round_half_away,
    search_alpha,
    speedup_estimate,
    ste_grad_act,
)

__version__ = "0.1.0"
