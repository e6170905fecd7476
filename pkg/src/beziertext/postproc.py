"""Detection post-processing: confidence filtering, polygon-overlap NMS, and
assignment of recognition ground truth to surviving detections.

Assignment picks, for each detection, the ground-truth box minimizing the sum
of absolute coordinate differences over all control points (top curve then
bottom curve, x and y of each point). Every detection is assigned; callers
that want a distance cutoff filter afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from shapely.geometry import Polygon

from .errors import ValidationError
from .gt import BezierBBox, bbox_to_polygon


@dataclass(frozen=True, eq=False)
class Detection:
    bbox: BezierBBox
    score: float

    def __post_init__(self):
        if not (0.0 <= self.score <= 1.0):
            raise ValidationError(f"score {self.score} outside [0, 1]")


@dataclass(frozen=True)
class Assignment:
    detection_index: int
    gt_index: int
    distance: float


def filter_by_score(dets: Sequence[Detection], threshold: float) -> list[Detection]:
    """Detections with score >= threshold, original order preserved."""
    if not (0.0 <= threshold <= 1.0):
        raise ValidationError(f"threshold {threshold} outside [0, 1]")
    return [d for d in dets if d.score >= threshold]


def _shapely_poly(bbox: BezierBBox, samples_per_side: int) -> Polygon:
    poly = Polygon(bbox_to_polygon(bbox, samples_per_side))
    if not poly.is_valid:
        poly = poly.buffer(0)
    return poly


def polygon_iou(a: BezierBBox, b: BezierBBox, samples_per_side: int = 16) -> float:
    """Intersection-over-union of the sampled boundary polygons.

    Self-intersecting boundaries are repaired before clipping; zero-area
    regions yield 0."""
    if samples_per_side < 2:
        raise ValidationError("samples_per_side must be >= 2")
    pa = _shapely_poly(a, samples_per_side)
    pb = _shapely_poly(b, samples_per_side)
    if pa.area == 0.0 or pb.area == 0.0:
        return 0.0
    inter = pa.intersection(pb).area
    union = pa.area + pb.area - inter
    if union <= 0.0:
        return 0.0
    return inter / union


def nms(dets: Sequence[Detection], iou_threshold: float = 0.5,
        samples_per_side: int = 16) -> list[Detection]:
    """Greedy score-descending suppression.

    Keeps the highest-scoring detection, drops any with overlap above the
    threshold to a kept one, repeats. Score ties go to the earlier detection.
    """
    if not (0.0 <= iou_threshold <= 1.0):
        raise ValidationError(f"iou_threshold {iou_threshold} outside [0, 1]")
    order = sorted(range(len(dets)), key=lambda i: (-dets[i].score, i))
    kept: list[int] = []
    for i in order:
        if all(
            polygon_iou(dets[i].bbox, dets[k].bbox, samples_per_side) <= iou_threshold
            for k in kept
        ):
            kept.append(i)
    kept.sort()
    return [dets[i] for i in kept]


def control_point_distance(a: BezierBBox, b: BezierBBox) -> float:
    """Sum of |dx| + |dy| over all paired control points of the two boxes."""
    if a.order != b.order:
        raise ValidationError(f"box orders differ: {a.order} vs {b.order}")
    ca = np.vstack([a.top.control_points, a.bottom.control_points])
    cb = np.vstack([b.top.control_points, b.bottom.control_points])
    return float(np.abs(ca - cb).sum())


def _stacked_control_points(boxes: Sequence[BezierBBox]) -> np.ndarray:
    return np.stack([
        np.vstack([b.top.control_points, b.bottom.control_points]) for b in boxes
    ])


def assign_recognition(
    dets: Sequence[Detection],
    gts: Sequence[tuple[BezierBBox, str]],
) -> list[Assignment]:
    """Assign each detection the nearest ground truth by control-point
    distance; ties go to the earlier ground truth. Several detections may
    share one ground truth."""
    if not gts:
        raise ValidationError("cannot assign against an empty ground-truth set")
    if not dets:
        return []
    orders = {d.bbox.order for d in dets} | {g.order for g, _ in gts}
    if len(orders) > 1:
        raise ValidationError(f"mixed box orders in assignment: {sorted(orders)}")
    det_cp = _stacked_control_points([d.bbox for d in dets])
    gt_cp = _stacked_control_points([g for g, _ in gts])
    dist = np.abs(det_cp[:, None] - gt_cp[None, :]).sum(axis=(2, 3))
    nearest = dist.argmin(axis=1)
    return [Assignment(i, int(j), float(dist[i, j])) for i, j in enumerate(nearest)]
