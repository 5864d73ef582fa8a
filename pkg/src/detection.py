"""Per-image detection evaluation: box overlap, greedy matching and miss-rate/FPPI curves."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from src.errors import DetectionError

LOGGER = logging.getLogger("pin_twsvmpi.detection")


@dataclass(frozen=True)
class BBox:
    x_min: float
    y_min: float
    x_max: float
    y_max: float
    score: Optional[float] = None

    def __post_init__(self) -> None:
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise DetectionError(
                f"invalid box ({self.x_min}, {self.y_min}, {self.x_max}, {self.y_max})"
            )

    @property
    def area(self) -> float:
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)


@dataclass(frozen=True)
class MatchResult:
    tp: int
    fp: int
    fn: int
    pairs: Tuple[Tuple[int, int], ...]


@dataclass(frozen=True)
class CurvePoint:
    threshold: float
    miss_rate: float
    fppi: float
    tp: int
    fp: int
    fn: int

    def to_record(self) -> Dict:
        return {
            "record": "curve_point",
            "threshold": self.threshold if math.isfinite(self.threshold) else "inf",
            "miss_rate": self.miss_rate,
            "fppi": self.fppi,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
        }


def bbox_overlap(d: BBox, g: BBox) -> float:
    """Intersection over union."""
    width = min(d.x_max, g.x_max) - max(d.x_min, g.x_min)
    height = min(d.y_max, g.y_max) - max(d.y_min, g.y_min)
    if width <= 0 or height <= 0:
        return 0.0
    inter = width * height
    return inter / (d.area + g.area - inter)


def match_detections(dets: Sequence[BBox], gts: Sequence[BBox], threshold: float = 0.5) -> MatchResult:
    """Greedy in decreasing score; each ground truth is matched at most once, overlap must exceed threshold."""
    order = sorted(range(len(dets)), key=lambda i: (-(dets[i].score if dets[i].score is not None else 0.0), i))
    matched = [False] * len(gts)
    pairs: List[Tuple[int, int]] = []
    for i in order:
        best, best_overlap = -1, threshold
        for j, gt in enumerate(gts):
            if matched[j]:
                continue
            overlap = bbox_overlap(dets[i], gt)
            if overlap > best_overlap:
                best, best_overlap = j, overlap
        if best >= 0:
            matched[best] = True
            pairs.append((i, best))
    tp = len(pairs)
    return MatchResult(tp=tp, fp=len(dets) - tp, fn=len(gts) - tp, pairs=tuple(pairs))


def missrate_fppi_curve(
    detections: Dict[str, List[BBox]],
    ground_truth: Dict[str, List[BBox]],
    thresholds: Optional[Iterable[float]] = None,
    overlap: float = 0.5,
) -> List[CurvePoint]:
    """One point per score threshold (detections kept when score >= threshold), sorted by FPPI."""
    images = sorted(set(detections) | set(ground_truth))
    if not images:
        raise DetectionError("no images to evaluate")
    n_truth = sum(len(boxes) for boxes in ground_truth.values())
    if n_truth == 0:
        raise DetectionError("no ground-truth boxes; miss rate is undefined")
    for image, boxes in detections.items():
        if any(box.score is None for box in boxes):
            raise DetectionError(f"detections for image {image} lack scores")

    if thresholds is None:
        scores = {box.score for boxes in detections.values() for box in boxes}
        thresholds = [math.inf] + sorted(scores, reverse=True)

    points = []
    for threshold in thresholds:
        tp = fp = fn = 0
        for image in images:
            kept = [box for box in detections.get(image, []) if box.score >= threshold]
            result = match_detections(kept, ground_truth.get(image, []), overlap)
            tp, fp, fn = tp + result.tp, fp + result.fp, fn + result.fn
        points.append(
            CurvePoint(
                threshold=float(threshold),
                miss_rate=fn / (tp + fn),
                fppi=fp / len(images),
                tp=tp,
                fp=fp,
                fn=fn,
            )
        )
    return sorted(points, key=lambda p: (p.fppi, -p.miss_rate, -p.threshold))


def read_boxes(path, scored: bool) -> Dict[str, List[BBox]]:
    """Parse `image_id x_min y_min x_max y_max [score]` lines; `#` starts a comment."""
    path = Path(path)
    if not path.exists():
        raise DetectionError(f"box file not found: {path}")
    expected = 6 if scored else 5
    boxes: Dict[str, List[BBox]] = {}
    for line_no, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if len(tokens) not in (5, 6) or (scored and len(tokens) != expected):
            raise DetectionError(f"line {line_no}: expected {expected} fields, found {len(tokens)}")
        try:
            values = [float(token) for token in tokens[1:]]
        except ValueError as exc:
            raise DetectionError(f"line {line_no}: non-numeric box field") from exc
        score = values[4] if len(values) == 5 else None
        try:
            box = BBox(*values[:4], score=score)
        except DetectionError as exc:
            raise DetectionError(f"line {line_no}: {exc}") from exc
        boxes.setdefault(tokens[0], []).append(box)
    LOGGER.info("Read %d boxes over %d images from %s", sum(map(len, boxes.values())), len(boxes), path)
    return boxes
