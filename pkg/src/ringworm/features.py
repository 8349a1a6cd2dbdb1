"""Region-histogram feature vectors and min/max attribute scaling."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .imageio import BoundsError, GrayImage, Rect
from .lbp import LbpMap, LbpParams, compute_lbp_map

POSITIVE = 1
NEGATIVE = 0


@dataclass(frozen=True)
class RegionGrid:
    rows: int = 4
    cols: int = 4

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"grid must be at least 1x1, got {self.rows}x{self.cols}")

    @classmethod
    def parse(cls, text: str) -> "RegionGrid":
        """Parse ``"4x4"`` (rows x cols) or a single integer for a square grid."""
        parts = text.lower().split("x")
        if len(parts) == 1:
            return cls(int(parts[0]), int(parts[0]))
        if len(parts) != 2:
            raise ValueError(f"bad grid spec {text!r}")
        return cls(int(parts[0]), int(parts[1]))

    def __str__(self):
        return f"{self.rows}x{self.cols}"


@dataclass(frozen=True, eq=False)
class FeatureVector:
    values: np.ndarray
    label: Optional[int] = None

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64).ravel()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        if self.label not in (None, POSITIVE, NEGATIVE):
            raise ValueError(f"label must be 0 or 1, got {self.label!r}")

    def __len__(self):
        return self.values.size

    def __eq__(self, other):
        if not isinstance(other, FeatureVector):
            return NotImplemented
        return self.label == other.label and np.array_equal(self.values, other.values)

    __hash__ = None


def _split(n: int, parts: int) -> list[tuple[int, int]]:
    base = n // parts
    spans = [(k * base, base) for k in range(parts - 1)]
    spans.append(((parts - 1) * base, n - (parts - 1) * base))
    return spans


def decompose_regions(width: int, height: int, grid: RegionGrid = RegionGrid()) -> list[Rect]:
    """Row-major grid of rects covering ``width`` x ``height``.

    Every region is ``width // cols`` by ``height // rows`` except the last
    column and row, which absorb the remainder.
    """
    if width < grid.cols or height < grid.rows:
        raise ValueError(f"{width}x{height} area cannot hold a {grid} grid")
    return [
        Rect(x, y, w, h)
        for y, h in _split(height, grid.rows)
        for x, w in _split(width, grid.cols)
    ]


def region_histogram(lbp_map: LbpMap, region: Rect) -> np.ndarray:
    """Normalized code histogram of the valid pixels inside ``region``.

    ``region`` is in source-image coordinates; pixels inside the border
    margin carry no code and are not counted. A region with no valid pixel
    gives an all-zero histogram.
    """
    if region.right > lbp_map.width or region.bottom > lbp_map.height:
        raise BoundsError(f"{region} outside {lbp_map.width}x{lbp_map.height} image")
    m = lbp_map.margin
    r0 = max(region.y, m) - m
    r1 = min(region.bottom, lbp_map.height - m) - m
    c0 = max(region.x, m) - m
    c1 = min(region.right, lbp_map.width - m) - m
    bins = lbp_map.params.bin_count
    if r1 <= r0 or c1 <= c0:
        return np.zeros(bins)
    block = lbp_map.codes[r0:r1, c0:c1]
    counts = np.bincount(block.ravel(), minlength=bins).astype(np.float64)
    return counts / block.size


def extract_features(
    image: GrayImage,
    params: LbpParams = LbpParams(),
    grid: RegionGrid = RegionGrid(),
    label: Optional[int] = None,
) -> FeatureVector:
    """Concatenate the equally weighted region histograms of ``image``.

    With the defaults (riu2, P=8, R=1, 4x4 grid) this is 16 blocks of 10
    bins, 160 values in total, region-major.
    """
    lbp_map = compute_lbp_map(image, params)
    regions = decompose_regions(image.width, image.height, grid)
    return FeatureVector(
        np.concatenate([region_histogram(lbp_map, r) for r in regions]), label
    )


# ----------------------------------------------------------------- scaling


@dataclass(frozen=True, eq=False)
class ScalerModel:
    mins: np.ndarray
    maxs: np.ndarray
    lower: float = 0.0
    upper: float = 1.0

    def __post_init__(self):
        mins = np.array(self.mins, dtype=np.float64)
        maxs = np.array(self.maxs, dtype=np.float64)
        if mins.shape != maxs.shape or np.any(mins > maxs):
            raise ValueError("scaler needs matching mins <= maxs")
        if not self.lower < self.upper:
            raise ValueError("scaler interval must have lower < upper")
        object.__setattr__(self, "mins", mins)
        object.__setattr__(self, "maxs", maxs)

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.shape[-1] != self.mins.size:
            raise ValueError(
                f"expected {self.mins.size} features, got {X.shape[-1]}"
            )
        span = self.maxs - self.mins
        safe = np.where(span > 0, span, 1.0)
        unit = np.where(span > 0, (X - self.mins) / safe, 0.0)
        out = self.lower + unit * (self.upper - self.lower)
        return np.clip(out, self.lower, self.upper)

    def to_dict(self) -> dict:
        return {
            "mins": self.mins.tolist(),
            "maxs": self.maxs.tolist(),
            "lower": self.lower,
            "upper": self.upper,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScalerModel":
        return cls(d["mins"], d["maxs"], d["lower"], d["upper"])


def _as_matrix(vectors) -> np.ndarray:
    rows = [v.values if isinstance(v, FeatureVector) else np.asarray(v, dtype=np.float64) for v in vectors]
    if not rows:
        raise ValueError("need at least one training vector")
    return np.vstack(rows)


def scaler_fit(vectors, target: tuple[float, float] = (0.0, 1.0)) -> ScalerModel:
    X = _as_matrix(vectors)
    return ScalerModel(X.min(axis=0), X.max(axis=0), *target)


def scaler_apply(model: ScalerModel, v):
    """Scale one vector; a FeatureVector keeps its label."""
    if isinstance(v, FeatureVector):
        return FeatureVector(model.transform(v.values), v.label)
    return model.transform(v)


# --------------------------------------------------------------------- CSV


def write_feature_csv(stream, vectors: Iterable[FeatureVector], header: bool = False) -> None:
    """One row per vector: feature columns followed by the 0/1 label."""
    writer = csv.writer(stream, lineterminator="\n")
    wrote_header = False
    for v in vectors:
        if header and not wrote_header:
            writer.writerow([f"f{i}" for i in range(len(v))] + ["label"])
            wrote_header = True
        label = "" if v.label is None else str(v.label)
        writer.writerow([repr(float(x)) for x in v.values] + [label])


def read_feature_csv(stream) -> list[FeatureVector]:
    """Inverse of :func:`write_feature_csv`; a header row is detected and skipped."""
    out = []
    width = None
    for lineno, row in enumerate(csv.reader(stream), start=1):
        if not row:
            continue
        if lineno == 1 and row[-1].strip() == "label":
            continue
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ValueError(f"line {lineno}: expected {width} columns, got {len(row)}")
        try:
            values = [float(x) for x in row[:-1]]
            label = None if row[-1].strip() == "" else int(row[-1])
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
        if label not in (None, POSITIVE, NEGATIVE):
            raise ValueError(f"line {lineno}: label must be 0 or 1, got {label}")
        out.append(FeatureVector(values, label))
    return out


def features_to_csv_text(vectors: Sequence[FeatureVector], header: bool = False) -> str:
    buf = io.StringIO()
    write_feature_csv(buf, vectors, header)
    return buf.getvalue()
