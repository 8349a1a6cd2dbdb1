"""Local binary pattern operators: basic, rotation-invariant and riu2 codes.

Bit ``i`` of a code is the sign bit of neighbor ``i`` (neighbor 0 is the
least significant bit). Neighbor ``i`` sits at column/row offset
``(-R sin(2*pi*i/P), R cos(2*pi*i/P))`` from the center, rows growing
downward. A neighbor contributes a 1 only when strictly brighter than the
center, so flat regions code as 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .imageio import BoundsError, GrayImage

BASIC = "basic"
ROTATION_INVARIANT = "rotation-invariant"
RIU2 = "riu2"
VARIANTS = (BASIC, ROTATION_INVARIANT, RIU2)

GRID_SNAP = "grid-snap"
BILINEAR = "bilinear"
SAMPLINGS = (GRID_SNAP, BILINEAR)

# offsets closer than this to an integer are treated as exact grid points
_SNAP_EPS = 1e-9


@dataclass(frozen=True)
class LbpParams:
    P: int = 8
    R: float = 1.0
    sampling: str = GRID_SNAP
    variant: str = RIU2

    def __post_init__(self):
        if not 2 <= self.P <= 24:
            raise ValueError(f"P must lie in [2, 24], got {self.P}")
        if not self.R > 0:
            raise ValueError(f"R must be positive, got {self.R}")
        if self.sampling not in SAMPLINGS:
            raise ValueError(f"unknown sampling {self.sampling!r}")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")

    @property
    def margin(self) -> int:
        return math.ceil(self.R)

    @property
    def bin_count(self) -> int:
        return self.P + 2 if self.variant == RIU2 else 2**self.P


@dataclass(frozen=True, eq=False)
class LbpMap:
    """Per-pixel codes over the valid interior of a ``width`` x ``height`` image.

    ``codes`` has shape ``(height - 2*margin, width - 2*margin)``; entry
    ``[r, c]`` belongs to source pixel ``(row r + margin, col c + margin)``.
    """

    params: LbpParams
    width: int
    height: int
    margin: int
    codes: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, LbpMap):
            return NotImplemented
        return (
            self.params == other.params
            and (self.width, self.height, self.margin)
            == (other.width, other.height, other.margin)
            and np.array_equal(self.codes, other.codes)
        )

    __hash__ = None


def sign(x) -> int:
    return 1 if x > 0 else 0


def neighbor_offsets(params: LbpParams) -> list[tuple[float, float]]:
    """``P`` (d_col, d_row) offsets on the circle of radius ``R``."""
    out = []
    for i in range(params.P):
        theta = 2.0 * math.pi * i / params.P
        out.append((-params.R * math.sin(theta), params.R * math.cos(theta)))
    return out


def _snap(v: float) -> float:
    r = round(v)
    return float(r) if abs(v - r) < _SNAP_EPS else v


@lru_cache(maxsize=64)
def _sampling_taps(params: LbpParams):
    """Per neighbor, a tuple of ((d_row, d_col), weight) taps."""
    taps = []
    for dx, dy in neighbor_offsets(params):
        if params.sampling == GRID_SNAP:
            taps.append((((int(round(dy)), int(round(dx))), 1.0),))
            continue
        dx, dy = _snap(dx), _snap(dy)
        x0, y0 = math.floor(dx), math.floor(dy)
        fx, fy = dx - x0, dy - y0
        cand = (
            ((y0, x0), (1 - fx) * (1 - fy)),
            ((y0, x0 + 1), fx * (1 - fy)),
            ((y0 + 1, x0), (1 - fx) * fy),
            ((y0 + 1, x0 + 1), fx * fy),
        )
        taps.append(tuple((off, w) for off, w in cand if w != 0.0))
    return tuple(taps)


def sample_neighbors(image: GrayImage, center: tuple[int, int], params: LbpParams) -> list[float]:
    """Gray values of the ``P`` circle samples around ``center = (col, row)``."""
    col, row = center
    m = params.margin
    if not (m <= col < image.width - m and m <= row < image.height - m):
        raise BoundsError(
            f"center {center} closer than {m} pixels to the border of a "
            f"{image.width}x{image.height} image"
        )
    px = image.pixels
    values = []
    for taps in _sampling_taps(params):
        values.append(float(sum(w * float(px[row + dr, col + dc]) for (dr, dc), w in taps)))
    return values


def lbp_code(center_value, neighbors: Sequence, P: int | None = None) -> int:
    """Weighted sum of neighbor sign bits; ``P`` (if given) is checked."""
    if P is not None and len(neighbors) != P:
        raise ValueError(f"expected {P} neighbors, got {len(neighbors)}")
    code = 0
    for i, n in enumerate(neighbors):
        code |= sign(n - center_value) << i
    return code


def _check_code(code: int, P: int) -> None:
    if not 0 <= code < (1 << P):
        raise ValueError(f"code {code} outside the {P}-bit range")


def ror(code: int, shift: int, P: int) -> int:
    """Circular right rotation of a ``P``-bit word."""
    _check_code(code, P)
    shift %= P
    mask = (1 << P) - 1
    return ((code >> shift) | (code << (P - shift))) & mask


def rotation_invariant_code(code: int, P: int) -> int:
    _check_code(code, P)
    return min(ror(code, i, P) for i in range(P))


def uniformity(code: int, P: int) -> int:
    """Number of 0/1 transitions around the circular bit string."""
    return bin(code ^ ror(code, 1, P)).count("1")


def riu2_code(code: int, P: int) -> int:
    if uniformity(code, P) <= 2:
        return bin(code).count("1")
    return P + 1


@lru_cache(maxsize=32)
def _lookup(P: int, variant: str) -> np.ndarray:
    codes = range(1 << P)
    if variant == ROTATION_INVARIANT:
        table = [rotation_invariant_code(c, P) for c in codes]
    elif variant == RIU2:
        table = [riu2_code(c, P) for c in codes]
    else:
        table = list(codes)
    arr = np.asarray(table, dtype=np.int64)
    arr.setflags(write=False)
    return arr


def compute_lbp_map(image: GrayImage, params: LbpParams = LbpParams()) -> LbpMap:
    """Code every pixel at least ``ceil(R)`` away from the border."""
    m = params.margin
    if image.width <= 2 * m or image.height <= 2 * m:
        raise ValueError(
            f"image {image.width}x{image.height} too small for margin {m}"
        )
    px = image.pixels.astype(np.int64)
    h, w = image.height - 2 * m, image.width - 2 * m
    center = px[m : m + h, m : m + w]
    basic = np.zeros((h, w), dtype=np.int64)
    for i, taps in enumerate(_sampling_taps(params)):
        if len(taps) == 1 and taps[0][1] == 1.0:
            (dr, dc), _ = taps[0]
            diff = px[m + dr : m + dr + h, m + dc : m + dc + w] - center
        else:
            # interpolating the integer differences keeps the result exactly
            # invariant to gray-level shifts
            diff = np.zeros((h, w), dtype=np.float64)
            for (dr, dc), wt in taps:
                diff += wt * (px[m + dr : m + dr + h, m + dc : m + dc + w] - center)
        basic |= (diff > 0).astype(np.int64) << i
    if params.variant == BASIC:
        codes = basic
    elif params.P <= 16:
        codes = _lookup(params.P, params.variant)[basic]
    else:
        uniq, inverse = np.unique(basic, return_inverse=True)
        fn = rotation_invariant_code if params.variant == ROTATION_INVARIANT else riu2_code
        mapped = np.asarray([fn(int(c), params.P) for c in uniq], dtype=np.int64)
        codes = mapped[inverse].reshape(h, w)
    return LbpMap(params, image.width, image.height, m, codes)
