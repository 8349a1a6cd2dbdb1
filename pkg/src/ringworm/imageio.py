"""Grayscale raster type, PGM (P2/P5) codec and geometric normalization."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np


class PgmError(ValueError):
    """Raised when a PGM byte stream cannot be decoded.

    ``field`` names the header field or section that was at fault
    (``magic``, ``width``, ``height``, ``maxval``, ``pixels``).
    """

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class BadMagicError(PgmError):
    pass


class HeaderTokenError(PgmError):
    pass


class MaxvalError(PgmError):
    pass


class TruncatedDataError(PgmError):
    pass


class BoundsError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GrayImage:
    """8-bit single-channel raster.

    ``pixels`` may be given as a flat row-major sequence of length
    ``width * height`` or as a ``(height, width)`` array; it is stored as a
    read-only ``uint8`` array of shape ``(height, width)``.
    """

    width: int
    height: int
    pixels: np.ndarray

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"image dimensions must be >= 1, got {self.width}x{self.height}")
        arr = np.asarray(self.pixels)
        if arr.size != self.width * self.height:
            raise ValueError(
                f"expected {self.width * self.height} pixels, got {arr.size}"
            )
        if arr.size and (arr.min() < 0 or arr.max() > 255):
            raise ValueError("pixel intensities must lie in [0, 255]")
        arr = np.array(arr, dtype=np.uint8).reshape(self.height, self.width)
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @classmethod
    def from_array(cls, array) -> "GrayImage":
        array = np.asarray(array)
        if array.ndim != 2:
            raise ValueError(f"expected a 2-D array, got shape {array.shape}")
        return cls(array.shape[1], array.shape[0], array)

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and np.array_equal(self.pixels, other.pixels)
        )

    def __hash__(self):
        return hash((self.width, self.height, self.pixels.tobytes()))

    def tolist(self) -> list[int]:
        return self.pixels.ravel().tolist()

    def __repr__(self):
        return f"GrayImage({self.width}x{self.height})"


@dataclass(frozen=True)
class Rect:
    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.x < 0 or self.y < 0 or self.w < 1 or self.h < 1:
            raise ValueError(f"invalid rect {self}")

    @property
    def right(self) -> int:
        return self.x + self.w

    @property
    def bottom(self) -> int:
        return self.y + self.h

    def offset(self, dx: int, dy: int) -> "Rect":
        return Rect(self.x + dx, self.y + dy, self.w, self.h)


# --------------------------------------------------------------------- PGM


class _HeaderReader:
    """Tokenizer over the PGM header; '#' starts a comment up to end of line."""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def _skip_space_and_comments(self):
        data, n = self.data, len(self.data)
        while self.pos < n:
            ch = data[self.pos : self.pos + 1]
            if ch.isspace():
                self.pos += 1
            elif ch == b"#":
                while self.pos < n and data[self.pos : self.pos + 1] not in (b"\n", b"\r"):
                    self.pos += 1
            else:
                break

    def token(self, field: str) -> bytes:
        self._skip_space_and_comments()
        start = self.pos
        while self.pos < len(self.data):
            ch = self.data[self.pos : self.pos + 1]
            if ch.isspace() or ch == b"#":
                break
            self.pos += 1
        if start == self.pos:
            raise TruncatedDataError(field, "header ended before this field")
        return self.data[start : self.pos]

    def integer(self, field: str) -> int:
        tok = self.token(field)
        if not tok.isdigit():
            raise HeaderTokenError(field, f"non-numeric header token {tok!r}")
        return int(tok)


def decode_pgm(data: bytes) -> GrayImage:
    """Decode a binary (P5) or ASCII (P2) graymap.

    Maxvals below 255 are rescaled linearly onto 0..255 (rounded half up).
    """
    reader = _HeaderReader(bytes(data))
    magic = reader.token("magic")
    if magic not in (b"P5", b"P2"):
        raise BadMagicError("magic", f"expected P5 or P2, got {magic[:8]!r}")
    width = reader.integer("width")
    height = reader.integer("height")
    maxval = reader.integer("maxval")
    if width < 1 or height < 1:
        raise HeaderTokenError("width" if width < 1 else "height", "dimension must be >= 1")
    if maxval < 1 or maxval > 255:
        raise MaxvalError("maxval", f"maxval {maxval} outside 1..255")
    count = width * height

    if magic == b"P5":
        # exactly one whitespace byte separates maxval from the raster
        start = reader.pos + 1
        raw = reader.data[start : start + count]
        if len(raw) < count:
            raise TruncatedDataError(
                "pixels", f"expected {count} samples, got {len(raw)}"
            )
        values = np.frombuffer(raw, dtype=np.uint8).astype(np.int64)
    else:
        values = []
        for k in range(count):
            reader._skip_space_and_comments()
            if reader.pos >= len(reader.data):
                raise TruncatedDataError("pixels", f"expected {count} samples, got {k}")
            values.append(reader.integer("pixels"))
        values = np.asarray(values, dtype=np.int64)

    if values.size and values.max() > maxval:
        raise PgmError("pixels", f"sample {int(values.max())} exceeds maxval {maxval}")
    if maxval != 255:
        values = (values * 255 + maxval // 2) // maxval
    return GrayImage(width, height, values)


def encode_pgm(image: GrayImage) -> bytes:
    header = f"P5\n{image.width} {image.height}\n255\n".encode("ascii")
    return header + image.pixels.tobytes()


def read_pgm(path: Union[str, Path]) -> GrayImage:
    return decode_pgm(Path(path).read_bytes())


def write_pgm(path: Union[str, Path], image: GrayImage) -> None:
    Path(path).write_bytes(encode_pgm(image))


# ---------------------------------------------------------------- geometry


def crop(image: GrayImage, region: Rect) -> GrayImage:
    if region.right > image.width or region.bottom > image.height:
        raise BoundsError(
            f"{region} exceeds image bounds {image.width}x{image.height}"
        )
    return GrayImage.from_array(
        image.pixels[region.y : region.bottom, region.x : region.right]
    )


def _axis_weights(n_in: int, n_out: int):
    """Source indices and blend weights along one axis (pixel-center aligned)."""
    pos = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
    pos = np.clip(pos, 0.0, n_in - 1)
    lo = np.floor(pos).astype(np.intp)
    hi = np.minimum(lo + 1, n_in - 1)
    frac = pos - lo
    return lo, hi, frac


def resize(image: GrayImage, out_w: int, out_h: int) -> GrayImage:
    """Bilinear resample with edge clamping, rounding half up."""
    if out_w < 1 or out_h < 1:
        raise ValueError(f"target size must be >= 1, got {out_w}x{out_h}")
    if (out_w, out_h) == (image.width, image.height):
        return image
    src = image.pixels.astype(np.float64)
    x0, x1, fx = _axis_weights(image.width, out_w)
    y0, y1, fy = _axis_weights(image.height, out_h)
    top = src[y0][:, x0] * (1 - fx) + src[y0][:, x1] * fx
    bottom = src[y1][:, x0] * (1 - fx) + src[y1][:, x1] * fx
    out = top * (1 - fy)[:, None] + bottom * fy[:, None]
    out = np.clip(np.floor(out + 0.5), 0, 255)
    return GrayImage.from_array(out.astype(np.uint8))


def rotate90ccw(image: GrayImage) -> GrayImage:
    return GrayImage.from_array(np.rot90(image.pixels))


def to_square(image: GrayImage, size: int = 144) -> GrayImage:
    """Resize to the ``size`` x ``size`` raster every later stage expects."""
    return resize(image, size, size)
