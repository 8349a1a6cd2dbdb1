"""Seeded synthetic skin-texture corpus.

Positive images carry one to three annular bands of raised contrast around a
point near the image center; negative images are low-contrast smooth noise.
Both share the same background and sensor noise model, so the classes
differ only in the ring structure.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
from scipy.ndimage import gaussian_filter

from .features import NEGATIVE, POSITIVE
from .imageio import GrayImage, encode_pgm


@dataclass(frozen=True)
class SynthConfig:
    positives: int = 70
    negatives: int = 70
    size: int = 144
    rings: tuple[int, int] = (1, 3)
    radius: tuple[float, float] = (0.15, 0.42)  # fraction of image size
    ring_width: tuple[float, float] = (2.5, 6.0)  # pixels
    contrast: float = 70.0
    background_contrast: float = 8.0
    noise: float = 4.0
    seed: int = 42

    def __post_init__(self):
        if self.positives < 1 or self.negatives < 1:
            raise ValueError("each class needs at least one image")
        if self.size <= 2:
            raise ValueError("image size must exceed the LBP border margin")
        if self.rings[0] < 1 or self.rings[0] > self.rings[1]:
            raise ValueError(f"bad ring count range {self.rings}")


def _background(rng: np.random.Generator, cfg: SynthConfig) -> np.ndarray:
    field = gaussian_filter(rng.standard_normal((cfg.size, cfg.size)), sigma=6.0)
    field /= field.std() + 1e-12
    return rng.uniform(100, 160) + cfg.background_contrast * field


def _finish(img: np.ndarray, rng: np.random.Generator, cfg: SynthConfig) -> GrayImage:
    img = img + cfg.noise * rng.standard_normal(img.shape)
    return GrayImage.from_array(np.clip(np.floor(img + 0.5), 0, 255).astype(np.uint8))


def ring_image(rng: np.random.Generator, cfg: SynthConfig) -> GrayImage:
    n = cfg.size
    img = _background(rng, cfg)
    cy, cx = (n - 1) / 2 + rng.uniform(-n / 16, n / 16, size=2)
    rows, cols = np.mgrid[0:n, 0:n]
    dist = np.hypot(rows - cy, cols - cx)
    for _ in range(rng.integers(cfg.rings[0], cfg.rings[1] + 1)):
        r = rng.uniform(*cfg.radius) * n
        w = rng.uniform(*cfg.ring_width)
        amp = cfg.contrast * rng.uniform(0.7, 1.0) * rng.choice((-1.0, 1.0))
        img += amp * np.exp(-((dist - r) ** 2) / (2 * w * w))
    return _finish(img, rng, cfg)


def flat_image(rng: np.random.Generator, cfg: SynthConfig) -> GrayImage:
    return _finish(_background(rng, cfg), rng, cfg)


def generate(cfg: SynthConfig) -> list[tuple[str, GrayImage, int]]:
    """(file name, image, label) triples, positives first."""
    rng = np.random.default_rng(cfg.seed)
    out = []
    for k in range(cfg.positives):
        out.append((f"pos_{k:03d}.pgm", ring_image(rng, cfg), POSITIVE))
    for k in range(cfg.negatives):
        out.append((f"neg_{k:03d}.pgm", flat_image(rng, cfg), NEGATIVE))
    return out


def write_corpus(cfg: SynthConfig, out_dir: Union[str, Path]) -> Path:
    """Write the PGM files plus ``manifest.csv`` (``path,label``, no header)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = []
    for name, image, label in generate(cfg):
        (out_dir / name).write_bytes(encode_pgm(image))
        lines.append(f"{name},{label}\n")
    manifest = out_dir / "manifest.csv"
    manifest.write_text("".join(lines))
    return manifest


def radial_profile_variance(image: GrayImage) -> float:
    """Variance of the mean intensity per integer radius about the image center."""
    px = image.pixels.astype(np.float64)
    h, w = px.shape
    rows, cols = np.mgrid[0:h, 0:w]
    radius = np.hypot(rows - (h - 1) / 2, cols - (w - 1) / 2).astype(np.int64)
    limit = min(h, w) // 2
    inside = radius < limit
    sums = np.bincount(radius[inside], weights=px[inside], minlength=limit)
    counts = np.bincount(radius[inside], minlength=limit)
    return float(np.var(sums[counts > 0] / counts[counts > 0]))
