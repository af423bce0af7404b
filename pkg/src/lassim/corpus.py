"""Deterministic test corpus cut from the public sample images bundled with scikit-image.

Each output is a 480x272 crop taken at a random scale, offset and flip from
one of the natural or medical source images. scikit-image is only needed
here, so it is imported lazily.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .image import resize_bilinear, write_image

WIDTH, HEIGHT = 480, 272

# Natural photographs plus three medical sources (fundus, IHC, cell microscopy).
SOURCES = (
    "astronaut",
    "brick",
    "camera",
    "cell",
    "chelsea",
    "coffee",
    "coins",
    "grass",
    "gravel",
    "hubble_deep_field",
    "immunohistochemistry",
    "moon",
    "motorcycle_left",
    "retina",
    "rocket",
)


def load_source(name: str) -> np.ndarray:
    import skimage.data

    if name == "motorcycle_left":
        arr = skimage.data.stereo_motorcycle()[0]
    else:
        arr = getattr(skimage.data, name)()
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim == 3:
        arr = arr[..., :3]
    return arr


def random_crop(src: np.ndarray, rng: np.random.Generator, width=WIDTH, height=HEIGHT) -> np.ndarray:
    h, w = src.shape[:2]
    base = max(width / w, height / h)
    # Zoom between "whole source fits" and native resolution; upscale small sources slightly.
    scale = base * rng.uniform(1.0, 1.0 / base) if base < 1 else base * rng.uniform(1.0, 1.2)
    new_w = max(width, int(round(w * scale)))
    new_h = max(height, int(round(h * scale)))
    img = resize_bilinear(src, new_w, new_h)
    y = int(rng.integers(0, new_h - height + 1))
    x = int(rng.integers(0, new_w - width + 1))
    crop = img[y : y + height, x : x + width]
    if rng.random() < 0.5:
        crop = crop[:, ::-1]
    return np.ascontiguousarray(crop)


def make_corpus(out_dir: str | Path, count: int = 120, seed: int = 2023, width=WIDTH, height=HEIGHT) -> list[Path]:
    """Write ``count`` crops as PNG, cycling through the source images."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    sources = {name: load_source(name) for name in SOURCES}
    paths = []
    for i in range(count):
        name = SOURCES[i % len(SOURCES)]
        crop = random_crop(sources[name], rng, width, height)
        path = out_dir / f"{i:04d}_{name}.png"
        write_image(path, crop)
        paths.append(path)
    return paths
