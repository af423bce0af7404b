"""Raster I/O, channel conversion and bilinear resampling.

Images are plain float64 numpy arrays with samples in [0, 255]: shape
``(h, w)`` for gray/luma and ``(h, w, 3)`` for RGB.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

# Rec.601 luma weights.
LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


class DecodeError(ValueError):
    """Raised when an image stream is malformed or truncated."""


class UnsupportedFormatError(ValueError):
    """Raised for bit depths, alpha channels or formats outside 8-bit gray/RGB."""


def check_image(img: np.ndarray) -> np.ndarray:
    """Validate an image array and return it as float64."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 3 and img.shape[2] not in (1, 3):
        raise ValueError(f"expected 1 or 3 channels, got {img.shape[2]}")
    if img.ndim == 3 and img.shape[2] == 1:
        img = img[..., 0]
    if img.ndim not in (2, 3) or img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError(f"not an image array: shape {img.shape}")
    if not np.all(np.isfinite(img)):
        raise ValueError("image contains non-finite samples")
    return img


def channels(img: np.ndarray) -> int:
    return 1 if img.ndim == 2 else img.shape[2]


def decode_image(data: bytes) -> np.ndarray:
    """Decode a PNG or binary PPM/PGM stream into a float image.

    8-bit sample ``v`` maps to ``float(v)``.
    """
    try:
        with PILImage.open(io.BytesIO(data)) as pil:
            fmt = pil.format
            mode = pil.mode
            if fmt not in ("PNG", "PPM"):
                raise UnsupportedFormatError(f"unsupported container {fmt!r}; expected PNG or PPM/PGM")
            if mode in ("I", "I;16", "I;16B", "I;16L", "F"):
                raise UnsupportedFormatError(f"unsupported bit depth (mode {mode}); only 8-bit samples are read")
            if mode in ("LA", "RGBA", "PA") or (mode == "P" and "transparency" in pil.info):
                raise UnsupportedFormatError(f"alpha channels are not supported (mode {mode})")
            if mode == "P":
                pil = pil.convert("RGB")
            elif mode == "1":
                pil = pil.convert("L")
            elif mode not in ("L", "RGB"):
                raise UnsupportedFormatError(f"unsupported pixel mode {mode}")
            pil.load()
            arr = np.asarray(pil, dtype=np.float64)
    except UnsupportedFormatError:
        raise
    except (OSError, SyntaxError, ValueError) as exc:
        # Pillow reports truncation and bad chunks as OSError / SyntaxError.
        raise DecodeError(f"cannot decode image stream ({len(data)} bytes): {exc}") from exc
    return arr.copy()


def quantize(img: np.ndarray) -> np.ndarray:
    """Clamp to [0, 255] and round half-to-even, as done on every write."""
    return np.rint(np.clip(img, 0.0, 255.0))


def encode_image(img: np.ndarray, fmt: str = "png") -> bytes:
    """Encode to 8-bit PNG or binary PPM (PGM for gray)."""
    img = check_image(img)
    fmt = fmt.lower()
    if fmt not in ("png", "ppm", "pgm"):
        raise ValueError(f"unknown format {fmt!r}")
    pil = PILImage.fromarray(quantize(img).astype(np.uint8), mode="L" if img.ndim == 2 else "RGB")
    buf = io.BytesIO()
    pil.save(buf, format="PNG" if fmt == "png" else "PPM")
    return buf.getvalue()


def read_image(path: str | Path) -> np.ndarray:
    path = Path(path)
    try:
        return decode_image(path.read_bytes())
    except DecodeError as exc:
        raise DecodeError(f"{path}: {exc}") from exc
    except UnsupportedFormatError as exc:
        raise UnsupportedFormatError(f"{path}: {exc}") from exc


def write_image(path: str | Path, img: np.ndarray) -> None:
    path = Path(path)
    fmt = "png" if path.suffix.lower() == ".png" else "ppm"
    path.write_bytes(encode_image(img, fmt))


def to_luma(img: np.ndarray) -> np.ndarray:
    """Rec.601 luma for RGB input; a copy for gray input."""
    img = check_image(img)
    if img.ndim == 2:
        return img.copy()
    return img @ LUMA_WEIGHTS


def sample_bilinear(img: np.ndarray, ys: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Bilinear samples of a 2-D plane at fractional coordinates, edge-clamped.

    Integer coordinates return the stored samples exactly.
    """
    h, w = img.shape
    ys = np.clip(ys, 0.0, h - 1)
    xs = np.clip(xs, 0.0, w - 1)
    y0 = np.floor(ys).astype(np.intp)
    x0 = np.floor(xs).astype(np.intp)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = ys - y0
    fx = xs - x0
    # a + f * (b - a) keeps constant regions exact.
    top = img[y0, x0] + fx * (img[y0, x1] - img[y0, x0])
    bottom = img[y1, x0] + fx * (img[y1, x1] - img[y1, x0])
    return top + fy * (bottom - top)


def resize_bilinear(img: np.ndarray, new_w: int, new_h: int) -> np.ndarray:
    """Resize with pixel-center aligned bilinear interpolation and clamped edges."""
    img = check_image(img)
    if new_w < 1 or new_h < 1:
        raise ValueError(f"target size must be positive, got {new_w}x{new_h}")
    h, w = img.shape[:2]
    if (new_w, new_h) == (w, h):
        return img.copy()
    ys = (np.arange(new_h) + 0.5) * (h / new_h) - 0.5
    xs = (np.arange(new_w) + 0.5) * (w / new_w) - 0.5
    yy, xx = np.meshgrid(ys, xs, indexing="ij")
    if img.ndim == 2:
        return sample_bilinear(img, yy, xx)
    return np.stack([sample_bilinear(img[..., c], yy, xx) for c in range(img.shape[2])], axis=-1)
