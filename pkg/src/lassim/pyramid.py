"""Laplacian pyramid: decomposition, single-level residuals and reconstruction.

``I_{l+1} = down(I_l)`` and ``h_l = I_l - up(I_{l+1})``. Both steps are
linear, borders are mirrored (edge sample not repeated) and odd sizes are
handled by ceil-halving on the way down and cropping on the way up, so the
reconstruction is exact for any input size.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.ndimage import correlate1d

from .image import encode_image

# Burt-Adelson generating kernel, a = 0.375.
BINOMIAL5 = (1 / 16, 4 / 16, 6 / 16, 4 / 16, 1 / 16)


class DegenerateSizeError(ValueError):
    """An image is too small to be halved."""


class DimensionMismatchError(ValueError):
    """Target size is not consistent with a 2x up-sampling."""


class CorruptPyramidError(ValueError):
    """Stored pyramid planes have inconsistent dimensions."""


def halve(n: int) -> int:
    return (n + 1) // 2


def check_kernel(kernel) -> np.ndarray:
    k = np.asarray(kernel, dtype=np.float64)
    if k.ndim != 1 or k.size % 2 == 0:
        raise ValueError(f"kernel must be 1-D with odd length, got shape {k.shape}")
    if not np.allclose(k, k[::-1], rtol=0, atol=1e-15):
        raise ValueError("kernel must be symmetric")
    if abs(k.sum() - 1.0) > 1e-12:
        raise ValueError(f"kernel must sum to 1, sums to {k.sum()!r}")
    return k


@dataclass(frozen=True)
class PyramidParams:
    levels: int = 4
    kernel: tuple[float, ...] = BINOMIAL5

    def __post_init__(self):
        if self.levels < 1:
            raise ValueError(f"levels must be >= 1, got {self.levels}")
        check_kernel(self.kernel)

    def check_size(self, h: int, w: int) -> None:
        """Every level that gets down-sampled must be at least 2x2."""
        for level in range(self.levels):
            if h < 2 or w < 2:
                raise DegenerateSizeError(
                    f"level {level} is {w}x{h}; need >= 2x2 to build {self.levels} levels"
                )
            h, w = halve(h), halve(w)


@dataclass(frozen=True)
class LaplacianPyramid:
    residuals: list[np.ndarray]
    top: np.ndarray
    kernel: tuple[float, ...] = field(default=BINOMIAL5)

    @property
    def levels(self) -> int:
        return len(self.residuals)


def _blur(img: np.ndarray, k: np.ndarray) -> np.ndarray:
    out = correlate1d(img, k, axis=0, mode="mirror")
    return correlate1d(out, k, axis=1, mode="mirror")


def downsample(img: np.ndarray, kernel=BINOMIAL5) -> np.ndarray:
    """Low-pass filter then keep even rows/columns: (h, w) -> (ceil(h/2), ceil(w/2))."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError(f"expected a 2-D plane, got shape {img.shape}")
    if min(img.shape) < 2:
        raise DegenerateSizeError(f"cannot downsample a {img.shape[1]}x{img.shape[0]} image")
    return _blur(img, check_kernel(kernel))[::2, ::2]


def upsample(img: np.ndarray, target_w: int, target_h: int, kernel=BINOMIAL5) -> np.ndarray:
    """Zero-stuff to the 2x grid, interpolate with 2x the kernel per axis, crop to target."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError(f"expected a 2-D plane, got shape {img.shape}")
    h, w = img.shape
    if halve(target_h) != h or halve(target_w) != w:
        raise DimensionMismatchError(
            f"{w}x{h} plane cannot be up-sampled to {target_w}x{target_h}"
        )
    k = 2.0 * check_kernel(kernel)
    grid = np.zeros((2 * h, 2 * w))
    grid[::2, ::2] = img
    out = correlate1d(grid, k, axis=0, mode="mirror")
    out = correlate1d(out, k, axis=1, mode="mirror")
    return out[:target_h, :target_w]


def build_pyramid(img: np.ndarray, params: PyramidParams = PyramidParams()) -> LaplacianPyramid:
    current = np.asarray(img, dtype=np.float64)
    if current.ndim != 2:
        raise ValueError(f"expected a luma plane, got shape {current.shape}")
    params.check_size(*current.shape)
    residuals = []
    for _ in range(params.levels):
        lower = downsample(current, params.kernel)
        residuals.append(current - upsample(lower, current.shape[1], current.shape[0], params.kernel))
        current = lower
    return LaplacianPyramid(residuals, current, tuple(params.kernel))


def residual_at(img: np.ndarray, level: int, params: PyramidParams = PyramidParams()) -> np.ndarray:
    """Residual plane h_level, computing only the levels it depends on."""
    if not 0 <= level < params.levels:
        raise IndexError(f"level {level} outside 0..{params.levels - 1}")
    current = np.asarray(img, dtype=np.float64)
    if current.ndim != 2:
        raise ValueError(f"expected a luma plane, got shape {current.shape}")
    PyramidParams(level + 1, params.kernel).check_size(*current.shape)
    for _ in range(level):
        current = downsample(current, params.kernel)
    lower = downsample(current, params.kernel)
    return current - upsample(lower, current.shape[1], current.shape[0], params.kernel)


def reconstruct(pyr: LaplacianPyramid, kernel=None) -> np.ndarray:
    kernel = pyr.kernel if kernel is None else kernel
    current = np.asarray(pyr.top, dtype=np.float64)
    for level in range(pyr.levels - 1, -1, -1):
        h_l = pyr.residuals[level]
        if halve(h_l.shape[0]) != current.shape[0] or halve(h_l.shape[1]) != current.shape[1]:
            raise CorruptPyramidError(
                f"residual {level} is {h_l.shape[1]}x{h_l.shape[0]} but the level above is "
                f"{current.shape[1]}x{current.shape[0]}"
            )
        current = h_l + upsample(current, h_l.shape[1], h_l.shape[0], kernel)
    return current


def residual_to_display(h: np.ndarray) -> np.ndarray:
    """Map a signed residual to [0, 255] via x/2 + 128 for viewing."""
    return np.clip(np.asarray(h) / 2.0 + 128.0, 0.0, 255.0)


def export_residuals(pyr: LaplacianPyramid, out_dir: str | Path, stem: str = "level") -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for level, h_l in enumerate(pyr.residuals):
        path = out_dir / f"{stem}_{level}.png"
        path.write_bytes(encode_image(residual_to_display(h_l), "png"))
        paths.append(path)
    path = out_dir / f"{stem}_top.png"
    path.write_bytes(encode_image(pyr.top, "png"))
    paths.append(path)
    return paths
