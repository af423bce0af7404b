"""Windowed SSIM and its Laplacian-residual variant LaSSIM."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from .image import check_image, to_luma
from .pyramid import PyramidParams, halve, residual_at

DEFAULT_LEVEL = 3


class LevelTooDeepError(ValueError):
    """The requested residual plane is smaller than the SSIM window."""

    def __init__(self, level: int, max_level: int, shape):
        self.level = level
        self.max_level = max_level
        hint = f"max admissible level is {max_level}" if max_level >= 0 else "no level is admissible"
        super().__init__(
            f"level {level} residual of a {shape[1]}x{shape[0]} image is smaller than the SSIM window; {hint}"
        )


@dataclass(frozen=True)
class SsimParams:
    """SSIM window and stabilising constants.

    ``window="uniform"`` swaps the Gaussian weights for a box, which is what
    the naive cross-checks use. ``color`` picks how 3-channel inputs are
    reduced: ``"luma"`` (Rec.601) or ``"mean"`` (mean of per-channel SSIM).
    """

    window_size: int = 11
    window_sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    data_range: float = 255.0
    window: str = "gaussian"
    color: str = "luma"

    def __post_init__(self):
        if self.window_size < 3 or self.window_size % 2 == 0:
            raise ValueError(f"window_size must be odd and >= 3, got {self.window_size}")
        if self.k1 <= 0 or self.k2 <= 0 or self.data_range <= 0:
            raise ValueError("k1, k2 and data_range must be positive")
        if self.window not in ("gaussian", "uniform"):
            raise ValueError(f"unknown window {self.window!r}")
        if self.color not in ("luma", "mean"):
            raise ValueError(f"unknown color mode {self.color!r}")

    @property
    def c1(self) -> float:
        return (self.k1 * self.data_range) ** 2

    @property
    def c2(self) -> float:
        return (self.k2 * self.data_range) ** 2

    def taps(self) -> np.ndarray:
        """1-D window weights; the 2-D window is their outer product."""
        if self.window == "uniform":
            return np.full(self.window_size, 1.0 / self.window_size)
        r = self.window_size // 2
        x = np.arange(-r, r + 1, dtype=np.float64)
        g = np.exp(-(x**2) / (2.0 * self.window_sigma**2))
        return g / g.sum()


def _valid_filter(img: np.ndarray, taps: np.ndarray) -> np.ndarray:
    # Border mode is irrelevant: windows touching the padding are cropped.
    r = taps.size // 2
    out = correlate1d(img, taps, axis=0, mode="nearest")
    out = correlate1d(out, taps, axis=1, mode="nearest")
    return out[r:-r, r:-r]


def ssim_map(a: np.ndarray, b: np.ndarray, p: SsimParams = SsimParams()) -> np.ndarray:
    """SSIM index at every window position lying fully inside the planes."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(
            f"image sizes differ: {a.shape[1]}x{a.shape[0]} vs {b.shape[1]}x{b.shape[0]}"
        )
    if a.ndim != 2:
        raise ValueError(f"expected 2-D planes, got shape {a.shape}")
    if min(a.shape) < p.window_size:
        raise ValueError(
            f"{a.shape[1]}x{a.shape[0]} image is smaller than the {p.window_size}x{p.window_size} window"
        )
    taps = p.taps()
    mu_a = _valid_filter(a, taps)
    mu_b = _valid_filter(b, taps)
    var_a = _valid_filter(a * a, taps) - mu_a * mu_a
    var_b = _valid_filter(b * b, taps) - mu_b * mu_b
    cov = _valid_filter(a * b, taps) - mu_a * mu_b
    c1, c2 = p.c1, p.c2
    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return num / den


def _planes(a, b, p: SsimParams):
    a = check_image(a)
    b = check_image(b)
    if a.shape != b.shape:
        raise ValueError(
            f"image sizes differ: {a.shape[1]}x{a.shape[0]} vs {b.shape[1]}x{b.shape[0]}"
        )
    if a.ndim == 2 or p.color == "luma":
        return [(to_luma(a), to_luma(b))]
    return [(a[..., c], b[..., c]) for c in range(a.shape[2])]


def ssim(a: np.ndarray, b: np.ndarray, p: SsimParams = SsimParams()) -> float:
    """Mean SSIM over valid window positions."""
    scores = [float(np.mean(ssim_map(x, y, p))) for x, y in _planes(a, b, p)]
    return float(np.mean(scores))


def max_level(h: int, w: int, p: SsimParams = SsimParams()) -> int:
    """Deepest level whose residual still fits the SSIM window (-1 if none)."""
    level = -1
    while min(h, w) >= p.window_size:
        level += 1
        h, w = halve(h), halve(w)
    return level


def lassim(
    a: np.ndarray,
    b: np.ndarray,
    level: int = DEFAULT_LEVEL,
    pyr: PyramidParams = PyramidParams(),
    p: SsimParams = SsimParams(),
) -> float:
    """SSIM between the level-``level`` Laplacian residuals of ``a`` and ``b``.

    The data range is left at the input range so scores stay comparable
    across images.
    """
    if level < 0:
        raise IndexError(f"level must be >= 0, got {level}")
    shape = np.shape(a)[:2]
    top = max_level(*shape, p)
    if level > top:
        raise LevelTooDeepError(level, top, shape)
    params = PyramidParams(level + 1, pyr.kernel)
    scores = [
        float(np.mean(ssim_map(residual_at(x, level, params), residual_at(y, level, params), p)))
        for x, y in _planes(a, b, p)
    ]
    return float(np.mean(scores))


def lassim_profile(
    a: np.ndarray,
    b: np.ndarray,
    levels=range(0, 5),
    pyr: PyramidParams = PyramidParams(),
    p: SsimParams = SsimParams(),
) -> list[tuple[int, float]]:
    """Per-level scores; entry 0 is pixel-space SSIM, entry l >= 1 is LaSSIM at level l."""
    out = []
    for level in levels:
        score = ssim(a, b, p) if level == 0 else lassim(a, b, level, pyr, p)
        out.append((level, score))
    return out
