"""Blur and elastic-deformation degradations, and the GT / blur / deform+blur set builder."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.ndimage import correlate1d

from .image import DecodeError, UnsupportedFormatError, check_image, quantize, read_image, sample_bilinear, write_image

log = logging.getLogger(__name__)

LEVELS = ("L", "M", "H")
IMAGE_SUFFIXES = (".png", ".ppm", ".pgm", ".pnm")

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def image_seed(global_seed: int, index: int) -> int:
    """Per-image seed; independent of which other images are processed."""
    return splitmix64(splitmix64(global_seed & _MASK64) ^ (index & _MASK64))


def gaussian_taps(sigma: float, extent: int) -> np.ndarray:
    r = extent // 2
    x = np.arange(-r, r + 1, dtype=np.float64)
    g = np.exp(-(x**2) / (2.0 * sigma**2))
    return g / g.sum()


def default_extent(sigma: float) -> int:
    n = int(round(6 * sigma)) + 1
    return max(3, n if n % 2 else n + 1)


@dataclass(frozen=True)
class BlurSpec:
    sigma: float
    kernel_extent: int | None = None
    label: str = ""

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError(f"blur sigma must be > 0, got {self.sigma}")
        if self.kernel_extent is None:
            object.__setattr__(self, "kernel_extent", default_extent(self.sigma))
        if self.kernel_extent < 3 or self.kernel_extent % 2 == 0:
            raise ValueError(f"kernel extent must be odd and >= 3, got {self.kernel_extent}")


@dataclass(frozen=True)
class ElasticSpec:
    sigma: float
    alpha: float
    seed: int = 0
    label: str = ""

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError(f"elastic sigma must be > 0, got {self.sigma}")
        if self.alpha < 0:
            raise ValueError(f"elastic alpha must be >= 0, got {self.alpha}")


# Calibrated for 480x272-class images; see README for how they were chosen.
# With smoothing sigma 8 an alpha of 1 gives ~0.0212 px of displacement std,
# so L/M/H move pixels by roughly 1.5, 3 and 4.5 px.
BLUR_LEVELS = {"L": 3.0, "M": 5.0, "H": 7.0}
ELASTIC_LEVELS = {"L": (8.0, 70.0), "M": (8.0, 140.0), "H": (8.0, 210.0)}


def _per_channel(img: np.ndarray, fn) -> np.ndarray:
    if img.ndim == 2:
        return fn(img)
    return np.stack([fn(img[..., c]) for c in range(img.shape[2])], axis=-1)


def _smooth(plane: np.ndarray, taps: np.ndarray) -> np.ndarray:
    out = correlate1d(plane, taps, axis=0, mode="mirror")
    return correlate1d(out, taps, axis=1, mode="mirror")


def gaussian_blur(img: np.ndarray, spec: BlurSpec) -> np.ndarray:
    """Separable Gaussian blur with mirrored borders (gray or RGB)."""
    img = check_image(img)
    h, w = img.shape[:2]
    if min(h, w) < spec.kernel_extent:
        raise ValueError(f"{w}x{h} image is smaller than the {spec.kernel_extent}-tap blur kernel")
    taps = gaussian_taps(spec.sigma, spec.kernel_extent)
    return _per_channel(img, lambda plane: _smooth(plane, taps))


@dataclass(frozen=True)
class DisplacementField:
    dx: np.ndarray
    dy: np.ndarray

    @property
    def shape(self):
        return self.dx.shape


def make_displacement_field(w: int, h: int, spec: ElasticSpec) -> DisplacementField:
    """Uniform[-1, 1] noise per pixel, Gaussian-smoothed, scaled by alpha."""
    if w < 1 or h < 1:
        raise ValueError(f"field size must be positive, got {w}x{h}")
    rng = np.random.default_rng(spec.seed)
    dx = rng.uniform(-1.0, 1.0, size=(h, w))
    dy = rng.uniform(-1.0, 1.0, size=(h, w))
    taps = gaussian_taps(spec.sigma, default_extent(spec.sigma))
    return DisplacementField(_smooth(dx, taps) * spec.alpha, _smooth(dy, taps) * spec.alpha)


def elastic_transform(img: np.ndarray, field: DisplacementField) -> np.ndarray:
    """out(x, y) = img(x + dx, y + dy), bilinear and edge-clamped."""
    img = check_image(img)
    if field.shape != img.shape[:2]:
        raise ValueError(f"field shape {field.shape} does not match image shape {img.shape[:2]}")
    h, w = field.shape
    yy, xx = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij")
    ys, xs = yy + field.dy, xx + field.dx
    return _per_channel(img, lambda plane: sample_bilinear(plane, ys, xs))


def blur_specs(levels, table=None) -> dict[str, BlurSpec]:
    table = BLUR_LEVELS if table is None else table
    return {lv: BlurSpec(float(table[lv]), label=lv) for lv in levels}


def elastic_specs(levels, table=None) -> dict[str, ElasticSpec]:
    table = ELASTIC_LEVELS if table is None else table
    return {lv: ElasticSpec(float(table[lv][0]), float(table[lv][1]), label=lv) for lv in levels}


def set_name(blur: str, deform: str | None = None) -> str:
    return f"blur_{blur}" if deform is None else f"def_{deform}_blur_{blur}"


def degrade_image(
    img: np.ndarray,
    blurs: dict[str, BlurSpec],
    deforms: dict[str, ElasticSpec],
    seed: int,
    quantized: bool = True,
) -> dict[str, np.ndarray]:
    """All degraded versions of one image, keyed by set name.

    Deformation is applied first and blur on top. The same noise seed is
    used at every deformation level so levels differ only in alpha.
    With ``quantized`` every output is rounded to 8 bits, which makes the
    in-memory results identical to what the written PNGs decode to.
    """
    img = check_image(img)
    finish = quantize if quantized else (lambda x: x)
    h, w = img.shape[:2]
    out = {"gt": finish(img)}
    for b, bspec in blurs.items():
        out[set_name(b)] = finish(gaussian_blur(img, bspec))
    for d, dspec in deforms.items():
        field = make_displacement_field(w, h, ElasticSpec(dspec.sigma, dspec.alpha, seed, d))
        warped = elastic_transform(img, field)
        for b, bspec in blurs.items():
            out[set_name(b, d)] = finish(gaussian_blur(warped, bspec))
    return out


def list_images(src_dir: str | Path) -> list[Path]:
    src_dir = Path(src_dir)
    return sorted(p for p in src_dir.iterdir() if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)


class IngestionError(RuntimeError):
    def __init__(self, message: str, failures: dict[str, str] | None = None):
        self.failures = failures or {}
        detail = "".join(f"\n  {k}: {v}" for k, v in self.failures.items())
        super().__init__(message + detail)


@dataclass
class TripletSets:
    out_dir: Path
    names: list[str]
    sets: list[str]
    failures: dict[str, str] = field(default_factory=dict)

    def path(self, set_name: str, name: str) -> Path:
        return self.out_dir / set_name / f"{Path(name).stem}.png"


def _degrade_one(args):
    path, out_dir, blurs, deforms, seed = args
    try:
        img = read_image(path)
    except (DecodeError, UnsupportedFormatError, OSError) as exc:
        return path.name, str(exc)
    try:
        outputs = degrade_image(img, blurs, deforms, seed)
    except ValueError as exc:
        return path.name, str(exc)
    for name, arr in outputs.items():
        write_image(out_dir / name / f"{path.stem}.png", arr)
    return path.name, None


def make_triplet_sets(
    src_dir: str | Path,
    out_dir: str | Path,
    blur_levels=LEVELS,
    deform_levels=LEVELS,
    seed: int = 0,
    blur_table=None,
    elastic_table=None,
    jobs: int = 1,
) -> TripletSets:
    """Write ``gt/``, ``blur_<b>/`` and ``def_<d>_blur_<b>/`` sets plus ``manifest.json``.

    Per-image seeds come from (seed, index in the sorted source listing).
    """
    src_dir, out_dir = Path(src_dir), Path(out_dir)
    files = list_images(src_dir)
    if not files:
        raise IngestionError(f"no images found in {src_dir}")
    blurs = blur_specs(blur_levels, blur_table)
    deforms = elastic_specs(deform_levels, elastic_table)
    sets = ["gt"] + [set_name(b) for b in blurs] + [set_name(b, d) for d in deforms for b in blurs]
    for s in sets:
        (out_dir / s).mkdir(parents=True, exist_ok=True)

    tasks = [(p, out_dir, blurs, deforms, image_seed(seed, i)) for i, p in enumerate(files)]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            results = list(pool.map(_degrade_one, tasks))
    else:
        results = [_degrade_one(t) for t in tasks]

    failures = {name: err for name, err in results if err is not None}
    names = [name for name, err in results if err is None]
    if not names:
        raise IngestionError(f"no decodable images in {src_dir}", failures)
    for name, err in failures.items():
        log.warning("skipped %s: %s", name, err)

    manifest = {
        "source_dir": str(src_dir),
        "seed": seed,
        "blur": {k: asdict(v) for k, v in blurs.items()},
        "elastic": {k: {"sigma": v.sigma, "alpha": v.alpha} for k, v in deforms.items()},
        "order": "deform_then_blur",
        "images": [
            {"name": p.name, "index": i, "seed": image_seed(seed, i)}
            for i, p in enumerate(files)
            if p.name not in failures
        ],
        "failures": failures,
        "sets": sets,
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return TripletSets(out_dir, names, sets, failures)
