"""Validity experiment: degrade, score with SSIM and LaSSIM, compare score distributions.

For every blur level ``b`` and deformation level ``d`` the experiment scores
each clean image against its blurred copy and against its deformed-then-
blurred copy. If a metric tracks structure, the second score should be lower,
and the two score distributions should separate; the separation is measured
with the Jensen-Shannon divergence.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .degrade import (
    BLUR_LEVELS,
    ELASTIC_LEVELS,
    LEVELS,
    blur_specs,
    degrade_image,
    elastic_specs,
    image_seed,
    list_images,
    set_name,
)
from .image import DecodeError, UnsupportedFormatError, read_image, write_image
from .metrics import DEFAULT_LEVEL, LevelTooDeepError, SsimParams, lassim, ssim
from .pyramid import PyramidParams
from .stats import build_distribution, js_divergence, summarize

log = logging.getLogger(__name__)

METRICS = ("ssim", "lassim")


@dataclass(frozen=True)
class ExperimentConfig:
    source_dir: str = "."
    output_dir: str = "out"
    sample_count: int = 1000
    level: int = DEFAULT_LEVEL
    pyramid: PyramidParams = PyramidParams()
    ssim: SsimParams = SsimParams()
    blur_levels: tuple[str, ...] = LEVELS
    deform_levels: tuple[str, ...] = LEVELS
    blur_table: dict = field(default_factory=lambda: dict(BLUR_LEVELS))
    elastic_table: dict = field(default_factory=lambda: dict(ELASTIC_LEVELS))
    seed: int = 0
    bins: int = 100
    jobs: int = 1
    save_sets: bool = False

    def __post_init__(self):
        if self.sample_count < 1:
            raise ValueError(f"sample_count must be >= 1, got {self.sample_count}")
        if self.level < 0:
            raise ValueError(f"level must be >= 0, got {self.level}")
        for lv in self.blur_levels:
            if lv not in self.blur_table:
                raise ValueError(f"no blur intensity configured for level {lv!r}")
        for lv in self.deform_levels:
            if lv not in self.elastic_table:
                raise ValueError(f"no elastic intensity configured for level {lv!r}")
        if not self.blur_levels:
            raise ValueError("at least one blur level is required")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pyramid"]["kernel"] = list(self.pyramid.kernel)
        d["blur_levels"] = list(self.blur_levels)
        d["deform_levels"] = list(self.deform_levels)
        d["elastic_table"] = {k: list(v) for k, v in self.elastic_table.items()}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        d = dict(d)
        if "pyramid" in d:
            pyr = dict(d["pyramid"])
            if "kernel" in pyr:
                pyr["kernel"] = tuple(pyr["kernel"])
            d["pyramid"] = PyramidParams(**pyr)
        if "ssim" in d:
            d["ssim"] = SsimParams(**d["ssim"])
        for key in ("blur_levels", "deform_levels"):
            if key in d:
                d[key] = tuple(d[key])
        if "blur_table" in d:
            d["blur_table"] = {k: float(v) for k, v in d["blur_table"].items()}
        if "elastic_table" in d:
            d["elastic_table"] = {k: tuple(float(x) for x in v) for k, v in d["elastic_table"].items()}
        return cls(**d)


@dataclass
class ReportRow:
    deform: str | None
    blur: str
    n: int
    ssim_blur_mean: float
    ssim_blur_std: float
    lassim_blur_mean: float
    lassim_blur_std: float
    ssim_deform_blur_mean: float | None = None
    ssim_deform_blur_std: float | None = None
    lassim_deform_blur_mean: float | None = None
    lassim_deform_blur_std: float | None = None
    js_ssim: float | None = None
    js_lassim: float | None = None

    @property
    def label(self) -> str:
        return f"[{self.deform or '-'}_def, {self.blur}_blur]"

    @property
    def combination(self) -> str:
        return set_name(self.blur, self.deform)


@dataclass
class ValidityReport:
    rows: list[ReportRow]
    metadata: dict = field(default_factory=dict)

    def separation_holds(self) -> bool:
        """JS_LaSSIM >= JS_SSIM in every row that has a deformation."""
        return all(r.js_lassim >= r.js_ssim for r in self.rows if r.js_ssim is not None)

    def row(self, deform: str | None, blur: str) -> ReportRow:
        for r in self.rows:
            if r.deform == deform and r.blur == blur:
                return r
        raise KeyError((deform, blur))


# --- per-image scoring -------------------------------------------------------


def _score_image(args):
    """Scores for one image, or an error string."""
    path, seed, cfg = args
    try:
        img = read_image(path)
    except (DecodeError, UnsupportedFormatError, OSError) as exc:
        return path.name, None, f"undecodable: {exc}"
    blurs = blur_specs(cfg.blur_levels, cfg.blur_table)
    deforms = elastic_specs(cfg.deform_levels, cfg.elastic_table)
    try:
        outputs = degrade_image(img, blurs, deforms, seed)
        gt = outputs["gt"]
        scores = {}
        for name, degraded in outputs.items():
            if name == "gt":
                continue
            scores[name] = (ssim(gt, degraded, cfg.ssim), lassim(gt, degraded, cfg.level, cfg.pyramid, cfg.ssim))
    except LevelTooDeepError as exc:
        return path.name, None, f"too small: {exc}"
    except ValueError as exc:
        return path.name, None, f"skipped: {exc}"
    if cfg.save_sets:
        out = Path(cfg.output_dir) / "sets"
        for name, arr in outputs.items():
            write_image(out / name / f"{path.stem}.png", arr)
    return path.name, scores, None


def select_images(cfg: ExperimentConfig) -> list[tuple[int, Path]]:
    """(index, path) pairs; index is the position in the sorted source listing."""
    files = list_images(cfg.source_dir)
    indexed = list(enumerate(files))
    if len(files) < cfg.sample_count:
        log.warning("only %d images in %s; using all of them (requested %d)", len(files), cfg.source_dir, cfg.sample_count)
        return indexed
    rng = np.random.default_rng(cfg.seed)
    chosen = sorted(rng.choice(len(files), size=cfg.sample_count, replace=False).tolist())
    return [indexed[i] for i in chosen]


def _summary(values):
    s = summarize(values)
    return s.mean, s.std


def _build_rows(cfg: ExperimentConfig, per_image: list[dict]) -> list[ReportRow]:
    rows = []
    for b in cfg.blur_levels:
        blur_key = set_name(b)
        sb = [s[blur_key][0] for s in per_image]
        lb = [s[blur_key][1] for s in per_image]
        base = dict(
            blur=b,
            n=len(per_image),
            ssim_blur_mean=_summary(sb)[0],
            ssim_blur_std=_summary(sb)[1],
            lassim_blur_mean=_summary(lb)[0],
            lassim_blur_std=_summary(lb)[1],
        )
        if not cfg.deform_levels:
            rows.append(ReportRow(deform=None, **base))
            continue
        for d in cfg.deform_levels:
            key = set_name(b, d)
            sdb = [s[key][0] for s in per_image]
            ldb = [s[key][1] for s in per_image]
            js = {}
            for metric, x, y in (("ssim", sb, sdb), ("lassim", lb, ldb)):
                p = build_distribution(x, cfg.bins)
                q = build_distribution(y, cfg.bins)
                js[metric] = js_divergence(p, q, metric, (d, b)).js
            rows.append(
                ReportRow(
                    deform=d,
                    ssim_deform_blur_mean=_summary(sdb)[0],
                    ssim_deform_blur_std=_summary(sdb)[1],
                    lassim_deform_blur_mean=_summary(ldb)[0],
                    lassim_deform_blur_std=_summary(ldb)[1],
                    js_ssim=js["ssim"],
                    js_lassim=js["lassim"],
                    **base,
                )
            )
    return rows


def run_validity_experiment(cfg: ExperimentConfig, write: bool = True) -> ValidityReport:
    """Run the whole experiment; output is independent of ``cfg.jobs``."""
    t0 = time.perf_counter()
    selected = select_images(cfg)
    if not selected:
        raise FileNotFoundError(f"no images found in {cfg.source_dir}")
    tasks = [(path, image_seed(cfg.seed, idx), cfg) for idx, path in selected]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(cfg.jobs) as pool:
            results = list(pool.map(_score_image, tasks, chunksize=4))
    else:
        results = [_score_image(t) for t in tasks]

    results.sort(key=lambda r: r[0])
    skipped = {name: err for name, _, err in results if err is not None}
    for name, err in skipped.items():
        log.warning("%s %s", name, err)
    scored = [(name, scores) for name, scores, err in results if err is None]
    if not scored:
        raise RuntimeError(f"no image in {cfg.source_dir} could be scored ({len(skipped)} skipped)")

    names = [n for n, _ in scored]
    per_image = [s for _, s in scored]
    report = ValidityReport(
        _build_rows(cfg, per_image),
        {
            "config": cfg.to_dict(),
            "n_scored": len(scored),
            "n_skipped": len(skipped),
            "skipped": skipped,
            "wall_time_s": time.perf_counter() - t0,
        },
    )
    if write:
        write_outputs(cfg, report, names, per_image, {p.name: image_seed(cfg.seed, i) for i, p in selected})
    return report


# --- outputs -----------------------------------------------------------------


def write_outputs(cfg, report, names, per_image, seeds) -> None:
    out = Path(cfg.output_dir)
    (out / "scores").mkdir(parents=True, exist_ok=True)
    (out / "distributions").mkdir(parents=True, exist_ok=True)
    for fmt, fname in (("markdown", "report.md"), ("csv", "report.csv"), ("json", "report.json")):
        (out / fname).write_text(render_report(report, fmt))

    for row in report.rows:
        cols = ["ssim_blur", "lassim_blur"]
        keys = [set_name(row.blur)]
        if row.deform is not None:
            cols += ["ssim_deform_blur", "lassim_deform_blur"]
            keys.append(row.combination)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["name"] + cols)
        for name, scores in zip(names, per_image):
            values = []
            for key in keys:
                values += [repr(scores[key][0]), repr(scores[key][1])]
            writer.writerow([name] + values)
        (out / "scores" / f"{row.combination}.csv").write_text(buf.getvalue())

        for key in keys:
            for m, metric in enumerate(METRICS):
                dist = build_distribution([s[key][m] for s in per_image], cfg.bins)
                (out / "distributions" / f"{key}_{metric}.csv").write_text(dist.to_csv())

    manifest = {
        "config": cfg.to_dict(),
        "images": [{"name": n, "seed": seeds[n]} for n in names],
        "skipped": report.metadata.get("skipped", {}),
        "wall_time_s": report.metadata.get("wall_time_s"),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _fmt_ms(mean, std):
    return "" if mean is None else f"{mean:.3f}±{std:.3f}"


def _fmt(x):
    return "" if x is None else f"{x:.3f}"


def render_markdown(report: ValidityReport) -> str:
    header = [
        "[def, blur]",
        "SSIM(GT, blur)",
        "SSIM(GT, deform+blur)",
        "JS_SSIM",
        "LaSSIM(GT, blur)",
        "LaSSIM(GT, deform+blur)",
        "JS_LaSSIM",
    ]
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    for r in report.rows:
        cells = [
            r.label,
            _fmt_ms(r.ssim_blur_mean, r.ssim_blur_std),
            _fmt_ms(r.ssim_deform_blur_mean, r.ssim_deform_blur_std),
            _fmt(r.js_ssim),
            _fmt_ms(r.lassim_blur_mean, r.lassim_blur_std),
            _fmt_ms(r.lassim_deform_blur_mean, r.lassim_deform_blur_std),
            _fmt(r.js_lassim),
        ]
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


_ROW_FIELDS = [f.name for f in fields(ReportRow)]


def render_report(report: ValidityReport, fmt: str = "markdown") -> str:
    if fmt == "markdown":
        return render_markdown(report)
    if fmt == "json":
        return json.dumps({"rows": [asdict(r) for r in report.rows], "metadata": report.metadata}, indent=2, sort_keys=True) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        buf.write("# metadata: " + json.dumps(report.metadata, sort_keys=True) + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(_ROW_FIELDS)
        for r in report.rows:
            writer.writerow(["" if v is None else repr(v) if isinstance(v, float) else v for v in (getattr(r, k) for k in _ROW_FIELDS)])
        return buf.getvalue()
    raise ValueError(f"unknown report format {fmt!r}")


def report_from_json(text: str) -> ValidityReport:
    d = json.loads(text)
    return ValidityReport([ReportRow(**r) for r in d["rows"]], d.get("metadata", {}))


def report_from_csv(text: str) -> ValidityReport:
    lines = text.splitlines()
    metadata = {}
    if lines and lines[0].startswith("# metadata: "):
        metadata = json.loads(lines[0][len("# metadata: ") :])
        lines = lines[1:]
    rows = []
    for rec in csv.DictReader(lines):
        kw = {}
        for k in _ROW_FIELDS:
            v = rec[k]
            if v == "":
                kw[k] = None
            elif k == "n":
                kw[k] = int(v)
            elif k in ("deform", "blur"):
                kw[k] = v
            else:
                kw[k] = float(v)
        rows.append(ReportRow(**kw))
    return ValidityReport(rows, metadata)


# --- pairwise scoring of two directories --------------------------------------


@dataclass
class PairScores:
    rows: list[tuple[str, float]]
    only_a: list[str]
    only_b: list[str]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["name", "score"])
        for name, score in self.rows:
            writer.writerow([name, f"{score:.6f}"])
        return buf.getvalue()


def score_pairs(
    set_a_dir,
    set_b_dir,
    metric: str = "ssim",
    level: int = DEFAULT_LEVEL,
    pyr: PyramidParams = PyramidParams(),
    p: SsimParams = SsimParams(),
) -> PairScores:
    """Score same-named images of two directories against each other."""
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}")
    a = {f.name: f for f in list_images(set_a_dir)}
    b = {f.name: f for f in list_images(set_b_dir)}
    common = sorted(set(a) & set(b))
    if not common:
        raise FileNotFoundError(f"no common filenames between {set_a_dir} and {set_b_dir}")
    rows = []
    for name in common:
        x, y = read_image(a[name]), read_image(b[name])
        score = ssim(x, y, p) if metric == "ssim" else lassim(x, y, level, pyr, p)
        rows.append((name, score))
    return PairScores(rows, sorted(set(a) - set(b)), sorted(set(b) - set(a)))
