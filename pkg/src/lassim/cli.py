"""``lassim`` command line: ssim, lassim, pyramid, degrade, validate, score-pairs.

Exit codes: 0 success, 1 usage/config/IO error, 2 ``validate`` ran but the
separation property (JS_LaSSIM >= JS_SSIM in every row) failed.
Results go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import degrade, harness
from .image import DecodeError, UnsupportedFormatError, read_image, to_luma
from .metrics import DEFAULT_LEVEL, LevelTooDeepError, SsimParams, lassim, lassim_profile, ssim
from .pyramid import BINOMIAL5, PyramidParams, build_pyramid, export_residuals

log = logging.getLogger("lassim")

EXIT_OK, EXIT_ERROR, EXIT_SEPARATION = 0, 1, 2
SEED_ENV = "LASSIM_SEED"


class CliError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    # Usage errors exit 1; exit 2 is reserved for a failed separation check.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _levels(text: str) -> tuple[str, ...]:
    items = tuple(s.strip().upper() for s in text.split(",") if s.strip())
    bad = [s for s in items if s not in degrade.LEVELS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown intensity level(s) {bad}; use L, M, H")
    return items


def _blur_table(text: str) -> dict:
    """``L=2,M=3,H=4``"""
    try:
        return {k.strip().upper(): float(v) for k, v in (kv.split("=") for kv in text.split(","))}
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LEVEL=SIGMA[,...], got {text!r}") from None


def _elastic_table(text: str) -> dict:
    """``L=12:150,M=12:300``"""
    try:
        out = {}
        for kv in text.split(","):
            k, v = kv.split("=")
            sigma, alpha = v.split(":")
            out[k.strip().upper()] = (float(sigma), float(alpha))
        return out
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LEVEL=SIGMA:ALPHA[,...], got {text!r}") from None


def _profile_range(text: str) -> range:
    try:
        lo, hi = text.split("..")
        return range(int(lo), int(hi) + 1)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO..HI, got {text!r}") from None


def _add_ssim_flags(p: argparse.ArgumentParser) -> None:
    d = SsimParams()
    g = p.add_argument_group("SSIM parameters")
    g.add_argument("--window-size", type=int, default=None, help=f"SSIM window size in pixels, odd (default: {d.window_size})")
    g.add_argument("--window-sigma", type=float, default=None, help=f"Gaussian window sigma (default: {d.window_sigma})")
    g.add_argument("--k1", type=float, default=None, help=f"luminance constant K1 (default: {d.k1})")
    g.add_argument("--k2", type=float, default=None, help=f"contrast constant K2 (default: {d.k2})")
    g.add_argument("--data-range", type=float, default=None, help=f"dynamic range L (default: {d.data_range:g})")
    g.add_argument("--window", choices=["gaussian", "uniform"], default=None, help=f"window weights (default: {d.window})")
    g.add_argument("--color", choices=["luma", "mean"], default=None, help=f"RGB policy: Rec.601 luma or mean of per-channel scores (default: {d.color})")


def _ssim_params(args, base: SsimParams | None = None) -> SsimParams:
    base = base or SsimParams()
    over = {
        k: getattr(args, k)
        for k in ("window_size", "window_sigma", "k1", "k2", "data_range", "window", "color")
        if getattr(args, k, None) is not None
    }
    return replace(base, **over)


def _kernel(args) -> tuple[float, ...]:
    if getattr(args, "kernel", None) is None:
        return BINOMIAL5
    return tuple(args.kernel)


def _add_kernel_flag(p):
    p.add_argument(
        "--kernel", type=float, nargs="+", default=None, metavar="TAP",
        help="pyramid low-pass taps, odd length, symmetric, summing to 1 (default: 1/16 4/16 6/16 4/16 1/16)",
    )


def build_parser() -> Parser:
    parser = Parser(prog="lassim", description="SSIM / LaSSIM structure-preservation metrics and validity experiment.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more diagnostics on stderr (default: 0)")
    parser.add_argument("-q", "--quiet", action="store_true", help="only errors on stderr (default: False)")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=Parser)
    sub.required = True

    p = sub.add_parser("ssim", help="pixel-space SSIM between two images", description="Print SSIM(a, b) with 6 decimals.")
    p.add_argument("a", help="first image (PNG/PPM/PGM)")
    p.add_argument("b", help="second image, same size")
    _add_ssim_flags(p)

    p = sub.add_parser("lassim", help="SSIM between Laplacian residuals", description="Print LaSSIM_l(a, b) with 6 decimals.")
    p.add_argument("a", help="first image (PNG/PPM/PGM)")
    p.add_argument("b", help="second image, same size")
    p.add_argument("--level", type=int, default=DEFAULT_LEVEL, help="pyramid residual level l (default: %(default)s)")
    p.add_argument("--profile", type=_profile_range, default=None, metavar="LO..HI",
                   help="print 'level,score' for each level in LO..HI; level 0 is pixel SSIM (default: off)")
    _add_kernel_flag(p)
    _add_ssim_flags(p)

    p = sub.add_parser("pyramid", help="export Laplacian residual planes as PNG", description="Write level_<l>.png (x/2+128) and level_top.png.")
    p.add_argument("image", help="input image")
    p.add_argument("out_dir", help="output directory")
    p.add_argument("--levels", type=int, default=4, help="number of residual levels L (default: %(default)s)")
    _add_kernel_flag(p)

    p = sub.add_parser("degrade", help="write GT / blur / deform+blur image sets", description="Build degraded image sets under OUT_DIR.")
    p.add_argument("src_dir", help="directory of source images")
    p.add_argument("out_dir", help="output directory")
    p.add_argument("--blur", type=_levels, default=degrade.LEVELS, help="blur levels, comma separated (default: L,M,H)")
    p.add_argument("--deform", type=_levels, default=(), help="deformation levels, comma separated (default: none)")
    p.add_argument("--blur-table", type=_blur_table, default=None, metavar="L=S,...",
                   help="blur sigma per level (default: " + ",".join(f"{k}={v:g}" for k, v in degrade.BLUR_LEVELS.items()) + ")")
    p.add_argument("--elastic-table", type=_elastic_table, default=None, metavar="L=S:A,...",
                   help="elastic sigma:alpha per level (default: " + ",".join(f"{k}={s:g}:{a:g}" for k, (s, a) in degrade.ELASTIC_LEVELS.items()) + ")")
    p.add_argument("--seed", type=int, default=None, help=f"global seed (default: ${SEED_ENV} or 0)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (default: %(default)s)")

    d = harness.ExperimentConfig()
    p = sub.add_parser("validate", help="run the SSIM vs LaSSIM validity experiment",
                       description="Run the experiment, write report files and print the table. Exit 0 iff JS_LaSSIM >= JS_SSIM in every row, else 2.")
    p.add_argument("--config", default=None, help="JSON config file; flags override it (default: none)")
    p.add_argument("--source", default=None, help="directory of clean images (default: current directory)")
    p.add_argument("--output", default=None, help=f"output directory (default: {d.output_dir})")
    p.add_argument("--samples", type=int, default=None, help=f"number of images to sample (default: {d.sample_count})")
    p.add_argument("--level", type=int, default=None, help=f"LaSSIM level l (default: {d.level})")
    p.add_argument("--blur-levels", type=_levels, default=None, help="blur levels (default: L,M,H)")
    p.add_argument("--deform-levels", type=_levels, default=None, help="deformation levels (default: L,M,H)")
    p.add_argument("--blur-table", type=_blur_table, default=None, metavar="L=S,...", help="blur sigma per level (default: built-in table)")
    p.add_argument("--elastic-table", type=_elastic_table, default=None, metavar="L=S:A,...", help="elastic sigma:alpha per level (default: built-in table)")
    p.add_argument("--bins", type=int, default=None, help=f"histogram bins on [0, 1] (default: {d.bins})")
    p.add_argument("--seed", type=int, default=None, help=f"global seed (default: config, then ${SEED_ENV}, then 0)")
    p.add_argument("--jobs", type=int, default=None, help="worker processes; results do not depend on it (default: 1)")
    p.add_argument("--save-sets", action="store_true", default=None, help="also write the degraded image sets (default: False)")
    _add_kernel_flag(p)
    _add_ssim_flags(p)

    p = sub.add_parser("score-pairs", help="score same-named images of two directories", description="Print a 'name,score' CSV for every filename present in both directories.")
    p.add_argument("a_dir", help="reference image directory")
    p.add_argument("b_dir", help="compared image directory")
    p.add_argument("--metric", choices=["ssim", "lassim"], default="ssim", help="metric (default: %(default)s)")
    p.add_argument("--level", type=int, default=DEFAULT_LEVEL, help="LaSSIM level (default: %(default)s)")
    p.add_argument("-o", "--output", default=None, help="write the CSV here instead of stdout (default: stdout)")
    _add_kernel_flag(p)
    _add_ssim_flags(p)
    return parser


def _env_seed() -> int | None:
    value = os.environ.get(SEED_ENV)
    if value is None:
        return None
    try:
        return int(value)
    except ValueError:
        raise CliError(f"{SEED_ENV}={value!r} is not an integer") from None


def _load_pair(a, b):
    x, y = read_image(a), read_image(b)
    if x.shape[:2] != y.shape[:2]:
        raise CliError(f"image sizes differ: {a} is {x.shape[1]}x{x.shape[0]}, {b} is {y.shape[1]}x{y.shape[0]}")
    return x, y


def cmd_ssim(args) -> int:
    x, y = _load_pair(args.a, args.b)
    print(f"{ssim(x, y, _ssim_params(args)):.6f}")
    return EXIT_OK


def cmd_lassim(args) -> int:
    x, y = _load_pair(args.a, args.b)
    p = _ssim_params(args)
    pyr = PyramidParams(kernel=_kernel(args))
    if args.profile is not None:
        for level, score in lassim_profile(x, y, args.profile, pyr, p):
            print(f"{level},{score:.6f}")
    else:
        print(f"{lassim(x, y, args.level, pyr, p):.6f}")
    return EXIT_OK


def cmd_pyramid(args) -> int:
    img = to_luma(read_image(args.image))
    pyr = build_pyramid(img, PyramidParams(args.levels, _kernel(args)))
    for path in export_residuals(pyr, args.out_dir):
        print(path)
    return EXIT_OK


def cmd_degrade(args) -> int:
    seed = args.seed if args.seed is not None else (_env_seed() or 0)
    sets = degrade.make_triplet_sets(
        args.src_dir, args.out_dir, args.blur, args.deform, seed,
        blur_table=args.blur_table, elastic_table=args.elastic_table, jobs=args.jobs,
    )
    for name in sets.sets:
        print(Path(args.out_dir) / name)
    return EXIT_OK


def experiment_config(args) -> harness.ExperimentConfig:
    """Flags > config file > LASSIM_SEED (seed only) > built-in defaults."""
    base = {}
    if args.config is not None:
        try:
            base = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(base, dict):
            raise CliError(f"config {args.config} must hold a JSON object")
    if "seed" not in base and (env := _env_seed()) is not None:
        base["seed"] = env
    try:
        cfg = harness.ExperimentConfig.from_dict(base)
    except (TypeError, ValueError) as exc:
        raise CliError(f"invalid config: {exc}") from None
    flags = {
        "source_dir": args.source,
        "output_dir": args.output,
        "sample_count": args.samples,
        "level": args.level,
        "blur_levels": args.blur_levels,
        "deform_levels": args.deform_levels,
        "blur_table": args.blur_table,
        "elastic_table": args.elastic_table,
        "bins": args.bins,
        "seed": args.seed,
        "jobs": args.jobs,
        "save_sets": args.save_sets,
    }
    over = {k: v for k, v in flags.items() if v is not None}
    if args.kernel is not None:
        over["pyramid"] = replace(cfg.pyramid, kernel=tuple(args.kernel))
    over["ssim"] = _ssim_params(args, cfg.ssim)
    try:
        return replace(cfg, **over)
    except (TypeError, ValueError) as exc:
        raise CliError(f"invalid config: {exc}") from None


def cmd_validate(args) -> int:
    cfg = experiment_config(args)
    if not Path(cfg.source_dir).is_dir():
        raise CliError(f"source directory {cfg.source_dir} does not exist")
    report = harness.run_validity_experiment(cfg)
    sys.stdout.write(harness.render_report(report, "markdown"))
    if report.separation_holds():
        return EXIT_OK
    log.error("separation property violated: JS_LaSSIM < JS_SSIM in at least one row")
    return EXIT_SEPARATION


def cmd_score_pairs(args) -> int:
    result = harness.score_pairs(
        args.a_dir, args.b_dir, args.metric, args.level, PyramidParams(kernel=_kernel(args)), _ssim_params(args)
    )
    for name in result.only_a:
        log.warning("no match in %s for %s", args.b_dir, name)
    for name in result.only_b:
        log.warning("no match in %s for %s", args.a_dir, name)
    text = result.to_csv()
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {
    "ssim": cmd_ssim,
    "lassim": cmd_lassim,
    "pyramid": cmd_pyramid,
    "degrade": cmd_degrade,
    "validate": cmd_validate,
    "score-pairs": cmd_score_pairs,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.ERROR if args.quiet else (logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)]
    logging.basicConfig(level=level, format="%(levelname)s: %(message)s", stream=sys.stderr, force=True)
    try:
        return COMMANDS[args.command](args)
    except (CliError, DecodeError, UnsupportedFormatError, LevelTooDeepError, FileNotFoundError,
            degrade.IngestionError, ValueError, OSError, RuntimeError) as exc:
        print(f"lassim {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
