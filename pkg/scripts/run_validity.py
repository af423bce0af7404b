"""Build the corpus if needed, run the 3x3 validity experiment, print the table.

    python3 scripts/run_validity.py --corpus data/corpus --output runs/default
"""

import argparse
import logging
import time
from pathlib import Path

from lassim.corpus import make_corpus
from lassim.harness import ExperimentConfig, render_report, run_validity_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--corpus", default="data/corpus", help="image directory (default: %(default)s)")
    ap.add_argument("--count", type=int, default=600, help="crops to generate if the corpus is missing (default: %(default)s)")
    ap.add_argument("--output", default="runs/default", help="report directory (default: %(default)s)")
    ap.add_argument("--seed", type=int, default=0, help="degradation seed (default: %(default)s)")
    ap.add_argument("--jobs", type=int, default=1, help="worker processes (default: %(default)s)")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(levelname)s: %(message)s")

    corpus = Path(args.corpus)
    if not corpus.is_dir() or not any(corpus.glob("*.png")):
        make_corpus(corpus, args.count)
    cfg = ExperimentConfig(source_dir=str(corpus), output_dir=args.output, sample_count=args.count,
                           seed=args.seed, jobs=args.jobs)
    t0 = time.perf_counter()
    report = run_validity_experiment(cfg)
    print(render_report(report, "markdown"))
    print(f"{report.metadata['n_scored']} images, {time.perf_counter() - t0:.1f} s, "
          f"separation {'holds' if report.separation_holds() else 'FAILS'}")


if __name__ == "__main__":
    main()
