"""Write the 480x272 evaluation corpus cropped from scikit-image's bundled images.

    python3 scripts/make_corpus.py data/corpus --count 600
"""

import argparse

from lassim.corpus import SOURCES, make_corpus


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out_dir")
    ap.add_argument("--count", type=int, default=600, help="number of crops (default: %(default)s)")
    ap.add_argument("--seed", type=int, default=2023, help="crop seed (default: %(default)s)")
    args = ap.parse_args()
    paths = make_corpus(args.out_dir, args.count, args.seed)
    print(f"wrote {len(paths)} crops from {len(SOURCES)} sources to {args.out_dir}")


if __name__ == "__main__":
    main()
