"""Mean SSIM / LaSSIM_l for l = 0..4 under intensity shift, blur and elastic deformation.

Prints one CSV row per (degradation, level). Level 0 is pixel SSIM.

    python3 scripts/level_profile.py data/corpus --limit 40
"""

import argparse

import numpy as np

from lassim.degrade import BLUR_LEVELS, ELASTIC_LEVELS, BlurSpec, ElasticSpec, elastic_transform, gaussian_blur, image_seed, list_images, make_displacement_field
from lassim.image import quantize, read_image, to_luma
from lassim.metrics import lassim_profile


def degradations(img, seed):
    h, w = img.shape
    # Clipped like a real brightness change, so LaSSIM dips slightly below 1.
    yield "offset50_clipped", np.clip(img + 50, 0, 255)
    for lv, sigma in BLUR_LEVELS.items():
        yield f"blur_{lv}", gaussian_blur(img, BlurSpec(sigma))
    for lv, (sigma, alpha) in ELASTIC_LEVELS.items():
        yield f"def_{lv}", elastic_transform(img, make_displacement_field(w, h, ElasticSpec(sigma, alpha, seed)))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("src_dir")
    ap.add_argument("--limit", type=int, default=40, help="images to use (default: %(default)s)")
    ap.add_argument("--seed", type=int, default=0, help="deformation seed (default: %(default)s)")
    args = ap.parse_args()
    acc = {}
    for i, path in enumerate(list_images(args.src_dir)[: args.limit]):
        img = to_luma(read_image(path))
        for name, out in degradations(img, image_seed(args.seed, i)):
            for level, score in lassim_profile(img, quantize(out), range(5)):
                acc.setdefault((name, level), []).append(score)
    print("degradation,level,mean,std")
    for (name, level), scores in acc.items():
        print(f"{name},{level},{np.mean(scores):.6f},{np.std(scores, ddof=1):.6f}")


if __name__ == "__main__":
    main()
