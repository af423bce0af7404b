"""Slow, straight-line reference implementations used only by the tests.

Nothing here imports from ``lassim``; each routine is written from the
defining formula with explicit loops.
"""

import math

import numpy as np


def mirror(i, n):
    """Reflect index ``i`` into [0, n) without repeating the edge sample."""
    if n == 1:
        return 0
    period = 2 * n - 2
    i = abs(i) % period
    return period - i if i >= n else i


def naive_filter(img, kernel):
    """Full 2-D correlation with the outer-product kernel and mirrored borders."""
    h, w = img.shape
    k = np.asarray(kernel, dtype=float)
    r = len(k) // 2
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for u in range(-r, r + 1):
                for v in range(-r, r + 1):
                    acc += k[u + r] * k[v + r] * img[mirror(y + u, h), mirror(x + v, w)]
            out[y, x] = acc
    return out


def naive_downsample(img, kernel):
    return naive_filter(img, kernel)[::2, ::2]


def naive_upsample(img, target_w, target_h, kernel):
    h, w = img.shape
    stuffed = np.zeros((2 * h, 2 * w))
    for y in range(h):
        for x in range(w):
            stuffed[2 * y, 2 * x] = img[y, x]
    # Each axis gains a factor 2 to undo the zero insertion.
    return 4.0 * naive_filter(stuffed, kernel)[:target_h, :target_w]


def naive_pyramid(img, levels, kernel):
    residuals = []
    current = img
    for _ in range(levels):
        lower = naive_downsample(current, kernel)
        residuals.append(current - naive_upsample(lower, current.shape[1], current.shape[0], kernel))
        current = lower
    return residuals, current


def naive_ssim(a, b, window_size=11, sigma=1.5, k1=0.01, k2=0.03, data_range=255.0, uniform=False):
    """Mean SSIM over every window lying fully inside the images, two-pass moments."""
    r = window_size // 2
    if uniform:
        wts = np.ones((window_size, window_size))
    else:
        wts = np.empty((window_size, window_size))
        for u in range(window_size):
            for v in range(window_size):
                wts[u, v] = math.exp(-((u - r) ** 2 + (v - r) ** 2) / (2 * sigma**2))
    wts /= wts.sum()
    c1 = (k1 * data_range) ** 2
    c2 = (k2 * data_range) ** 2
    h, w = a.shape
    total, count = 0.0, 0
    for y in range(r, h - r):
        for x in range(r, w - r):
            pa = a[y - r : y + r + 1, x - r : x + r + 1]
            pb = b[y - r : y + r + 1, x - r : x + r + 1]
            ma = float(np.sum(wts * pa))
            mb = float(np.sum(wts * pb))
            va = float(np.sum(wts * (pa - ma) ** 2))
            vb = float(np.sum(wts * (pb - mb) ** 2))
            cov = float(np.sum(wts * (pa - ma) * (pb - mb)))
            total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2))
            count += 1
    return total / count


def naive_js(p, q):
    total = 0.0
    for pi, qi in zip(p, q):
        # pi / m with m = (pi + qi) / 2, without forming m.
        if pi > 0:
            total += 0.5 * pi * math.log2(2 * pi / (pi + qi))
        if qi > 0:
            total += 0.5 * qi * math.log2(2 * qi / (pi + qi))
    return total
