"""Straight-line reference for the golden fixture.

Regenerate with `python3 golden.py > golden_seed42_L4.json`. Pure Python,
no numpy; everything is written as direct loops over the definitions.
"""

import json
import math

MASK = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
LEVELS = 4
ALPHA = 100.0
SIZE = 64


def noise(rows, cols, seed):
    out = []
    counter = 0
    for _ in range(rows):
        row = []
        for _ in range(cols):
            counter += 1
            z = (seed + counter * GAMMA) & MASK
            z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
            z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
            z ^= z >> 31
            row.append((z >> 11) / float(1 << 53))
        out.append(row)
    return out


def mirror(i, n):
    # half-sample symmetric: x[-1] = x[0], x[n] = x[n-1]
    while i < 0 or i >= n:
        i = -i - 1 if i < 0 else 2 * n - i - 1
    return i


def at(img, r, c):
    return img[mirror(r, len(img))][mirror(c, len(img[0]))]


def convolve2d(img, taps):
    """taps: list of (dr, dc, weight); out[r][c] = sum w * img[r - dr][c - dc]."""
    rows, cols = len(img), len(img[0])
    return [[sum(w * at(img, r - dr, c - dc) for dr, dc, w in taps) for c in range(cols)] for r in range(rows)]


SOBEL_X = [[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]]


def gradient_magnitude(img):
    gx_taps = [(i - 1, j - 1, SOBEL_X[i][j] / 8.0) for i in range(3) for j in range(3) if SOBEL_X[i][j]]
    gy_taps = [(j - 1, i - 1, SOBEL_X[i][j] / 8.0) for i in range(3) for j in range(3) if SOBEL_X[i][j]]
    gx = convolve2d(img, gx_taps)
    gy = convolve2d(img, gy_taps)
    return [[math.sqrt((a * a + b * b) / 2.0) for a, b in zip(ra, rb)] for ra, rb in zip(gx, gy)]


def haar_level(ll, d):
    lo = [(0, 0.5), (d, 0.5)]
    hi = [(0, 0.5), (d, -0.5)]
    rows, cols = len(ll), len(ll[0])

    # row_filter runs along c, col_filter along r. The c-direction sum is
    # evaluated innermost so coefficients that vanish by mirror symmetry at
    # the border come out as exact zeros (they feed log(c^2) in the entropy).
    def band(row_filter, col_filter):
        return [[sum(wr * sum(wc * at(ll, r - dr, c - dc) for dc, wc in row_filter) for dr, wr in col_filter)
                 for c in range(cols)] for r in range(rows)]
    hh = band(hi, lo)
    vh = band(lo, hi)
    nxt = band(lo, lo)
    return hh, vh, nxt


def peaks(line):
    found = []
    n = len(line)
    i = 1
    while i < n - 1:
        j = i
        while j + 1 < n and line[j + 1] == line[i]:
            j += 1
        if line[i] > line[i - 1] and j + 1 < n and line[j + 1] < line[i]:
            found.append(i)
        i = j + 1 if line[i] > line[i - 1] else i + 1
    return [b - a for a, b in zip(found, found[1:])]


def spatial(band, orientation):
    lines = band if orientation == "H" else [list(col) for col in zip(*band)]
    dist = []
    for line in lines:
        dist.extend(peaks([abs(v) for v in line]))
    if not dist:
        return 0.0, 0.0
    g = sum(dist) / len(dist)
    r = math.sqrt(sum((x - g) ** 2 for x in dist) / len(dist))
    return g, r


def moments(band):
    c = [v for row in band for v in row]
    n = len(c)
    mu = math.fsum(c) / n
    m2 = math.fsum((v - mu) ** 2 for v in c) / n
    m3 = math.fsum((v - mu) ** 3 for v in c) / n
    m4 = math.fsum((v - mu) ** 4 for v in c) / n
    entropy = math.fsum(math.log(v * v) if v != 0 else 0.0 for v in c) / n
    sigma = math.sqrt(m2)
    if sigma < 1e-12:
        return 0.0, 0.0, 0.0, entropy
    return sigma, m4 / m2 ** 2, m3 / sigma ** 3, entropy


def features(img, levels):
    ll = img
    per = {"H": [], "V": []}
    for j in range(1, levels + 1):
        hh, vh, ll = haar_level(ll, 2 ** (j - 1))
        for o, band in (("H", hh), ("V", vh)):
            g, r = spatial(band, o)
            sigma, kurt, skew, entropy = moments(band)
            per[o].append({"orientation": o, "scale": j, "g": g, "r": r, "sigma": sigma,
                           "kurt": kurt, "skew": skew, "entropy": entropy})
    return per["H"] + per["V"]


def domain_sets(img):
    return [{"domain": "I", "subbands": features(img, LEVELS)},
            {"domain": "IGM", "subbands": features(gradient_magnitude(img), LEVELS)}]


def score(ref_sets, syn_sets):
    total = 0.0
    for a, b in zip(ref_sets, syn_sets):
        sa, sb = a["subbands"], b["subbands"]
        d = 0.0
        for key in ("kurt", "sigma", "skew", "entropy"):
            d += sum(abs(x[key] - y[key]) for x, y in zip(sa, sb)) / (2 * LEVELS)
        for key in ("g", "r"):
            for o in ("H", "V"):
                d += max(abs(x[key] - y[key]) for x, y in zip(sa, sb) if x["orientation"] == o) / 2
        total += math.log1p(ALPHA * d)
    return total


if __name__ == "__main__":
    ref = domain_sets(noise(SIZE, SIZE, 42))
    syn = domain_sets(noise(SIZE, SIZE, 43))
    print(json.dumps({"size": SIZE, "levels": LEVELS, "alpha": ALPHA, "reference_seed": 42,
                      "synth_seed": 43, "reference": ref, "synth": syn,
                      "score": score(ref, syn)}, indent=2))
