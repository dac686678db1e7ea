"""Regenerates checker.pgm and its 3x3, sigma=1 Gaussian blur oracle.

Every output pixel is sum(w * I) / sum(w) over the taps that fall inside the
image (out-of-image taps are dropped). Values are written unquantized, in
[0, 1], one image row per line.
"""
import math
import pathlib

HERE = pathlib.Path(__file__).parent
W, H, MAXVAL = 12, 10, 255


def pixel(r, c):
    if 3 <= r <= 6 and 4 <= c <= 8:
        return 255
    if (r + c) % 4 == 0:
        return 200
    return (17 * r + 9 * c) % 120


image = [[pixel(r, c) for c in range(W)] for r in range(H)]
with open(HERE / "checker.pgm", "w") as f:
    f.write(f"P2\n# test pattern\n{W} {H}\n{MAXVAL}\n")
    for row in image:
        f.write(" ".join(str(v) for v in row) + "\n")

taps = {(dr, dc): math.exp(-(dr * dr + dc * dc) / 2.0) for dr in (-1, 0, 1) for dc in (-1, 0, 1)}
with open(HERE / "checker_blur_sigma1.txt", "w") as f:
    for r in range(H):
        vals = []
        for c in range(W):
            num = den = 0.0
            for (dr, dc), t in taps.items():
                rr, cc = r + dr, c + dc
                if 0 <= rr < H and 0 <= cc < W:
                    num += t * image[rr][cc] / MAXVAL
                    den += t
            vals.append(repr(num / den))
        f.write(" ".join(vals) + "\n")
