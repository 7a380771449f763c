"""Independent brute-force reference implementations used by the tests.

Everything here is deliberately naive (per-pixel loops, exhaustive
searches, fixpoint iteration) and shares no code with the package, so a
match between the two is meaningful.
"""

from __future__ import annotations

import math

import numpy as np


def naive_bilateral(img: np.ndarray, sigma_s: float, sigma_r_255: float) -> np.ndarray:
    """Direct double-loop weighted average with Gaussian space/range kernels.

    The window is a square of radius ceil(2*sigma_s) clipped at image
    borders; sigma_r is given on the 0..255 scale and divided by 255.
    """
    radius = math.ceil(2.0 * sigma_s)
    sr = sigma_r_255 / 255.0
    h, w = img.shape
    out = np.empty_like(img)
    for y in range(h):
        for x in range(w):
            num = 0.0
            den = 0.0
            ip = img[y, x]
            for dy in range(-radius, radius + 1):
                qy = y + dy
                if qy < 0 or qy >= h:
                    continue
                for dx in range(-radius, radius + 1):
                    qx = x + dx
                    if qx < 0 or qx >= w:
                        continue
                    iq = img[qy, qx]
                    d = iq - ip
                    wgt = np.exp(
                        (dy * dy + dx * dx) * (-1.0 / (2.0 * sigma_s * sigma_s))
                        + d * d * (-1.0 / (2.0 * sr * sr))
                    )
                    num += wgt * iq
                    den += wgt
            out[y, x] = num / den
    return out


def naive_gaussian_blur(img: np.ndarray, sigma_s: float) -> np.ndarray:
    """Spatial-only Gaussian with the same window and border clipping."""
    radius = math.ceil(2.0 * sigma_s)
    h, w = img.shape
    out = np.empty_like(img)
    for y in range(h):
        for x in range(w):
            num = 0.0
            den = 0.0
            for dy in range(-radius, radius + 1):
                qy = y + dy
                if qy < 0 or qy >= h:
                    continue
                for dx in range(-radius, radius + 1):
                    qx = x + dx
                    if qx < 0 or qx >= w:
                        continue
                    wgt = math.exp(-(dy * dy + dx * dx) / (2.0 * sigma_s * sigma_s))
                    num += wgt * img[qy, qx]
                    den += wgt
            out[y, x] = num / den
    return out


def disk_offsets(radius: int) -> list[tuple[int, int]]:
    return [
        (dy, dx)
        for dy in range(-radius, radius + 1)
        for dx in range(-radius, radius + 1)
        if dy * dy + dx * dx <= radius * radius
    ]


def naive_erode(img: np.ndarray, radius: int) -> np.ndarray:
    """Per-pixel min over the disk neighborhood, clipped at borders."""
    offs = disk_offsets(radius)
    h, w = img.shape
    out = np.empty_like(img)
    for y in range(h):
        for x in range(w):
            best = math.inf
            for dy, dx in offs:
                qy, qx = y + dy, x + dx
                if 0 <= qy < h and 0 <= qx < w and img[qy, qx] < best:
                    best = img[qy, qx]
            out[y, x] = best
    return out


def naive_dilate(img: np.ndarray, radius: int) -> np.ndarray:
    offs = disk_offsets(radius)
    h, w = img.shape
    out = np.empty_like(img)
    for y in range(h):
        for x in range(w):
            best = -math.inf
            for dy, dx in offs:
                qy, qx = y + dy, x + dx
                if 0 <= qy < h and 0 <= qx < w and img[qy, qx] > best:
                    best = img[qy, qx]
            out[y, x] = best
    return out


def naive_bilateral_window(img: np.ndarray, sigma_s: float, sigma_r_255: float) -> np.ndarray:
    """Per-pixel direct evaluation of the filter formula: for every pixel
    the clipped window is extracted and the normalized weighted sum is
    computed in place. Same O(n * w^2) work as naive_bilateral, array
    arithmetic instead of scalar loops."""
    radius = math.ceil(2.0 * sigma_s)
    sr = sigma_r_255 / 255.0
    h, w = img.shape
    ys, xs = np.mgrid[-radius : radius + 1, -radius : radius + 1]
    space = (ys * ys + xs * xs) * (-1.0 / (2.0 * sigma_s * sigma_s))
    inv2sr = -1.0 / (2.0 * sr * sr)
    out = np.empty_like(img)
    for y in range(h):
        for x in range(w):
            y0, y1 = max(0, y - radius), min(h, y + radius + 1)
            x0, x1 = max(0, x - radius), min(w, x + radius + 1)
            win = img[y0:y1, x0:x1]
            sp = space[
                radius - (y - y0) : radius + (y1 - y), radius - (x - x0) : radius + (x1 - x)
            ]
            d = win - img[y, x]
            wgt = np.exp(sp + d * d * inv2sr)
            out[y, x] = float((wgt * win).sum() / wgt.sum())
    return out


def _dilate8(img: np.ndarray) -> np.ndarray:
    """One 3x3 max step with clipped borders, by shifted maxima."""
    h, w = img.shape
    padded = np.full((h + 2, w + 2), -np.inf)
    padded[1:-1, 1:-1] = img
    out = img.copy()
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            np.maximum(out, padded[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w], out=out)
    return out


def naive_reconstruct(marker: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Fixpoint of 8-connected geodesic dilation clamped under the mask."""
    cur = marker.copy()
    while True:
        nxt = np.minimum(_dilate8(cur), mask)
        if np.array_equal(nxt, cur):
            return cur
        cur = nxt


def _neighbors8(y: int, x: int, h: int, w: int):
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dy == 0 and dx == 0:
                continue
            qy, qx = y + dy, x + dx
            if 0 <= qy < h and 0 <= qx < w:
                yield qy, qx


def naive_regional_maxima(img: np.ndarray) -> np.ndarray:
    """Exhaustive plateau check: flood each equal-value 8-plateau and
    verify every exterior neighbor is strictly lower."""
    h, w = img.shape
    seen = np.zeros((h, w), dtype=bool)
    out = np.zeros((h, w), dtype=bool)
    for sy in range(h):
        for sx in range(w):
            if seen[sy, sx]:
                continue
            level = img[sy, sx]
            stack = [(sy, sx)]
            seen[sy, sx] = True
            plateau = []
            is_max = True
            while stack:
                y, x = stack.pop()
                plateau.append((y, x))
                for qy, qx in _neighbors8(y, x, h, w):
                    if img[qy, qx] == level:
                        if not seen[qy, qx]:
                            seen[qy, qx] = True
                            stack.append((qy, qx))
                    elif img[qy, qx] > level:
                        is_max = False
            if is_max:
                for y, x in plateau:
                    out[y, x] = True
    return out


def count_components(mask: np.ndarray, connectivity: int = 8) -> int:
    """Flood-fill component count over True pixels."""
    h, w = mask.shape
    seen = np.zeros((h, w), dtype=bool)
    count = 0
    if connectivity == 8:
        steps = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]
    else:
        steps = [(-1, 0), (1, 0), (0, -1), (0, 1)]
    for sy in range(h):
        for sx in range(w):
            if not mask[sy, sx] or seen[sy, sx]:
                continue
            count += 1
            stack = [(sy, sx)]
            seen[sy, sx] = True
            while stack:
                y, x = stack.pop()
                for dy, dx in steps:
                    qy, qx = y + dy, x + dx
                    if 0 <= qy < h and 0 <= qx < w and mask[qy, qx] and not seen[qy, qx]:
                        seen[qy, qx] = True
                        stack.append((qy, qx))
    return count


def reachable(mask: np.ndarray, start: tuple[int, int], goal: tuple[int, int]) -> bool:
    """4-connected flood-fill reachability over True pixels."""
    h, w = mask.shape
    if not mask[start] or not mask[goal]:
        return False
    seen = np.zeros((h, w), dtype=bool)
    stack = [start]
    seen[start] = True
    while stack:
        y, x = stack.pop()
        if (y, x) == goal:
            return True
        for dy, dx in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            qy, qx = y + dy, x + dx
            if 0 <= qy < h and 0 <= qx < w and mask[qy, qx] and not seen[qy, qx]:
                seen[qy, qx] = True
                stack.append((qy, qx))
    return False


def naive_sobel_magnitude(img: np.ndarray) -> np.ndarray:
    """3x3 Sobel with out-of-range samples clamped to the nearest pixel,
    paired-difference form, then sqrt(gx^2 + gy^2) / 8."""
    h, w = img.shape

    def s(y, x):
        return img[min(max(y, 0), h - 1), min(max(x, 0), w - 1)]

    out = np.empty_like(img)
    for y in range(h):
        for x in range(w):
            gx = (
                (s(y - 1, x + 1) - s(y - 1, x - 1))
                + 2.0 * (s(y, x + 1) - s(y, x - 1))
                + (s(y + 1, x + 1) - s(y + 1, x - 1))
            )
            gy = (
                (s(y + 1, x - 1) - s(y - 1, x - 1))
                + 2.0 * (s(y + 1, x) - s(y - 1, x))
                + (s(y + 1, x + 1) - s(y - 1, x + 1))
            )
            gxs = gx / 8.0
            gys = gy / 8.0
            out[y, x] = math.sqrt(gxs * gxs + gys * gys)
    return out


def naive_edt(foreground: np.ndarray) -> np.ndarray:
    """Exact Euclidean distance to the nearest True pixel, by exhaustion."""
    h, w = foreground.shape
    pts = np.argwhere(foreground)
    out = np.full((h, w), np.inf)
    for y in range(h):
        for x in range(w):
            if foreground[y, x]:
                out[y, x] = 0.0
                continue
            d2 = ((pts[:, 0] - y) ** 2 + (pts[:, 1] - x) ** 2).min() if len(pts) else np.inf
            out[y, x] = math.sqrt(float(d2))
    return out


def naive_otsu(img: np.ndarray) -> int:
    """Exhaustive search for the 8-bit level maximizing between-class
    variance; lowest level wins ties. Returns the level t; the split is
    quantized > t."""
    q = np.floor(img * 255.0 + 0.5).astype(np.int64)
    hist = np.bincount(q.ravel(), minlength=256).astype(np.float64)
    total = hist.sum()
    best_t, best_var = -1, -1.0
    for t in range(256):
        w0 = hist[: t + 1].sum()
        w1 = total - w0
        if w0 == 0 or w1 == 0:
            continue
        mu0 = (hist[: t + 1] * np.arange(t + 1)).sum() / w0
        mu1 = (hist[t + 1 :] * np.arange(t + 1, 256)).sum() / w1
        var = w0 * w1 * (mu0 - mu1) ** 2
        if var > best_var:
            best_var = var
            best_t = t
    return best_t


def brute_hull(points: np.ndarray) -> np.ndarray:
    """Gift-wrapping convex hull on integer coordinates (exact arithmetic).

    Returns hull vertices in counter-clockwise order; collinear boundary
    points are skipped (farthest wrap point wins).
    """
    pts = [tuple(int(c) for c in p) for p in points]
    pts = sorted(set(pts))
    if len(pts) == 1:
        return np.array(pts)
    start = pts[0]
    hull = [start]
    cur = start
    while True:
        cand = pts[0] if pts[0] != cur else pts[1]
        for p in pts:
            if p == cur:
                continue
            cross = (cand[0] - cur[0]) * (p[1] - cur[1]) - (cand[1] - cur[1]) * (
                p[0] - cur[0]
            )
            if cross > 0:
                cand = p
            elif cross == 0:
                # collinear: keep the farther point
                d_c = (cand[0] - cur[0]) ** 2 + (cand[1] - cur[1]) ** 2
                d_p = (p[0] - cur[0]) ** 2 + (p[1] - cur[1]) ** 2
                if d_p > d_c:
                    cand = p
        if cand == start:
            break
        hull.append(cand)
        cur = cand
        if len(hull) > len(pts) + 1:
            raise RuntimeError("gift wrapping failed to terminate")
    return np.array(hull)


def shoelace_area(vertices: np.ndarray) -> float:
    if len(vertices) < 3:
        return 0.0
    x = vertices[:, 0].astype(np.int64)
    y = vertices[:, 1].astype(np.int64)
    s = np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))
    return abs(float(s)) / 2.0


def brute_hull_area(points: np.ndarray) -> float:
    return shoelace_area(brute_hull(points))


def hull_boundary_points(vertices: np.ndarray) -> int:
    """Lattice points on the hull boundary: sum of gcd of edge deltas."""
    n = len(vertices)
    if n == 1:
        return 1
    if n == 2:
        return math.gcd(
            abs(int(vertices[1][0] - vertices[0][0])),
            abs(int(vertices[1][1] - vertices[0][1])),
        ) + 1
    total = 0
    for i in range(n):
        a = vertices[i]
        b = vertices[(i + 1) % n]
        total += math.gcd(abs(int(b[0] - a[0])), abs(int(b[1] - a[1])))
    return total


def pick_corrected_ratio(points: np.ndarray) -> float:
    """Convexity ratio oracle: pixel count over hull area with the
    lattice-point (Pick) correction."""
    hull = brute_hull(points)
    area = shoelace_area(hull)
    if area < 1.0:
        return 1.0
    corrected = area + hull_boundary_points(hull) / 2.0 + 1.0
    return min(1.0, len(points) / corrected)
